use rand::Rng;

use super::modular::pow;
use super::{PadicScalar, PrecisionContext, QuadExtScalar};
use crate::error::{AflError, Result};

/// Where a sampled element must live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Field {
    #[default]
    F,
    F0,
    TauF0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleSpec {
    pub field: Field,
    /// Exact valuation; when absent one is drawn from `min_valuation..min_valuation+4`.
    pub valuation: Option<i32>,
    pub min_valuation: i32,
    pub unit: bool,
}

impl SampleSpec {
    pub fn unit_in(field: Field) -> Self {
        SampleSpec { field, valuation: Some(0), min_valuation: 0, unit: true }
    }

    pub fn with_valuation(field: Field, v: i32) -> Self {
        SampleSpec { field, valuation: Some(v), min_valuation: v.min(0), unit: false }
    }

    pub fn integral(field: Field) -> Self {
        SampleSpec { field, valuation: None, min_valuation: 0, unit: false }
    }
}

fn target_valuation<R: Rng>(spec: &SampleSpec, rng: &mut R) -> Result<i32> {
    let v = match spec.valuation {
        Some(v) => v,
        None if spec.unit => 0,
        None => rng.gen_range(spec.min_valuation..spec.min_valuation + 4),
    };
    if v < spec.min_valuation {
        return Err(AflError::UnsatisfiableConstraint("valuation below the requested minimum"));
    }
    if spec.unit && v != 0 {
        return Err(AflError::UnsatisfiableConstraint("a unit has valuation 0"));
    }
    Ok(v)
}

fn digits<R: Rng>(ctx: &PrecisionContext, rng: &mut R) -> u128 {
    rng.gen_range(0..pow(ctx.p(), ctx.precision()))
}

/// Samples an element of `F0` with the requested valuation profile.
pub fn sample_f0<R: Rng>(ctx: &PrecisionContext, spec: &SampleSpec, rng: &mut R) -> Result<PadicScalar> {
    if spec.field != Field::F0 {
        return Err(AflError::UnsatisfiableConstraint("sample_f0 needs an F0 field constraint"));
    }
    let v = target_valuation(spec, rng)?;
    let p = ctx.p() as u128;
    let mut u = digits(ctx, rng);
    if u % p == 0 {
        u += 1;
    }
    Ok(ctx.from_unit(v, u))
}

/// Samples an element of `F`, `F0` or `τF0` with the requested valuation.
pub fn sample<R: Rng>(ctx: &PrecisionContext, spec: &SampleSpec, rng: &mut R) -> Result<QuadExtScalar> {
    match spec.field {
        Field::F0 => Ok(ctx.embed(sample_f0(ctx, spec, rng)?)),
        Field::TauF0 => {
            let inner = SampleSpec { field: Field::F0, ..*spec };
            Ok(ctx.quad(ctx.zero(), sample_f0(ctx, &inner, rng)?))
        }
        Field::F => {
            let v = target_valuation(spec, rng)?;
            let p = ctx.p() as u128;
            loop {
                let (r, i) = (digits(ctx, rng), digits(ctx, rng));
                if r % p == 0 && i % p == 0 {
                    continue;
                }
                let part = |d: u128| if d == 0 { ctx.zero() } else { ctx.from_unit(v, d) };
                return Ok(ctx.quad(part(r), part(i)));
            }
        }
    }
}
