//! Cayley transforms `x ↦ -λ(κ+x)(κ-x)⁻¹` between the Lie-algebra and
//! group sides, and the residue searches that make them integral.

use crate::error::{AflError, Result};
use serde::Serialize;

use crate::matrix::{membership, solve_in_powers, transfer_factor_big_omega, transfer_factor_omega, MatrixF, Space};
use crate::oracle::{integral_cosets, OracleConfig, OracleWindow, OrbitalTally, Parity};
use crate::padic::{PadicScalar, PrecisionContext, QuadExtScalar};

/// A validated pair `(λ, κ)`: `λ` of norm one and `κ` a unit of `F0`.
#[derive(Debug, Clone, Copy)]
pub struct CayleyParams {
    lambda: QuadExtScalar,
    kappa: PadicScalar,
}

impl CayleyParams {
    pub fn new(ctx: &PrecisionContext, lambda: QuadExtScalar, kappa: PadicScalar) -> Result<Self> {
        if !lambda.norm().eq_at_precision(&ctx.one())? {
            return Err(AflError::LambdaNotNormOne);
        }
        if !kappa.is_unit()? {
            return Err(AflError::KappaNotUnit);
        }
        Ok(CayleyParams { lambda, kappa })
    }

    pub fn lambda(&self) -> QuadExtScalar {
        self.lambda
    }

    pub fn kappa(&self) -> PadicScalar {
        self.kappa
    }

    pub fn forward(&self, x: &MatrixF) -> Result<MatrixF> {
        cayley(x, &self.lambda, &x.ctx().embed(self.kappa))
    }

    pub fn backward(&self, y: &MatrixF) -> Result<MatrixF> {
        cayley(y, &y.ctx().embed(self.kappa), &self.lambda)
    }
}

/// `-λ(κ+x)(κ-x)⁻¹`; the inverse transform is `cayley(·, κ, λ)`.
pub fn cayley(x: &MatrixF, lambda: &QuadExtScalar, kappa: &QuadExtScalar) -> Result<MatrixF> {
    let ctx = x.ctx();
    let k = MatrixF::scalar(ctx, x.n(), *kappa);
    let diff = k.sub(x);
    // A determinant that vanishes to working precision counts as on the divisor.
    if diff.det()?.is_zero_at_precision() {
        return Err(AflError::OnDivisor);
    }
    let inv = diff.inverse()?;
    Ok(k.add(x).mul(&inv).scale(-*lambda))
}

/// `c⁻¹_λ(γ) = cayley(γ, 1, λ)`, the transform that takes `S` back to `𝔰`.
pub fn to_lie(gamma: &MatrixF, lambda: &QuadExtScalar) -> Result<MatrixF> {
    cayley(gamma, &gamma.ctx().qone(), lambda)
}

fn require_integral_charpoly(x: &MatrixF) -> Result<()> {
    for c in x.charpoly()? {
        if !c.is_integral()? {
            return Err(AflError::NonIntegralCharpoly);
        }
    }
    Ok(())
}

/// First residue `κ ∈ {1, ..., p-1}` with `det(κ - x)` a unit.
pub fn find_kappa(x: &MatrixF) -> Result<PadicScalar> {
    require_integral_charpoly(x)?;
    let ctx = x.ctx();
    for r in 1..ctx.p() as i64 {
        let d = MatrixF::scalar(ctx, x.n(), ctx.qint(r)).sub(x).det()?;
        if d.is_unit()? {
            return Ok(ctx.int(r));
        }
    }
    Err(AflError::NoUnitKappa)
}

/// Representatives `c/c̄` of the `q+1` norm-one residue classes, starting with 1.
pub fn norm_one_residues(ctx: &PrecisionContext) -> Result<Vec<QuadExtScalar>> {
    let mut out = vec![ctx.qone()];
    for j in 0..ctx.p() as i64 {
        let c = ctx.quad(ctx.int(j), ctx.one());
        out.push(c.checked_div(&c.conj())?);
    }
    Ok(out)
}

/// First norm-one residue `λ` with `det(λ - γ)` a unit.
pub fn find_lambda(gamma: &MatrixF) -> Result<QuadExtScalar> {
    require_integral_charpoly(gamma)?;
    let ctx = gamma.ctx();
    for lambda in norm_one_residues(ctx)? {
        let d = MatrixF::scalar(ctx, gamma.n(), lambda).sub(gamma).det()?;
        if d.is_unit()? {
            return Ok(lambda);
        }
    }
    Err(AflError::NoUnitLambda)
}

fn integral_combination(x: &MatrixF, target: &MatrixF) -> Result<bool> {
    match solve_in_powers(x, target)? {
        None => Ok(false),
        Some(coeffs) => {
            for c in coeffs {
                if !c.is_integral()? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Checks `O_F[x] = O_F[c_κ(x)]` by expressing each generator as an
/// integral polynomial in the other.
pub fn verify_order_equality(x: &MatrixF, kappa: &PadicScalar) -> Result<bool> {
    let ctx = x.ctx();
    let c = cayley(x, &ctx.qone(), &ctx.embed(*kappa))?;
    Ok(integral_combination(x, &c)? && integral_combination(&c, x)?)
}

/// Outcome of comparing the group-side element `γ` with its Lie-side
/// transform `c⁻¹_λ(γ)` coset by coset.
#[derive(Debug, Clone, Serialize)]
pub struct CorrespondReport {
    pub omega_group: i8,
    pub omega_lie: i8,
    /// Integral cosets found for each side.
    pub cosets_group: usize,
    pub cosets_lie: usize,
    /// Cosets integral for exactly one of the two elements.
    pub mismatched_cosets: usize,
    pub tally_group: OrbitalTally,
    pub tally_lie: OrbitalTally,
}

impl CorrespondReport {
    pub fn transfer_factors_agree(&self) -> bool {
        self.omega_group == self.omega_lie
    }

    pub fn tallies_agree(&self) -> bool {
        self.tally_group == self.tally_lie
    }

    pub fn passed(&self) -> bool {
        self.transfer_factors_agree() && self.mismatched_cosets == 0 && self.tallies_agree()
    }
}

fn tally_of(cosets: &[crate::oracle::CosetRep], m: i32) -> OrbitalTally {
    let mut tally = OrbitalTally::default();
    for c in cosets {
        *tally.counts.entry(c.det_valuation(m)).or_insert(0) += 1;
    }
    tally
}

/// Compares `γ ∈ S` with `c⁻¹_λ(γ) ∈ 𝔰`: transfer factors, the set of
/// integral cosets in `window`, and the resulting tallies. The cosets are
/// parametrized by the triangular shape of `parity` and the offset `m`.
pub fn verify_correspond(
    gamma: &MatrixF,
    lambda: &QuadExtScalar,
    window: &OracleWindow,
    parity: Parity,
    m: i32,
    config: &OracleConfig,
) -> Result<CorrespondReport> {
    if gamma.n() != 3 {
        return Err(AflError::DimensionMismatch);
    }
    if !membership(gamma, Space::S)? {
        return Err(AflError::InvalidInput("gamma is not in the symmetric space"));
    }
    let lie = to_lie(gamma, lambda)?;
    let group_cosets = integral_cosets(gamma, window, parity, m, config)?;
    let lie_cosets = integral_cosets(&lie, window, parity, m, config)?;
    let lie_set: std::collections::BTreeSet<_> = lie_cosets.iter().collect();
    let group_set: std::collections::BTreeSet<_> = group_cosets.iter().collect();
    let mismatched_cosets = group_set.symmetric_difference(&lie_set).count();
    Ok(CorrespondReport {
        omega_group: transfer_factor_big_omega(gamma)?,
        omega_lie: transfer_factor_omega(&lie)?,
        cosets_group: group_cosets.len(),
        cosets_lie: lie_cosets.len(),
        mismatched_cosets,
        tally_group: tally_of(&group_cosets, m),
        tally_lie: tally_of(&lie_cosets, m),
    })
}
