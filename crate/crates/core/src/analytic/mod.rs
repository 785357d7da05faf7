//! Canonical `n = 3` instances, their matching element `y ∈ 𝔰`, and the
//! derived orbital integral computed from closed forms or by the oracle.

mod closed;

pub use closed::{
    alpha_closed, case_b_parts_closed, case_b_parts_direct, derived_closed, pair_sum_printed, sigma_case_a,
    sigma_case_b, sigma_closed, sigma_closed_printed, sigma_direct, Case, CaseBParts, Invariants,
};
pub(crate) use closed::{geometric_sum, qpow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AflError, Result};
use crate::matrix::{is_regular_semisimple, membership, MatrixF, Space};
use crate::oracle::{enumerate_and_tally, OracleConfig, OracleResult, OracleWindow, Parity, Side};
use crate::padic::{PrecisionContext, QuadExtScalar, Valuation};

const UNIT_DIGITS: u32 = 6;

/// `x = [[-a, b, j1], [πb̄, a, j2], [πj̄1, -j̄2, 0]]` with `j = (π^m u, 0)`
/// for odd `v(j)` and `j = (0, π^m u)` for even `v(j)`. `a ∈ τF0` may be
/// zero; `b` must not be.
#[derive(Debug, Clone)]
pub struct CanonicalX {
    ctx: PrecisionContext,
    parity: Parity,
    m: i32,
    a: QuadExtScalar,
    b: QuadExtScalar,
    j_unit: QuadExtScalar,
}

fn finite_val(x: &QuadExtScalar) -> Result<i32> {
    match x.valuation() {
        Valuation::Finite(v) => Ok(v),
        _ => Err(AflError::PrecisionExhausted("valuation undetermined")),
    }
}

/// Working precision that comfortably covers the oracle window.
pub fn default_precision(p: u32, m: i32, va: Option<i32>, vb: i32) -> u32 {
    let l = (2 * vb + 1).max(1);
    let k = va.map_or(0, |v| 2 * v.max(0));
    let want = (2 * (l + k + 2 * m.max(0)) + 16) as u32;
    want.min(PrecisionContext::max_precision(p))
}

impl CanonicalX {
    pub fn new(ctx: &PrecisionContext, parity: Parity, m: i32, a: QuadExtScalar, b: QuadExtScalar, j_unit: QuadExtScalar) -> Result<Self> {
        if m < 0 {
            return Err(AflError::InvalidInput("m must be non-negative"));
        }
        if b.is_zero_at_precision() {
            return Err(AflError::DegenerateParams("b = 0"));
        }
        if !a.re().is_zero_at_precision() {
            return Err(AflError::InvalidInput("a must lie in τF0"));
        }
        if !j_unit.is_unit()? {
            return Err(AflError::InvalidInput("j unit must be a unit"));
        }
        finite_val(&b)?;
        if !a.is_exact_zero() {
            finite_val(&a)?;
        }
        Ok(CanonicalX { ctx: *ctx, parity, m, a, b, j_unit })
    }

    /// Samples `a = τ π^{va} u_a` (or `a = 0` for `va = None`) and
    /// `b = π^{vb} u_b`. The units are drawn from `seed` as integers below
    /// `p^6`, so the instance does not depend on the working precision.
    pub fn from_valuations(ctx: &PrecisionContext, parity: Parity, m: i32, va: Option<i32>, vb: i32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ctx.p() as u128;
        let bound = p.pow(UNIT_DIGITS);
        let mut digit = |unit: bool| loop {
            let d = rng.gen_range(0..bound);
            if !unit || d % p != 0 {
                return d;
            }
        };
        let part = |v: i32, d: u128| if d == 0 { ctx.zero() } else { ctx.from_unit(v, d) };
        let a = match va {
            None => ctx.qzero(),
            Some(v) => ctx.quad(ctx.zero(), ctx.from_unit(v, digit(true))),
        };
        let b = loop {
            let (r, i) = (digit(false), digit(false));
            if r % p != 0 || i % p != 0 {
                break ctx.quad(part(vb, r), part(vb, i));
            }
        };
        Self::new(ctx, parity, m, a, b, ctx.qone())
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn a(&self) -> QuadExtScalar {
        self.a
    }

    pub fn b(&self) -> QuadExtScalar {
        self.b
    }

    pub fn j_unit(&self) -> QuadExtScalar {
        self.j_unit
    }

    pub fn vb(&self) -> i32 {
        finite_val(&self.b).expect("checked at construction")
    }

    pub fn va(&self) -> Option<i32> {
        if self.a.is_exact_zero() {
            None
        } else {
            Some(finite_val(&self.a).expect("checked at construction"))
        }
    }

    /// `l = 2v(b) + 1`.
    pub fn l(&self) -> i32 {
        2 * self.vb() + 1
    }

    /// `k = 2v(a)`, `None` for `a = 0`.
    pub fn k(&self) -> Option<i32> {
        self.va().map(|v| 2 * v)
    }

    pub fn vj(&self) -> i32 {
        self.parity.vj(self.m)
    }

    pub fn is_integral(&self) -> bool {
        self.vb() >= 0 && self.va().map_or(true, |v| v >= 0)
    }

    /// Only defined for integral instances.
    pub fn invariants(&self) -> Result<Invariants> {
        if !self.is_integral() {
            return Err(AflError::InvalidInput("invariants need an integral instance"));
        }
        Invariants::new(self.ctx.q(), self.parity, self.m, self.l(), self.k())
    }

    pub fn default_window(&self) -> OracleWindow {
        OracleWindow::canonical(self.vj(), self.l(), self.k().map(|k| k.max(0)))
    }

    pub fn build_x(&self) -> MatrixF {
        let c = &self.ctx;
        let z = c.qzero();
        let (a, b, u) = (self.a, self.b, self.j_unit);
        let pi = c.qpi_pow(1);
        let pm = c.qpi_pow(self.m);
        let rows = match self.parity {
            Parity::Odd => vec![
                vec![-a, b, pm * u],
                vec![pi * b.conj(), a, z],
                vec![pi * pm * u.conj(), z, z],
            ],
            Parity::Even => vec![
                vec![-a, b, z],
                vec![pi * b.conj(), a, pm * u],
                vec![z, -(pm * u.conj()), z],
            ],
        };
        MatrixF::from_rows(c, rows).expect("square")
    }

    /// The matching element in `𝔰`, equal to `D x D⁻¹` for the diagonal
    /// matrix returned by [`CanonicalX::conjugator`].
    pub fn build_match_y(&self) -> Result<MatrixF> {
        let c = &self.ctx;
        let z = c.qzero();
        let tau = c.tau();
        let tinv = tau.inverse()?;
        let pi = c.qpi_pow(1);
        let pm = c.qpi_pow(self.m);
        let a = self.a;
        let nb = c.embed(self.b.norm());
        let nu = c.embed(self.j_unit.norm());
        let rows = match self.parity {
            Parity::Odd => vec![
                vec![-a, tau * pi * nb, tau * pm],
                vec![tinv, a, z],
                vec![tinv * pi * pm * nu, z, z],
            ],
            Parity::Even => vec![
                vec![-a, -tinv, z],
                vec![-(tau * pi * nb), a, -(tau * pm)],
                vec![z, tinv * pm * nu, z],
            ],
        };
        MatrixF::from_rows(c, rows)
    }

    /// `D` with `y = D x D⁻¹`.
    pub fn conjugator(&self) -> Result<MatrixF> {
        let c = &self.ctx;
        let (tau, b, u) = (c.tau(), self.b, self.j_unit);
        let entries = match self.parity {
            Parity::Odd => [tau.checked_div(&u)?, (c.qpi_pow(1) * b.conj() * u).inverse()?, c.qone()],
            Parity::Even => [(b * u).inverse()?, -tau.checked_div(&u)?, c.qone()],
        };
        Ok(MatrixF::diag(c, &entries))
    }
}

/// How the analytic side is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Closed,
    Oracle,
}

/// `Σ_{s=0}^{v(j)} σ(s)`, or zero for non-integral instances.
pub fn analytic_closed(x: &CanonicalX) -> Result<i64> {
    if !x.is_integral() {
        return Ok(0);
    }
    Ok(derived_closed(&x.invariants()?))
}

/// Runs the oracle on the matching `y` over the default window.
pub fn analytic_oracle(x: &CanonicalX, config: &OracleConfig) -> Result<OracleResult> {
    let y = x.build_match_y()?;
    enumerate_and_tally(&y, Side::Lie, &x.default_window(), x.parity, x.m, config)
}

/// The derived orbital integral `dO` of the matching `y` (its transfer
/// factor is `+1`, so no sign correction is needed).
pub fn analytic_side(x: &CanonicalX, mode: Mode) -> Result<i64> {
    match mode {
        Mode::Closed => analytic_closed(x),
        Mode::Oracle => Ok(analytic_oracle(x, &OracleConfig::default())?.tally.derived_value()),
    }
}

/// Result of normalizing a raw element of `𝔲`.
#[derive(Debug, Clone)]
pub struct RawInstance {
    /// Present whenever `m >= 0`, integral or not.
    pub params: Option<CanonicalX>,
    pub integral: bool,
}

/// Brings a raw `x ∈ 𝔲` to canonical shape: subtracts `µ = diag(µ1, µ1, d)`
/// with `µ1 = tr(A)/2` so that `d = 0` and `tr x = 0`, then reads off `j`.
/// Only `j` of shape `(j1, 0)` or `(0, j2)` is accepted.
pub fn normalize_raw(x: &MatrixF) -> Result<RawInstance> {
    let ctx = *x.ctx();
    if x.n() != 3 {
        return Err(AflError::DimensionMismatch);
    }
    if !membership(x, Space::LieU)? {
        return Err(AflError::InvalidInput("raw element is not in the unitary Lie algebra"));
    }
    if !is_regular_semisimple(x)? {
        return Err(AflError::NotRegularSemisimple);
    }
    let integral = x.is_integral()?;
    let half = ctx.qint(2).inverse()?;
    let mu1 = (x.get(0, 0) + x.get(1, 1)) * half;
    let mu = MatrixF::diag(&ctx, &[mu1, mu1, x.get(2, 2)]);
    let x0 = x.sub(&mu);
    let (j1, j2) = (x0.get(0, 2), x0.get(1, 2));
    let (parity, j) = match (j1.is_exact_zero(), j2.is_exact_zero()) {
        (false, true) => (Parity::Odd, j1),
        (true, false) => (Parity::Even, j2),
        _ => return Err(AflError::InvalidInput("j must have exactly one nonzero entry")),
    };
    let m = finite_val(&j)?;
    let params = if m >= 0 {
        let u = j.shift(-m);
        Some(CanonicalX::new(&ctx, parity, m, x0.get(1, 1), x0.get(0, 1), u)?)
    } else {
        None
    };
    Ok(RawInstance { params, integral })
}

/// The analytic side of a raw element: zero when it is not integral.
pub fn analytic_side_raw(x: &MatrixF, mode: Mode) -> Result<i64> {
    let raw = normalize_raw(x)?;
    match (raw.integral, raw.params) {
        (true, Some(p)) => analytic_side(&p, mode),
        (false, Some(p)) if mode == Mode::Oracle => analytic_side(&p, mode),
        _ => Ok(0),
    }
}
