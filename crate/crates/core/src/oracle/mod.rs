//! Brute-force orbital integrals: enumerate coset representatives
//! `h = π^σ h'(⋆)` of `GL_2(O)\GL_2(F0)` in a finite window and count those
//! with `diag(h,1) y diag(h,1)⁻¹` integral.

mod lift;
mod poly;
mod quadratic;
mod scan;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{AflError, Result};
use crate::matrix::{membership, MatrixF, Space};
use crate::padic::{PadicScalar, PrecisionContext};

pub use poly::{s_of, sigma_of, unscaled_rep};
pub use quadratic::{count_quadratic_solutions, count_quadratic_solutions_exhaustive, QuadraticCondition};

use poly::{star_scalar, StarPolynomial};

/// Parity of `v(j)`; selects the shape of the coset representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn vj(self, m: i32) -> i32 {
        match self {
            Parity::Odd => 2 * m + 1,
            Parity::Even => 2 * m,
        }
    }

    /// `v(det h) = 2m - 2s + t + weight`.
    pub fn det_weight(self) -> i32 {
        match self {
            Parity::Odd => 2,
            Parity::Even => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lie,
    Group,
}

/// How the counts for one `t` were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Quadratic,
    Lifting,
}

/// A coset representative `(s, t, ⋆)` with `⋆ = π^{-margin} x`,
/// `x ∈ [0, p^{t+margin})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetRep {
    pub parity: Parity,
    pub s: i32,
    pub t: i32,
    pub x: u128,
    pub margin: u32,
}

impl CosetRep {
    pub fn star(&self, ctx: &PrecisionContext) -> PadicScalar {
        star_scalar(ctx, self.x, self.margin)
    }

    pub fn sigma(&self, m: i32) -> i32 {
        sigma_of(self.parity, m, self.s)
    }

    pub fn det_valuation(&self, m: i32) -> i32 {
        2 * self.sigma(m) + self.t
    }

    /// The 3×3 matrix `diag(π^σ h'(⋆), 1)` and its inverse.
    pub fn matrices(&self, ctx: &PrecisionContext, m: i32) -> (MatrixF, MatrixF) {
        let (h, hinv) = unscaled_rep(ctx, self.parity, self.t, self.star(ctx));
        let sigma = self.sigma(m);
        let scale = |mat: &MatrixF, k: i32| {
            let mut d = MatrixF::identity(ctx, 3);
            d.set(0, 0, ctx.qpi_pow(k));
            d.set(1, 1, ctx.qpi_pow(k));
            d.mul(mat)
        };
        (scale(&h, sigma), hinv.mul(&scale(&MatrixF::identity(ctx, 3), -sigma)))
    }

    /// Whether `h y h⁻¹` is integral, by direct conjugation.
    pub fn conjugate_is_integral(&self, y: &MatrixF, m: i32) -> Result<bool> {
        let (h, hinv) = self.matrices(y.ctx(), m);
        h.mul(y).mul(&hinv).is_integral()
    }
}

/// The finite region of `(s, t, ⋆)` that is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleWindow {
    pub s_min: i32,
    pub s_max: i32,
    pub t_min: i32,
    pub t_max: i32,
    /// Stars range over `π^{-margin} O / π^t O`.
    pub star_margin: u32,
}

impl OracleWindow {
    /// `s ∈ [-2, v(j)+2]`, `t ∈ [0, l + k/2 + v(j) + 4]` (`k/2` read as 0 when infinite).
    pub fn canonical(vj: i32, l: i32, k: Option<i32>) -> Self {
        OracleWindow {
            s_min: -2,
            s_max: vj + 2,
            t_min: 0,
            t_max: (l + k.unwrap_or(0) / 2 + vj + 4).max(1),
            star_margin: 0,
        }
    }

    /// Also admits `t >= -margin` and stars with valuation down to `-margin`.
    pub fn widened(self, margin: u32) -> Self {
        OracleWindow { t_min: -(margin as i32), star_margin: margin, ..self }
    }

    fn sigma_range(&self, parity: Parity, m: i32) -> (i32, i32) {
        let a = sigma_of(parity, m, self.s_min);
        let b = sigma_of(parity, m, self.s_max);
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Exhaustive enumeration is used while `p^{t+margin}` stays at or below this.
    pub enumeration_limit: u64,
    /// Forces one method for every `t` (testing aid).
    pub force: Option<Method>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { enumeration_limit: 1_000_000, force: None }
    }
}

/// `N_v`: number of integral cosets with `v(det h) = v`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OrbitalTally {
    pub counts: BTreeMap<i32, u64>,
}

impl OrbitalTally {
    pub fn is_empty(&self) -> bool {
        self.counts.values().all(|c| *c == 0)
    }

    /// `Σ_v (-1)^{v+1} v N_v`, the derivative at `s = 0`.
    pub fn derived_value(&self) -> i64 {
        self.counts
            .iter()
            .map(|(&v, &n)| {
                let sign = if v.rem_euclid(2) == 0 { -1 } else { 1 };
                sign * v as i64 * n as i64
            })
            .sum()
    }

    /// Value of `Σ_v N_v (-1)^v q^{-vs}` at `s = 0`.
    pub fn value_at_zero(&self) -> i64 {
        self.counts
            .iter()
            .map(|(&v, &n)| if v.rem_euclid(2) == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub tally: OrbitalTally,
    /// `α(s, t)` over the whole window, zeros included.
    #[serde(skip)]
    pub alpha: BTreeMap<(i32, i32), u64>,
    #[serde(skip)]
    pub methods: BTreeMap<i32, Method>,
}

impl OracleResult {
    pub fn alpha(&self, s: i32, t: i32) -> u64 {
        self.alpha.get(&(s, t)).copied().unwrap_or(0)
    }
}

/// An integral star digit together with its admissible `σ` interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StarHit {
    pub x: u128,
    pub sigma_lo: i32,
    pub sigma_hi: i32,
}

fn check_side(y: &MatrixF, side: Side) -> Result<()> {
    if y.n() != 3 {
        return Err(AflError::DimensionMismatch);
    }
    let space = match side {
        Side::Lie => Space::LieS,
        Side::Group => Space::S,
    };
    if !membership(y, space)? {
        return Err(AflError::InvalidInput("element is not on the requested side"));
    }
    Ok(())
}

fn hits_for_t(y: &MatrixF, parity: Parity, t: i32, window: &OracleWindow, m: i32, method: Method) -> Result<(Vec<StarHit>, Method)> {
    let sigma_range = window.sigma_range(parity, m);
    let depth = (t + window.star_margin as i32) as u32;
    let poly = StarPolynomial::new(y, parity, t, window.star_margin)?;
    let mut hits = Vec::new();
    if method == Method::Exhaustive {
        let count = (y.ctx().p() as u64).pow(depth);
        if scan::scan(&poly, count, sigma_range, |h| hits.push(h))?.is_some() {
            return Ok((hits, Method::Exhaustive));
        }
        hits.clear();
    }
    lift::lift(&poly, depth, sigma_range, |h| hits.push(h))?;
    hits.sort_by_key(|h| h.x);
    Ok((hits, Method::Lifting))
}

fn choose_method(p: u32, depth: u32, config: &OracleConfig, quadratic: bool) -> Method {
    if let Some(m) = config.force {
        if m != Method::Quadratic || quadratic {
            return m;
        }
    }
    let fits = (p as u64).checked_pow(depth).is_some_and(|c| c <= config.enumeration_limit);
    if fits {
        Method::Exhaustive
    } else if quadratic {
        Method::Quadratic
    } else {
        Method::Lifting
    }
}

/// A star of valuation exactly `-margin` sits on the edge of the widened
/// star range.
fn check_star_margin(h: &StarHit, window: &OracleWindow, p: u32, parity: Parity, m: i32, t: i32) -> Result<()> {
    if window.star_margin > 0 && h.x % p as u128 != 0 {
        return Err(AflError::WindowTooSmall { s: s_of(parity, m, h.sigma_lo), t });
    }
    Ok(())
}

fn check_boundary(alpha: &BTreeMap<(i32, i32), u64>, window: &OracleWindow) -> Result<()> {
    for (&(s, t), &n) in alpha {
        let edge = s == window.s_min || s == window.s_max || t == window.t_max || (window.t_min < 0 && t == window.t_min);
        if edge && n > 0 {
            return Err(AflError::WindowTooSmall { s, t });
        }
    }
    Ok(())
}

/// Counts integral cosets in `window` and aggregates them by `v(det h)`.
/// Fails with `WindowTooSmall` if anything on the window boundary counts.
pub fn enumerate_and_tally(y: &MatrixF, side: Side, window: &OracleWindow, parity: Parity, m: i32, config: &OracleConfig) -> Result<OracleResult> {
    check_side(y, side)?;
    if window.t_min < -(window.star_margin as i32) {
        return Err(AflError::InvalidInput("t_min below the star margin"));
    }
    let p = y.ctx().p();
    let quadratic = match side {
        Side::Lie if window.star_margin == 0 => QuadraticCondition::from_canonical(y, parity, m).ok(),
        _ => None,
    };
    let mut alpha = BTreeMap::new();
    let mut methods = BTreeMap::new();
    for t in window.t_min..=window.t_max {
        let depth = (t + window.star_margin as i32) as u32;
        let method = choose_method(p, depth, config, quadratic.is_some());
        let used = match (method, &quadratic) {
            (Method::Quadratic, Some(cond)) => {
                for s in window.s_min..=window.s_max {
                    alpha.insert((s, t), cond.alpha(s, t)?);
                }
                Method::Quadratic
            }
            _ => {
                let (hits, used) = hits_for_t(y, parity, t, window, m, method)?;
                for s in window.s_min..=window.s_max {
                    alpha.insert((s, t), 0);
                }
                for h in hits {
                    check_star_margin(&h, window, p, parity, m, t)?;
                    for sigma in h.sigma_lo..=h.sigma_hi {
                        *alpha.get_mut(&(s_of(parity, m, sigma), t)).expect("s in window") += 1;
                    }
                }
                used
            }
        };
        methods.insert(t, used);
    }
    check_boundary(&alpha, window)?;
    let mut tally = OrbitalTally::default();
    for (&(s, t), &n) in &alpha {
        if n > 0 {
            *tally.counts.entry(2 * sigma_of(parity, m, s) + t).or_insert(0) += n;
        }
    }
    Ok(OracleResult { tally, alpha, methods })
}

/// Every integral coset in `window`, found by enumeration or lifting (never
/// by counting formulas). Boundary cells must be empty.
pub fn integral_cosets(y: &MatrixF, window: &OracleWindow, parity: Parity, m: i32, config: &OracleConfig) -> Result<Vec<CosetRep>> {
    let p = y.ctx().p();
    let mut out = Vec::new();
    let mut alpha = BTreeMap::new();
    for t in window.t_min..=window.t_max {
        let depth = (t + window.star_margin as i32) as u32;
        let method = match choose_method(p, depth, config, false) {
            Method::Quadratic => Method::Lifting,
            m => m,
        };
        let (hits, _) = hits_for_t(y, parity, t, window, m, method)?;
        for h in hits {
            check_star_margin(&h, window, p, parity, m, t)?;
            for sigma in h.sigma_lo..=h.sigma_hi {
                let s = s_of(parity, m, sigma);
                *alpha.entry((s, t)).or_insert(0u64) += 1;
                out.push(CosetRep { parity, s, t, x: h.x, margin: window.star_margin });
            }
        }
    }
    check_boundary(&alpha, window)?;
    out.sort();
    Ok(out)
}
