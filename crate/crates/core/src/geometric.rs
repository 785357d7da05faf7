//! The intersection length as pure combinatorics: the Gross–Keating
//! formula for quasi-canonical lifts, summed over the admissible levels.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytic::{geometric_sum, qpow, CanonicalX, Invariants};
use crate::error::{AflError, Result};
use crate::padic::{PadicScalar, PrecisionContext, QuadExtScalar};

/// `a(k) = 1 + (q^k - 1)(q + 1)/(q - 1) = 2(1 + ... + q^{k-1}) + q^k`.
pub fn a_of(q: u32, k: u32) -> i64 {
    2 * geometric_sum(q, k as i32 - 1) + qpow(q, k as i32)
}

/// Ramification index `e_s = q^s + q^{s-1}`, with `e_0 = 1`.
pub fn ramification_index(q: u32, s: i32) -> i64 {
    if s == 0 {
        1
    } else {
        qpow(q, s) + qpow(q, s - 1)
    }
}

/// Length of the locus on a level-`s` quasi-canonical lift to which an
/// endomorphism of the given level deforms. At `s = 0` an odd level gives
/// `(level+1)/2` and level 0 gives 1; these are conventions, not part of
/// the formula for `s >= 1`.
pub fn gk_length(q: u32, s: i32, level: i32) -> Result<i64> {
    let bad = || AflError::InvalidLevel { s: s as i64, level: level as i64 };
    if s < 0 || level < 0 {
        return Err(bad());
    }
    if s == 0 {
        return match level {
            0 => Ok(1),
            l if l % 2 == 1 => Ok((l as i64 + 1) / 2),
            _ => Err(bad()),
        };
    }
    if level <= 2 * s {
        if level % 2 == 0 {
            Ok(a_of(q, (level / 2) as u32))
        } else {
            let h = (level - 1) / 2;
            Ok(a_of(q, h as u32) + qpow(q, h))
        }
    } else {
        Ok(a_of(q, (s - 1) as u32) + qpow(q, s - 1) + (level + 1 - 2 * s) as i64 * ramification_index(q, s) / 2)
    }
}

/// The data fed to [`gk_length`] for one level `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GKInput {
    pub s: i32,
    pub level: i32,
    pub e_s: i64,
}

impl GKInput {
    /// The level of `f = a + ϖb` relative to `O_s`: `l` when `v(a) >= s`
    /// or `l < k`, otherwise `k`.
    pub fn new(inv: &Invariants, s: i32) -> Self {
        let level = match inv.k {
            Some(k) if k < inv.l && 2 * s > k => k,
            _ => inv.l,
        };
        GKInput { s, level, e_s: ramification_index(inv.q, s) }
    }
}

/// `len Z_s(z)`.
pub fn zs_length(inv: &Invariants, s: i32) -> Result<i64> {
    let g = GKInput::new(inv, s);
    gk_length(inv.q, g.s, g.level)
}

/// Per-level lengths over `s ≡ v(j) (mod 2)`, `0 <= s <= v(j)`, and their sum.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LengthBreakdown {
    pub per_level: BTreeMap<i32, i64>,
    pub total: i64,
}

pub fn levels(inv: &Invariants) -> impl Iterator<Item = i32> {
    let vj = inv.vj();
    (vj % 2..=vj).step_by(2)
}

pub fn length_breakdown(inv: &Invariants) -> Result<LengthBreakdown> {
    let mut out = LengthBreakdown::default();
    for s in levels(inv) {
        let len = zs_length(inv, s)?;
        out.per_level.insert(s, len);
        out.total += len;
    }
    Ok(out)
}

/// The geometric side; empty for non-integral instances.
pub fn geometric_side(x: &CanonicalX) -> Result<LengthBreakdown> {
    if !x.is_integral() {
        return Ok(LengthBreakdown::default());
    }
    length_breakdown(&x.invariants()?)
}

/// `x + yϖ` in the quaternion algebra over `F0` with `ϖ² = π` and
/// `ϖc = c̄ϖ` for `c ∈ F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quaternion {
    pub x: QuadExtScalar,
    pub y: QuadExtScalar,
}

impl Quaternion {
    pub fn scalar(c: QuadExtScalar) -> Self {
        Quaternion { x: c, y: c.scale(PadicScalar::zero(c.p())) }
    }

    pub fn add(self, o: Self) -> Self {
        Quaternion { x: self.x + o.x, y: self.y + o.y }
    }

    pub fn sub(self, o: Self) -> Self {
        Quaternion { x: self.x - o.x, y: self.y - o.y }
    }

    /// `(x + yϖ)(x' + y'ϖ) = xx' + π y ȳ' + (xy' + y x̄')ϖ`.
    pub fn mul(self, o: Self, ctx: &PrecisionContext) -> Self {
        Quaternion {
            x: self.x * o.x + ctx.qpi_pow(1) * self.y * o.y.conj(),
            y: self.x * o.y + self.y * o.x.conj(),
        }
    }

    pub fn eq_at_precision(&self, o: &Self) -> Result<bool> {
        Ok(self.x.eq_at_precision(&o.x)? && self.y.eq_at_precision(&o.y)?)
    }
}

type Quat2 = [[Quaternion; 2]; 2];

fn mul2(a: &Quat2, b: &Quat2, ctx: &PrecisionContext) -> Quat2 {
    let e = |i: usize, j: usize| a[i][0].mul(b[0][j], ctx).add(a[i][1].mul(b[1][j], ctx));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Checks that `z = [[a, ϖb], [ϖb, a]]` becomes `diag(a + ϖb, a + ϖb)`
/// after the change of basis `P = [[1, τ], [1, -τ]]`, for `a ∈ τF0`.
pub fn coordinate_change_holds(ctx: &PrecisionContext, a: QuadExtScalar, b: QuadExtScalar) -> Result<bool> {
    let s = Quaternion::scalar;
    let zero = ctx.qzero();
    let vb = Quaternion { x: zero, y: b.conj() };
    let z: Quat2 = [[s(a), vb], [vb, s(a)]];
    let tau = ctx.tau();
    let p: Quat2 = [[s(ctx.qone()), s(tau)], [s(ctx.qone()), s(-tau)]];
    let half = ctx.qint(2).inverse()?;
    let ht = (tau + tau).inverse()?;
    let pinv: Quat2 = [[s(half), s(half)], [s(ht), s(-ht)]];
    let out = mul2(&mul2(&pinv, &z, ctx), &p, ctx);
    let f = Quaternion { x: a, y: b.conj() };
    let zq = s(zero);
    Ok(out[0][0].eq_at_precision(&f)?
        && out[1][1].eq_at_precision(&f)?
        && out[0][1].eq_at_precision(&zq)?
        && out[1][0].eq_at_precision(&zq)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Parity;

    #[test]
    fn a_of_values() {
        assert_eq!(a_of(5, 0), 1);
        assert_eq!(a_of(5, 1), 7);
        assert_eq!(a_of(5, 2), 37);
        for q in [5u32, 7] {
            for k in 0..6u32 {
                let direct = 1 + (qpow(q, k as i32) - 1) * (q as i64 + 1) / (q as i64 - 1);
                assert_eq!(a_of(q, k), direct);
            }
        }
    }

    #[test]
    fn gk_branches() {
        assert_eq!(gk_length(5, 1, 0).unwrap(), 1);
        assert_eq!(gk_length(5, 1, 1).unwrap(), 2);
        assert_eq!(gk_length(5, 1, 3).unwrap(), 8);
        assert_eq!(gk_length(5, 0, 3).unwrap(), 2);
        assert!(gk_length(5, 0, 2).is_err());
        assert!(gk_length(5, 1, -1).is_err());
    }

    #[test]
    fn zs_examples() {
        let b = Invariants::new(5, Parity::Odd, 0, 1, Some(0)).unwrap();
        assert_eq!(zs_length(&b, 1).unwrap(), 1);
        assert_eq!(length_breakdown(&b).unwrap().total, 1);
        let a = Invariants::new(5, Parity::Odd, 1, 1, Some(2)).unwrap();
        let br = length_breakdown(&a).unwrap();
        assert_eq!(br.per_level.values().copied().collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(br.total, 4);
    }

    #[test]
    fn lengths_grow_with_l() {
        for q in [5, 7] {
            for k in [None, Some(0), Some(2), Some(4)] {
                for s in 0..6 {
                    let mut prev = 0;
                    for l in (1..12).step_by(2) {
                        let inv = Invariants::new(q, Parity::Odd, 3, l, k).unwrap();
                        let len = zs_length(&inv, s).unwrap();
                        assert!(len >= prev && len >= 0);
                        prev = len;
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_and_totals_match_sigma() {
        use crate::analytic::{derived_closed, sigma_closed};
        for q in [5, 7] {
            for parity in [Parity::Odd, Parity::Even] {
                for m in 0..4 {
                    for l in [1, 3, 5, 7] {
                        for k in [None, Some(0), Some(2), Some(4), Some(6)] {
                            let inv = Invariants::new(q, parity, m, l, k).unwrap();
                            for s in levels(&inv) {
                                let pair = sigma_closed(&inv, s) + sigma_closed(&inv, s - 1);
                                assert_eq!(pair, zs_length(&inv, s).unwrap(), "{inv:?} s={s}");
                            }
                            assert_eq!(length_breakdown(&inv).unwrap().total, derived_closed(&inv));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn basis_change_diagonalizes() {
        let ctx = PrecisionContext::new(7, 20).unwrap();
        let a = ctx.quad(ctx.zero(), ctx.int(3).shift(1));
        let b = ctx.quad(ctx.int(2), ctx.int(5));
        assert!(coordinate_change_holds(&ctx, a, b).unwrap());
        assert!(coordinate_change_holds(&ctx, ctx.qzero(), ctx.qint(9)).unwrap());
    }
}
