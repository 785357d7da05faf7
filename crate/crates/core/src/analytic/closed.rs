//! Closed forms for the coset counts `α(s, t)` and the partial sums
//! `σ(s) = Σ_t (-1)^{t+1} (2m - 2s + t + ε) α(s, t)`.

use serde::Serialize;

use crate::error::{AflError, Result};
use crate::oracle::Parity;

/// The integers that determine both sides of the identity: `q`, the parity
/// of `v(j)`, `m`, `l = 2v(b)+1` and `k = 2v(a)` (`None` for `a = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub q: u32,
    pub parity: Parity,
    pub m: i32,
    pub l: i32,
    pub k: Option<i32>,
}

/// Which branch of the case analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// `l < k`, including `a = 0`.
    A,
    /// `k < l`.
    B,
}

pub(crate) fn qpow(q: u32, e: i32) -> i64 {
    debug_assert!(e >= 0);
    (q as i64).pow(e as u32)
}

/// `1 + q + ... + q^n`, zero for negative `n`.
pub(crate) fn geometric_sum(q: u32, n: i32) -> i64 {
    (0..=n).map(|i| qpow(q, i)).sum()
}

impl Invariants {
    pub fn new(q: u32, parity: Parity, m: i32, l: i32, k: Option<i32>) -> Result<Self> {
        if m < 0 {
            return Err(AflError::InvalidInput("m must be non-negative"));
        }
        if l < 1 || l % 2 == 0 {
            return Err(AflError::InvalidInput("l must be a positive odd integer"));
        }
        if k.is_some_and(|k| k < 0 || k % 2 != 0) {
            return Err(AflError::InvalidInput("k must be a non-negative even integer"));
        }
        Ok(Invariants { q, parity, m, l, k })
    }

    pub fn vj(&self) -> i32 {
        self.parity.vj(self.m)
    }

    pub fn case(&self) -> Case {
        match self.k {
            Some(k) if k < self.l => Case::B,
            _ => Case::A,
        }
    }

    /// `k/2` in Case B.
    fn half_k(&self) -> Result<i32> {
        match (self.case(), self.k) {
            (Case::B, Some(k)) => Ok(k / 2),
            _ => Err(AflError::WrongCase),
        }
    }

    /// `2m - 2s + t + ε`, the determinant valuation of the coset.
    fn weight(&self, s: i32, t: i32) -> i64 {
        (2 * self.m - 2 * s + t + self.parity.det_weight()) as i64
    }

    fn term(&self, s: i32, t: i32) -> i64 {
        let sign = if t % 2 == 0 { -1 } else { 1 };
        sign * self.weight(s, t)
    }

    /// Every `t` with `α(s, t) != 0` lies below this.
    fn t_bound(&self) -> i32 {
        self.l + self.vj() + 1
    }
}

/// Number of integral cosets with given `(s, t)`.
pub fn alpha_closed(inv: &Invariants, s: i32, t: i32) -> u64 {
    if s < 0 || s > inv.vj() || t < 0 {
        return 0;
    }
    let q = inv.q as u64;
    let l = inv.l;
    let base = |t: i32| q.pow((t / 2).min(s) as u32);
    match (inv.case(), inv.k) {
        (Case::B, Some(k)) => {
            let h = k / 2;
            let qh = q.pow(h as u32);
            if t <= k {
                base(t)
            } else if t <= l {
                q.pow(h.min(s) as u32) + if t <= s + h { qh } else { 0 }
            } else if t > s + l - h {
                0
            } else if t <= s + h {
                2 * qh
            } else {
                qh
            }
        }
        _ => {
            if t > l {
                0
            } else {
                base(t)
            }
        }
    }
}

/// `σ(s)` by summing the closed-form `α` over `t`.
pub fn sigma_direct(inv: &Invariants, s: i32) -> i64 {
    (0..=inv.t_bound()).map(|t| inv.term(s, t) * alpha_closed(inv, s, t) as i64).sum()
}

/// `σ(s)` where `α(s, t) = q^{min(⌊t/2⌋, s)}` for `t <= l`, which covers
/// Case A and Case B with `s <= k/2`.
fn sigma_triangular(inv: &Invariants, s: i32) -> i64 {
    let (q, l) = (inv.q, inv.l);
    if s == 0 {
        (l as i64 + 1) / 2
    } else if l < 2 * s {
        geometric_sum(q, l / 2)
    } else {
        geometric_sum(q, s) + (l - 2 * s - 1) as i64 * qpow(q, s) / 2
    }
}

pub fn sigma_case_a(inv: &Invariants, s: i32) -> Result<i64> {
    if inv.case() != Case::A {
        return Err(AflError::WrongCase);
    }
    if s < 0 || s > inv.vj() {
        return Ok(0);
    }
    Ok(sigma_triangular(inv, s))
}

/// The sums that make up `σ(s)` in Case B. `a` runs over `t <= k`; `c`
/// over `k < t <= s + k/2` with weight `q^{k/2}`; `b` and `d` split
/// `e = b + d`, the sum over `k < t <= l + s - k/2`, at `t = l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseBParts {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub e: i64,
}

impl CaseBParts {
    pub fn total(&self) -> i64 {
        self.a + self.c + self.e
    }
}

/// The Case B parts by direct summation, for `s > k/2`.
pub fn case_b_parts_direct(inv: &Invariants, s: i32) -> Result<CaseBParts> {
    let h = inv.half_k()?;
    let k = 2 * h;
    let qh = qpow(inv.q, h);
    let sum = |lo: i32, hi: i32, w: &dyn Fn(i32) -> i64| (lo..=hi).map(|t| inv.term(s, t) * w(t)).sum::<i64>();
    let a = sum(0, k, &|t| qpow(inv.q, (t / 2).min(s)));
    let b = sum(k + 1, inv.l, &|_| qh);
    let d = sum(inv.l + 1, inv.l + s - h, &|_| qh);
    let c = sum(k + 1, s + h, &|_| qh);
    Ok(CaseBParts { a, b, c, d, e: b + d })
}

/// The Case B parts from their closed forms, for `s > k/2`. `b` and `d`
/// are not given separately; they are reported from the direct sums.
pub fn case_b_parts_closed(inv: &Invariants, s: i32) -> Result<CaseBParts> {
    let h = inv.half_k()?;
    if s <= h {
        return Err(AflError::InvalidInput("closed Case B parts need s > k/2"));
    }
    let k = 2 * h;
    let (m, l, eps) = (inv.m as i64, inv.l as i64, inv.parity.det_weight() as i64);
    let (s64, h64) = (s as i64, h as i64);
    let qh = qpow(inv.q, h);
    let a = geometric_sum(inv.q, h - 1) - (2 * m - 2 * s64 + eps + k as i64) * qh;
    let lead = (2 * m - 2 * s64 + k as i64 + 1 + eps) * qh;
    let (c, e) = if (s - h) % 2 != 0 {
        (lead + (s64 - h64 - 1) * qh / 2, -(l + s64 - 3 * h64) * qh / 2)
    } else {
        (-(s64 - h64) * qh / 2, lead + (l + s64 - 3 * h64 - 1) * qh / 2)
    };
    let direct = case_b_parts_direct(inv, s)?;
    Ok(CaseBParts { a, b: direct.b, c, d: direct.d, e })
}

pub fn sigma_case_b(inv: &Invariants, s: i32) -> Result<i64> {
    let h = inv.half_k()?;
    if s < 0 || s > inv.vj() {
        return Ok(0);
    }
    if s <= h {
        return Ok(sigma_triangular(inv, s));
    }
    Ok(case_b_parts_closed(inv, s)?.total())
}

/// `σ(s)` from the closed forms; zero outside `0 <= s <= v(j)`.
pub fn sigma_closed(inv: &Invariants, s: i32) -> i64 {
    match inv.case() {
        Case::A => sigma_case_a(inv, s),
        Case::B => sigma_case_b(inv, s),
    }
    .expect("dispatch matches the case")
}

/// The Case A closed form exactly as printed in the source, whose `s = 0`
/// branch reads `(l-1)/2`. Kept only to demonstrate the discrepancy.
pub fn sigma_closed_printed(inv: &Invariants, s: i32) -> i64 {
    if inv.case() == Case::A && s == 0 {
        (inv.l as i64 - 1) / 2
    } else {
        sigma_closed(inv, s)
    }
}

/// `σ(s) + σ(s-1)` in Case A as printed, with coefficient `((l-1)/2 - s)e_s`
/// in the second branch and `(l-1)/2` at `s = 0`.
pub fn pair_sum_printed(inv: &Invariants, s: i32) -> Result<i64> {
    if inv.case() != Case::A {
        return Err(AflError::WrongCase);
    }
    let (q, l) = (inv.q, inv.l);
    Ok(if s == 0 {
        (l as i64 - 1) / 2
    } else if l < 2 * s {
        2 * geometric_sum(q, l / 2)
    } else {
        2 * geometric_sum(q, s - 1) + ((l as i64 - 1) / 2 - s as i64) * (qpow(q, s) + qpow(q, s - 1))
    })
}

/// `Σ_{s=0}^{v(j)} σ(s)` from the closed forms.
pub fn derived_closed(inv: &Invariants) -> i64 {
    (0..=inv.vj()).map(|s| sigma_closed(inv, s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<Invariants> {
        let mut out = Vec::new();
        for q in [5, 7] {
            for parity in [Parity::Odd, Parity::Even] {
                for m in 0..4 {
                    for l in [1, 3, 5, 7] {
                        for k in [None, Some(0), Some(2), Some(4), Some(6), Some(8)] {
                            out.push(Invariants::new(q, parity, m, l, k).unwrap());
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn closed_sigma_equals_direct_sum() {
        for inv in grid() {
            for s in -1..=inv.vj() + 1 {
                assert_eq!(sigma_closed(&inv, s), sigma_direct(&inv, s), "{inv:?} s={s}");
            }
        }
    }

    #[test]
    fn case_b_parts_agree() {
        for inv in grid().into_iter().filter(|i| i.case() == Case::B) {
            let h = inv.k.unwrap() / 2;
            for s in h + 1..=inv.vj() {
                let (c, d) = (case_b_parts_closed(&inv, s).unwrap(), case_b_parts_direct(&inv, s).unwrap());
                assert_eq!(c, d, "{inv:?} s={s}");
            }
        }
    }

    #[test]
    fn case_b_bookkeeping() {
        for inv in grid().into_iter().filter(|i| i.case() == Case::B) {
            let h = inv.k.unwrap() / 2;
            let k = inv.k.unwrap() as i64;
            let (m, eps) = (inv.m as i64, inv.parity.det_weight() as i64);
            let qh = qpow(inv.q, h);
            for s in h + 1..=inv.vj() {
                let (now, prev) = (case_b_parts_direct(&inv, s).unwrap(), case_b_parts_direct(&inv, s - 1).unwrap());
                let w = 4 * m - 4 * s as i64 + 3 + 2 * k + 2 * eps;
                assert_eq!(now.a + prev.a, 2 * geometric_sum(inv.q, h - 1) + qh - w * qh);
                assert_eq!(now.c + prev.c + now.e + prev.e, w * qh);
            }
        }
    }

    #[test]
    fn wrong_case_is_reported() {
        let a = Invariants::new(5, Parity::Odd, 1, 1, Some(2)).unwrap();
        let b = Invariants::new(5, Parity::Odd, 0, 1, Some(0)).unwrap();
        assert_eq!(sigma_case_b(&a, 0), Err(AflError::WrongCase));
        assert_eq!(sigma_case_a(&b, 0), Err(AflError::WrongCase));
        assert_eq!(pair_sum_printed(&b, 1), Err(AflError::WrongCase));
    }

    #[test]
    fn worked_values() {
        let b = Invariants::new(5, Parity::Odd, 0, 1, Some(0)).unwrap();
        assert_eq!((sigma_closed(&b, 0), sigma_closed(&b, 1)), (1, 0));
        let a = Invariants::new(5, Parity::Odd, 1, 1, Some(2)).unwrap();
        assert_eq!((0..4).map(|s| sigma_closed(&a, s)).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        let a3 = Invariants::new(5, Parity::Even, 1, 3, None).unwrap();
        assert_eq!(sigma_direct(&a3, 0), 2);
        assert_eq!(sigma_closed_printed(&a3, 0), 1);
        assert_eq!(alpha_closed(&a3, -1, 0), 0);
    }

    #[test]
    fn alpha_case_formulas() {
        let b = Invariants::new(5, Parity::Odd, 2, 5, Some(2)).unwrap();
        // k < t <= l and t <= s + k/2
        assert_eq!(alpha_closed(&b, 2, 3), 5 + 5);
        let a = Invariants::new(7, Parity::Even, 2, 5, None).unwrap();
        assert_eq!(alpha_closed(&a, 3, 4), 49);
        assert_eq!(alpha_closed(&a, 3, 6), 0);
    }
}
