//! Counting `⋆ ∈ π^e O / π^t O` with `(⋆ - c)² ≡ D (mod π^t)`, and the
//! reduction of the coset integrality test to that congruence for
//! matrices of canonical shape.

use crate::error::{AflError, Result};
use crate::matrix::MatrixF;
use crate::padic::{PadicScalar, QuadExtScalar, Valuation};

use super::poly::sigma_of;
use super::Parity;

fn ceil_half(t: i32) -> i32 {
    (t + 1).div_euclid(2)
}

/// Number of classes `⋆ ∈ π^shift O / π^t O` with
/// `v((⋆ - center)² - target) >= t`, found by completing the square and
/// lifting a square root.
pub fn count_quadratic_solutions(center: &PadicScalar, target: &PadicScalar, t: i32, shift: i32) -> Result<u64> {
    if t < 0 || shift < 0 {
        return Err(AflError::InvalidInput("t and shift must be non-negative"));
    }
    if !center.is_integral()? {
        return Err(AflError::InvalidInput("center must be integral"));
    }
    let p = center.p() as u64;
    let zero = PadicScalar::zero(center.p());
    // Solutions u = ⋆ - center form cosets r + π^g O.
    let cosets: Vec<(PadicScalar, i32)> = match target.valuation() {
        Valuation::Infinite => vec![(zero, ceil_half(t))],
        Valuation::AtLeast(k) if k >= t => vec![(zero, ceil_half(t))],
        Valuation::AtLeast(_) => return Err(AflError::PrecisionExhausted("target undetermined modulo π^t")),
        Valuation::Finite(d) if d >= t => vec![(zero, ceil_half(t))],
        Valuation::Finite(d) => {
            if d.rem_euclid(2) == 1 {
                return Ok(0);
            }
            if target.abs_precision().is_some_and(|a| a < t) {
                return Err(AflError::PrecisionExhausted("target undetermined modulo π^t"));
            }
            match target.shift(-d).sqrt()? {
                None => return Ok(0),
                Some(w) => {
                    let r = w.shift(d / 2);
                    let g = t - d / 2;
                    vec![(r, g), (-r, g)]
                }
            }
        }
    };
    let mut total = 0u64;
    for (r, g) in cosets {
        let h = g.min(shift);
        if (r + *center).valuation().at_least(h)? {
            let free = (t - g.max(shift)).max(0) as u32;
            total += p.pow(free);
        }
    }
    Ok(total)
}

/// Exhaustive counts for every shift `0..=t` at once: entry `e` is the
/// number of solutions among `⋆ ∈ π^e O / π^t O`.
pub fn count_quadratic_solutions_exhaustive(center: &PadicScalar, target: &PadicScalar, t: i32) -> Result<Vec<u64>> {
    if t < 0 {
        return Err(AflError::InvalidInput("t must be non-negative"));
    }
    if !center.is_integral()? {
        return Err(AflError::InvalidInput("center must be integral"));
    }
    let p = center.p() as u64;
    let mut buckets = vec![0u64; t as usize + 1];
    if !target.is_integral()? {
        return Ok(buckets);
    }
    let m = p.checked_pow(t as u32).filter(|m| *m < 1 << 31).ok_or(AflError::InvalidInput("p^t too large to enumerate"))?;
    let c = center.to_residue(t as u32)? as u64;
    let d = target.to_residue(t as u32)? as u64;
    for x in 0..m {
        let u = (x + m - c) % m;
        if (u * u) % m == d % m {
            let mut v = 0usize;
            let mut y = x;
            while v < t as usize && y % p == 0 {
                y /= p;
                v += 1;
            }
            buckets[v] += 1;
        }
    }
    // Suffix sums: shift e admits every solution of valuation >= e.
    for e in (0..t as usize).rev() {
        buckets[e] += buckets[e + 1];
    }
    Ok(buckets)
}

/// Data that reduces the integrality of `h y h⁻¹` to one quadratic
/// congruence, available when `y` has the canonical zero pattern.
#[derive(Debug, Clone)]
pub struct QuadraticCondition {
    pub parity: Parity,
    pub m: i32,
    pub center: PadicScalar,
    pub target: PadicScalar,
    /// `σ >= -top`, from the surviving top-right entry.
    pub top: i32,
    /// `σ <= corner`, and `v(⋆) >= t + σ - corner`.
    pub corner: i32,
    /// False when some entry independent of the coset is non-integral.
    pub block_integral: bool,
}

fn finite_or_cap(v: Valuation) -> Result<i32> {
    match v {
        Valuation::Finite(v) => Ok(v),
        Valuation::Infinite => Ok(i32::MAX / 4),
        Valuation::AtLeast(_) => Err(AflError::PrecisionExhausted("entry valuation undetermined")),
    }
}

fn as_f0(x: &QuadExtScalar) -> Result<PadicScalar> {
    if x.im().is_zero_at_precision() {
        Ok(x.re())
    } else {
        Err(AflError::InvalidInput("quadratic coefficients must lie in F0"))
    }
}

impl QuadraticCondition {
    pub fn from_canonical(y: &MatrixF, parity: Parity, m: i32) -> Result<Self> {
        if y.n() != 3 {
            return Err(AflError::DimensionMismatch);
        }
        let g = |i: usize, j: usize| y.get(i, j);
        let (z11, z12, z21, z22) = (g(0, 0), g(0, 1), g(1, 0), g(1, 1));
        let (lead, off, top_entry, corner_entry) = match parity {
            Parity::Odd => {
                if !g(1, 2).is_exact_zero() || !g(2, 1).is_exact_zero() {
                    return Err(AflError::InvalidInput("not of canonical shape"));
                }
                (z21, z12, g(0, 2), g(2, 0))
            }
            Parity::Even => {
                if !g(0, 2).is_exact_zero() || !g(2, 0).is_exact_zero() {
                    return Err(AflError::InvalidInput("not of canonical shape"));
                }
                (z12, z21, g(1, 2), g(2, 1))
            }
        };
        if !lead.is_unit()? {
            return Err(AflError::InvalidInput("leading coefficient is not a unit"));
        }
        let block_integral = z11.is_integral()? && z22.is_integral()? && g(2, 2).is_integral()? && off.is_integral()?;
        // Odd: P(⋆) = -z21 ⋆² + (z22 - z11) ⋆ + z12. Even: swap the roles
        // of z12/z21 and of z11/z22.
        let diff = match parity {
            Parity::Odd => z22 - z11,
            Parity::Even => z11 - z22,
        };
        let center = diff.checked_div(&(lead + lead))?;
        let target = center * center + off.checked_div(&lead)?;
        Ok(QuadraticCondition {
            parity,
            m,
            center: as_f0(&center)?,
            target: as_f0(&target)?,
            top: finite_or_cap(top_entry.valuation())?,
            corner: finite_or_cap(corner_entry.valuation())?,
            block_integral,
        })
    }

    fn star_shift(&self, t: i32, sigma: i32) -> i32 {
        (t + sigma - self.corner).max(0)
    }

    /// The `(center, target, t, shift)` congruence that `α(s, t)` counts,
    /// or `None` when the count is zero for structural reasons.
    pub fn congruence(&self, s: i32, t: i32) -> Result<Option<(PadicScalar, PadicScalar, i32)>> {
        let sigma = sigma_of(self.parity, self.m, s);
        if !self.block_integral || t < 0 || !self.sigma_ok(sigma) || !self.center.is_integral()? {
            return Ok(None);
        }
        Ok(Some((self.center, self.target, self.star_shift(t, sigma))))
    }

    fn sigma_ok(&self, sigma: i32) -> bool {
        sigma >= -self.top && sigma <= self.corner
    }

    /// `α(s, t)` from the congruence count.
    pub fn alpha(&self, s: i32, t: i32) -> Result<u64> {
        match self.congruence(s, t)? {
            None => Ok(0),
            Some((center, target, shift)) => count_quadratic_solutions(&center, &target, t, shift),
        }
    }

    /// The derived conditions for one representative `(s, t, ⋆)`.
    pub fn holds(&self, s: i32, t: i32, star: &PadicScalar) -> Result<bool> {
        let sigma = sigma_of(self.parity, self.m, s);
        if !self.block_integral || t < 0 || !self.sigma_ok(sigma) {
            return Ok(false);
        }
        if !star.valuation().at_least(self.star_shift(t, sigma))? {
            return Ok(false);
        }
        let u = *star - self.center;
        (u * u - self.target).valuation().at_least(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionContext;

    #[test]
    fn analytic_matches_exhaustive_small() {
        let ctx = PrecisionContext::new(5, 20).unwrap();
        for c in [0i64, 1, 3, 7, 12] {
            for d in [0i64, 1, 4, 6, 2, 25, 50, 100, 125 * 4, 3 * 25, 625] {
                for t in 0..=6 {
                    let (cs, ds) = (ctx.int(c), ctx.int(d));
                    let all = count_quadratic_solutions_exhaustive(&cs, &ds, t).unwrap();
                    for e in 0..=t {
                        let got = count_quadratic_solutions(&cs, &ds, t, e).unwrap();
                        assert_eq!(got, all[e as usize], "c={c} d={d} t={t} e={e}");
                    }
                }
            }
        }
    }

    #[test]
    fn non_integral_target_has_no_solutions() {
        let ctx = PrecisionContext::new(7, 20).unwrap();
        let d = ctx.int(3).shift(-1);
        assert_eq!(count_quadratic_solutions(&ctx.zero(), &d, 4, 0).unwrap(), 0);
        assert_eq!(count_quadratic_solutions_exhaustive(&ctx.zero(), &d, 4).unwrap()[0], 0);
    }

    #[test]
    fn bad_arguments() {
        let ctx = PrecisionContext::new(7, 20).unwrap();
        assert!(count_quadratic_solutions(&ctx.zero(), &ctx.one(), -1, 0).is_err());
        assert!(count_quadratic_solutions(&ctx.pi_pow(-1), &ctx.one(), 2, 0).is_err());
    }
}
