//! Exhaustive walk over all star digits using second-order finite
//! differences of the conjugated matrix, in fixed-width integers.

use crate::error::Result;
use crate::matrix::MatrixF;
use crate::padic::{QuadExtScalar, Valuation};

use super::poly::{ShiftClass, StarPolynomial, CLASSES};
use super::StarHit;

const BLOCK: [usize; 5] = [0, 1, 3, 4, 8];
const TOP_RIGHT: [usize; 2] = [2, 5];
const BOTTOM_LEFT: [usize; 2] = [6, 7];

struct IntRep {
    p: u64,
    modulus: u64,
    /// Every entry is `π^w (re + im τ)`.
    w: i32,
    cap: i32,
    k: u32,
}

impl IntRep {
    fn valuation(&self, re: u64, im: u64) -> i32 {
        if re == 0 && im == 0 {
            return self.cap;
        }
        let tz = |mut v: u64| {
            if v == 0 {
                return self.k;
            }
            let mut n = 0;
            while v % self.p == 0 {
                v /= self.p;
                n += 1;
            }
            n
        };
        (self.w + tz(re).min(tz(im)) as i32).min(self.cap)
    }

    fn convert(&self, e: &QuadExtScalar) -> Result<(u64, u64)> {
        let scaled = e.shift(-self.w);
        Ok((
            scaled.re().to_residue(self.k)? as u64,
            scaled.im().to_residue(self.k)? as u64,
        ))
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
}

fn min_finite(ms: &[&MatrixF]) -> i32 {
    ms.iter()
        .flat_map(|m| m.entries().iter())
        .filter_map(|e| match e.valuation() {
            Valuation::Finite(v) => Some(v),
            _ => None,
        })
        .min()
        .unwrap_or(0)
}

/// Visits every `x ∈ [0, count)` and reports the integral ones with their
/// admissible `σ` interval. Returns `None` if the needed modulus does not
/// fit in 62 bits, leaving the caller to use another strategy.
pub(crate) fn scan(poly: &StarPolynomial, count: u64, sigma_range: (i32, i32), mut visit: impl FnMut(StarHit)) -> Result<Option<()>> {
    let p = poly.a.ctx().p() as u64;
    let (smin, smax) = sigma_range;
    let cap = smin.abs().max(smax.abs()) + 1;
    let w = min_finite(&[&poly.a, &poly.d1, &poly.d2]).min(0);
    let k = (cap - w) as u32;
    let Some(modulus) = p.checked_pow(k).filter(|m| *m < 1 << 62) else {
        return Ok(None);
    };
    let rep = IntRep { p, modulus, w, cap, k };
    let mb = p.pow((-w).max(0) as u32);

    let mut cur = [0u64; 18];
    let mut d = [0u64; 18];
    let mut dd = [0u64; 18];
    for i in 0..9 {
        (cur[2 * i], cur[2 * i + 1]) = rep.convert(&poly.a.entries()[i])?;
        (d[2 * i], d[2 * i + 1]) = rep.convert(&poly.d1.entries()[i])?;
        (dd[2 * i], dd[2 * i + 1]) = rep.convert(&poly.d2.entries()[i])?;
    }
    let moving: Vec<usize> = (0..18).filter(|&i| d[i] != 0 || dd[i] != 0).collect();
    debug_assert!(CLASSES.iter().enumerate().all(|(i, c)| match c {
        ShiftClass::Block => BLOCK.contains(&i),
        ShiftClass::TopRight => TOP_RIGHT.contains(&i),
        ShiftClass::BottomLeft => BOTTOM_LEFT.contains(&i),
    }));

    for x in 0..count {
        let block_ok = BLOCK.iter().all(|&i| cur[2 * i] % mb == 0 && cur[2 * i + 1] % mb == 0);
        if block_ok {
            let vtr = TOP_RIGHT.iter().map(|&i| rep.valuation(cur[2 * i], cur[2 * i + 1])).min().unwrap();
            let vbl = BOTTOM_LEFT.iter().map(|&i| rep.valuation(cur[2 * i], cur[2 * i + 1])).min().unwrap();
            let lo = smin.max(-vtr);
            let hi = smax.min(vbl);
            if lo <= hi {
                visit(StarHit { x: x as u128, sigma_lo: lo, sigma_hi: hi });
            }
        }
        for &i in &moving {
            cur[i] = rep.add(cur[i], d[i]);
            d[i] = rep.add(d[i], dd[i]);
        }
    }
    Ok(Some(()))
}
