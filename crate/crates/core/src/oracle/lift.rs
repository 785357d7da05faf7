//! Digit-by-digit search over star classes. A subtree is dropped once some
//! entry's valuation is pinned down (it cannot change below that node) and
//! already rules out every `σ` in the window.

use crate::error::{AflError, Result};
use crate::padic::{PadicScalar, PrecisionContext, Valuation};

use super::poly::{ShiftClass, StarPolynomial, CLASSES};
use super::StarHit;

fn star_digit(ctx: &PrecisionContext, x: u128) -> PadicScalar {
    if x == 0 {
        ctx.zero()
    } else {
        ctx.from_unit(0, x)
    }
}

/// Admissible `σ` interval implied by the entry valuations, or `None` when
/// some block entry is non-integral. `known[i]` is `None` for entries whose
/// valuation is not yet fixed.
fn sigma_interval(known: &[Option<i32>; 9], range: (i32, i32)) -> Option<(i32, i32)> {
    let (mut lo, mut hi) = range;
    for (i, v) in known.iter().enumerate() {
        let Some(v) = *v else { continue };
        match CLASSES[i] {
            ShiftClass::Block if v < 0 => return None,
            ShiftClass::Block => {}
            ShiftClass::TopRight => lo = lo.max(-v),
            ShiftClass::BottomLeft => hi = hi.min(v),
        }
    }
    (lo <= hi).then_some((lo, hi))
}

pub(crate) fn lift(poly: &StarPolynomial, depth: u32, sigma_range: (i32, i32), mut visit: impl FnMut(StarHit)) -> Result<()> {
    let ctx = *poly.a.ctx();
    let p = ctx.p() as u128;
    let cap = sigma_range.0.abs().max(sigma_range.1.abs()) + 1;
    let two = ctx.qint(2);
    let mut stack: Vec<(u32, u128)> = vec![(0, 0)];
    while let Some((r, x)) = stack.pop() {
        let xs = ctx.embed(star_digit(&ctx, x));
        let m = poly.eval(xs);
        let mut known = [None; 9];
        if r == depth {
            for (i, e) in m.entries().iter().enumerate() {
                known[i] = Some(match e.valuation() {
                    Valuation::Finite(v) => v.min(cap),
                    Valuation::Infinite => cap,
                    Valuation::AtLeast(k) if k >= cap => cap,
                    Valuation::AtLeast(_) => {
                        return Err(AflError::PrecisionExhausted("lifting search leaf undetermined"))
                    }
                });
            }
            if let Some((lo, hi)) = sigma_interval(&known, sigma_range) {
                visit(StarHit { x, sigma_lo: lo, sigma_hi: hi });
            }
            continue;
        }
        for i in 0..9 {
            let slope = poly.b.entries()[i] + two * xs * poly.c.entries()[i];
            let bound = (r as i32).saturating_add(slope.valuation().lower_bound())
                .min((2 * r as i32).saturating_add(poly.c.entries()[i].valuation().lower_bound()));
            if let Valuation::Finite(v) = m.entries()[i].valuation() {
                if v < bound {
                    known[i] = Some(v.min(cap));
                }
            }
        }
        if sigma_interval(&known, sigma_range).is_none() {
            continue;
        }
        let step = p.pow(r);
        for digit in (0..p).rev() {
            stack.push((r + 1, x + digit * step));
        }
    }
    Ok(())
}
