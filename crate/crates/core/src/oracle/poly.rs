use crate::error::Result;
use crate::matrix::MatrixF;
use crate::padic::{PadicScalar, PrecisionContext, QuadExtScalar};

use super::Parity;

/// Conjugation shift class of each entry of `diag(c·h', 1) y diag(c·h', 1)⁻¹`
/// relative to `h' y h'⁻¹` when `c = π^σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ShiftClass {
    Block,
    TopRight,
    BottomLeft,
}

pub(crate) const CLASSES: [ShiftClass; 9] = [
    ShiftClass::Block,
    ShiftClass::Block,
    ShiftClass::TopRight,
    ShiftClass::Block,
    ShiftClass::Block,
    ShiftClass::TopRight,
    ShiftClass::BottomLeft,
    ShiftClass::BottomLeft,
    ShiftClass::Block,
];

/// The unimodular part `h'(⋆)` of a coset representative, embedded as
/// `diag(h', 1)`; `⋆ = π^{-margin} x`.
pub fn unscaled_rep(ctx: &PrecisionContext, parity: Parity, t: i32, star: PadicScalar) -> (MatrixF, MatrixF) {
    let z = ctx.qzero();
    let one = ctx.qone();
    let s = ctx.embed(star);
    let pt = ctx.qpi_pow(t);
    let pmt = ctx.qpi_pow(-t);
    let (h, hinv) = match parity {
        Parity::Odd => (
            vec![vec![one, s, z], vec![z, pt, z], vec![z, z, one]],
            vec![vec![one, -(s * pmt), z], vec![z, pmt, z], vec![z, z, one]],
        ),
        Parity::Even => (
            vec![vec![pt, z, z], vec![s, one, z], vec![z, z, one]],
            vec![vec![pmt, z, z], vec![-(s * pmt), one, z], vec![z, z, one]],
        ),
    };
    (
        MatrixF::from_rows(ctx, h).expect("square"),
        MatrixF::from_rows(ctx, hinv).expect("square"),
    )
}

pub(crate) fn star_scalar(ctx: &PrecisionContext, x: u128, margin: u32) -> PadicScalar {
    if x == 0 {
        ctx.zero()
    } else {
        ctx.from_unit(-(margin as i32), x)
    }
}

/// `h'(⋆) y h'(⋆)⁻¹ = A + xB + x²C` as a polynomial in the star digit `x`.
#[derive(Debug, Clone)]
pub(crate) struct StarPolynomial {
    pub a: MatrixF,
    pub b: MatrixF,
    pub c: MatrixF,
    /// `M(1) - M(0)` and `M(2) - 2M(1) + M(0)`, the forward differences.
    pub d1: MatrixF,
    pub d2: MatrixF,
}

impl StarPolynomial {
    pub fn new(y: &MatrixF, parity: Parity, t: i32, margin: u32) -> Result<Self> {
        let ctx = *y.ctx();
        let eval = |x: u128| {
            let (h, hinv) = unscaled_rep(&ctx, parity, t, star_scalar(&ctx, x, margin));
            h.mul(y).mul(&hinv)
        };
        let (m0, m1, m2) = (eval(0), eval(1), eval(2));
        let d1 = m1.sub(&m0);
        let d2 = m2.sub(&m1).sub(&d1);
        let half = ctx.qint(2).inverse()?;
        let c = d2.scale(half);
        let b = d1.sub(&c);
        Ok(StarPolynomial { a: m0, b, c, d1, d2 })
    }

    pub fn eval(&self, x: QuadExtScalar) -> MatrixF {
        self.a.add(&self.b.scale(x)).add(&self.c.scale(x * x))
    }
}

/// `σ` with `h = π^σ h'`: `m+1-s` for odd `v(j)`, `m-s` for even.
pub fn sigma_of(parity: Parity, m: i32, s: i32) -> i32 {
    match parity {
        Parity::Odd => m + 1 - s,
        Parity::Even => m - s,
    }
}

pub fn s_of(parity: Parity, m: i32, sigma: i32) -> i32 {
    match parity {
        Parity::Odd => m + 1 - sigma,
        Parity::Even => m - sigma,
    }
}
