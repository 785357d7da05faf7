use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{PadicScalar, Valuation};
use crate::error::{AflError, Result};

/// `re + im·τ` in `F = F0(τ)` with `τ² = ε`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct QuadExtScalar {
    re: PadicScalar,
    im: PadicScalar,
    eps: u32,
}

impl QuadExtScalar {
    pub fn new(re: PadicScalar, im: PadicScalar, eps: u32) -> Self {
        debug_assert_eq!(re.p(), im.p());
        QuadExtScalar { re, im, eps }
    }

    pub fn re(&self) -> PadicScalar {
        self.re
    }

    pub fn im(&self) -> PadicScalar {
        self.im
    }

    pub fn p(&self) -> u32 {
        self.re.p()
    }

    pub fn epsilon(&self) -> u32 {
        self.eps
    }

    pub fn conj(&self) -> Self {
        QuadExtScalar { re: self.re, im: -self.im, eps: self.eps }
    }

    pub fn norm(&self) -> PadicScalar {
        self.re * self.re - self.eps_mul(self.im * self.im)
    }

    pub fn trace(&self) -> PadicScalar {
        self.re + self.re
    }

    fn eps_mul(&self, x: PadicScalar) -> PadicScalar {
        // ε is a unit, so relative precision is unchanged by this product.
        let e = PadicScalar::from_i64(self.p(), self.eps as i64, x.relative_precision().unwrap_or(1));
        if x.is_zero_at_precision() {
            x
        } else {
            x * e
        }
    }

    /// `min(v(re), v(im))`, exact because `1, τ` stay independent mod `p`.
    pub fn valuation(&self) -> Valuation {
        self.re.valuation().min(self.im.valuation())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re.is_exact_zero() && self.im.is_exact_zero()
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.re.is_zero_at_precision() && self.im.is_zero_at_precision()
    }

    pub fn is_integral(&self) -> Result<bool> {
        self.valuation().at_least(0)
    }

    pub fn is_unit(&self) -> Result<bool> {
        match self.valuation() {
            Valuation::Finite(v) => Ok(v == 0),
            Valuation::Infinite => Ok(false),
            Valuation::AtLeast(k) if k >= 1 => Ok(false),
            Valuation::AtLeast(_) => Err(AflError::PrecisionExhausted("unit test on imprecise zero")),
        }
    }

    pub fn in_f0(&self) -> bool {
        self.im.is_exact_zero()
    }

    pub fn in_tau_f0(&self) -> bool {
        self.re.is_exact_zero()
    }

    pub fn eta(&self) -> Result<i8> {
        match self.valuation() {
            Valuation::Infinite => Err(AflError::EtaOfZero),
            Valuation::AtLeast(_) => Err(AflError::PrecisionExhausted("eta of imprecise zero")),
            Valuation::Finite(v) => Ok(if v.rem_euclid(2) == 0 { 1 } else { -1 }),
        }
    }

    pub fn scale(&self, c: PadicScalar) -> Self {
        QuadExtScalar { re: self.re * c, im: self.im * c, eps: self.eps }
    }

    pub fn shift(&self, k: i32) -> Self {
        QuadExtScalar { re: self.re.shift(k), im: self.im.shift(k), eps: self.eps }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(AflError::InvertZero);
        }
        let n = self.norm();
        let ninv = n.inverse()?;
        Ok(self.conj().scale(ninv))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.inverse()?)
    }

    pub fn eq_at_precision(&self, other: &Self) -> Result<bool> {
        if self.eps != other.eps {
            return Err(AflError::MismatchedContext);
        }
        Ok(self.re.eq_at_precision(&other.re)? && self.im.eq_at_precision(&other.im)?)
    }
}

impl Add for QuadExtScalar {
    type Output = QuadExtScalar;
    fn add(self, rhs: Self) -> Self {
        QuadExtScalar { re: self.re + rhs.re, im: self.im + rhs.im, eps: self.eps }
    }
}

impl Sub for QuadExtScalar {
    type Output = QuadExtScalar;
    fn sub(self, rhs: Self) -> Self {
        QuadExtScalar { re: self.re - rhs.re, im: self.im - rhs.im, eps: self.eps }
    }
}

impl Neg for QuadExtScalar {
    type Output = QuadExtScalar;
    fn neg(self) -> Self {
        QuadExtScalar { re: -self.re, im: -self.im, eps: self.eps }
    }
}

impl Mul for QuadExtScalar {
    type Output = QuadExtScalar;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re * rhs.re + self.eps_mul(self.im * rhs.im);
        let im = self.re * rhs.im + self.im * rhs.re;
        QuadExtScalar { re, im, eps: self.eps }
    }
}

impl fmt::Debug for QuadExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QuadExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})τ", self.re, self.im)
    }
}
