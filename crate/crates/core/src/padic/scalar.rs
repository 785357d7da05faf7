use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::modular::{self, add_mod, inv_mod, mul_mod, pow};
use crate::error::{AflError, Result};

/// Valuation of a scalar known to finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(i32),
    /// The value is zero modulo `π^k`; its true valuation is at least `k`.
    AtLeast(i32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i32> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// A lower bound usable in comparisons (`i32::MAX` for exact zero).
    pub fn lower_bound(self) -> i32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
            Valuation::Infinite => i32::MAX,
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        use Valuation::*;
        match (self, other) {
            (Infinite, x) | (x, Infinite) => x,
            (Finite(a), Finite(b)) => Finite(a.min(b)),
            (Finite(a), AtLeast(b)) | (AtLeast(b), Finite(a)) => {
                if a <= b {
                    Finite(a)
                } else {
                    AtLeast(b)
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }

    /// Whether the valuation is provably at least `k`.
    pub fn at_least(self, k: i32) -> Result<bool> {
        match self {
            Valuation::Infinite => Ok(true),
            Valuation::Finite(v) => Ok(v >= k),
            Valuation::AtLeast(v) if v >= k => Ok(true),
            Valuation::AtLeast(_) => Err(AflError::PrecisionExhausted("valuation undetermined")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Zero,
    Approx { prec: i32 },
    Value { val: i32, unit: u128, rel: u32 },
}

/// An element of `Q_p` stored as `π^val · unit` with the unit known modulo
/// `p^rel`, or as an exact or approximate zero.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PadicScalar {
    p: u32,
    repr: Repr,
}

impl PadicScalar {
    pub fn zero(p: u32) -> Self {
        PadicScalar { p, repr: Repr::Zero }
    }

    /// A zero known only modulo `π^prec`.
    pub fn approx_zero(p: u32, prec: i32) -> Self {
        PadicScalar { p, repr: Repr::Approx { prec } }
    }

    pub fn from_i64(p: u32, n: i64, rel: u32) -> Self {
        if n == 0 {
            return Self::zero(p);
        }
        let modulus = pow(p, rel) as i128;
        let v = modular::p_adic_order(n.unsigned_abs() as u128, p);
        let unit = (n as i128 / (p as i128).pow(v)).rem_euclid(modulus) as u128;
        PadicScalar { p, repr: Repr::Value { val: v as i32, unit, rel } }
    }

    /// `π^val · unit`; factors of `p` in `unit` are moved into the valuation.
    pub fn from_parts(p: u32, val: i32, unit: u128, rel: u32) -> Self {
        Self::normalize(p, val, unit % pow(p, rel), rel)
    }

    fn normalize(p: u32, val: i32, s: u128, k: u32) -> Self {
        if s == 0 {
            return PadicScalar { p, repr: Repr::Approx { prec: val + k as i32 } };
        }
        let tz = modular::p_adic_order(s, p);
        PadicScalar {
            p,
            repr: Repr::Value { val: val + tz as i32, unit: s / pow(p, tz), rel: k - tz },
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn valuation(&self) -> Valuation {
        match self.repr {
            Repr::Zero => Valuation::Infinite,
            Repr::Approx { prec } => Valuation::AtLeast(prec),
            Repr::Value { val, .. } => Valuation::Finite(val),
        }
    }

    /// Absolute precision: the value is known modulo `π^k` (`None` when exact).
    pub fn abs_precision(&self) -> Option<i32> {
        match self.repr {
            Repr::Zero => None,
            Repr::Approx { prec } => Some(prec),
            Repr::Value { val, rel, .. } => Some(val + rel as i32),
        }
    }

    pub fn relative_precision(&self) -> Option<u32> {
        match self.repr {
            Repr::Value { rel, .. } => Some(rel),
            _ => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.repr == Repr::Zero
    }

    /// True for exact zeros and for values indistinguishable from zero.
    pub fn is_zero_at_precision(&self) -> bool {
        !matches!(self.repr, Repr::Value { .. })
    }

    pub fn unit(&self) -> Option<u128> {
        match self.repr {
            Repr::Value { unit, .. } => Some(unit),
            _ => None,
        }
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

    /// `η(x) = (-1)^{v(x)}`.
    pub fn eta(&self) -> Result<i8> {
        match self.repr {
            Repr::Zero => Err(AflError::EtaOfZero),
            Repr::Approx { .. } => Err(AflError::PrecisionExhausted("eta of imprecise zero")),
            Repr::Value { val, .. } => Ok(if val.rem_euclid(2) == 0 { 1 } else { -1 }),
        }
    }

    /// Residue modulo `p^k` of an integral scalar.
    pub fn to_residue(&self, k: u32) -> Result<u128> {
        let modulus = pow(self.p, k);
        match self.repr {
            Repr::Zero => Ok(0),
            Repr::Approx { prec } if prec >= k as i32 => Ok(0),
            Repr::Approx { .. } => Err(AflError::PrecisionExhausted("residue of imprecise zero")),
            Repr::Value { val, .. } if val < 0 => Err(AflError::InvalidInput("residue of non-integral scalar")),
            Repr::Value { val, .. } if val >= k as i32 => Ok(0),
            Repr::Value { val, unit, rel } => {
                if (val + rel as i32) < k as i32 {
                    return Err(AflError::PrecisionExhausted("residue beyond known digits"));
                }
                Ok(mul_mod(pow(self.p, val as u32), unit, modulus))
            }
        }
    }

    /// Multiplies by `π^k`.
    pub fn shift(&self, k: i32) -> Self {
        let repr = match self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Approx { prec } => Repr::Approx { prec: prec + k },
            Repr::Value { val, unit, rel } => Repr::Value { val: val + k, unit, rel },
        };
        PadicScalar { p: self.p, repr }
    }

    /// Drops digits beyond absolute precision `prec`.
    pub fn truncate(&self, prec: i32) -> Self {
        match self.repr {
            Repr::Zero => PadicScalar::approx_zero(self.p, prec),
            Repr::Approx { prec: a } => PadicScalar::approx_zero(self.p, a.min(prec)),
            Repr::Value { val, unit, rel } => {
                if val >= prec {
                    PadicScalar::approx_zero(self.p, prec)
                } else {
                    let r = rel.min((prec - val) as u32);
                    PadicScalar { p: self.p, repr: Repr::Value { val, unit: unit % pow(self.p, r), rel: r } }
                }
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        match self.repr {
            Repr::Zero => Err(AflError::InvertZero),
            Repr::Approx { .. } => Err(AflError::PrecisionExhausted("inverse of imprecise zero")),
            Repr::Value { val, unit, rel } => {
                let inv = inv_mod(unit, pow(self.p, rel)).expect("unit is invertible");
                Ok(PadicScalar { p: self.p, repr: Repr::Value { val: -val, unit: inv, rel } })
            }
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.inverse()?)
    }

    /// Square root in `Q_p`, `None` when the value is not a square.
    pub fn sqrt(&self) -> Result<Option<Self>> {
        match self.repr {
            Repr::Zero => Ok(Some(*self)),
            Repr::Approx { .. } => Err(AflError::PrecisionExhausted("square root of imprecise zero")),
            Repr::Value { val, unit, rel } => {
                if val.rem_euclid(2) != 0 {
                    return Ok(None);
                }
                Ok(modular::sqrt_mod_prime_power(unit, self.p, rel)
                    .map(|w| PadicScalar { p: self.p, repr: Repr::Value { val: val / 2, unit: w, rel } }))
            }
        }
    }

    /// Equality up to the precision both operands carry.
    ///
    /// Fails when the difference is an imprecise zero whose precision does
    /// not exceed the valuation of a nonzero operand, since then not even the
    /// leading digit was compared.
    pub fn eq_at_precision(&self, other: &Self) -> Result<bool> {
        if self.p != other.p {
            return Err(AflError::MismatchedContext);
        }
        let diff = *self - *other;
        match diff.repr {
            Repr::Value { .. } => Ok(false),
            Repr::Zero => Ok(true),
            Repr::Approx { prec } => {
                let floor = [self.valuation().finite(), other.valuation().finite()]
                    .into_iter()
                    .flatten()
                    .min();
                if floor.is_some_and(|f| prec <= f) {
                    Err(AflError::PrecisionExhausted("equality undecidable at this precision"))
                } else {
                    Ok(true)
                }
            }
        }
    }

    fn add_values(self, rhs: Self) -> Self {
        let p = self.p;
        match (self.repr, rhs.repr) {
            (Repr::Zero, _) => rhs,
            (_, Repr::Zero) => self,
            (Repr::Approx { prec: a }, Repr::Approx { prec: b }) => PadicScalar::approx_zero(p, a.min(b)),
            (Repr::Approx { prec }, Repr::Value { .. }) => rhs.truncate(prec),
            (Repr::Value { .. }, Repr::Approx { prec }) => self.truncate(prec),
            (
                Repr::Value { val: v1, unit: u1, rel: r1 },
                Repr::Value { val: v2, unit: u2, rel: r2 },
            ) => {
                let ((lv, lu, lr), (hv, hu, hr)) = match v1.cmp(&v2) {
                    Ordering::Greater => ((v2, u2, r2), (v1, u1, r1)),
                    _ => ((v1, u1, r1), (v2, u2, r2)),
                };
                let prec = (lv + lr as i32).min(hv + hr as i32);
                let k = (prec - lv) as u32;
                let modulus = pow(p, k);
                let d = (hv - lv) as u32;
                let low = lu % modulus;
                let s = if d >= k {
                    low
                } else {
                    add_mod(low, mul_mod(pow(p, d), hu % modulus, modulus), modulus)
                };
                PadicScalar::normalize(p, lv, s, k)
            }
        }
    }
}

impl Add for PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        self.add_values(rhs)
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> Self {
        match self.repr {
            Repr::Value { val, unit, rel } => {
                let m = pow(self.p, rel);
                PadicScalar { p: self.p, repr: Repr::Value { val, unit: m - unit, rel } }
            }
            _ => self,
        }
    }
}

impl Sub for PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        match (self.repr, rhs.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => PadicScalar::zero(p),
            (Repr::Approx { prec: a }, Repr::Approx { prec: b }) => PadicScalar::approx_zero(p, a + b),
            (Repr::Approx { prec }, Repr::Value { val, .. }) | (Repr::Value { val, .. }, Repr::Approx { prec }) => {
                PadicScalar::approx_zero(p, prec + val)
            }
            (
                Repr::Value { val: v1, unit: u1, rel: r1 },
                Repr::Value { val: v2, unit: u2, rel: r2 },
            ) => {
                let rel = r1.min(r2);
                let m = pow(p, rel);
                let unit = mul_mod(u1 % m, u2 % m, m);
                PadicScalar { p, repr: Repr::Value { val: v1 + v2, unit, rel } }
            }
        }
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Approx { prec } => write!(f, "O({}^{})", self.p, prec),
            Repr::Value { val, unit, rel } => {
                write!(f, "{}^{}*{} + O({}^{})", self.p, val, unit, self.p, val + rel as i32)
            }
        }
    }
}
