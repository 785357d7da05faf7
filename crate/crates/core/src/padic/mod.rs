//! p-adic scalars over `Q_p` and its unramified quadratic extension.

pub mod modular;
mod quad;
mod sample;
mod scalar;

pub use quad::QuadExtScalar;
pub use sample::{sample, sample_f0, Field, SampleSpec};
pub use scalar::{PadicScalar, Valuation};

use crate::error::{AflError, Result};
use serde::Serialize;

/// Fixes the prime `p`, the non-residue `ε = τ²` and the relative precision
/// given to freshly constructed scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrecisionContext {
    p: u32,
    epsilon: u32,
    precision: u32,
}

impl PrecisionContext {
    pub fn new(p: u32, precision: u32) -> Result<Self> {
        if p < 5 || !modular::is_prime(p) {
            return Err(AflError::InvalidPrime(p));
        }
        Self::with_epsilon(p, precision, modular::smallest_nonresidue(p))
    }

    pub fn with_epsilon(p: u32, precision: u32, epsilon: u32) -> Result<Self> {
        if p < 5 || !modular::is_prime(p) {
            return Err(AflError::InvalidPrime(p));
        }
        if epsilon == 0
            || epsilon >= p
            || modular::is_square_mod_prime(epsilon as u64, p as u64)
        {
            return Err(AflError::InvalidInput("epsilon must be a non-residue unit mod p"));
        }
        let max = Self::max_precision(p);
        if precision == 0 || precision > max {
            return Err(AflError::PrecisionOutOfRange { p, requested: precision, max });
        }
        Ok(PrecisionContext { p, epsilon, precision })
    }

    /// Largest relative precision `r` with `p^r < 2^126`.
    pub fn max_precision(p: u32) -> u32 {
        let mut r = 0;
        let mut acc: u128 = 1;
        while let Some(next) = acc.checked_mul(p as u128) {
            if next >= 1u128 << 126 {
                break;
            }
            acc = next;
            r += 1;
        }
        r
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::with_epsilon(self.p, precision, self.epsilon)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Residue field size of `F0`.
    pub fn q(&self) -> u32 {
        self.p
    }

    pub fn epsilon(&self) -> u32 {
        self.epsilon
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn zero(&self) -> PadicScalar {
        PadicScalar::zero(self.p)
    }

    pub fn one(&self) -> PadicScalar {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> PadicScalar {
        PadicScalar::from_i64(self.p, n, self.precision)
    }

    /// `π^val · unit` with `unit` reduced to the context precision.
    pub fn from_unit(&self, val: i32, unit: u128) -> PadicScalar {
        PadicScalar::from_parts(self.p, val, unit, self.precision)
    }

    pub fn pi(&self) -> PadicScalar {
        self.pi_pow(1)
    }

    pub fn pi_pow(&self, k: i32) -> PadicScalar {
        self.from_unit(k, 1)
    }

    pub fn quad(&self, re: PadicScalar, im: PadicScalar) -> QuadExtScalar {
        QuadExtScalar::new(re, im, self.epsilon)
    }

    pub fn qzero(&self) -> QuadExtScalar {
        self.quad(self.zero(), self.zero())
    }

    pub fn qone(&self) -> QuadExtScalar {
        self.embed(self.one())
    }

    pub fn embed(&self, x: PadicScalar) -> QuadExtScalar {
        self.quad(x, self.zero())
    }

    pub fn qint(&self, n: i64) -> QuadExtScalar {
        self.embed(self.int(n))
    }

    pub fn tau(&self) -> QuadExtScalar {
        self.quad(self.zero(), self.one())
    }

    pub fn qpi_pow(&self, k: i32) -> QuadExtScalar {
        self.embed(self.pi_pow(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_rejects_bad_primes() {
        assert_eq!(PrecisionContext::new(3, 10), Err(AflError::InvalidPrime(3)));
        assert_eq!(PrecisionContext::new(9, 10), Err(AflError::InvalidPrime(9)));
        assert!(PrecisionContext::new(5, 0).is_err());
        assert_eq!(PrecisionContext::max_precision(5), 54);
        assert_eq!(PrecisionContext::max_precision(7), 44);
        let ctx = PrecisionContext::new(7, 20).unwrap();
        assert_eq!(ctx.epsilon(), 3);
        assert!(PrecisionContext::with_epsilon(5, 10, 4).is_err());
    }
}
