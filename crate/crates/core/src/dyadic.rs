//! Elements `k / d^n` of `Z[1/d]`, kept in lowest terms.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// `k / d^n`, reduced so that `d` does not divide `k` unless `n = 0`.
/// The base `d` is context and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicClass {
    pub k: i64,
    pub n: u32,
}

fn pow_i128(d: u32, n: u32) -> Result<i128> {
    (d as i128)
        .checked_pow(n)
        .ok_or_else(|| Error::NotRepresentable(format!("{d}^{n} overflows")))
}

impl DyadicClass {
    pub const ZERO: DyadicClass = DyadicClass { k: 0, n: 0 };

    pub fn integer(k: i64) -> Self {
        DyadicClass { k, n: 0 }
    }

    /// `k / d^n` in lowest terms.
    pub fn new(k: i64, n: u32, d: u32) -> Result<Self> {
        Self::reduce(k as i128, n, d)
    }

    fn reduce(mut k: i128, mut n: u32, d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("base must be >= 2, got {d}")));
        }
        if k == 0 {
            return Ok(Self::ZERO);
        }
        while n > 0 && k % d as i128 == 0 {
            k /= d as i128;
            n -= 1;
        }
        let k = i64::try_from(k).map_err(|_| Error::NotRepresentable("numerator overflows i64".into()))?;
        Ok(DyadicClass { k, n })
    }

    pub fn add(&self, other: &DyadicClass, d: u32) -> Result<Self> {
        let n = self.n.max(other.n);
        let a = (self.k as i128)
            .checked_mul(pow_i128(d, n - self.n)?)
            .ok_or_else(|| Error::NotRepresentable("overflow".into()))?;
        let b = (other.k as i128)
            .checked_mul(pow_i128(d, n - other.n)?)
            .ok_or_else(|| Error::NotRepresentable("overflow".into()))?;
        Self::reduce(a + b, n, d)
    }

    pub fn neg(&self) -> Self {
        DyadicClass { k: -self.k, n: self.n }
    }

    /// Multiply by `d^m` (`m` may be negative).
    pub fn scale_pow(&self, m: i64, d: u32) -> Result<Self> {
        if m >= 0 {
            let f = pow_i128(d, m as u32)?;
            let k = (self.k as i128).checked_mul(f).ok_or_else(|| Error::NotRepresentable("overflow".into()))?;
            Self::reduce(k, self.n, d)
        } else {
            Self::reduce(self.k as i128, self.n + m.unsigned_abs() as u32, d)
        }
    }

    pub fn is_integer(&self) -> bool {
        self.n == 0
    }

    /// Representative in `[0, 1)` of the class modulo `Z`.
    pub fn fractional(&self, d: u32) -> Result<Self> {
        let den = pow_i128(d, self.n)?;
        Self::reduce((self.k as i128).rem_euclid(den), self.n, d)
    }

    pub fn to_f64(&self, d: u32) -> f64 {
        self.k as f64 / (d as f64).powi(self.n as i32)
    }

    pub fn display(&self, d: u32) -> String {
        if self.n == 0 {
            format!("{}", self.k)
        } else {
            format!("{}/{}^{}", self.k, d, self.n)
        }
    }
}

impl fmt::Display for DyadicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/d^{}", self.k, self.n)
    }
}
