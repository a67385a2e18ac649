//! Complex numbers with an extended binary exponent.
//!
//! A value is `mantissa * 2^exp` where the mantissa is a `Complex64` whose
//! larger component has magnitude in `[0.5, 1)`. Orbits in the escaping region
//! grow like `|y|^(d^n)` and leave the `f64` range after a handful of steps;
//! this type keeps the 53-bit relative accuracy of doubles with an `i64`
//! exponent, which is all the Green's function and Böttcher sums need.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtComplex {
    mantissa: Complex64,
    exp: i64,
}

const LN2: f64 = std::f64::consts::LN_2;

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex {
        mantissa: Complex64::new(0.0, 0.0),
        exp: 0,
    };

    pub fn new(mantissa: Complex64, exp: i64) -> Self {
        ExtComplex { mantissa, exp }.normalized()
    }

    pub fn from_c64(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn from_real(r: f64) -> Self {
        Self::new(Complex64::new(r, 0.0), 0)
    }

    fn normalized(self) -> Self {
        let m = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if m == 0.0 || !m.is_finite() {
            return if m == 0.0 { Self::ZERO } else { self };
        }
        let (_, e) = frexp(m);
        ExtComplex {
            mantissa: Complex64::new(ldexp(self.mantissa.re, -e), ldexp(self.mantissa.im, -e)),
            exp: self.exp.saturating_add(e as i64),
        }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// Back to a double, `None` when the value is outside the `f64` range.
    pub fn to_c64(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if self.exp > 1024 {
            return None;
        }
        if self.exp < -1100 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let e = self.exp as i32;
        let z = Complex64::new(ldexp(self.mantissa.re, e), ldexp(self.mantissa.im, e));
        if z.re.is_finite() && z.im.is_finite() {
            Some(z)
        } else {
            None
        }
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.norm().ln() + self.exp as f64 * LN2
    }

    /// Base-2 log of the modulus; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.norm().log2() + self.exp as f64
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Principal logarithm `ln|z| + i arg z`.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.arg())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.mantissa * s, self.exp)
    }

    pub fn mul_c64(&self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.exp)
    }

    pub fn div(&self, other: &ExtComplex) -> Self {
        Self::new(self.mantissa / other.mantissa, self.exp.saturating_sub(other.exp))
    }

    pub fn powu(&self, n: u32) -> Self {
        let mut acc = ExtComplex::from_real(1.0);
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// `|self| >= |other|`, exact up to mantissa rounding.
    pub fn abs_ge(&self, other: &ExtComplex) -> bool {
        self.log2_abs() >= other.log2_abs()
    }

    /// `|self| >= r` for a nonnegative real `r`.
    pub fn abs_ge_real(&self, r: f64) -> bool {
        if r <= 0.0 {
            return true;
        }
        self.log2_abs() >= r.log2()
    }
}

impl Add for ExtComplex {
    type Output = ExtComplex;
    fn add(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = big.exp.saturating_sub(small.exp);
        if shift > 1100 {
            return big;
        }
        let s = shift as i32;
        let m = big.mantissa
            + Complex64::new(ldexp(small.mantissa.re, -s), ldexp(small.mantissa.im, -s));
        ExtComplex::new(m, big.exp)
    }
}

impl Neg for ExtComplex {
    type Output = ExtComplex;
    fn neg(self) -> ExtComplex {
        ExtComplex {
            mantissa: -self.mantissa,
            exp: self.exp,
        }
    }
}

impl Sub for ExtComplex {
    type Output = ExtComplex;
    fn sub(self, rhs: ExtComplex) -> ExtComplex {
        self + (-rhs)
    }
}

impl Mul for ExtComplex {
    type Output = ExtComplex;
    fn mul(self, rhs: ExtComplex) -> ExtComplex {
        ExtComplex::new(self.mantissa * rhs.mantissa, self.exp.saturating_add(rhs.exp))
    }
}

/// `x = m * 2^e` with `|m|` in `[0.5, 1)`.
pub(crate) fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    if raw_exp == 0 {
        // subnormal
        let (m, e) = frexp(x * f64::from_bits(0x4350000000000000)); // 2^54
        return (m, e - 54);
    }
    let e = raw_exp - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

/// `x * 2^e` without intermediate overflow for the ranges used here.
pub(crate) fn ldexp(x: f64, e: i32) -> f64 {
    if e > 1000 {
        return ldexp(x * 2f64.powi(1000), e - 1000);
    }
    if e < -1000 {
        return ldexp(x * 2f64.powi(-1000), e + 1000);
    }
    x * 2f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frexp_roundtrip() {
        for &x in &[1.0, 0.75, 3.0, -1e300, 1e-310, 123456.789] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m.abs()), "{x}: {m}");
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn arithmetic_matches_doubles_in_range() {
        let a = Complex64::new(3.5, -1.25);
        let b = Complex64::new(-0.5, 7.0);
        let ea = ExtComplex::from_c64(a);
        let eb = ExtComplex::from_c64(b);
        assert!(((ea * eb).to_c64().unwrap() - a * b).norm() < 1e-14);
        assert!(((ea + eb).to_c64().unwrap() - (a + b)).norm() < 1e-14);
        assert!(((ea - eb).to_c64().unwrap() - (a - b)).norm() < 1e-14);
        assert!((ea.div(&eb).to_c64().unwrap() - a / b).norm() < 1e-14);
        assert!((ea.ln_abs() - a.norm().ln()).abs() < 1e-15);
    }

    #[test]
    fn squaring_beyond_double_range() {
        // 4^(2^12) = 2^8192
        let mut z = ExtComplex::from_real(4.0);
        for _ in 0..12 {
            z = z * z;
        }
        assert!(z.to_c64().is_none());
        assert!((z.log2_abs() - 8192.0).abs() < 1e-9);
        assert!(z.arg().abs() < 1e-15);
    }

    #[test]
    fn addition_of_disparate_magnitudes() {
        let big = ExtComplex::from_real(1.0).scale(2f64.powi(900)) * ExtComplex::from_real(2f64.powi(900));
        let one = ExtComplex::from_real(1.0);
        assert_eq!((big + one).log2_abs(), big.log2_abs());
        assert_eq!((big - big).is_zero(), true);
    }
}
