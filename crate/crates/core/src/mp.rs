//! Multiprecision complex points, used where doubles lose everything to
//! cancellation: orbits started deep in `V-` and pulled-back paths, whose
//! coordinates can have thousands of binary digits that all matter when
//! the orbit is pushed forward again.

use dashu_base::BitTest;
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
use num_complex::Complex64;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ext::{ldexp, ExtComplex};
use crate::henon::{ComplexPair, HenonMap};

/// Binary multiprecision real, rounding toward zero.
pub type Real = FBig;

/// Precision of a value that came from a double.
pub const F64_PREC: usize = 53;

fn real_from_f64(x: f64) -> Real {
    // finite by construction everywhere this is called
    Real::try_from(x).unwrap_or(Real::ZERO)
}

fn real_with_prec(x: Real, prec: usize) -> Real {
    x.with_precision(prec).value()
}

/// `(mantissa, exponent)` with `x ≈ mantissa * 2^exponent`.
fn real_to_parts(x: &Real) -> (f64, i64) {
    let repr = x.repr();
    let sig = repr.significand();
    let bits = sig.bit_len();
    if bits == 0 {
        return (0.0, 0);
    }
    let shift = bits.saturating_sub(62);
    let top: IBig = sig.clone() >> shift;
    let m = i64::try_from(top).unwrap_or(0) as f64;
    (m, repr.exponent() as i64 + shift as i64)
}

fn real_from_parts(m: f64, e: i64, prec: usize) -> Real {
    if m == 0.0 {
        return Real::ZERO;
    }
    let (sig, ex) = real_from_f64(m).into_repr().into_parts();
    real_with_prec(Real::from_parts(sig, ex + e as isize), prec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpComplex {
    pub re: Real,
    pub im: Real,
}

impl MpComplex {
    pub fn zero() -> Self {
        MpComplex { re: Real::ZERO, im: Real::ZERO }
    }

    pub fn from_c64(z: Complex64) -> Self {
        MpComplex {
            re: real_from_f64(z.re),
            im: real_from_f64(z.im),
        }
    }

    pub fn from_ext(z: &ExtComplex, prec: usize) -> Self {
        let m = z.mantissa();
        MpComplex {
            re: real_from_parts(m.re, z.exponent(), prec),
            im: real_from_parts(m.im, z.exponent(), prec),
        }
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        MpComplex {
            re: real_with_prec(self.re.clone(), prec),
            im: real_with_prec(self.im.clone(), prec),
        }
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    pub fn to_ext(&self) -> ExtComplex {
        let (mr, er) = real_to_parts(&self.re);
        let (mi, ei) = real_to_parts(&self.im);
        if mr == 0.0 && mi == 0.0 {
            return ExtComplex::ZERO;
        }
        let e = if mr == 0.0 {
            ei
        } else if mi == 0.0 {
            er
        } else {
            er.max(ei)
        };
        let sh = |m: f64, ex: i64| {
            if m == 0.0 || e - ex > 1100 {
                0.0
            } else {
                ldexp(m, (ex - e) as i32)
            }
        };
        ExtComplex::new(Complex64::new(sh(mr, er), sh(mi, ei)), e)
    }

    /// Nearest double pair, `None` outside the double range.
    pub fn to_c64(&self) -> Option<Complex64> {
        self.to_ext().to_c64()
    }

    pub fn log2_abs(&self) -> f64 {
        self.to_ext().log2_abs()
    }

    pub fn add(&self, o: &MpComplex) -> MpComplex {
        MpComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &MpComplex) -> MpComplex {
        MpComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &MpComplex) -> MpComplex {
        MpComplex {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn scale(&self, s: &Real) -> MpComplex {
        MpComplex { re: &self.re * s, im: &self.im * s }
    }

    pub fn is_zero(&self) -> bool {
        self.re == Real::ZERO && self.im == Real::ZERO
    }

    pub fn to_decimal_strings(&self, digits: usize) -> (String, String) {
        (real_to_decimal(&self.re, digits), real_to_decimal(&self.im, digits))
    }
}

/// Decimal text for a JSON number. Values that are exactly doubles are
/// written in the shortest round-trip form.
pub fn real_to_decimal(x: &Real, digits: usize) -> String {
    let (m, e) = real_to_parts(x);
    let exact_double = x.repr().significand().bit_len() <= 53 && (-1000..=1000).contains(&e);
    if exact_double {
        let v = ldexp(m, e as i32);
        if v.is_finite() {
            return format_f64(v);
        }
    }
    let dec = x.clone().with_base_and_precision::<10>(digits.max(17)).value();
    let repr = dec.repr();
    format!("{}e{}", repr.significand(), repr.exponent())
}

fn format_f64(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "0".into())
}

/// Parse the text of a JSON number. Short inputs are taken as doubles, long
/// or out-of-range ones at a binary precision matching their digit count.
pub fn real_from_decimal(text: &str) -> Result<(Real, usize)> {
    let t = text.trim();
    let mantissa_part = t.split(['e', 'E']).next().unwrap_or("");
    let sig_digits = mantissa_part
        .chars()
        .filter(|c| c.is_ascii_digit())
        .collect::<String>()
        .trim_start_matches('0')
        .len();
    if sig_digits <= 17 {
        if let Ok(v) = t.parse::<f64>() {
            if v.is_finite() && (v != 0.0 || sig_digits == 0) {
                return Ok((real_from_f64(v), F64_PREC));
            }
        }
    }
    let dec = DBig::from_str(t).map_err(|e| Error::InvalidInput(format!("bad number {t}: {e:?}")))?;
    let prec = ((sig_digits.max(1) as f64) * std::f64::consts::LOG2_10).ceil() as usize + 16;
    Ok((dec.with_base_and_precision::<2>(prec).value().with_rounding(), prec))
}

/// A point of C^2 at a chosen binary precision.
#[derive(Debug, Clone, PartialEq)]
pub struct MpPair {
    pub x: MpComplex,
    pub y: MpComplex,
}

impl MpPair {
    pub fn from_pair(z: ComplexPair) -> Self {
        MpPair {
            x: MpComplex::from_c64(z.x),
            y: MpComplex::from_c64(z.y),
        }
    }

    pub fn from_ext(x: &ExtComplex, y: &ExtComplex, prec: usize) -> Self {
        MpPair {
            x: MpComplex::from_ext(x, prec),
            y: MpComplex::from_ext(y, prec),
        }
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        MpPair {
            x: self.x.with_precision(prec),
            y: self.y.with_precision(prec),
        }
    }

    pub fn precision(&self) -> usize {
        self.x.precision().max(self.y.precision())
    }

    pub fn to_ext(&self) -> (ExtComplex, ExtComplex) {
        (self.x.to_ext(), self.y.to_ext())
    }

    /// Nearest double pair, if the point is inside the double range.
    pub fn to_pair(&self) -> Option<ComplexPair> {
        Some(ComplexPair::new(self.x.to_c64()?, self.y.to_c64()?))
    }

    /// `log2 max(|x|, |y|)`.
    pub fn log2_norm(&self) -> f64 {
        self.x.log2_abs().max(self.y.log2_abs())
    }

    /// Linear interpolation `(1 - t) self + t other`, `t` a double.
    pub fn lerp(&self, other: &MpPair, t: f64) -> MpPair {
        let prec = self.precision().max(other.precision());
        let t = real_with_prec(real_from_f64(t), prec);
        let s = &real_with_prec(real_from_f64(1.0), prec) - &t;
        MpPair {
            x: self.x.scale(&s).add(&other.x.scale(&t)),
            y: self.y.scale(&s).add(&other.y.scale(&t)),
        }
    }
}

/// A Hénon map with coefficients as exact multiprecision values.
#[derive(Debug, Clone)]
pub struct MpMap {
    degree: u32,
    /// coefficient of y^j for j = 0..=d-2
    coeffs: Vec<Option<MpComplex>>,
    a: MpComplex,
    a_conj_over_norm2: Option<(MpComplex, Real)>,
}

impl MpMap {
    pub fn new(map: &HenonMap) -> Self {
        let coeffs = map
            .p()
            .coeffs()
            .iter()
            .map(|c| {
                if c.re == 0.0 && c.im == 0.0 {
                    None
                } else {
                    Some(MpComplex::from_c64(*c))
                }
            })
            .collect();
        let a = map.a();
        let a_mp = MpComplex::from_c64(a);
        let conj = MpComplex::from_c64(a.conj());
        // |a|^2 exactly: a product of doubles needs at most 106 bits
        let n2 = real_with_prec(&a_mp.re * &a_mp.re, 120) + real_with_prec(&a_mp.im * &a_mp.im, 120);
        MpMap {
            degree: map.degree(),
            coeffs,
            a: a_mp,
            a_conj_over_norm2: Some((conj, real_with_prec(n2, 240))),
        }
    }

    fn eval_p(&self, y: &MpComplex) -> MpComplex {
        let mut acc = y.clone();
        for j in (0..self.degree as usize - 1).rev() {
            acc = acc.mul(y);
            if let Some(c) = &self.coeffs[j] {
                acc = acc.add(c);
            }
        }
        acc
    }

    pub fn apply(&self, z: &MpPair) -> MpPair {
        MpPair {
            x: z.y.clone(),
            y: self.eval_p(&z.y).sub(&self.a.mul(&z.x)),
        }
    }

    pub fn apply_inverse(&self, z: &MpPair) -> MpPair {
        let num = self.eval_p(&z.x).sub(&z.y);
        let (conj, n2) = self.a_conj_over_norm2.as_ref().expect("set in new");
        let prec = num.precision().max(F64_PREC);
        let q = num.mul(conj);
        let n2 = real_with_prec(n2.clone(), prec);
        MpPair {
            x: MpComplex { re: &q.re / &n2, im: &q.im / &n2 },
            y: z.x.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_roundtrip() {
        for &(re, im, e) in &[(0.75, -0.5, 0i64), (0.5, 0.0, 5000), (-0.9, 1e-30, -4000)] {
            let z = ExtComplex::new(Complex64::new(re, im), e);
            let w = MpComplex::from_ext(&z, 200).to_ext();
            assert!((w.mantissa() - z.mantissa()).norm() < 1e-15);
            assert_eq!(w.exponent(), z.exponent());
        }
    }

    #[test]
    fn map_matches_doubles() {
        let h = HenonMap::new(
            crate::henon::MonicPoly::new(3, vec![Complex64::new(0.5, 0.25), Complex64::new(-1.0, 2.0)]).unwrap(),
            Complex64::new(0.75, -1.5),
        )
        .unwrap();
        let m = MpMap::new(&h);
        let z = ComplexPair::from_parts(0.3, -1.2, 2.5, 0.7);
        let f = h.apply(z).unwrap();
        let g = m.apply(&MpPair::from_pair(z).with_precision(128)).to_pair().unwrap();
        assert!((f.x - g.x).norm() + (f.y - g.y).norm() < 1e-13);
        let f = h.apply_inverse(z).unwrap();
        let g = m.apply_inverse(&MpPair::from_pair(z).with_precision(128)).to_pair().unwrap();
        assert!((f.x - g.x).norm() + (f.y - g.y).norm() < 1e-13);
    }

    /// Deep pull-back then push-forward recovers the start only at high precision.
    #[test]
    fn deep_roundtrip_needs_precision() {
        let h = HenonMap::quadratic_standard();
        let m = MpMap::new(&h);
        let start = MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 1000.0, 1.0)).with_precision(2000);
        let mut z = start.clone();
        for _ in 0..8 {
            z = m.apply_inverse(&z);
        }
        assert!(z.log2_norm() > 1000.0);
        for _ in 0..8 {
            z = m.apply(&z);
        }
        let back = z.to_pair().unwrap();
        assert!((back.y - Complex64::new(1000.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn decimal_text_roundtrip() {
        let x = Real::try_from(0.1f64).unwrap();
        assert_eq!(real_to_decimal(&x, 30), "0.1");
        let big = MpComplex::from_ext(&ExtComplex::new(Complex64::new(0.7, 0.0), 5000), 300);
        let text = real_to_decimal(&big.re, 100);
        let (back, prec) = real_from_decimal(&text).unwrap();
        assert!(prec > 300);
        let d = MpComplex { re: back, im: Real::ZERO }.to_ext();
        assert_eq!(d.exponent(), 5000);
        assert!((d.mantissa().re - 0.7).abs() < 1e-15);
        assert_eq!(real_from_decimal("-2.5").unwrap().1, F64_PREC);
    }
}
