//! Hénon maps `H(x, y) = (y, p(y) - a x)` with `p` monic of degree `d >= 2`
//! and vanishing `y^(d-1)` coefficient.

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{gauss_from_c64, gauss_int, gauss_to_c64, GaussRat};
use crate::ext::ExtComplex;

/// A point of C^2. Both coordinates are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPair {
    pub x: Complex64,
    pub y: Complex64,
}

impl ComplexPair {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        ComplexPair { x, y }
    }

    pub fn from_parts(x_re: f64, x_im: f64, y_re: f64, y_im: f64) -> Self {
        ComplexPair {
            x: Complex64::new(x_re, x_im),
            y: Complex64::new(y_re, y_im),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.re.is_finite() && self.x.im.is_finite() && self.y.re.is_finite() && self.y.im.is_finite()
    }

    /// Sup norm `max(|x|, |y|)`.
    pub fn norm_max(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn swap(&self) -> Self {
        ComplexPair { x: self.y, y: self.x }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x.re, self.x.im, self.y.re, self.y.im]
    }
}

impl Serialize for ComplexPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(4))?;
        for v in self.as_array() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PairVisitor;
        impl<'de> Visitor<'de> for PairVisitor {
            type Value = ComplexPair;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[x_re, x_im, y_re, y_im]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<ComplexPair, A::Error> {
                let mut v = [0.0f64; 4];
                for (i, slot) in v.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(5, &self));
                }
                let p = ComplexPair::from_parts(v[0], v[1], v[2], v[3]);
                if !p.is_finite() {
                    return Err(de::Error::custom("non-finite coordinate"));
                }
                Ok(p)
            }
        }
        d.deserialize_seq(PairVisitor)
    }
}

/// `p(y) = y^d + a_{d-2} y^{d-2} + ... + a_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly {
    degree: u32,
    /// `a_0 ..= a_{d-2}`
    coeffs: Vec<Complex64>,
}

impl MonicPoly {
    pub fn new(degree: u32, coeffs: Vec<Complex64>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree must be >= 2, got {degree}")));
        }
        if coeffs.len() != (degree - 1) as usize {
            return Err(Error::InvalidMap(format!(
                "degree {degree} needs {} lower coefficients, got {}",
                degree - 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        Ok(MonicPoly { degree, coeffs })
    }

    /// `y^d`.
    pub fn pure(degree: u32) -> Result<Self> {
        Self::new(degree, vec![Complex64::new(0.0, 0.0); degree.saturating_sub(1) as usize])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `a_0 ..= a_{d-2}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `y^j` for `0 <= j <= d` (1 at `j = d`, 0 at `j = d-1`).
    pub fn coeff(&self, j: u32) -> Complex64 {
        if j == self.degree {
            Complex64::new(1.0, 0.0)
        } else if j + 1 == self.degree || j > self.degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[j as usize]
        }
    }

    /// `sum |a_i|`.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for j in (0..self.degree).rev() {
            acc = acc * y + self.coeff(j);
        }
        acc
    }

    pub fn eval_ext(&self, y: ExtComplex) -> ExtComplex {
        let mut acc = ExtComplex::from_real(1.0);
        for j in (0..self.degree).rev() {
            acc = acc * y;
            let c = self.coeff(j);
            if c.re != 0.0 || c.im != 0.0 {
                acc = acc + ExtComplex::from_c64(c);
            }
        }
        acc
    }

    /// `p(y) - y^d`, evaluated without forming `y^d`.
    pub fn eval_lower_ext(&self, y: ExtComplex) -> ExtComplex {
        let mut acc = ExtComplex::ZERO;
        for j in (0..self.degree.saturating_sub(1)).rev() {
            acc = acc * y + ExtComplex::from_c64(self.coeffs[j as usize]);
        }
        acc
    }
}

/// `H(x, y) = (y, p(y) - a x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HenonMap {
    p: MonicPoly,
    a: Complex64,
}

impl HenonMap {
    pub fn new(p: MonicPoly, a: Complex64) -> Result<Self> {
        if a.re == 0.0 && a.im == 0.0 {
            return Err(Error::InvalidMap("a must be nonzero".into()));
        }
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidMap("a must be finite".into()));
        }
        Ok(HenonMap { p, a })
    }

    /// `(y, y^d - a x)`.
    pub fn pure(degree: u32, a: Complex64) -> Result<Self> {
        Self::new(MonicPoly::pure(degree)?, a)
    }

    /// The map `(y, y^2 - x)` used throughout the examples.
    pub fn quadratic_standard() -> Self {
        Self::pure(2, Complex64::new(1.0, 0.0)).expect("valid map")
    }

    pub fn p(&self) -> &MonicPoly {
        &self.p
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn degree(&self) -> u32 {
        self.p.degree
    }

    pub fn apply(&self, z: ComplexPair) -> Result<ComplexPair> {
        let out = ComplexPair::new(z.y, self.p.eval(z.y) - self.a * z.x);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::OrbitOverflow { last_finite: 0 })
        }
    }

    /// `H^{-1}(x, y) = ((p(x) - y)/a, x)`.
    pub fn apply_inverse(&self, z: ComplexPair) -> Result<ComplexPair> {
        let out = ComplexPair::new((self.p.eval(z.x) - z.y) / self.a, z.x);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::OrbitOverflow { last_finite: 0 })
        }
    }

    /// `H^n(z)` for `n >= 0`, or `H^{-|n|}(z)` for negative `n`.
    pub fn iterate(&self, z: ComplexPair, n: i64) -> Result<ComplexPair> {
        let mut w = z;
        for k in 0..n.unsigned_abs() as usize {
            let next = if n >= 0 { self.apply(w) } else { self.apply_inverse(w) };
            w = next.map_err(|_| Error::OrbitOverflow { last_finite: k })?;
        }
        Ok(w)
    }

    pub fn apply_ext(&self, x: ExtComplex, y: ExtComplex) -> (ExtComplex, ExtComplex) {
        (y, self.p.eval_ext(y) - x.mul_c64(self.a))
    }

    pub fn apply_inverse_ext(&self, x: ExtComplex, y: ExtComplex) -> (ExtComplex, ExtComplex) {
        let a = ExtComplex::from_c64(self.a);
        ((self.p.eval_ext(x) - y).div(&a), x)
    }

    /// `R0 = max(2, 2(1 + |a| + sum |a_i|))`. On `V+_{R0}` one has
    /// `|p(y) - a x| >= 2|y|`, and symmetrically `|p(x) - y| >= 2|a||x|` on
    /// `V-_{R0}`.
    pub fn escape_radius(&self) -> f64 {
        (2.0 * (1.0 + self.a.norm() + self.p.coeff_l1())).max(2.0)
    }

    /// `sum |a_i| + |a|`: the constant in the forward perturbation bound.
    pub(crate) fn forward_perturbation_constant(&self) -> f64 {
        self.p.coeff_l1() + self.a.norm()
    }

    /// `sum |a_i| + 1`: the constant for the inverse map.
    pub(crate) fn backward_perturbation_constant(&self) -> f64 {
        self.p.coeff_l1() + 1.0
    }

    pub fn classify(&self, z: ComplexPair, radius: f64) -> Result<FiltrationRegion> {
        let r0 = self.escape_radius();
        if !(radius >= r0) {
            return Err(Error::RadiusTooSmall { radius, escape_radius: r0 });
        }
        Ok(FiltrationRegion {
            tag: region_of(z.x.norm(), z.y.norm(), radius),
            radius,
        })
    }

    pub fn to_spec(&self) -> MapSpec {
        MapSpec {
            d: self.degree(),
            a: [self.a.re, self.a.im],
            q: self.p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

pub(crate) fn region_of(ax: f64, ay: f64, radius: f64) -> Region {
    if ay >= ax.max(radius) {
        Region::Vplus
    } else if ax >= ay.max(radius) {
        Region::Vminus
    } else {
        Region::V
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `|x|, |y| < R` (up to the tie rules)
    V,
    /// `|y| >= max(|x|, R)`
    Vplus,
    /// `|x| >= max(|y|, R)`
    Vminus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiltrationRegion {
    pub tag: Region,
    pub radius: f64,
}

/// Conjugate a map with a general monic `p_raw` (coefficients `c_0 ..= c_{d-1}`,
/// leading 1 implied) into normal form by the translation `T(x, y) = (x + t, y + t)`,
/// `t = -c_{d-1}/d`. Returns the normalized map and `t`.
///
/// The shift is carried out in exact rational arithmetic, so the `y^(d-1)`
/// coefficient of the result is exactly zero.
pub fn normalize(raw_coeffs: &[Complex64], a: Complex64) -> Result<(HenonMap, Complex64)> {
    let degree = raw_coeffs.len() as u32;
    if degree < 2 {
        return Err(Error::InvalidMap("degree must be >= 2".into()));
    }
    let c: Vec<GaussRat> = raw_coeffs.iter().map(|&z| gauss_from_c64(z)).collect::<Result<_>>()?;
    let a_exact = gauss_from_c64(a)?;
    let t = -(c[degree as usize - 1].clone() / gauss_int(degree as i64));

    // full coefficient vector of p_raw, leading 1 appended
    let mut full: Vec<GaussRat> = c.clone();
    full.push(gauss_int(1));
    let shifted = taylor_shift(&full, &t);
    debug_assert!(num_traits::Zero::is_zero(&shifted[degree as usize - 1]));

    let mut lower: Vec<GaussRat> = shifted[..degree as usize - 1].to_vec();
    lower[0] = lower[0].clone() - (a_exact + gauss_int(1)) * t.clone();
    let coeffs = lower.iter().map(gauss_to_c64).collect();
    let map = HenonMap::new(MonicPoly::new(degree, coeffs)?, a)?;
    Ok((map, gauss_to_c64(&t)))
}

/// Coefficients of `f(y + t)` given those of `f` (lowest degree first).
fn taylor_shift(coeffs: &[GaussRat], t: &GaussRat) -> Vec<GaussRat> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let add = out[j + 1].clone() * t.clone();
            out[j] = out[j].clone() + add;
        }
    }
    out
}

/// The shared JSON map document `{"d": int, "a": [re, im], "q": [[re, im], ...]}`,
/// `q` listed from `a_0` upward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub d: u32,
    pub a: [f64; 2],
    pub q: Vec<[f64; 2]>,
}

impl MapSpec {
    pub fn to_map(&self) -> Result<HenonMap> {
        let coeffs = self.q.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        HenonMap::new(MonicPoly::new(self.d, coeffs)?, Complex64::new(self.a[0], self.a[1]))
    }

    pub fn from_json(text: &str) -> Result<HenonMap> {
        let spec: MapSpec = serde_json::from_str(text)?;
        spec.to_map()
    }
}
