//! Levels `c1, c2` give biholomorphic `Ω_{c1}, Ω_{c2}` for the same map iff
//! `c1 = c2 d^n` for an integer `n`. Also the continuum of pairwise distinct
//! levels in `(c/d, c)` and the involution `(x, y) ↦ (y, x)` exchanging
//! `G+` and `G-` for `(y, y² - x)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greens::{green_minus, green_plus};
use crate::henon::{ComplexPair, HenonMap};

/// Relative tolerance for levels given as floating point numbers.
pub const FLOAT_LEVEL_TOL: f64 = 1e-12;

/// A level, exact when it was given as a rational.
#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    Exact(BigRational),
    Float(f64),
}

impl Level {
    pub fn to_f64(&self) -> f64 {
        match self {
            Level::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Level::Float(x) => *x,
        }
    }

    pub fn integer(n: i64) -> Self {
        Level::Exact(BigRational::from_integer(n.into()))
    }

    fn is_positive(&self) -> bool {
        match self {
            Level::Exact(r) => r.is_positive(),
            Level::Float(x) => *x > 0.0 && x.is_finite(),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Exact(r) => write!(f, "{r}"),
            Level::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Integers, fractions `p/q` and plain decimals are read exactly; anything
/// else (exponents, `inf`) as a double.
impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::BadLevel(format!("cannot read level {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Ok(Level::Exact(BigRational::new(p, q)));
        }
        let plain = s.trim_start_matches(['-', '+']);
        if !plain.is_empty() && plain.chars().all(|c| c.is_ascii_digit() || c == '.') && plain.matches('.').count() <= 1 {
            let (int, frac) = plain.split_once('.').unwrap_or((plain, ""));
            let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = BigRational::new(digits, den);
            return Ok(Level::Exact(if s.starts_with('-') { -r } else { r }));
        }
        s.parse::<f64>().map(Level::Float).map_err(|_| bad())
    }
}

/// The criterion's answer: `c1 = c2 d^n`, or `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiholoResult {
    pub n: Option<i64>,
}

/// `Some(n)` if `r = d^n` exactly.
fn exact_power(r: &BigRational, d: u32) -> Option<i64> {
    let (num, den, sign) = if r >= &BigRational::one() {
        (r.numer().clone(), r.denom().clone(), 1)
    } else {
        (r.denom().clone(), r.numer().clone(), -1)
    };
    if !den.is_one() {
        return None;
    }
    let d = BigInt::from(d);
    let mut m = num;
    let mut n = 0i64;
    while !m.is_one() {
        if !(&m % &d).is_zero() {
            return None;
        }
        m /= &d;
        n += 1;
    }
    Some(sign * n)
}

/// `n` with `c1 = c2 d^n`, if any.
pub fn biholo_criterion(c1: &Level, c2: &Level, d: u32) -> Result<BiholoResult> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("degree must be >= 2, got {d}")));
    }
    for c in [c1, c2] {
        if !c.is_positive() {
            return Err(Error::BadLevel(format!("levels must be positive, got {c}")));
        }
    }
    let n = match (c1, c2) {
        (Level::Exact(a), Level::Exact(b)) => exact_power(&(a / b), d),
        _ => {
            let (a, b) = (c1.to_f64(), c2.to_f64());
            let n = ((a / b).ln() / (d as f64).ln()).round();
            let back = b * (d as f64).powf(n);
            if (a - back).abs() <= FLOAT_LEVEL_TOL * a {
                Some(n as i64)
            } else {
                None
            }
        }
    };
    Ok(BiholoResult { n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub i: usize,
    pub j: usize,
    pub n: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumFamily {
    pub c: Level,
    pub d: u32,
    pub levels: Vec<Level>,
    pub certificates: Vec<PairCertificate>,
    /// every pair is certified non-biholomorphic
    pub pass: bool,
}

/// `count` equally spaced levels strictly inside `(c/d, c)`, with the
/// criterion run on every pair.
pub fn continuum_family(c: &Level, d: u32, count: usize) -> Result<ContinuumFamily> {
    if count < 2 {
        return Err(Error::InvalidInput("count must be >= 2".into()));
    }
    if !c.is_positive() {
        return Err(Error::BadLevel(format!("level must be positive, got {c}")));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("degree must be >= 2, got {d}")));
    }
    let levels: Vec<Level> = (1..=count)
        .map(|i| match c {
            Level::Exact(r) => {
                let lo = r / BigInt::from(d);
                let t = BigRational::new(BigInt::from(i), BigInt::from(count + 1));
                Level::Exact(&lo + (r - &lo) * t)
            }
            Level::Float(x) => {
                let lo = x / d as f64;
                Level::Float(lo + (x - lo) * i as f64 / (count + 1) as f64)
            }
        })
        .collect();
    let mut certificates = Vec::new();
    for i in 0..count {
        for j in i + 1..count {
            certificates.push(PairCertificate {
                i,
                j,
                n: biholo_criterion(&levels[i], &levels[j], d)?.n,
            });
        }
    }
    let pass = certificates.iter().all(|p| p.n.is_none());
    Ok(ContinuumFamily {
        c: c.clone(),
        d,
        levels,
        certificates,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub samples: usize,
    pub escaping: usize,
    /// largest `|G+(x,y) - G-(y,x)|`
    pub max_discrepancy: f64,
    /// `max (|G+(x,y) - G-(y,x)| - err+ - err-)`; nonpositive on a pass
    pub max_excess: f64,
    pub error_bound: f64,
    pub pass: bool,
}

/// `G+(x, y) = G-(y, x)` for `H = (y, y² - x)` at the given points.
pub fn involution_check_points(points: &[ComplexPair], tol: f64) -> Result<InvolutionReport> {
    involution_check_map(&HenonMap::quadratic_standard(), points, tol)
}

/// The same identity for any map with `a = 1`, where `(x, y) ↦ (y, x)`
/// conjugates `H` to `H⁻¹`.
pub fn involution_check_map(h: &HenonMap, points: &[ComplexPair], tol: f64) -> Result<InvolutionReport> {
    if h.a() != Complex64::new(1.0, 0.0) {
        return Err(Error::InvalidInput("the swap conjugates H to its inverse only when a = 1".into()));
    }
    let rows: Vec<Result<(f64, f64, f64, bool)>> = points
        .par_iter()
        .map(|&z| {
            let gp = green_plus(h, z, tol)?;
            let gm = green_minus(h, z.swap(), tol)?;
            let diff = (gp.value - gm.value).abs();
            let bound = gp.error_bound + gm.error_bound;
            Ok((diff, diff - bound, bound, gp.escaped))
        })
        .collect();
    let mut out = InvolutionReport {
        samples: points.len(),
        escaping: 0,
        max_discrepancy: 0.0,
        max_excess: f64::NEG_INFINITY,
        error_bound: 0.0,
        pass: true,
    };
    for r in rows {
        let (diff, excess, bound, esc) = r?;
        out.max_discrepancy = out.max_discrepancy.max(diff);
        out.max_excess = out.max_excess.max(excess);
        out.error_bound = out.error_bound.max(bound);
        out.escaping += esc as usize;
        out.pass &= excess <= 0.0;
    }
    if points.is_empty() {
        out.max_excess = 0.0;
    }
    Ok(out)
}

/// Random escaping points with `|x|, |y| <= 4`, deterministic in `seed`.
pub fn involution_check(samples: usize, seed: u64) -> Result<InvolutionReport> {
    let h = HenonMap::quadratic_standard();
    let r0 = h.escape_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(samples);
    while pts.len() < samples {
        let z = ComplexPair::new(
            Complex64::from_polar(rng.gen_range(0.0..4.0), rng.gen_range(0.0..std::f64::consts::TAU)),
            Complex64::from_polar(rng.gen_range(0.0..4.0), rng.gen_range(0.0..std::f64::consts::TAU)),
        );
        // keep points whose forward orbit visibly escapes
        if let Ok(w) = h.iterate(z, 12) {
            if w.y.norm() > r0 && w.y.norm() >= w.x.norm() {
                pts.push(z);
            }
        }
    }
    involution_check_points(&pts, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(s: &str) -> Level {
        s.parse().unwrap()
    }

    #[test]
    fn parse_levels() {
        assert_eq!(lv("8"), Level::integer(8));
        assert_eq!(lv("1.5"), Level::Exact(BigRational::new(3.into(), 2.into())));
        assert_eq!(lv("3/6"), Level::Exact(BigRational::new(1.into(), 2.into())));
        assert_eq!(lv("1e-3"), Level::Float(1e-3));
        assert!("x".parse::<Level>().is_err());
        assert!("1/0".parse::<Level>().is_err());
    }

    #[test]
    fn criterion_examples() {
        assert_eq!(biholo_criterion(&lv("8"), &lv("1"), 2).unwrap().n, Some(3));
        assert_eq!(biholo_criterion(&lv("1"), &lv("8"), 2).unwrap().n, Some(-3));
        assert_eq!(biholo_criterion(&lv("2.5"), &lv("2.5"), 3).unwrap().n, Some(0));
        assert_eq!(biholo_criterion(&lv("3"), &lv("1"), 2).unwrap().n, None);
        assert_eq!(biholo_criterion(&lv("4/9"), &lv("4"), 3).unwrap().n, Some(-2));
        assert_eq!(biholo_criterion(&Level::Float(0.3 * 8.0), &Level::Float(0.3), 2).unwrap().n, Some(3));
        assert_eq!(biholo_criterion(&Level::Float(2.5), &Level::Float(1.0), 2).unwrap().n, None);
        assert_eq!(biholo_criterion(&lv("0"), &lv("1"), 2).unwrap_err().code(), "bad-level");
        assert_eq!(biholo_criterion(&lv("-2"), &lv("1"), 2).unwrap_err().code(), "bad-level");
    }

    #[test]
    fn criterion_is_antisymmetric() {
        for (a, b) in [("6", "3/4"), ("5", "7"), ("27", "1/3")] {
            let r = biholo_criterion(&lv(a), &lv(b), 2).unwrap().n;
            let s = biholo_criterion(&lv(b), &lv(a), 2).unwrap().n;
            assert_eq!(r.map(|n| -n), s);
        }
    }

    #[test]
    fn family() {
        let f = continuum_family(&lv("2"), 2, 3).unwrap();
        let vals: Vec<f64> = f.levels.iter().map(Level::to_f64).collect();
        assert_eq!(vals, vec![1.25, 1.5, 1.75]);
        assert!(f.pass);
        assert_eq!(f.certificates.len(), 3);
        let f = continuum_family(&lv("2"), 2, 2).unwrap();
        assert!(f.levels.iter().all(|l| l.to_f64() > 1.0 && l.to_f64() < 2.0));
        assert!(continuum_family(&lv("2"), 2, 1).is_err());
    }

    #[test]
    fn involution() {
        let pts = [ComplexPair::from_parts(0.0, 0.0, 4.0, 0.0), ComplexPair::from_parts(0.0, 0.0, 0.0, 0.0)];
        let r = involution_check_points(&pts, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_discrepancy < 1e-6);
        assert_eq!(r.escaping, 1);
        let r = involution_check(200, 0).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.escaping, 200);
    }
}
