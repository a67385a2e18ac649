//! Affine maps of `C^2` preserving `K+`: the diagonal maps
//! `L_η(x, y) = (ηx, η^d y)` with `η^{d²-1} = 1` that satisfy
//! `p(η^d z) = η p(z)` and `p(ηz) = η^d p(z)`.

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::cyclo::{Cyc, CycloField, Poly2, PolyMap2};
use crate::error::{Error, Result};
use crate::exact::gauss_from_c64;
use crate::henon::{ComplexPair, HenonMap};

/// `L_η` with `η = e^{2πi·eta_exponent/(d²-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalSym {
    pub d: u32,
    pub eta_exponent: u64,
}

impl DiagonalSym {
    pub fn new(d: u32, eta_exponent: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("degree must be >= 2, got {d}")));
        }
        let n = Self::modulus_for(d);
        Ok(DiagonalSym {
            d,
            eta_exponent: eta_exponent.rem_euclid(n as i64) as u64,
        })
    }

    pub fn identity(d: u32) -> Self {
        DiagonalSym { d, eta_exponent: 0 }
    }

    fn modulus_for(d: u32) -> u64 {
        (d as u64) * (d as u64) - 1
    }

    /// `d² - 1`.
    pub fn modulus(&self) -> u64 {
        Self::modulus_for(self.d)
    }

    /// Exponent of `f = η^d`.
    pub fn f_exponent(&self) -> u64 {
        (self.eta_exponent * self.d as u64) % self.modulus()
    }

    pub fn eta(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.eta_exponent as f64 / self.modulus() as f64)
    }

    pub fn f(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.f_exponent() as f64 / self.modulus() as f64)
    }

    pub fn apply(&self, z: ComplexPair) -> ComplexPair {
        ComplexPair::new(self.eta() * z.x, self.f() * z.y)
    }

    pub fn compose(&self, o: &DiagonalSym) -> DiagonalSym {
        DiagonalSym {
            d: self.d,
            eta_exponent: (self.eta_exponent + o.eta_exponent) % self.modulus(),
        }
    }

    pub fn inverse(&self) -> DiagonalSym {
        let n = self.modulus();
        DiagonalSym {
            d: self.d,
            eta_exponent: (n - self.eta_exponent) % n,
        }
    }
}

/// The cyclic group of diagonal preservers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    pub order: u64,
    /// smallest positive exponent in the group, 0 for the trivial group
    pub generator_exponent: u64,
    /// `d² - 1`
    pub modulus: u64,
    pub elements: Vec<DiagonalSym>,
}

/// Does `L_η` with `η = e^{2πi e/N}` satisfy both coefficient identities?
fn accepts(map: &HenonMap, e: u64) -> bool {
    let d = map.degree() as u64;
    let n = d * d - 1;
    (0..=d).all(|j| {
        let c = map.p().coeff(j as u32);
        if c.re == 0.0 && c.im == 0.0 {
            return true;
        }
        (e * d * j) % n == e % n && (e * j) % n == (e * d) % n
    })
}

/// All `L_η` preserving the filled Julia set of a normalized map.
pub fn affine_preservers(map: &HenonMap) -> SymmetryGroup {
    let d = map.degree();
    let n = DiagonalSym::modulus_for(d);
    let elements: Vec<DiagonalSym> = (0..n)
        .into_par_iter()
        .filter(|&e| accepts(map, e))
        .map(|e| DiagonalSym { d, eta_exponent: e })
        .collect();
    let generator_exponent = elements.iter().map(|s| s.eta_exponent).filter(|&e| e > 0).min().unwrap_or(0);
    SymmetryGroup {
        order: elements.len() as u64,
        generator_exponent,
        modulus: n,
        elements,
    }
}

/// Outcome of an identity check between two polynomial maps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub holds: bool,
    /// `true` if checked coefficient by coefficient in exact arithmetic
    pub exact: bool,
    /// first monomial where the two sides differ, as `(coordinate, i, j)`
    pub offending: Option<(String, u32, u32)>,
    pub numerical_max_error: Option<f64>,
    pub samples: usize,
}

struct Symbolic {
    field: Arc<CycloField>,
    /// `ζ_M^{M/N}` raised to `e` gives `η`
    step: i64,
}

impl Symbolic {
    fn new(d: u32) -> Self {
        let n = DiagonalSym::modulus_for(d);
        let m = n.lcm(&4);
        Symbolic {
            field: CycloField::new(m),
            step: (m / n) as i64,
        }
    }

    fn root(&self, e: u64) -> Cyc {
        Cyc::root(&self.field, self.step * e as i64)
    }

    fn henon(&self, map: &HenonMap) -> Result<PolyMap2> {
        let f = &self.field;
        let y = Poly2::y(f);
        let mut p = Poly2::zero(f);
        for j in 0..=map.degree() {
            let c = map.p().coeff(j);
            if c.re != 0.0 || c.im != 0.0 {
                p = p.add(&Poly2::monomial(Cyc::from_gauss(f, &gauss_from_c64(c)?), 0, j));
            }
        }
        let a = Cyc::from_gauss(f, &gauss_from_c64(-map.a())?);
        Ok(PolyMap2 {
            x: y,
            y: p.add(&Poly2::x(f).scale(&a)),
        })
    }

    fn diagonal(&self, s: &DiagonalSym) -> PolyMap2 {
        PolyMap2 {
            x: Poly2::monomial(self.root(s.eta_exponent), 1, 0),
            y: Poly2::monomial(self.root(s.f_exponent()), 0, 1),
        }
    }

    fn compare(&self, name: &str, lhs: &PolyMap2, rhs: &PolyMap2) -> IdentityReport {
        let off = lhs
            .x
            .first_difference(&rhs.x)
            .map(|(k, _, _)| ("x".to_string(), k.0, k.1))
            .or_else(|| lhs.y.first_difference(&rhs.y).map(|(k, _, _)| ("y".to_string(), k.0, k.1)));
        IdentityReport {
            name: name.to_string(),
            holds: off.is_none(),
            exact: true,
            offending: off,
            numerical_max_error: None,
            samples: 0,
        }
    }
}

/// `H ∘ L_η = L_{η^d} ∘ H`, exactly. Needs `p = y^d`.
pub fn verify_l_semiconjugacy(map: &HenonMap, eta: &DiagonalSym) -> Result<IdentityReport> {
    if map.p().coeffs().iter().any(|c| c.re != 0.0 || c.im != 0.0) {
        return Err(Error::InvalidInput("needs p(y) = y^d".into()));
    }
    if eta.d != map.degree() {
        return Err(Error::InvalidInput("symmetry degree differs from the map".into()));
    }
    let s = Symbolic::new(map.degree());
    let h = s.henon(map)?;
    let l = s.diagonal(eta);
    let ld = s.diagonal(&DiagonalSym::new(eta.d, (eta.f_exponent()) as i64)?);
    Ok(s.compare("H o L_eta = L_eta^d o H", &h.after(&l), &ld.after(&h)))
}

/// `L ∘ H² = H² ∘ L`: exact coefficient comparison plus random points.
pub fn verify_commute_h2(map: &HenonMap, l: &DiagonalSym, samples: usize, seed: u64) -> Result<IdentityReport> {
    if l.d != map.degree() {
        return Err(Error::InvalidInput("symmetry degree differs from the map".into()));
    }
    let s = Symbolic::new(map.degree());
    let h = s.henon(map)?;
    let h2 = h.after(&h);
    let lm = s.diagonal(l);
    let mut report = s.compare("L o H^2 = H^2 o L", &lm.after(&h2), &h2.after(&lm));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<ComplexPair> = (0..samples)
        .map(|_| {
            ComplexPair::from_parts(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            )
        })
        .collect();
    let errs: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&z| {
            let lhs = l.apply(map.iterate(z, 2)?);
            let rhs = map.iterate(l.apply(z), 2)?;
            let scale = 1.0 + lhs.norm_max().max(rhs.norm_max());
            Ok(((lhs.x - rhs.x).norm().max((lhs.y - rhs.y).norm())) / scale)
        })
        .collect();
    let mut max = 0.0f64;
    for e in errs {
        max = max.max(e?);
    }
    report.numerical_max_error = Some(max);
    report.samples = samples;
    report.holds = report.holds && max < 1e-10;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::MonicPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn map(d: u32, lower: &[f64]) -> HenonMap {
        HenonMap::new(MonicPoly::new(d, lower.iter().map(|&x| c(x, 0.0)).collect()).unwrap(), c(1.0, 0.0)).unwrap()
    }

    /// Brute force over all `(d²-1)`-th roots, comparing `p(fz) = e p(z)` and
    /// `p(ez) = f p(z)` coefficient by coefficient in floating point.
    fn brute_order(h: &HenonMap) -> usize {
        let d = h.degree();
        let n = d * d - 1;
        (0..n)
            .filter(|&k| {
                let e = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
                let f = e.powu(d);
                (0..=d).all(|j| {
                    let a = h.p().coeff(j);
                    (a * f.powu(j) - e * a).norm() < 1e-9 && (a * e.powu(j) - f * a).norm() < 1e-9
                })
            })
            .count()
    }

    #[test]
    fn classification() {
        for (h, order) in [
            (map(2, &[0.0]), 3),
            (map(3, &[0.0, 0.0]), 8),
            (map(2, &[1.0]), 1),
            (map(4, &[0.0, 0.0, 1.0]), 1),
            (map(4, &[0.0, 1.0, 0.0]), 3),
            (map(3, &[0.0, 2.0]), 2),
            (map(3, &[1.0, 0.0]), 1),
        ] {
            let g = affine_preservers(&h);
            assert_eq!(g.order, order as u64, "{:?}", h.p());
            assert_eq!(brute_order(&h), order);
            assert_eq!((h.degree() as u64).pow(2) - 1, g.modulus);
            assert_eq!(g.modulus % g.order, 0);
        }
        let g = affine_preservers(&map(2, &[0.0]));
        assert_eq!(g.generator_exponent, 1);
        for a in &g.elements {
            for b in &g.elements {
                assert!(g.elements.contains(&a.compose(b)));
            }
            assert!(g.elements.contains(&a.inverse()));
        }
    }

    #[test]
    fn semiconjugacy_exact() {
        let h = HenonMap::pure(2, c(1.0, 0.0)).unwrap();
        let w = DiagonalSym::new(2, 1).unwrap();
        assert!(verify_l_semiconjugacy(&h, &w).unwrap().holds);
        assert!(verify_l_semiconjugacy(&h, &DiagonalSym::identity(2)).unwrap().holds);
        let h3 = HenonMap::pure(3, c(0.5, -2.0)).unwrap();
        assert!(verify_l_semiconjugacy(&h3, &DiagonalSym::new(3, 1).unwrap()).unwrap().holds);
    }

    #[test]
    fn commutes_with_square() {
        let h = HenonMap::pure(2, c(1.0, 0.0)).unwrap();
        let r = verify_commute_h2(&h, &DiagonalSym::new(2, 1).unwrap(), 1000, 0).unwrap();
        assert!(r.holds && r.exact, "{r:?}");
        let h3 = HenonMap::pure(3, c(1.0, 0.0)).unwrap();
        assert!(verify_commute_h2(&h3, &DiagonalSym::new(3, 1).unwrap(), 200, 0).unwrap().holds);
        // not a preserver of p = y^2 + 1: the symbolic check names a coefficient
        let r = verify_commute_h2(&map(2, &[1.0]), &DiagonalSym::new(2, 1).unwrap(), 10, 0).unwrap();
        assert!(!r.holds);
        assert!(r.offending.is_some());
    }
}
