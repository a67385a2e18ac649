//! The model `C × A_c`, `A_c = {1 < |ζ| < e^c}`: the polynomial `Q`, the lift
//! `H̃(z, ζ) = ((a/d) z + Q(ζ), ζ^d)`, its iterates, the deck transformations
//! `γ_{k/d^n}` and the automorphisms `(z, ζ) ↦ (βz + γ, αζ)`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::dyadic::DyadicClass;
use crate::error::{Error, Result};
use crate::exact::{gauss_from_c64, gauss_to_c64, GaussRat};
use crate::henon::HenonMap;

/// `Q` with coefficients of `ζ^0 ..= ζ^(d+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoly {
    degree: u32,
    exact: Vec<GaussRat>,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize)]
struct QPolyView {
    degree: u32,
    coeffs: Vec<[f64; 2]>,
    exact: Vec<[String; 2]>,
}

impl Serialize for QPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QPolyView {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            exact: self.exact.iter().map(|c| [c.re.to_string(), c.im.to_string()]).collect(),
        }
        .serialize(s)
    }
}

fn rat(n: i64, m: i64) -> GaussRat {
    GaussRat::new(BigRational::new(n.into(), m.into()), BigRational::zero())
}

impl QPoly {
    /// From exact coefficients of `ζ^0 ..= ζ^(d+1)`.
    fn from_exact(degree: u32, exact: Vec<GaussRat>) -> Self {
        let coeffs = exact.iter().map(gauss_to_c64).collect();
        QPoly { degree, exact, coeffs }
    }

    /// `d` of the underlying map; `Q` itself has degree `d + 1`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> &[GaussRat] {
        &self.exact
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zeta + c)
    }

    /// `Σ |q_j| r^j`, a bound for `|Q|` on `|ζ| = r`.
    pub fn abs_bound(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

/// `Q` for the map. Only degrees 2 and 3 are available.
pub fn q_poly(map: &HenonMap) -> Result<QPoly> {
    let d = map.degree();
    let p = map.p();
    match d {
        2 => {
            let a0 = gauss_from_c64(p.coeff(0))?;
            let mut q = vec![GaussRat::zero(); 4];
            q[1] = -(a0 * rat(1, 2));
            q[3] = rat(1, 1);
            Ok(QPoly::from_exact(2, q))
        }
        3 => {
            let a0 = gauss_from_c64(p.coeff(0))?;
            let a1 = gauss_from_c64(p.coeff(1))?;
            let mut q = vec![GaussRat::zero(); 5];
            q[0] = a1.clone() * a1.clone() * rat(1, 9);
            q[1] = -(a0 * rat(1, 3));
            q[2] = -(a1 * rat(1, 3));
            q[4] = rat(1, 1);
            Ok(QPoly::from_exact(3, q))
        }
        _ => Err(Error::QCoefficientsUnavailable { degree: d }),
    }
}

/// A point `(z, ζ)` of `C × A_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub z: Complex64,
    pub zeta: Complex64,
    pub c: f64,
}

impl ModelPoint {
    pub fn new(z: Complex64, zeta: Complex64, c: f64) -> Result<Self> {
        let pt = ModelPoint { z, zeta, c };
        pt.check()?;
        Ok(pt)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::BadLevel(format!("level must be positive, got {}", self.c)));
        }
        let r = self.zeta.norm();
        if !(r > 1.0 && r.ln() < self.c) || !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Error::NotInAnnulus { modulus: r, level: self.c });
        }
        Ok(())
    }
}

/// The lift for a fixed map.
#[derive(Debug, Clone)]
pub struct Model {
    d: u32,
    a: Complex64,
    q: QPoly,
}

fn powd(z: Complex64, d: u32) -> Complex64 {
    z.powu(d)
}

/// `e^{2πi k/m}` with `k` reduced first.
fn root_of_unity(k: i128, m: i128) -> Complex64 {
    let k = k.rem_euclid(m);
    Complex64::from_polar(1.0, TAU * (k as f64) / (m as f64))
}

impl Model {
    pub fn new(map: &HenonMap) -> Result<Self> {
        Ok(Model {
            d: map.degree(),
            a: map.a(),
            q: q_poly(map)?,
        })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn q(&self) -> &QPoly {
        &self.q
    }

    /// `((a/d) z + Q(ζ), ζ^d)` at level `d c`.
    pub fn lift_apply(&self, pt: ModelPoint) -> Result<ModelPoint> {
        pt.check()?;
        let d = self.d as f64;
        Ok(ModelPoint {
            z: self.a / d * pt.z + self.q.eval(pt.zeta),
            zeta: powd(pt.zeta, self.d),
            c: d * pt.c,
        })
    }

    /// `H̃^n` in closed form:
    /// `((a/d)^n s + Σ_{j<n} (a/d)^j Q(t^{d^(n-1-j)}), t^{d^n})`.
    pub fn g_chain(&self, pt: ModelPoint, n: u32) -> Result<ModelPoint> {
        if n == 0 {
            return Err(Error::InvalidInput("g_chain needs n >= 1".into()));
        }
        pt.check()?;
        let r = self.a / self.d as f64;
        // t^{d^i} for i = 0..=n
        let mut powers = Vec::with_capacity(n as usize + 1);
        let mut t = pt.zeta;
        for _ in 0..=n {
            powers.push(t);
            t = powd(t, self.d);
        }
        let mut z = r.powu(n) * pt.z;
        let mut w = Complex64::new(1.0, 0.0);
        for j in 0..n as usize {
            z += w * self.q.eval(powers[n as usize - 1 - j]);
            w *= r;
        }
        Ok(ModelPoint {
            z,
            zeta: powers[n as usize],
            c: (self.d as f64).powi(n as i32) * pt.c,
        })
    }

    /// The `z`-shift of `γ_{k/d^n}` at `ζ` and a bound on the size of its terms.
    fn deck_shift(&self, class: &DyadicClass, zeta: Complex64) -> Result<(Complex64, f64)> {
        let cls = class.fractional(self.d)?;
        if cls.k == 0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let m = (self.d as i128)
            .checked_pow(cls.n)
            .ok_or_else(|| Error::NotRepresentable("d^n overflows".into()))?;
        let r = self.d as f64 / self.a;
        let mut w = r;
        let mut t = zeta;
        let mut exp = cls.k as i128;
        let mut shift = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for _ in 0..cls.n {
            // t = ζ^{d^l}, exp = k d^l mod d^n
            let rot = root_of_unity(exp, m);
            let (q1, q2) = (self.q.eval(t), self.q.eval(rot * t));
            shift += w * (q1 - q2);
            scale += w.norm() * 2.0 * self.q.abs_bound(t.norm());
            w *= r;
            t = powd(t, self.d);
            exp = (exp * self.d as i128).rem_euclid(m);
        }
        Ok((shift, scale))
    }

    /// `γ_{k/d^n}(z, ζ) = (z + (d/a) Σ_{l<n} (d/a)^l (Q(ζ^{d^l}) - Q((ωζ)^{d^l})), ωζ)`
    /// with `ω = e^{2πik/d^n}`. Depends only on the class modulo `Z`.
    pub fn deck_apply(&self, g: &DeckTransform, pt: ModelPoint) -> Result<ModelPoint> {
        pt.check()?;
        let cls = g.class.fractional(self.d)?;
        if cls.k == 0 {
            return Ok(pt);
        }
        let (shift, _) = self.deck_shift(&cls, pt.zeta)?;
        let m = (self.d as i128).pow(cls.n);
        Ok(ModelPoint {
            z: pt.z + shift,
            zeta: root_of_unity(cls.k as i128, m) * pt.zeta,
            c: pt.c,
        })
    }

    /// `deck_apply` and a bound on the rounding error of the `z` coordinate.
    pub fn deck_apply_bounded(&self, g: &DeckTransform, pt: ModelPoint) -> Result<(ModelPoint, f64)> {
        let out = self.deck_apply(g, pt)?;
        let n = g.class.n as f64;
        let bound = 16.0 * f64::EPSILON * (n + 2.0) * (self.d as f64 + 2.0) * self.deck_scale(&g.class, &pt);
        Ok((out, bound))
    }

    /// Size of the terms entering `γ` at `pt`; errors are measured against it.
    fn deck_scale(&self, class: &DyadicClass, pt: &ModelPoint) -> f64 {
        self.deck_shift(class, pt.zeta).map(|s| s.1).unwrap_or(0.0) + pt.z.norm() + 1.0
    }

    fn lift_scale(&self, pt: &ModelPoint) -> f64 {
        (self.a / self.d as f64).norm() * pt.z.norm() + self.q.abs_bound(pt.zeta.norm()) + 1.0
    }
}

/// `γ^{(m)}_{k/d^n}`, acting on `C × A_{d^m c}`. The formula does not depend
/// on `m`; it records which annulus the transformation is considered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckTransform {
    pub class: DyadicClass,
    pub m: u32,
}

impl DeckTransform {
    pub fn new(k: i64, n: u32, d: u32, m: u32) -> Result<Self> {
        Ok(DeckTransform {
            class: DyadicClass::new(k, n, d)?,
            m,
        })
    }
}

pub fn lift_apply(map: &HenonMap, pt: ModelPoint) -> Result<ModelPoint> {
    Model::new(map)?.lift_apply(pt)
}

pub fn g_chain(map: &HenonMap, pt: ModelPoint, n: u32) -> Result<ModelPoint> {
    Model::new(map)?.g_chain(pt, n)
}

pub fn deck_apply(map: &HenonMap, g: &DeckTransform, pt: ModelPoint) -> Result<ModelPoint> {
    Model::new(map)?.deck_apply(g, pt)
}

/// Outcome of a sampled identity check.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// largest discrepancy, relative to the size of the terms involved
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, max_error: f64, tolerance: f64, samples: usize) -> Self {
        CheckReport {
            name: name.into(),
            max_error,
            tolerance,
            samples,
            pass: max_error < tolerance,
        }
    }
}

/// Relative discrepancy between two model points.
fn discrepancy(p: &ModelPoint, q: &ModelPoint, scale: f64) -> f64 {
    let dz = (p.z - q.z).norm() / scale;
    let dzeta = (p.zeta - q.zeta).norm() / p.zeta.norm().max(1.0);
    if dz.is_nan() || dzeta.is_nan() {
        return f64::INFINITY;
    }
    dz.max(dzeta)
}

/// Random points of `C × A_{level}` with `|ζ|` close enough to 1 that
/// `ζ^{d^depth}` stays moderate. Deterministic in `seed`.
pub fn sample_points(d: u32, level: f64, depth: u32, samples: usize, seed: u64) -> Vec<ModelPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 2.0 / ((d as f64 + 1.0) * (d as f64).powi(depth as i32));
    let top = level.min(cap);
    (0..samples)
        .map(|_| {
            let lr = top * rng.gen_range(0.05..0.95);
            let th = rng.gen_range(0.0..TAU);
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            ModelPoint {
                z,
                zeta: Complex64::from_polar(lr.exp(), th),
                c: level,
            }
        })
        .collect()
}

/// `γ^{(m+1)}_{1/d^n} ∘ H̃ = H̃ ∘ γ^{(m)}_{1/d^(n+1)}` on random points of
/// `C × A_{d^m c}`. `n = 0` compares `H̃` with `H̃ ∘ γ_{1/d}`.
pub fn verify_comm_cover(map: &HenonMap, n: u32, m: u32, c: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    let model = Model::new(map)?;
    let d = model.d;
    let level = c * (d as f64).powi(m as i32);
    let g_left = DeckTransform::new(1, n, d, m + 1)?;
    let g_right = DeckTransform::new(1, n + 1, d, m)?;
    let pts = sample_points(d, level, n + 2, samples, seed);
    let errs: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&pt| {
            let lhs = model.deck_apply(&g_left, model.lift_apply(pt)?)?;
            let rhs = model.lift_apply(model.deck_apply(&g_right, pt)?)?;
            let scale = model.deck_scale(&g_right.class, &pt) * model.lift_scale(&pt)
                + model.deck_scale(&g_left.class, &model.lift_apply(pt)?);
            Ok(discrepancy(&lhs, &rhs, scale))
        })
        .collect();
    let max = collect_max(errs)?;
    Ok(CheckReport::new(format!("comm_cover n={n} m={m}"), max, 1e-10, samples))
}

fn collect_max(errs: Vec<Result<f64>>) -> Result<f64> {
    let mut max = 0.0f64;
    for e in errs {
        max = max.max(e?);
    }
    Ok(max)
}

/// `deck(r) ∘ deck(s) = deck(r + s)` on random points.
pub fn verify_deck_group_law(
    map: &HenonMap,
    r: DyadicClass,
    s: DyadicClass,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let model = Model::new(map)?;
    let d = model.d;
    let sum = r.add(&s, d)?;
    let depth = r.n.max(s.n) + 1;
    let gr = DeckTransform { class: r, m: 0 };
    let gs = DeckTransform { class: s, m: 0 };
    let gsum = DeckTransform { class: sum, m: 0 };
    let pts = sample_points(d, c, depth, samples, seed);
    let errs: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&pt| {
            let mid = model.deck_apply(&gs, pt)?;
            let lhs = model.deck_apply(&gr, mid)?;
            let rhs = model.deck_apply(&gsum, pt)?;
            let scale = model.deck_scale(&s, &pt) + model.deck_scale(&r, &mid) + model.deck_scale(&sum, &pt);
            Ok(discrepancy(&lhs, &rhs, scale))
        })
        .collect();
    let name = format!("deck_group_law {} + {}", r.display(d), s.display(d));
    Ok(CheckReport::new(name, collect_max(errs)?, 1e-12, samples))
}

/// Closed-form `g_chain` against `n` composed lifts.
pub fn verify_g_chain(map: &HenonMap, n: u32, c: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    let model = Model::new(map)?;
    let pts = sample_points(model.d, c, n, samples, seed);
    let errs: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&pt| {
            let closed = model.g_chain(pt, n)?;
            let mut it = pt;
            let mut scale = 0.0f64;
            for _ in 0..n {
                scale = scale.max(model.lift_scale(&it));
                it = model.lift_apply(it)?;
            }
            Ok(discrepancy(&closed, &it, scale))
        })
        .collect();
    Ok(CheckReport::new(format!("g_chain n={n}"), collect_max(errs)?, 1e-12, samples))
}

/// `(z, ζ) ↦ (βz + γ, αζ)` with `α = e^{2πi e/(d²-1)}` and `β = α^{d+1}`,
/// so that `β^{d-1} = 1` and `α^{d+1} = β` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelAut {
    pub d: u32,
    /// exponent of `α`, modulo `d² - 1`
    pub alpha_exp: u64,
    pub gamma: Complex64,
}

impl ModelAut {
    pub fn identity(d: u32) -> Self {
        ModelAut {
            d,
            alpha_exp: 0,
            gamma: Complex64::new(0.0, 0.0),
        }
    }

    fn order(d: u32) -> u64 {
        (d as u64) * (d as u64) - 1
    }

    pub fn from_exponent(d: u32, alpha_exp: i64, gamma: Complex64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModelAut(format!("degree must be >= 2, got {d}")));
        }
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(Error::InvalidModelAut("gamma must be finite".into()));
        }
        Ok(ModelAut {
            d,
            alpha_exp: alpha_exp.rem_euclid(Self::order(d) as i64) as u64,
            gamma,
        })
    }

    /// From numerical `(β, γ, α)`; both constraints are checked to `tol`.
    pub fn from_values(d: u32, beta: Complex64, gamma: Complex64, alpha: Complex64, tol: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModelAut(format!("degree must be >= 2, got {d}")));
        }
        let order = Self::order(d);
        let k = (alpha.arg() / TAU * order as f64).round() as i64;
        let cand = Self::from_exponent(d, k, gamma)?;
        if (cand.alpha() - alpha).norm() > tol {
            return Err(Error::InvalidModelAut(format!(
                "alpha = {alpha} is not a root of unity of order dividing {order}"
            )));
        }
        if (cand.beta() - beta).norm() > tol {
            return Err(Error::InvalidModelAut(format!("beta = {beta} differs from alpha^(d+1)")));
        }
        Ok(cand)
    }

    pub fn alpha(&self) -> Complex64 {
        root_of_unity(self.alpha_exp as i128, Self::order(self.d) as i128)
    }

    pub fn beta_exp(&self) -> u64 {
        (self.alpha_exp * (self.d as u64 + 1)) % Self::order(self.d)
    }

    pub fn beta(&self) -> Complex64 {
        root_of_unity(self.beta_exp() as i128, Self::order(self.d) as i128)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ModelAut) -> Result<ModelAut> {
        if self.d != first.d {
            return Err(Error::InvalidModelAut("degrees differ".into()));
        }
        Ok(ModelAut {
            d: self.d,
            alpha_exp: (self.alpha_exp + first.alpha_exp) % Self::order(self.d),
            gamma: self.beta() * first.gamma + self.gamma,
        })
    }

    pub fn inverse(&self) -> ModelAut {
        let order = Self::order(self.d);
        let inv = ModelAut {
            d: self.d,
            alpha_exp: (order - self.alpha_exp) % order,
            gamma: Complex64::new(0.0, 0.0),
        };
        ModelAut {
            gamma: -(inv.beta() * self.gamma),
            ..inv
        }
    }

    pub fn apply(&self, pt: ModelPoint) -> Result<ModelPoint> {
        pt.check()?;
        Ok(ModelPoint {
            z: self.beta() * pt.z + self.gamma,
            zeta: self.alpha() * pt.zeta,
            c: pt.c,
        })
    }
}

/// `A ∘ γ ∘ A⁻¹` against `γ` on random points; needs `p = y^d`.
pub fn model_aut_normalizes_deck(
    map: &HenonMap,
    aut: &ModelAut,
    g: &DeckTransform,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    if map.p().coeffs().iter().any(|c| !c.is_zero()) {
        return Err(Error::InvalidInput("needs p(y) = y^d".into()));
    }
    let model = Model::new(map)?;
    if aut.d != model.d {
        return Err(Error::InvalidModelAut("degree differs from the map".into()));
    }
    let inv = aut.inverse();
    let pts = sample_points(model.d, c, g.class.n + 1, samples, seed);
    let errs: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&pt| {
            let lhs = aut.apply(model.deck_apply(g, inv.apply(pt)?)?)?;
            let rhs = model.deck_apply(g, pt)?;
            let scale = model.deck_scale(&g.class, &pt) + aut.gamma.norm();
            Ok(discrepancy(&lhs, &rhs, scale))
        })
        .collect();
    Ok(CheckReport::new(
        format!("aut_normalizes_deck {}", g.class.display(model.d)),
        collect_max(errs)?,
        1e-12,
        samples,
    ))
}
