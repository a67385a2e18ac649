//! The invariant battery behind `shortc2 verify`: each check samples random
//! points from a seeded generator and compares against a certified bound or
//! an exact identity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::affine::{affine_preservers, verify_commute_h2, verify_l_semiconjugacy};
use crate::biholo::{biholo_criterion, continuum_family, involution_check_map, Level};
use crate::boettcher::winding_class;
use crate::dyadic::DyadicClass;
use crate::error::{Error, Result};
use crate::greens::{green_plus, r_epsilon, LevelSpec};
use crate::henon::{ComplexPair, HenonMap, Region};
use crate::model::{
    model_aut_normalizes_deck, sample_points, verify_comm_cover, verify_deck_group_law, verify_g_chain, CheckReport,
    DeckTransform, Model, ModelAut,
};
use crate::report::{SuiteCheck, VerifyReport, SCHEMA_VERSION};
use crate::topology::{canonical_loop, canonical_radius, pull_back_loop, DEFAULT_EPSILON};

pub const SUITES: [&str; 7] = ["all", "core", "greens", "affine", "model", "topology", "biholo"];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 200,
            seed: 0,
            tol: 1e-8,
        }
    }
}

fn check(module: &str, name: &str, pass: bool, max_error: f64, error_bound: f64, samples: usize, detail: String) -> SuiteCheck {
    SuiteCheck {
        name: name.to_string(),
        module: module.to_string(),
        pass,
        skipped: false,
        max_error,
        error_bound,
        samples,
        detail,
    }
}

fn skipped(module: &str, name: &str, why: String) -> SuiteCheck {
    SuiteCheck {
        name: name.to_string(),
        module: module.to_string(),
        pass: true,
        skipped: true,
        max_error: 0.0,
        error_bound: 0.0,
        samples: 0,
        detail: why,
    }
}

fn failed(module: &str, name: &str, e: &Error) -> SuiteCheck {
    check(module, name, false, f64::NAN, 0.0, 0, format!("{}: {e}", e.code()))
}

fn from_model(module: &str, r: &CheckReport) -> SuiteCheck {
    check(module, &r.name, r.pass, r.max_error, r.tolerance, r.samples, "relative to the size of the terms".into())
}

/// A generator per check, so adding a check does not shift the others.
fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

fn disc(r: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * r.gen::<f64>().sqrt(), r.gen_range(0.0..TAU))
}

/// Random points with `|x|, |y| <= radius`.
pub fn box_points(seed: u64, salt: u64, radius: f64, n: usize) -> Vec<ComplexPair> {
    let mut r = rng(seed, salt);
    (0..n).map(|_| ComplexPair::new(disc(&mut r, radius), disc(&mut r, radius))).collect()
}

/// Random points with `G+ > 0` near the escape radius.
pub fn escaping_points(map: &HenonMap, seed: u64, salt: u64, n: usize) -> Vec<ComplexPair> {
    let r0 = map.escape_radius();
    let mut r = rng(seed, salt);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = ComplexPair::new(disc(&mut r, 1.5 * r0), disc(&mut r, 1.5 * r0));
        if let Ok(e) = green_plus(map, z, 1e-12) {
            if e.escaped && e.value > 1e-3 {
                out.push(z);
            }
        }
    }
    out
}

/// `(worst excess over bound, worst diff, worst bound)` over paired values.
fn compare_bounded(rows: Vec<Result<(f64, f64)>>) -> Result<(bool, f64, f64)> {
    let (mut pass, mut diff, mut bound) = (true, 0.0f64, 0.0f64);
    for r in rows {
        let (d, b) = r?;
        pass &= d <= b;
        diff = diff.max(d);
        bound = bound.max(b);
    }
    Ok((pass, diff, bound))
}

fn core_checks(map: &HenonMap, o: &VerifyOptions) -> Vec<SuiteCheck> {
    let mut out = Vec::new();
    let pts = box_points(o.seed, 1, 2.0, o.samples);
    let rows: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&z| {
            let w = map.apply(z)?;
            let back = map.apply_inverse(w)?;
            let scale = 1.0f64.max(z.norm_max()).max(w.norm_max());
            Ok((back.x - z.x).norm().max((back.y - z.y).norm()) / scale)
        })
        .collect();
    out.push(match rows.into_iter().collect::<Result<Vec<f64>>>() {
        Ok(v) => {
            let m = v.iter().cloned().fold(0.0, f64::max);
            check("core", "inverse_roundtrip", m < 1e-12, m, 1e-12, o.samples, "relative".into())
        }
        Err(e) => failed("core", "inverse_roundtrip", &e),
    });

    let r0 = map.escape_radius();
    let mut r = rng(o.seed, 2);
    let mut bad = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..o.samples {
        let ry = r0 * r.gen_range(1.0..4.0);
        let y = Complex64::from_polar(ry, r.gen_range(0.0..TAU));
        let x = disc(&mut r, ry);
        let z = ComplexPair::new(x, y);
        match (map.classify(z, r0), map.apply(z)) {
            (Ok(t), Ok(w)) if t.tag == Region::Vplus => {
                let ok = map.classify(w, r0).map(|t| t.tag == Region::Vplus).unwrap_or(false) && w.y.norm() >= 2.0 * y.norm();
                if !ok {
                    bad += 1;
                    worst = worst.max((2.0 * y.norm() - w.y.norm()) / y.norm());
                }
            }
            _ => bad += 1,
        }
    }
    out.push(check(
        "core",
        "vplus_forward_invariance",
        bad == 0,
        worst,
        0.0,
        o.samples,
        format!("{bad} points violate |y1| >= 2|y| or leave V+"),
    ));
    out
}

fn greens_checks(map: &HenonMap, o: &VerifyOptions) -> Vec<SuiteCheck> {
    let mut out = Vec::new();
    let d = map.degree() as f64;
    let pts = escaping_points(map, o.seed, 3, o.samples);
    let rows: Vec<Result<(f64, f64)>> = pts
        .par_iter()
        .map(|&z| {
            let g = green_plus(map, z, o.tol)?;
            let g1 = green_plus(map, map.apply(z)?, o.tol)?;
            Ok(((g1.value - d * g.value).abs(), g1.error_bound + d * g.error_bound))
        })
        .collect();
    out.push(match compare_bounded(rows) {
        Ok((pass, m, b)) => check("greens", "functional_equation", pass, m, b, o.samples, "|G(Hz) - d G(z)|".into()),
        Err(e) => failed("greens", "functional_equation", &e),
    });

    let eps = DEFAULT_EPSILON;
    match r_epsilon(map, eps) {
        Ok(re) => {
            let mut r = rng(o.seed, 4);
            let pts: Vec<ComplexPair> = (0..o.samples)
                .map(|_| {
                    let ry = re * r.gen_range(1.0..8.0);
                    ComplexPair::new(disc(&mut r, ry), Complex64::from_polar(ry, r.gen_range(0.0..TAU)))
                })
                .collect();
            let rows: Vec<Result<(f64, f64)>> = pts
                .par_iter()
                .map(|&z| {
                    let g = green_plus(map, z, 1e-12)?;
                    Ok(((g.value - z.y.norm().ln()).abs(), eps + g.error_bound))
                })
                .collect();
            out.push(match compare_bounded(rows) {
                Ok((pass, m, b)) => check(
                    "greens",
                    "r_epsilon_estimate",
                    pass,
                    m,
                    b,
                    o.samples,
                    format!("|G - log|y|| on V+ of radius {re:.6} for eps = {eps}"),
                ),
                Err(e) => failed("greens", "r_epsilon_estimate", &e),
            });
        }
        Err(e) => out.push(failed("greens", "r_epsilon_estimate", &e)),
    }

    if map.a() == Complex64::new(1.0, 0.0) {
        let pts = escaping_points(map, o.seed, 5, o.samples);
        out.push(match involution_check_map(map, &pts, 1e-12) {
            Ok(r) => check("greens", "swap_exchanges_green_functions", r.pass, r.max_discrepancy, r.error_bound, r.samples, "|G+(x,y) - G-(y,x)|".into()),
            Err(e) => failed("greens", "swap_exchanges_green_functions", &e),
        });
    } else {
        out.push(skipped("greens", "swap_exchanges_green_functions", "needs a = 1".into()));
    }
    out
}

fn affine_checks(map: &HenonMap, o: &VerifyOptions) -> Vec<SuiteCheck> {
    let mut out = Vec::new();
    let d = map.degree();
    let g = affine_preservers(map);
    let closed = g.elements.iter().all(|a| {
        g.elements.contains(&a.inverse()) && g.elements.iter().all(|b| g.elements.contains(&a.compose(b)))
    });
    let a0_forces_trivial = map.p().coeff(0) == Complex64::new(0.0, 0.0) || g.order == 1;
    out.push(check(
        "affine",
        "preserver_group",
        closed && g.modulus % g.order == 0 && a0_forces_trivial,
        0.0,
        0.0,
        g.order as usize,
        format!("order {} in Z_{}, generator exponent {}", g.order, g.modulus, g.generator_exponent),
    ));

    let pts = escaping_points(map, o.seed, 6, o.samples);
    let rows: Vec<Result<(f64, f64)>> = g
        .elements
        .par_iter()
        .flat_map(|l| pts.par_iter().map(move |&z| (*l, z)))
        .map(|(l, z)| {
            let a = green_plus(map, z, o.tol)?;
            let b = green_plus(map, l.apply(z), o.tol)?;
            // |L z| = |z| only up to rounding of the root of unity
            let slack = 8.0 * f64::EPSILON * (1.0 + a.value);
            Ok(((a.value - b.value).abs(), a.error_bound + b.error_bound + slack))
        })
        .collect();
    out.push(match compare_bounded(rows) {
        Ok((pass, m, b)) => check("affine", "green_invariance", pass, m, b, pts.len() * g.elements.len(), "|G(Lz) - G(z)|".into()),
        Err(e) => failed("affine", "green_invariance", &e),
    });

    let mut worst = 0.0f64;
    let mut all = true;
    let mut detail = String::from("exact over Q(zeta_M) and numerical");
    for l in &g.elements {
        match verify_commute_h2(map, l, o.samples, o.seed) {
            Ok(r) => {
                all &= r.holds;
                worst = worst.max(r.numerical_max_error.unwrap_or(0.0));
                if let Some(off) = r.offending {
                    detail = format!("eta^{} differs at {:?}", l.eta_exponent, off);
                }
            }
            Err(e) => {
                all = false;
                detail = e.to_string();
            }
        }
    }
    out.push(check("affine", "commutes_with_square", all, worst, 1e-10, o.samples * g.elements.len(), detail));

    if map.p().coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
        let mut ok = true;
        for e in 0..(d as i64 * d as i64 - 1) {
            let l = crate::affine::DiagonalSym::new(d, e).unwrap_or(crate::affine::DiagonalSym::identity(d));
            ok &= verify_l_semiconjugacy(map, &l).map(|r| r.holds).unwrap_or(false);
        }
        out.push(check("affine", "semiconjugacy", ok, 0.0, 0.0, (d * d - 1) as usize, "H o L_eta = L_eta^d o H exactly".into()));
    } else {
        out.push(skipped("affine", "semiconjugacy", "needs p = y^d".into()));
    }
    out
}

fn model_checks(map: &HenonMap, o: &VerifyOptions) -> Vec<SuiteCheck> {
    let model = match Model::new(map) {
        Ok(m) => m,
        Err(e) => return vec![skipped("model", "model_space", e.to_string())],
    };
    let d = model.degree();
    let mut out = Vec::new();
    let c = 1.0;

    let pts = sample_points(d, c, 3, o.samples, o.seed ^ 7);
    let mut exact = true;
    for n in 0..4u32 {
        let g = match DeckTransform::new((d as i64).pow(n) * 3, n, d, 0) {
            Ok(g) => g,
            Err(_) => {
                exact = false;
                continue;
            }
        };
        exact &= pts.iter().all(|&p| model.deck_apply(&g, p).map(|q| q == p).unwrap_or(false));
    }
    out.push(check("model", "integer_class_is_identity", exact, 0.0, 0.0, o.samples, "compared bit for bit".into()));

    let classes = [(1, 2, 1, 2), (5, 6, -3, 4), (1, 1, 1, 1), (7, 5, 2, 3)];
    for (k1, n1, k2, n2) in classes {
        let r = DyadicClass::new(k1, n1, d).and_then(|r| Ok((r, DyadicClass::new(k2, n2, d)?)));
        out.push(match r.and_then(|(r, s)| verify_deck_group_law(map, r, s, c, o.samples, o.seed ^ 8)) {
            Ok(rep) => from_model("model", &rep),
            Err(e) => failed("model", "deck_group_law", &e),
        });
    }
    for m in 0..2 {
        for n in 0..=4 {
            out.push(match verify_comm_cover(map, n, m, c, o.samples, o.seed ^ 9) {
                Ok(rep) => from_model("model", &rep),
                Err(e) => failed("model", "comm_cover", &e),
            });
        }
    }
    for n in 1..=3 {
        out.push(match verify_g_chain(map, n, c, o.samples, o.seed ^ 10) {
            Ok(rep) => from_model("model", &rep),
            Err(e) => failed("model", "g_chain", &e),
        });
    }

    let order = (d * d - 1) as i64;
    let mut closed = true;
    for e1 in 0..order {
        for e2 in 0..order {
            let a = ModelAut::from_exponent(d, e1, Complex64::new(0.5, -1.0));
            let b = ModelAut::from_exponent(d, e2, Complex64::new(-2.0, 0.25));
            if let (Ok(a), Ok(b)) = (a, b) {
                closed &= a.compose(&b).map(|ab| {
                    let beta = ab.beta();
                    (beta.powu(d - 1) - 1.0).norm() < 1e-12 && (ab.alpha().powu(d + 1) - beta).norm() < 1e-12
                }).unwrap_or(false);
                let inv = a.inverse();
                closed &= a.compose(&inv).map(|e| e.alpha_exp == 0 && e.gamma.norm() < 1e-12).unwrap_or(false);
            }
        }
    }
    out.push(check("model", "automorphism_constraints_closed", closed, 0.0, 0.0, (order * order) as usize, "beta^(d-1) = 1, alpha^(d+1) = beta".into()));

    if map.p().coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
        for e in [1i64, order - 1] {
            let aut = ModelAut::from_exponent(d, e, Complex64::new(0.3, -0.2));
            let g = DeckTransform::new(1, 1, d, 0);
            out.push(match (aut, g) {
                (Ok(aut), Ok(g)) => match model_aut_normalizes_deck(map, &aut, &g, c, o.samples, o.seed ^ 11) {
                    Ok(rep) => from_model("model", &rep),
                    Err(e) => failed("model", "aut_normalizes_deck", &e),
                },
                (Err(e), _) | (_, Err(e)) => failed("model", "aut_normalizes_deck", &e),
            });
        }
    } else {
        out.push(skipped("model", "aut_normalizes_deck", "needs p = y^d".into()));
    }
    out
}

fn topology_checks(map: &HenonMap, _o: &VerifyOptions) -> Vec<SuiteCheck> {
    let mut out = Vec::new();
    let d = map.degree();
    let level = match canonical_radius(map, DEFAULT_EPSILON).and_then(|r| LevelSpec::new(r.ln() + 1.0)) {
        Ok(l) => l,
        Err(e) => return vec![failed("topology", "canonical_loop_class", &e)],
    };
    let mut case = |name: &str, expect: DyadicClass, f: &dyn Fn() -> Result<DyadicClass>| {
        out.push(match f() {
            Ok(cls) => check("topology", name, cls == expect, 0.0, 0.0, 1, format!("class {} expected {}", cls.display(d), expect.display(d))),
            Err(e) => failed("topology", name, &e),
        });
    };
    case("canonical_loop_class", DyadicClass::integer(1), &|| winding_class(map, &canonical_loop(map, 1)?, level));
    case("reversed_loop_class", DyadicClass::integer(-2), &|| winding_class(map, &canonical_loop(map, -2)?, level));
    case("concatenation_additive", DyadicClass::integer(3), &|| {
        let a = canonical_loop(map, 1)?;
        let b = canonical_loop(map, 2)?;
        winding_class(map, &a.concat(&b)?, level)
    });
    for n in 1..=2u32 {
        let expect = DyadicClass::new(1, n, d).unwrap_or(DyadicClass::ZERO);
        case(&format!("pull_back_class n={n}"), expect, &|| winding_class(map, &pull_back_loop(map, &canonical_loop(map, 1)?, n)?, level));
    }
    out
}

fn biholo_checks(map: &HenonMap, o: &VerifyOptions) -> Vec<SuiteCheck> {
    let mut out = Vec::new();
    let d = map.degree();
    let base = Level::Exact(num_rational::BigRational::new(3.into(), 2.into()));
    let mut ok = true;
    for n in -4i64..=4 {
        let scale = num_rational::BigRational::from_integer(num_bigint::BigInt::from(d)).pow(n as i32);
        let c1 = match &base {
            Level::Exact(r) => Level::Exact(r * scale),
            Level::Float(_) => unreachable!(),
        };
        ok &= biholo_criterion(&c1, &base, d).map(|r| r.n == Some(n)).unwrap_or(false);
    }
    ok &= biholo_criterion(&Level::integer(d as i64 + 1), &Level::integer(1), d).map(|r| r.n.is_none()).unwrap_or(false);
    out.push(check("biholo", "criterion_powers", ok, 0.0, 0.0, 10, "c1 = c2 d^n recovered exactly".into()));

    out.push(match continuum_family(&Level::integer(2), d, 10) {
        Ok(f) => check("biholo", "continuum_family", f.pass, 0.0, 0.0, f.certificates.len(), format!("{} pairs", f.certificates.len())),
        Err(e) => failed("biholo", "continuum_family", &e),
    });

    // G(Hz) = d G(z): H maps Ω_c into Ω_{dc}
    let c2 = 1.0;
    let pts = escaping_points(map, o.seed, 12, o.samples);
    let rows: Vec<Result<(f64, f64)>> = pts
        .par_iter()
        .map(|&z| {
            let g = green_plus(map, z, o.tol)?;
            if g.value + g.error_bound >= c2 {
                return Ok((0.0, 0.0));
            }
            let g1 = green_plus(map, map.apply(z)?, o.tol)?;
            Ok(((g1.value - g1.error_bound - d as f64 * c2).max(0.0), 0.0))
        })
        .collect();
    out.push(match compare_bounded(rows) {
        Ok((pass, m, b)) => check("biholo", "level_transport", pass, m, b, o.samples, "G(z) < c implies G(Hz) < d c".into()),
        Err(e) => failed("biholo", "level_transport", &e),
    });
    out
}

/// Run one suite (or `all`) against `map`.
pub fn run_suite(map: &HenonMap, suite: &str, o: &VerifyOptions) -> Result<VerifyReport> {
    if !SUITES.contains(&suite) {
        return Err(Error::InvalidInput(format!("unknown suite {suite:?}; expected one of {SUITES:?}")));
    }
    let want = |s: &str| suite == "all" || suite == s;
    let mut checks = Vec::new();
    if want("core") {
        checks.extend(core_checks(map, o));
    }
    if want("greens") {
        checks.extend(greens_checks(map, o));
    }
    if want("affine") {
        checks.extend(affine_checks(map, o));
    }
    if want("model") {
        checks.extend(model_checks(map, o));
    }
    if want("topology") {
        checks.extend(topology_checks(map, o));
    }
    if want("biholo") {
        checks.extend(biholo_checks(map, o));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: "verify".into(),
        suite: suite.to_string(),
        seed: o.seed,
        map: map.to_spec(),
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_suite_passes() {
        let h = HenonMap::pure(2, Complex64::new(1.0, 0.0)).unwrap();
        let o = VerifyOptions { samples: 50, ..Default::default() };
        let r = run_suite(&h, "all", &o).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(r.pass);
    }

    #[test]
    fn unknown_suite() {
        let h = HenonMap::quadratic_standard();
        assert!(run_suite(&h, "nope", &VerifyOptions::default()).is_err());
    }
}
