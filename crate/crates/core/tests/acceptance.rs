//! Acceptance battery. One PASS/FAIL line per criterion; exits non-zero if any fails.
//!
//! Reference values are computed here, independently of the library, wherever
//! that is possible: root-of-unity brute force for the affine group, direct
//! iteration for Green's function bounds, explicit coefficient formulas for `Q`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use shortc2_core::affine::affine_preservers;
use shortc2_core::biholo::{biholo_criterion, continuum_family, Level};
use shortc2_core::boettcher::{continue_log_phi, default_base_point, hat_phi, principal_seed, winding_class};
use shortc2_core::dyadic::DyadicClass;
use shortc2_core::greens::{green_minus, green_plus, LevelSpec};
use shortc2_core::henon::{ComplexPair, HenonMap, MonicPoly};
use shortc2_core::model::{
    q_poly, sample_points, verify_comm_cover, verify_deck_group_law, verify_g_chain, DeckTransform, Model,
};
use shortc2_core::mp::{MpMap, MpPair};
use shortc2_core::path::SampledPath;
use shortc2_core::topology::{canonical_loop, connect_points, pull_back_loop};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn map(d: u32, lower: &[Complex64], a: Complex64) -> HenonMap {
    HenonMap::new(MonicPoly::new(d, lower.to_vec()).unwrap(), a).unwrap()
}

fn disc(r: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * r.gen::<f64>().sqrt(), r.gen_range(0.0..TAU))
}

/// Random points with `G+ > 0` drawn from a box around the filtration.
fn escaping(h: &HenonMap, seed: u64, n: usize) -> Vec<ComplexPair> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let radius = 1.5 * h.escape_radius();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = ComplexPair::new(disc(&mut r, radius), disc(&mut r, radius));
        if matches!(green_plus(h, z, 1e-12), Ok(e) if e.escaped && e.value > 1e-6) {
            out.push(z);
        }
    }
    out
}

fn bounded_diffs(rows: Vec<Result<(f64, f64), String>>) -> Result<(f64, f64), String> {
    let (mut worst, mut bound) = (0.0f64, 0.0f64);
    for row in rows {
        let (diff, b) = row?;
        if diff > b {
            return Err(format!("discrepancy {diff:.3e} exceeds combined bound {b:.3e}"));
        }
        worst = worst.max(diff);
        bound = bound.max(b);
    }
    Ok((worst, bound))
}

fn functional_equation() -> Outcome {
    let mut parts = Vec::new();
    for d in [2u32, 3] {
        let h = HenonMap::pure(d, c(1.0, 0.0)).unwrap();
        let pts = escaping(&h, 11 + d as u64, 1000);
        let rows = pts
            .par_iter()
            .map(|&z| {
                let g = green_plus(&h, z, 1e-8).map_err(|e| e.to_string())?;
                let gh = green_plus(&h, h.apply(z).map_err(|e| e.to_string())?, 1e-8).map_err(|e| e.to_string())?;
                Ok(((gh.value - d as f64 * g.value).abs(), gh.error_bound + d as f64 * g.error_bound))
            })
            .collect();
        let (worst, bound) = bounded_diffs(rows)?;
        parts.push(format!("d={d}: max {worst:.2e} (bound {bound:.2e})"));
    }
    Ok(parts.join("; "))
}

/// Count `e` with `e^(d^2-1) = 1` such that `p(e^d y) = e p(y)` and
/// `p(e y) = e^d p(y)` hold coefficient by coefficient.
fn brute_force_order(d: u32, lower: &[Complex64]) -> usize {
    let m = (d * d - 1) as usize;
    let mut coeffs = lower.to_vec();
    coeffs.resize(d as usize, c(0.0, 0.0));
    coeffs.push(c(1.0, 0.0));
    (0..m)
        .filter(|&k| {
            let e = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
            let f = e.powu(d);
            coeffs.iter().enumerate().all(|(j, &aj)| {
                aj.norm() == 0.0
                    || ((aj * f.powu(j as u32) - e * aj).norm() < 1e-9 && (aj * e.powu(j as u32) - f * aj).norm() < 1e-9)
            })
        })
        .count()
}

fn affine_classification() -> Outcome {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let cases: [(&str, u32, Vec<Complex64>, u64); 4] = [
        ("y^2", 2, vec![zero], 3),
        ("y^3", 3, vec![zero, zero], 8),
        ("y^2+1", 2, vec![one], 1),
        ("y^4+y^2", 4, vec![zero, zero, one], 1),
    ];
    let mut parts = Vec::new();
    for (name, d, lower, expect) in cases {
        let h = map(d, &lower, one);
        let got = affine_preservers(&h).order;
        let brute = brute_force_order(d, &lower) as u64;
        if got != expect || brute != expect {
            return Err(format!("{name}: order {got}, brute force {brute}, expected {expect}"));
        }
        parts.push(format!("{name} -> {got}"));
    }
    Ok(parts.join(", "))
}

fn rotation_symmetry() -> Outcome {
    let w = Complex64::from_polar(1.0, TAU / 3.0);
    let mut parts = Vec::new();
    for (label, a) in [("a=1", c(1.0, 0.0)), ("a=2i", c(0.0, 2.0))] {
        let h = HenonMap::pure(2, a).unwrap();
        let pts = escaping(&h, 31, 1000);
        let rows = pts
            .par_iter()
            .map(|&z| {
                let l = ComplexPair::new(w * z.x, w * w * z.y);
                let g = green_plus(&h, z, 1e-10).map_err(|e| e.to_string())?;
                let gl = green_plus(&h, l, 1e-10).map_err(|e| e.to_string())?;
                Ok(((g.value - gl.value).abs(), g.error_bound + gl.error_bound))
            })
            .collect();
        let (worst, bound) = bounded_diffs(rows)?;
        parts.push(format!("{label}: max {worst:.2e} (bound {bound:.2e})"));
    }
    Ok(parts.join("; "))
}

fn lift_and_deck() -> Outcome {
    let err = |e: shortc2_core::Error| e.to_string();
    let mut parts = Vec::new();
    let maps = [
        map(2, &[c(0.3, -0.2)], c(0.7, 0.4)),
        map(3, &[c(-0.25, 0.5), c(0.4, 0.1)], c(1.2, -0.3)),
    ];
    for h in &maps {
        let d = h.degree();
        let a = h.p().coeffs();
        // Q read off the displayed expansion
        let expect: Vec<Complex64> = if d == 2 {
            vec![c(0.0, 0.0), -a[0] / 2.0, c(0.0, 0.0), c(1.0, 0.0)]
        } else {
            vec![a[1] * a[1] / 9.0, -a[0] / 3.0, -a[1] / 3.0, c(0.0, 0.0), c(1.0, 0.0)]
        };
        let q = q_poly(h).map_err(err)?;
        let qerr = q.coeffs().iter().zip(&expect).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if q.coeffs().len() != expect.len() || qerr > 1e-15 {
            return Err(format!("d={d}: Q coefficients {:?}", q.coeffs()));
        }
        let model = Model::new(h).map_err(err)?;
        let level = 1.0;
        for pt in sample_points(d, level, 0, 1000, 5) {
            for k in [-3i64, 1, 7] {
                let out = model.deck_apply(&DeckTransform::new(k, 0, d, 0).map_err(err)?, pt).map_err(err)?;
                if out != pt {
                    return Err(format!("d={d}: integer class {k} moved {pt:?}"));
                }
            }
        }
        let mut worst = [0.0f64; 3];
        let dn = |n: u32| (d as i64).pow(n);
        let pairs = [(1, 6, 1, 6), (dn(6) - 1, 6, 1, 1), (5, 5, 7, 6), (1, 3, -2, 4), (dn(6) + 1, 6, 3, 2)];
        for (k1, n1, k2, n2) in pairs {
            let r = DyadicClass::new(k1, n1, d).map_err(err)?;
            let s = DyadicClass::new(k2, n2, d).map_err(err)?;
            let rep = verify_deck_group_law(h, r, s, level, 1000, 7).map_err(err)?;
            if !rep.pass {
                return Err(format!("d={d}: {} error {:.3e}", rep.name, rep.max_error));
            }
            worst[0] = worst[0].max(rep.max_error);
        }
        for n in 0..=6 {
            for m in 0..=1 {
                let rep = verify_comm_cover(h, n, m, level, 1000, 9).map_err(err)?;
                if !rep.pass {
                    return Err(format!("d={d}: {} error {:.3e}", rep.name, rep.max_error));
                }
                worst[1] = worst[1].max(rep.max_error);
            }
        }
        for n in 1..=4 {
            let rep = verify_g_chain(h, n, level, 1000, 13).map_err(err)?;
            if !rep.pass {
                return Err(format!("d={d}: {} error {:.3e}", rep.name, rep.max_error));
            }
            worst[2] = worst[2].max(rep.max_error);
        }
        parts.push(format!(
            "d={d}: group law {:.1e}, commutation {:.1e}, chain {:.1e}",
            worst[0], worst[1], worst[2]
        ));
    }
    Ok(parts.join("; "))
}

fn winding_classes() -> Outcome {
    let err = |e: shortc2_core::Error| e.to_string();
    let mut parts = Vec::new();
    for d in [2u32, 3] {
        let h = HenonMap::pure(d, c(1.0, 0.0)).unwrap();
        let lvl = LevelSpec::new(50.0).unwrap();
        let c0 = canonical_loop(&h, 1).map_err(err)?;
        let got = winding_class(&h, &c0, lvl).map_err(err)?;
        if got != DyadicClass::integer(1) {
            return Err(format!("d={d}: class of C0 is {}", got.display(d)));
        }
        for n in 1..=6u32 {
            let lp = pull_back_loop(&h, &c0, n).map_err(err)?;
            let got = winding_class(&h, &lp, lvl).map_err(err)?;
            let expect = DyadicClass::new(1, n, d).map_err(err)?;
            if got != expect {
                return Err(format!("d={d}: pull-back by {n} has class {}", got.display(d)));
            }
        }
        // concatenations of loops based at the same point
        let c2 = canonical_loop(&h, 2).map_err(err)?;
        let rev = c0.reversed();
        for (name, lp, expect) in [
            ("C0+C0", c0.concat(&c0).map_err(err)?, 2),
            ("C0^2+C0^-1", c2.concat(&rev).map_err(err)?, 1),
            ("C0+C0^-1", c0.concat(&rev).map_err(err)?, 0),
        ] {
            let got = winding_class(&h, &lp, lvl).map_err(err)?;
            if got != DyadicClass::integer(expect) {
                return Err(format!("d={d}: {name} has class {}", got.display(d)));
            }
        }
        let half = pull_back_loop(&h, &c0, 1).map_err(err)?;
        let sum = half.concat(&half).map_err(err)?;
        let got = winding_class(&h, &sum, lvl).map_err(err)?;
        if got != DyadicClass::new(2, 1, d).map_err(err)? {
            return Err(format!("d={d}: doubled pull-back has class {}", got.display(d)));
        }
        parts.push(format!("d={d}: C0 -> 1, H^-n C0 -> 1/{d}^n for n<=6, sums additive"));
    }
    Ok(parts.join("; "))
}

/// A random path from the base point that stays in `|y| > max(|x|, R)`.
fn random_path(h: &HenonMap, r: &mut ChaCha8Rng) -> SampledPath {
    let base = default_base_point(h);
    let r0 = h.escape_radius();
    let r_end = r0 * r.gen_range(1.2..4.0);
    let turns = r.gen_range(-2.5..2.5);
    let x_end = disc(r, r0);
    let n = 400;
    let mut pts: Vec<ComplexPair> = (0..=n)
        .map(|j| {
            let t = j as f64 / n as f64;
            let rad = (base.y.re.ln() * (1.0 - t) + r_end.ln() * t).exp();
            let wobble = 0.3 * (TAU * 3.0 * t).sin() * t * (1.0 - t);
            let y = Complex64::from_polar(rad * (1.0 + wobble), TAU * turns * t);
            ComplexPair::new(x_end * t, y)
        })
        .collect();
    pts[0] = base;
    SampledPath::from_pairs(&pts).unwrap()
}

fn covering_coordinate() -> Outcome {
    let err = |e: shortc2_core::Error| e.to_string();
    let h = HenonMap::quadratic_standard();
    let lvl = LevelSpec::new(50.0).unwrap();
    let base = default_base_point(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let paths: Vec<SampledPath> = (0..100).map(|_| random_path(&h, &mut rng)).collect();
    let rows: Vec<Result<f64, String>> = paths
        .par_iter()
        .map(|p| {
            let v = hat_phi(&h, p, lvl, base).map_err(err)?;
            let end = p.end().to_pair().ok_or("endpoint out of range")?;
            let g = green_plus(&h, end, 1e-13).map_err(err)?;
            Ok((v.value.norm() - g.value.exp()).abs() / g.value.exp())
        })
        .collect();
    let mut worst = 0.0f64;
    for row in rows {
        worst = worst.max(row?);
    }
    if worst > 1e-5 {
        return Err(format!("| |phi| - e^G | / e^G reaches {worst:.3e}"));
    }

    // two paths from H^-1(0, R') to the same end, differing by a loop of class 1/2
    let half = pull_back_loop(&h, &canonical_loop(&h, 1).map_err(err)?, 1).map_err(err)?;
    let start = half.start().to_pair().ok_or("start out of range")?;
    let out: Vec<ComplexPair> = (0..=64)
        .map(|j| {
            let t = j as f64 / 64.0;
            ComplexPair::new(start.x * (1.0 + 0.5 * t), start.y + c(0.0, 3.0 * t))
        })
        .collect();
    let tail = SampledPath::from_pairs(&out).map_err(err)?;
    let seed = principal_seed(&h, half.start()).map_err(err)?;
    let direct = continue_log_phi(&h, &tail, seed).map_err(err)?;
    let around = continue_log_phi(&h, &half.concat(&tail).map_err(err)?, seed).map_err(err)?;
    let ratio = (around.end.log_phi - direct.end.log_phi).exp();
    let dev = (ratio + 1.0).norm();
    if dev > 1e-6 {
        return Err(format!("ratio across the class-1/2 loop is {ratio}"));
    }
    Ok(format!("100 paths: max rel {worst:.2e}; class-1/2 ratio {:.9} + {:.1e}i", ratio.re, ratio.im))
}

fn biholomorphism() -> Outcome {
    let err = |e: shortc2_core::Error| e.to_string();
    for d in [2u32, 3] {
        for c2 in ["1", "7/3", "5/11"] {
            for n in -5i64..=5 {
                let num: i64 = c2.split('/').next().unwrap().parse().unwrap();
                let den: i64 = c2.split('/').nth(1).unwrap_or("1").parse().unwrap();
                let p = (d as i64).pow(n.unsigned_abs() as u32);
                let c1 = if n >= 0 { format!("{}/{den}", num * p) } else { format!("{num}/{}", den * p) };
                let l1: Level = c1.parse().map_err(err)?;
                let l2: Level = c2.parse().map_err(err)?;
                let got = biholo_criterion(&l1, &l2, d).map_err(err)?.n;
                if got != Some(n) {
                    return Err(format!("({c1}, {c2}, {d}) gave {got:?}, expected {n}"));
                }
            }
        }
    }
    let none = biholo_criterion(&Level::integer(3), &Level::integer(1), 2).map_err(err)?;
    if none.n.is_some() {
        return Err(format!("(3, 1, 2) gave {:?}", none.n));
    }
    let fam = continuum_family(&Level::integer(2), 2, 10).map_err(err)?;
    let certified = fam.certificates.iter().filter(|c| c.n.is_none()).count();
    if fam.certificates.len() != 45 || certified != 45 || !fam.pass {
        return Err(format!("continuum family: {certified}/{} pairs certified", fam.certificates.len()));
    }
    Ok("all |n|<=5 exact, (3,1,2) -> none, 45/45 family pairs none".into())
}

fn swap_identity() -> Outcome {
    let h = HenonMap::quadratic_standard();
    let mut r = ChaCha8Rng::seed_from_u64(71);
    let pts: Vec<ComplexPair> = (0..1000).map(|_| ComplexPair::new(disc(&mut r, 4.0), disc(&mut r, 4.0))).collect();
    let rows: Vec<Result<Option<(f64, f64)>, String>> = pts
        .par_iter()
        .map(|&z| {
            let gp = green_plus(&h, z, 1e-10);
            let gm = green_minus(&h, z.swap(), 1e-10);
            match (gp, gm) {
                (Ok(p), Ok(m)) => Ok(Some(((p.value - m.value).abs(), p.error_bound + m.error_bound))),
                // both undecided means both sides sit near K+; nothing to compare
                (Err(a), Err(_)) if a.code() == "undecided" => Ok(None),
                (a, b) => Err(format!("only one side decided at {z:?}: {:?} / {:?}", a.err(), b.err())),
            }
        })
        .collect();
    let mut compared = Vec::new();
    for row in rows {
        if let Some(v) = row? {
            compared.push(Ok(v));
        }
    }
    let n = compared.len();
    let (worst, bound) = bounded_diffs(compared)?;
    Ok(format!("{n}/1000 decided points: max {worst:.2e} (bound {bound:.2e})"))
}

/// Certified enclosure of `G+` at a stored sample by direct multiprecision
/// iteration: once `|y| >= max(|x|, 2 R)` every step changes `log|y|` by `d log|y|`
/// plus at most `log 2`, so `d^-n (log|y_n| ± log 2/(d-1))` brackets `G+`.
fn green_bracket(h: &HenonMap, mp: &MpMap, s: &MpPair) -> Option<(f64, f64)> {
    let d = h.degree() as f64;
    let l2r = (2.0 * h.escape_radius()).log2();
    let prec = s.precision().max(53) + 128 + s.log2_norm().max(0.0).ceil() as usize;
    let mut z = s.with_precision(prec);
    let mut n = 0i32;
    loop {
        let (x, y) = z.to_ext();
        let ly = y.log2_abs();
        if ly >= x.log2_abs() && ly >= l2r {
            // a few more steps tighten the bracket cheaply
            if n >= 6 || ly > 4000.0 {
                let l = ly * std::f64::consts::LN_2;
                let slack = std::f64::consts::LN_2 / (d - 1.0);
                let w = d.powi(-n);
                return Some((w * (l - slack), w * (l + slack)));
            }
        }
        if n > 20_000 {
            return None;
        }
        z = mp.apply(&z);
        n += 1;
    }
}

fn connecting_paths() -> Outcome {
    let err = |e: shortc2_core::Error| e.to_string();
    let h = HenonMap::quadratic_standard();
    let lvl = LevelSpec::new(2.0).unwrap();
    let mp = MpMap::new(&h);
    let mut r = ChaCha8Rng::seed_from_u64(91);
    let mut inside = Vec::new();
    while inside.len() < 40 {
        let z = ComplexPair::new(disc(&mut r, 3.0), disc(&mut r, 3.0));
        if let Ok(e) = green_plus(&h, z, 1e-12) {
            if e.escaped && e.value - e.error_bound > 1e-3 && e.value + e.error_bound < 2.0 - 1e-3 {
                inside.push(z);
            }
        }
    }
    let mut samples = 0usize;
    let mut hi = 0.0f64;
    let mut lo = f64::INFINITY;
    for pair in inside.chunks(2) {
        let con = connect_points(&h, pair[0], pair[1], lvl).map_err(err)?;
        let brackets: Vec<Option<(f64, f64)>> = con.path.points.par_iter().map(|s| green_bracket(&h, &mp, s)).collect();
        for (i, b) in brackets.into_iter().enumerate() {
            let (l, u) = b.ok_or(format!("sample {i} did not escape"))?;
            if !(l > 0.0 && u < 2.0) {
                return Err(format!("sample {i} has G+ in [{l:.4}, {u:.4}]"));
            }
            lo = lo.min(l);
            hi = hi.max(u);
        }
        samples += con.path.len();
    }
    Ok(format!("20 pairs, {samples} samples, G+ within [{lo:.2e}, {hi:.3}]"))
}

fn render_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_shortc2");
    let run = |dir: &std::path::Path| -> Result<(Vec<u8>, Vec<u8>), String> {
        let status = std::process::Command::new(bin)
            .args(["render", "--nx", "48", "--ny", "40", "--level", "1.5", "--stem", "det", "--seed", "3"])
            .args(["--at", "0.25", "-0.5", "--bounds", "-3", "3", "-2.5", "2.5"])
            .arg("--out")
            .arg(dir)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("render exited with {status}"));
        }
        let csv = std::fs::read(dir.join("det.csv")).map_err(|e| e.to_string())?;
        let pgm = std::fs::read(dir.join("det.pgm")).map_err(|e| e.to_string())?;
        Ok((csv, pgm))
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (csv1, pgm1) = run(a.path())?;
    let (csv2, pgm2) = run(b.path())?;
    if csv1 != csv2 || pgm1 != pgm2 {
        return Err("outputs differ between runs".into());
    }
    Ok(format!("{} CSV bytes and {} PGM bytes identical", csv1.len(), pgm1.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "functional equation", limit: Some(Duration::from_secs(10)), run: functional_equation },
        Criterion { id: 2, name: "affine classification", limit: Some(Duration::from_secs(1)), run: affine_classification },
        Criterion { id: 3, name: "rotation symmetry", limit: Some(Duration::from_secs(10)), run: rotation_symmetry },
        Criterion { id: 4, name: "lift and deck suite", limit: Some(Duration::from_secs(30)), run: lift_and_deck },
        Criterion { id: 5, name: "winding classes", limit: Some(Duration::from_secs(30)), run: winding_classes },
        Criterion { id: 6, name: "covering coordinate", limit: None, run: covering_coordinate },
        Criterion { id: 7, name: "biholomorphism criterion", limit: Some(Duration::from_secs(1)), run: biholomorphism },
        Criterion { id: 8, name: "swap identity", limit: Some(Duration::from_secs(10)), run: swap_identity },
        Criterion { id: 9, name: "connecting paths", limit: Some(Duration::from_secs(60)), run: connecting_paths },
        Criterion { id: 10, name: "render determinism", limit: None, run: render_determinism },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for cr in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let t = Instant::now();
        let res = (cr.run)();
        let el = t.elapsed();
        let (ok, detail) = match (res, cr.limit) {
            (Ok(s), Some(l)) if el > l => (false, format!("{s}; too slow, limit {:.0}s", l.as_secs_f64())),
            (Ok(s), _) => (true, s),
            (Err(e), _) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {} ({:.2}s): {}",
            if ok { "PASS" } else { "FAIL" },
            cr.id,
            cr.name,
            el.as_secs_f64(),
            detail
        );
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
