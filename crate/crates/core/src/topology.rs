//! Paths in `Ω'_c`: the canonical loop around the x-axis, pull-backs of
//! loops, and connecting paths between two points of `Ω'_c`.
//!
//! Connecting paths follow the push-forward argument: both endpoints are
//! pushed into `V+_{R_ε}`, joined there by a path `σ` whose `|y|` never
//! exceeds the larger endpoint's, and `σ` is pulled back. When the endpoints
//! reach `V+_{R_ε}` at different depths, `σ` is assembled from pieces at
//! successive depths glued at `P = (0, R_ε)` and `H(P)`, because
//! `H^-k(H(P)) = H^-(k-1)(P)`. Each piece keeps its `|y|` below that of its
//! ends, so the pulled-back path stays below the level.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::ext::ExtComplex;
use crate::greens::{membership, r_epsilon, LevelSpec, Membership, DEFAULT_BUDGET};
use crate::henon::{ComplexPair, HenonMap};
use crate::mp::{MpComplex, MpPair, F64_PREC};
use crate::path::{check_level, Escape, SampledPath};

/// Default `ε` for `R_ε`.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// `d^n0 (c - c1) > MARGIN · ε`.
pub const DEFAULT_MARGIN: f64 = 4.0;

/// Give up beyond this many bits per coordinate.
pub const MAX_PRECISION: usize = 1 << 21;

/// Samples per turn of a circle.
const SAMPLES_PER_TURN: usize = 32;

/// `R'` with `R_ε + 1/2 < R' < R_ε + 1`.
pub fn canonical_radius(map: &HenonMap, eps: f64) -> Result<f64> {
    Ok(r_epsilon(map, eps)? + 0.75)
}

/// `C_0: t -> (0, R' e^{2πit})` traversed `m` times.
pub fn canonical_loop(map: &HenonMap, m: i64) -> Result<SampledPath> {
    canonical_loop_eps(map, m, DEFAULT_EPSILON)
}

pub fn canonical_loop_eps(map: &HenonMap, m: i64, eps: f64) -> Result<SampledPath> {
    let r = canonical_radius(map, eps)?;
    let start = ComplexPair::from_parts(0.0, 0.0, r, 0.0);
    if m == 0 {
        return Ok(SampledPath::constant(MpPair::from_pair(start)));
    }
    let n = SAMPLES_PER_TURN * m.unsigned_abs() as usize;
    let sign = m.signum() as f64;
    let mut pts: Vec<ComplexPair> = (0..n)
        .map(|j| {
            let t = sign * TAU * j as f64 / SAMPLES_PER_TURN as f64;
            ComplexPair::new(Complex64::new(0.0, 0.0), Complex64::from_polar(r, t))
        })
        .collect();
    pts[0] = start;
    pts.push(start);
    let mut path = SampledPath::from_pairs(&pts)?;
    path.refinement_tol = std::f64::consts::FRAC_PI_2;
    Ok(path)
}

/// `H^n` applied pointwise.
pub fn push_forward_path(map: &HenonMap, path: &SampledPath, n: u32) -> Result<SampledPath> {
    let esc = Escape::new(map);
    let pts: Vec<MpPair> = path
        .points
        .par_iter()
        .map(|s| {
            let prec = s.precision().max(F64_PREC) + 96 + s.log2_norm().max(0.0).ceil() as usize;
            let mut z = s.with_precision(prec);
            for _ in 0..n {
                z = esc.mp().apply(&z);
            }
            z
        })
        .collect();
    Ok(SampledPath {
        points: pts,
        refinement_tol: path.refinement_tol,
    })
}

/// `H^-k(s)`, stored with enough bits that pushing it forward again
/// reproduces `s`; the round trip is checked and the precision doubled
/// until it passes.
pub(crate) fn pull_back_point(esc: &Escape, s: &MpPair, k: u32) -> Result<MpPair> {
    if k == 0 {
        return Ok(s.clone());
    }
    let map = esc.map();
    let (mut x, mut y) = s.to_ext();
    let mut top = x.log2_abs().max(y.log2_abs()).max(0.0);
    for _ in 0..k {
        let (nx, ny) = map.apply_inverse_ext(x, y);
        x = nx;
        y = ny;
        top = top.max(x.log2_abs()).max(y.log2_abs());
    }
    if !top.is_finite() {
        return Err(Error::PathTooWild("pull-back leaves every representable range".into()));
    }
    let mag = top.ceil() as usize;
    let target = s.log2_norm().max(0.0);
    let mut guard = 128usize;
    loop {
        let work = s.precision().max(F64_PREC) + guard + 2 * mag;
        if work > MAX_PRECISION {
            return Err(Error::PathTooWild(format!(
                "pull-back by {k} needs more than {MAX_PRECISION} bits"
            )));
        }
        let mut z = s.with_precision(work);
        for _ in 0..k {
            z = esc.mp().apply_inverse(&z);
        }
        let stored = z.with_precision(guard + mag);
        // push forward again and compare
        let mut w = stored.with_precision(work);
        for _ in 0..k {
            w = esc.mp().apply(&w);
        }
        let dx = w.x.sub(&s.x).log2_abs();
        let dy = w.y.sub(&s.y).log2_abs();
        if dx.max(dy) < target - 45.0 {
            return Ok(stored);
        }
        guard *= 2;
    }
}

/// `H^-n` applied pointwise; the winding class divides by `d^n`.
pub fn pull_back_loop(map: &HenonMap, lp: &SampledPath, n: u32) -> Result<SampledPath> {
    let esc = Escape::new(map);
    let pts: Vec<Result<MpPair>> = lp.points.par_iter().map(|s| pull_back_point(&esc, s, n)).collect();
    let pts: Vec<MpPair> = pts.into_iter().collect::<Result<_>>()?;
    Ok(SampledPath {
        points: pts,
        refinement_tol: lp.refinement_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectOptions {
    pub eps: f64,
    pub margin: f64,
    pub budget: usize,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            eps: DEFAULT_EPSILON,
            margin: DEFAULT_MARGIN,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// How a connecting path was built, recorded alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectInfo {
    pub c1: f64,
    pub eps: f64,
    pub r_eps: f64,
    pub margin: f64,
    /// shallowest depth at which the pieces of `σ` live
    pub n0: u32,
    pub depth_a: u32,
    pub depth_b: u32,
    pub pieces: usize,
    pub samples: usize,
    /// largest certified `G+` over the samples, with its error bound
    pub max_green: f64,
    pub max_green_error: f64,
    pub max_precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub path: SampledPath,
    pub info: ConnectInfo,
}

fn certify_endpoint(map: &HenonMap, z: ComplexPair, level: LevelSpec, budget: usize, name: &str) -> Result<()> {
    match membership(map, z, level, budget)? {
        Membership::OmegaPrimeInterior => Ok(()),
        Membership::BoundaryUnresolved => Err(Error::EndpointUndecided(format!(
            "{name} cannot be certified inside or outside the level set"
        ))),
        Membership::KPlus => Err(Error::EndpointOutside(format!("{name} has a bounded forward orbit"))),
        Membership::Outside => Err(Error::EndpointOutside(format!("{name} has G+ >= c"))),
    }
}

/// First `n` with `H^n(s)` in `V+_R`, and that iterate.
fn depth_into(esc: &Escape, s: &MpPair, log2_r: f64, budget: usize) -> Result<(u32, MpPair)> {
    let prec = s.precision().max(F64_PREC) + 96 + s.log2_norm().max(0.0).ceil() as usize;
    let mut z = s.with_precision(prec);
    for n in 0..=budget as u32 {
        let (x, y) = z.to_ext();
        let ly = y.log2_abs();
        if ly >= x.log2_abs().max(log2_r) {
            return Ok((n, z));
        }
        z = esc.mp().apply(&z);
    }
    Err(Error::EndpointUndecided("orbit did not reach V+_{R_eps}".into()))
}

fn ext_to_mp(x: ExtComplex, y: ExtComplex) -> MpPair {
    let mag = x.log2_abs().max(y.log2_abs()).max(0.0).ceil() as usize;
    MpPair::from_ext(&x, &y, 64 + mag)
}

fn real_power_of_e(t: f64) -> ExtComplex {
    // e^t as an extended real
    let f = t / std::f64::consts::LN_2;
    let e = f.floor();
    ExtComplex::new(Complex64::new((f - e).exp2(), 0.0), e as i64)
}

/// `σ` from `s` to `t` inside `V+_{R}`: radial leg on the lower point with `x`
/// shrinking to 0, rotation on the circle of the larger modulus, then a
/// straight leg to the other point.
fn sigma(s: &MpPair, t: &MpPair) -> Vec<MpPair> {
    let (se, te) = (s.to_ext(), t.to_ext());
    let swap = se.1.log2_abs() > te.1.log2_abs();
    let (lo, hi, lo_mp, hi_mp) = if swap { (te, se, t, s) } else { (se, te, s, t) };
    let mut out: Vec<MpPair> = vec![lo_mp.clone()];

    // leg 1: |y| from |y_lo| to |y_hi|, x -> 0
    let growth = hi.1.ln_abs() - lo.1.ln_abs();
    let k1 = ((growth / 4f64.ln()).ceil() as usize).clamp(1, 48);
    let mut y1 = lo.1;
    for j in 1..=k1 {
        let t = j as f64 / k1 as f64;
        y1 = lo.1 * real_power_of_e(t * growth);
        let x = lo.0.scale(1.0 - t);
        out.push(ext_to_mp(x, y1));
    }
    // leg 2: rotate arg y, x = 0
    let turn = {
        let r = (hi.1.arg() - y1.arg()).rem_euclid(TAU);
        if r > PI {
            r - TAU
        } else {
            r
        }
    };
    let k2 = (turn.abs() / (PI / 16.0)).ceil() as usize;
    let mut y2 = y1;
    for j in 1..=k2 {
        let ang = turn * j as f64 / k2 as f64;
        y2 = y1.mul_c64(Complex64::from_polar(1.0, ang));
        out.push(ext_to_mp(ExtComplex::ZERO, y2));
    }
    // leg 3: straight to the upper point
    let k3 = 8;
    for j in 1..k3 {
        let t = j as f64 / k3 as f64;
        let x = hi.0.scale(t);
        let y = y2 + (hi.1 - y2).scale(t);
        out.push(ext_to_mp(x, y));
    }
    out.push(hi_mp.clone());
    if swap {
        out.reverse();
    }
    out
}

/// A path in `Ω'_c` from `a` to `b`, every sample certified `0 < G+ < c`.
pub fn connect_points(map: &HenonMap, a: ComplexPair, b: ComplexPair, level: LevelSpec) -> Result<Connection> {
    connect_points_with(map, a, b, level, ConnectOptions::default())
}

pub fn connect_points_with(
    map: &HenonMap,
    a: ComplexPair,
    b: ComplexPair,
    level: LevelSpec,
    opts: ConnectOptions,
) -> Result<Connection> {
    certify_endpoint(map, a, level, opts.budget, "A")?;
    certify_endpoint(map, b, level, opts.budget, "B")?;
    let esc = Escape::new(map);
    let (ma, mb) = (MpPair::from_pair(a), MpPair::from_pair(b));
    let ca = esc.chart(&ma, opts.budget).ok_or_else(|| Error::EndpointUndecided("A".into()))?;
    let cb = esc.chart(&mb, opts.budget).ok_or_else(|| Error::EndpointUndecided("B".into()))?;
    let (ga, gb) = (esc.green(&ca, 1e-13)?, esc.green(&cb, 1e-13)?);
    let c1 = (ga.value + ga.error_bound).max(gb.value + gb.error_bound);
    let r_eps = r_epsilon(map, opts.eps)?;
    let d = map.degree();

    if a == b {
        let path = SampledPath::constant(ma);
        return Ok(Connection {
            path,
            info: ConnectInfo {
                c1,
                eps: opts.eps,
                r_eps,
                margin: opts.margin,
                n0: 0,
                depth_a: 0,
                depth_b: 0,
                pieces: 0,
                samples: 2,
                max_green: ga.value,
                max_green_error: ga.error_bound,
                max_precision: F64_PREC,
            },
        });
    }

    let log2_reps = r_eps.log2();
    let (na, a_top) = depth_into(&esc, &ma, log2_reps, opts.budget)?;
    let (nb, b_top) = depth_into(&esc, &mb, log2_reps, opts.budget)?;
    let gap = level.c - c1;
    let mut j0 = 0u32;
    while (d as f64).powi(j0 as i32) * gap <= opts.margin * opts.eps {
        j0 += 1;
        if j0 > 4096 {
            return Err(Error::EndpointUndecided("endpoint too close to the level".into()));
        }
    }
    let junction = na.min(nb).max(j0);
    let advance = |z: MpPair, from: u32, to: u32| {
        let mut z = z;
        for _ in from..to {
            z = esc.mp().apply(&z);
        }
        z
    };
    let (na, a_top) = if na < junction { (junction, advance(a_top, na, junction)) } else { (na, a_top) };
    let (nb, b_top) = if nb < junction { (junction, advance(b_top, nb, junction)) } else { (nb, b_top) };

    let rung = MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, r_eps, 0.0)).with_precision(64 * d as usize + 64);
    let rung_image = esc.mp().apply(&rung);

    // pieces as (depth, start, end) in pushed coordinates
    let mut pieces: Vec<(u32, MpPair, MpPair)> = Vec::new();
    for k in ((junction + 1)..=na).rev() {
        let s = if k == na { a_top.clone() } else { rung.clone() };
        pieces.push((k, s, rung_image.clone()));
    }
    {
        let s = if na > junction { rung.clone() } else { a_top.clone() };
        let t = if nb > junction { rung.clone() } else { b_top.clone() };
        if !(na > junction && nb > junction) {
            pieces.push((junction, s, t));
        }
    }
    for k in (junction + 1)..=nb {
        let t = if k == nb { b_top.clone() } else { rung.clone() };
        pieces.push((k, rung_image.clone(), t));
    }

    let mut samples: Vec<MpPair> = Vec::new();
    for (i, (k, s, t)) in pieces.iter().enumerate() {
        let sig = sigma(s, t);
        let pulled: Vec<Result<MpPair>> = sig.par_iter().map(|p| pull_back_point(&esc, p, *k)).collect();
        let pulled: Vec<MpPair> = pulled.into_iter().collect::<Result<_>>()?;
        // pieces meet at a common point; keep one copy
        let skip = if i == 0 { 0 } else { 1 };
        samples.extend(pulled.into_iter().skip(skip));
    }
    let last = samples.len() - 1;
    samples[0] = ma;
    samples[last] = mb;

    let path = SampledPath {
        points: samples,
        refinement_tol: std::f64::consts::FRAC_PI_2,
    };
    let charts = esc.charts(&path.points, opts.budget)?;
    let greens = check_level(&esc, &charts, level.c)?;
    let (max_green, max_green_error) = greens
        .iter()
        .map(|g| (g.value, g.error_bound))
        .fold((0.0, 0.0), |acc, g| if g.0 > acc.0 { g } else { acc });
    let max_precision = path.points.iter().map(|p| p.precision()).max().unwrap_or(F64_PREC);
    Ok(Connection {
        info: ConnectInfo {
            c1,
            eps: opts.eps,
            r_eps,
            margin: opts.margin,
            n0: junction,
            depth_a: na,
            depth_b: nb,
            pieces: pieces.len(),
            samples: path.len(),
            max_green,
            max_green_error,
            max_precision,
        },
        path,
    })
}

/// Points of `Ω'_c` as multiprecision pairs, for callers holding exact data.
pub fn mp_point(z: ComplexPair) -> MpPair {
    MpPair {
        x: MpComplex::from_c64(z.x),
        y: MpComplex::from_c64(z.y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boettcher::winding_class;
    use crate::dyadic::DyadicClass;
    use crate::greens::green_plus;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn canonical_loop_classes() {
        let h = HenonMap::quadratic_standard();
        let r = canonical_radius(&h, DEFAULT_EPSILON).unwrap();
        let lvl = LevelSpec::new(r.ln() + 1.0).unwrap();
        for m in [1i64, 0, -2, 3] {
            let l = canonical_loop(&h, m).unwrap();
            assert!(l.is_loop());
            assert_eq!(winding_class(&h, &l, lvl).unwrap(), DyadicClass::integer(m), "m = {m}");
        }
    }

    #[test]
    fn pull_backs_divide_the_class() {
        let h = HenonMap::quadratic_standard();
        let l = canonical_loop(&h, 1).unwrap();
        let lvl = LevelSpec::new(10.0).unwrap();
        for n in 1..=3u32 {
            let p = pull_back_loop(&h, &l, n).unwrap();
            assert!(p.is_loop());
            assert_eq!(winding_class(&h, &p, lvl).unwrap(), DyadicClass::new(1, n, 2).unwrap());
        }
        let c = SampledPath::constant(l.start().clone());
        let p = pull_back_loop(&h, &c, 2).unwrap();
        assert_eq!(winding_class(&h, &p, lvl).unwrap(), DyadicClass::ZERO);
    }

    #[test]
    fn connect_radial_pair() {
        let h = HenonMap::quadratic_standard();
        let a = ComplexPair::new(re(0.0), re(4.0));
        let b = ComplexPair::new(re(0.0), re(6.0));
        let lvl = LevelSpec::new(2.0).unwrap();
        let c = connect_points(&h, a, b, lvl).unwrap();
        assert_eq!(c.path.start(), &MpPair::from_pair(a));
        assert_eq!(c.path.end(), &MpPair::from_pair(b));
        let gb = green_plus(&h, b, 1e-13).unwrap();
        let bound = gb.value + 2.0 * c.info.eps / (2f64).powi(c.info.n0 as i32);
        assert!(c.info.max_green <= bound + gb.error_bound + c.info.max_green_error, "{:?}", c.info);
    }

    #[test]
    fn connect_across_arguments() {
        let h = HenonMap::quadratic_standard();
        let a = ComplexPair::new(re(0.0), re(4.0));
        let b = ComplexPair::new(re(0.0), Complex64::new(0.0, 4.0));
        let c = connect_points(&h, a, b, LevelSpec::new(2.0).unwrap()).unwrap();
        assert!(c.path.len() > 10);
        let same = connect_points(&h, a, a, LevelSpec::new(2.0).unwrap()).unwrap();
        assert_eq!(same.path.points.len(), 2);
    }

    #[test]
    fn connect_rejects_bad_endpoints() {
        let h = HenonMap::quadratic_standard();
        let lvl = LevelSpec::new(1.0).unwrap();
        let r = connect_points(&h, ComplexPair::new(re(0.0), re(4.0)), ComplexPair::new(re(0.0), re(0.5)), lvl);
        assert!(matches!(r, Err(Error::EndpointOutside(_))));
    }
}
