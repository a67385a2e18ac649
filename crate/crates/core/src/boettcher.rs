//! The Böttcher coordinate `φ+` on `V+_{R0}`, its logarithm continued along
//! paths in `U+`, the covering coordinate `φ̂+`, and `Z[1/d]` winding classes.
//!
//! On `V+_{R0}` write `y_{j+1} = y_j^d (1 + u_j)` with
//! `u_j = (p(y_j) - y_j^d - a x_j) / y_j^d`, so that
//! `log φ+ = Log y_0 + Σ_j d^-(j+1) Log(1 + u_j)` with principal logarithms
//! (`|u_j| <= 1/2` there). Continuation along a path pushes each pair of
//! consecutive samples into that region, where `φ+ ∘ H^n = (φ+)^(d^n)`
//! turns an increment of `log φ+` at depth `n` into `d^-n` times it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::dyadic::DyadicClass;
use crate::error::{Error, Result};
use crate::ext::ExtComplex;
use crate::greens::{DEFAULT_BUDGET, LevelSpec};
use crate::henon::{ComplexPair, HenonMap, Region};
use crate::mp::MpPair;
use crate::path::{check_level, Chart, Escape, SampledPath};

/// Refinement depth for a single step of a path.
pub const MAX_REFINE_DEPTH: u32 = 24;

const EPS: f64 = f64::EPSILON;

/// A chosen branch of `log φ+` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchValue {
    pub log_phi: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub value: Complex64,
    /// principal branch
    pub log_value: Complex64,
    /// bound on the truncation error of `log_value`
    pub error_bound: f64,
    pub terms: usize,
}

/// `Log y + Σ_{j<terms} d^-(j+1) Log(1+u_j)` and a bound on the omitted tail.
fn log_phi_terms(map: &HenonMap, x0: ExtComplex, y0: ExtComplex, terms: usize) -> (Complex64, f64) {
    let d = map.degree() as f64;
    let m = map.forward_perturbation_constant();
    let (mut x, mut y) = (x0, y0);
    let mut acc = y.ln();
    let mut scale = 1.0 / d;
    for _ in 0..terms {
        // far past double resolution; stop before the exponent overflows
        if y.log2_abs() > 1e12 {
            break;
        }
        let yd = y.powu(map.degree());
        let lower = map.p().eval_lower_ext(y) - x.mul_c64(map.a());
        let u = lower.div(&yd).to_c64().unwrap_or(Complex64::new(0.0, 0.0));
        acc += (Complex64::new(1.0, 0.0) + u).ln() * scale;
        let ny = yd + yd.mul_c64(u);
        x = y;
        y = ny;
        scale /= d;
    }
    // remaining tail starts at index `terms` with |u| <= M/|y|
    let b = m * (-y.ln_abs()).exp();
    let tail = 2.0 * b * scale / (1.0 - 1.0 / (2.0 * d));
    (acc, tail)
}

/// Enough terms for the tail to drop below double resolution.
fn log_phi_converged(map: &HenonMap, x: ExtComplex, y: ExtComplex) -> (Complex64, f64) {
    let d = map.degree() as f64;
    let m = map.forward_perturbation_constant();
    // |y_j| grows at least like 2^j |y|, the weights like d^-j
    let mut terms = 1;
    let mut ly = y.ln_abs();
    let mut w = 1.0 / d;
    while terms < 200 {
        let tail = 2.0 * m * (-ly).exp() * w;
        if tail < 1e-19 * (1.0 + y.ln_abs().abs()) {
            break;
        }
        terms += 1;
        ly = d * ly + (1.0f64 - 0.5).ln();
        w /= d;
    }
    let (v, tail) = log_phi_terms(map, x, y, terms);
    (v, tail + 8.0 * EPS * (v.norm() + terms as f64))
}

/// `φ+(z)` by the truncated product with `terms` factors, `z` in `V+_{R0}`.
pub fn phi_plus(map: &HenonMap, z: ComplexPair, terms: usize) -> Result<PhiEstimate> {
    if terms < 1 {
        return Err(Error::InvalidInput("terms must be >= 1".into()));
    }
    let r0 = map.escape_radius();
    let region = map.classify(z, r0)?;
    if region.tag != Region::Vplus {
        return Err(Error::NotInVplus { radius: r0 });
    }
    let (log_value, tail) = log_phi_terms(map, ExtComplex::from_c64(z.x), ExtComplex::from_c64(z.y), terms);
    let value = log_value.exp();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::OrbitOverflow { last_finite: terms });
    }
    Ok(PhiEstimate {
        value,
        log_value,
        error_bound: tail + 8.0 * EPS * (log_value.norm() + terms as f64),
        terms,
    })
}

/// Principal `log φ+` at a point of the Böttcher region.
pub(crate) fn log_phi_at_chart(map: &HenonMap, ch: &Chart) -> (Complex64, f64) {
    log_phi_converged(map, ch.x, ch.y)
}

fn wrap_pi(t: f64) -> f64 {
    let mut r = t.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// One step of a path, in the depth it was evaluated at.
#[derive(Debug, Clone, Copy)]
struct Step {
    /// increment of log φ+ at depth `n`
    delta: Complex64,
    n: u32,
    err: f64,
}

struct Continuation<'a> {
    esc: &'a Escape,
    budget: usize,
    step_bound: f64,
    steps: Vec<Step>,
    refinements: usize,
}

impl<'a> Continuation<'a> {
    fn pair(&mut self, a: (&MpPair, &Chart), b: (&MpPair, &Chart), index: usize, depth: u32) -> Result<()> {
        let n = a.1.n.max(b.1.n);
        let ca = self.esc.advance(a.1, n - a.1.n);
        let cb = self.esc.advance(b.1, n - b.1.n);
        let (la, ea) = log_phi_at_chart(self.esc.map(), &ca);
        let (lb, eb) = log_phi_at_chart(self.esc.map(), &cb);
        let dim = wrap_pi(lb.im - la.im);
        if dim.abs() < self.step_bound {
            self.steps.push(Step {
                delta: Complex64::new(lb.re - la.re, dim),
                n,
                err: ea + eb,
            });
            return Ok(());
        }
        if depth >= MAX_REFINE_DEPTH {
            return Err(Error::PathTooWild(format!(
                "step {index} still turns by {dim:.3} rad after {depth} bisections"
            )));
        }
        let mid = a.0.lerp(b.0, 0.5);
        let cm = self
            .esc
            .chart(&mid, self.budget)
            .ok_or(Error::PathLeavesUplus { index })?;
        self.refinements += 1;
        self.pair(a, (&mid, &cm), index, depth + 1)?;
        self.pair((&mid, &cm), b, index, depth + 1)
    }
}

fn run_steps(esc: &Escape, path: &SampledPath, charts: &[Chart], budget: usize) -> Result<(Vec<Step>, usize)> {
    let mut cont = Continuation {
        esc,
        budget,
        step_bound: path.refinement_tol.min(std::f64::consts::FRAC_PI_2),
        steps: Vec::with_capacity(path.len()),
        refinements: 0,
    };
    for i in 0..path.len().saturating_sub(1) {
        cont.pair((&path.points[i], &charts[i]), (&path.points[i + 1], &charts[i + 1]), i, 0)?;
    }
    Ok((cont.steps, cont.refinements))
}

/// Result of continuing `log φ+` along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Continued {
    pub end: BranchValue,
    pub delta: Complex64,
    pub error_bound: f64,
    /// largest push-forward depth used
    pub depth: u32,
    pub refinements: usize,
}

/// Continue a branch of `log φ+` from the start of `path` to its end.
pub fn continue_log_phi(map: &HenonMap, path: &SampledPath, seed: BranchValue) -> Result<Continued> {
    let esc = Escape::new(map);
    continue_with(&esc, path, seed, None)
}

fn continue_with(esc: &Escape, path: &SampledPath, seed: BranchValue, level: Option<f64>) -> Result<Continued> {
    let charts = esc.charts(&path.points, DEFAULT_BUDGET)?;
    if let Some(c) = level {
        check_level(esc, &charts, c)?;
    }
    let g0 = esc.green(&charts[0], 1e-13)?;
    if (seed.log_phi.re - g0.value).abs() > 1e-6 * (1.0 + g0.value) + g0.error_bound {
        return Err(Error::InconsistentSeed {
            seed_re: seed.log_phi.re,
            green: g0.value,
        });
    }
    let d = map_degree(esc) as f64;
    let (steps, refinements) = run_steps(esc, path, &charts, DEFAULT_BUDGET)?;
    let mut delta = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut depth = 0;
    for s in &steps {
        let w = (-(s.n as f64) * d.ln()).exp();
        delta += s.delta * w;
        err += (s.err + 4.0 * EPS * s.delta.norm()) * w;
        depth = depth.max(s.n);
    }
    Ok(Continued {
        end: BranchValue {
            log_phi: seed.log_phi + delta,
        },
        delta,
        error_bound: err,
        depth,
        refinements,
    })
}

fn map_degree(esc: &Escape) -> u32 {
    esc.map().degree()
}

/// Principal `log φ+` at a point where the orbit reaches the Böttcher region;
/// a valid seed for continuation from `z`.
pub fn principal_seed(map: &HenonMap, z: &MpPair) -> Result<BranchValue> {
    let esc = Escape::new(map);
    let ch = esc.chart(z, DEFAULT_BUDGET).ok_or(Error::PathLeavesUplus { index: 0 })?;
    let (l, _) = log_phi_at_chart(map, &ch);
    let d = map.degree() as f64;
    Ok(BranchValue {
        log_phi: l * (-(ch.n as f64) * d.ln()).exp(),
    })
}

/// Default base point `(0, 2 R0)` of the covering coordinate.
pub fn default_base_point(map: &HenonMap) -> ComplexPair {
    ComplexPair::from_parts(0.0, 0.0, 2.0 * map.escape_radius(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatPhi {
    pub value: Complex64,
    pub log_value: Complex64,
    pub error_bound: f64,
}

/// `φ̂+ = φ+(a) exp(∫_C ω)` for a path `C` from the base point `a` inside `Ω'_c`.
pub fn hat_phi(map: &HenonMap, path: &SampledPath, level: LevelSpec, base: ComplexPair) -> Result<HatPhi> {
    if path.start() != &MpPair::from_pair(base) {
        return Err(Error::InvalidInput("path must start at the base point".into()));
    }
    let esc = Escape::new(map);
    let start = phi_plus(map, base, 64)?;
    let cont = continue_with(
        &esc,
        path,
        BranchValue {
            log_phi: start.log_value,
        },
        Some(level.c),
    )?;
    let log_value = cont.end.log_phi;
    Ok(HatPhi {
        value: log_value.exp(),
        log_value,
        error_bound: cont.error_bound + start.error_bound,
    })
}

/// `α(C)`: the `Z[1/d]` winding class of a loop inside `Ω'_c`.
pub fn winding_class(map: &HenonMap, lp: &SampledPath, level: LevelSpec) -> Result<DyadicClass> {
    Ok(winding_report(map, lp, level)?.class)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub class: DyadicClass,
    /// the unrounded winding at the deepest level, in turns
    pub turns: f64,
    pub depth: u32,
    pub drift: f64,
    pub refinements: usize,
}

pub fn winding_report(map: &HenonMap, lp: &SampledPath, level: LevelSpec) -> Result<WindingReport> {
    if !lp.is_loop() {
        return Err(Error::InvalidInput("winding class needs a closed loop".into()));
    }
    let esc = Escape::new(map);
    let charts = esc.charts(&lp.points, DEFAULT_BUDGET)?;
    check_level(&esc, &charts, level.c)?;
    let d = map.degree();
    let mut current = lp.clone();
    let mut current_charts = charts;
    for _ in 0..4 {
        let (steps, refinements) = run_steps(&esc, &current, &current_charts, DEFAULT_BUDGET)?;
        let depth = steps.iter().map(|s| s.n).max().unwrap_or(0);
        let turns: f64 = steps
            .iter()
            .map(|s| s.delta.im / TAU * (d as f64).powi((depth - s.n) as i32))
            .sum();
        let k = turns.round();
        let drift = (turns - k).abs();
        if drift < 0.25 {
            return Ok(WindingReport {
                class: DyadicClass::new(k as i64, depth, d)?,
                turns,
                depth,
                drift,
                refinements,
            });
        }
        // refine every step and try again
        let mut pts = Vec::with_capacity(2 * current.len());
        for i in 0..current.len() - 1 {
            pts.push(current.points[i].clone());
            pts.push(current.points[i].lerp(&current.points[i + 1], 0.5));
        }
        pts.push(current.end().clone());
        current = SampledPath {
            points: pts,
            refinement_tol: current.refinement_tol / 2.0,
        };
        current_charts = esc.charts(&current.points, DEFAULT_BUDGET)?;
    }
    Err(Error::PathTooWild("winding does not settle to an integer".into()))
}
