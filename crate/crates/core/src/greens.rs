//! Forward and backward Green's functions with certified truncation bounds,
//! and membership tests for `K+`, `Ω_c` and `Ω'_c`.
//!
//! Once an orbit is in `V+_{R0}` write `y_{j+1} = y_j^d (1 + u_j)`. There
//! `|u_j| <= M/|y_j| <= 1/2` with `M = Σ|a_i| + |a|`, and `|y|` at least
//! doubles per step, so
//!
//! ```text
//! G+(z) = d^-m log|y_m| + Σ_{j>=m} d^-(j+1) log|1 + u_j|
//! |tail| <= Σ_{j>=m} d^-(j+1) · 2M/|y_j| <= 2(M/|y_m|) d^-(m+1) / (1 - 1/(2d))
//! ```
//!
//! using `|log|1+u|| <= -log(1-|u|) <= 2|u|` for `|u| <= 1/2`. The backward
//! function is handled the same way on `V-` with `M = Σ|a_i| + 1` and an
//! exactly summable `-log|a|` drift.
//!
//! The bound certifies the truncation of the limit. Rounding along the orbit
//! is covered by a small allowance proportional to the iteration count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtComplex;
use crate::henon::{ComplexPair, HenonMap};

/// Iterations allowed outside the escape region before giving up on escape.
pub const DEFAULT_BUDGET: usize = 10_000;

/// Default requested accuracy for membership decisions.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    /// natural-log units
    pub value: f64,
    pub error_bound: f64,
    pub iterations: usize,
    pub escaped: bool,
}

/// `Ω_c = {G+ < c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub c: f64,
}

impl LevelSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::BadLevel(format!("level must be positive and finite, got {c}")));
        }
        Ok(LevelSpec { c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "K_plus")]
    KPlus,
    #[serde(rename = "Omega_prime_interior")]
    OmegaPrimeInterior,
    #[serde(rename = "boundary_unresolved")]
    BoundaryUnresolved,
    #[serde(rename = "outside")]
    Outside,
}

impl Membership {
    pub fn as_str(&self) -> &'static str {
        match self {
            Membership::KPlus => "K_plus",
            Membership::OmegaPrimeInterior => "Omega_prime_interior",
            Membership::BoundaryUnresolved => "boundary_unresolved",
            Membership::Outside => "outside",
        }
    }

    /// Small integer code used in rendered grids.
    pub fn code(&self) -> u8 {
        match self {
            Membership::KPlus => 0,
            Membership::OmegaPrimeInterior => 1,
            Membership::BoundaryUnresolved => 2,
            Membership::Outside => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

const EPS: f64 = f64::EPSILON;

pub fn green_plus(map: &HenonMap, z: ComplexPair, tol: f64) -> Result<GreenEstimate> {
    green_plus_with_budget(map, z, tol, DEFAULT_BUDGET)
}

pub fn green_minus(map: &HenonMap, z: ComplexPair, tol: f64) -> Result<GreenEstimate> {
    green_minus_with_budget(map, z, tol, DEFAULT_BUDGET)
}

pub fn green_plus_with_budget(map: &HenonMap, z: ComplexPair, tol: f64, budget: usize) -> Result<GreenEstimate> {
    check_tol(tol)?;
    green_ext(map, ExtComplex::from_c64(z.x), ExtComplex::from_c64(z.y), tol, budget, 0, Direction::Forward)
}

pub fn green_minus_with_budget(map: &HenonMap, z: ComplexPair, tol: f64, budget: usize) -> Result<GreenEstimate> {
    check_tol(tol)?;
    green_ext(map, ExtComplex::from_c64(z.x), ExtComplex::from_c64(z.y), tol, budget, 0, Direction::Backward)
}

/// `G+` of a point whose `offset`-th forward iterate is `(x, y)`.
/// Used for points held at higher precision, which are pushed forward before
/// handing over to extended doubles.
pub fn green_plus_ext(
    map: &HenonMap,
    x: ExtComplex,
    y: ExtComplex,
    tol: f64,
    budget: usize,
    offset: u32,
) -> Result<GreenEstimate> {
    check_tol(tol)?;
    green_ext(map, x, y, tol, budget, offset, Direction::Forward)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// `d^-k` computed without intermediate overflow.
fn inv_pow(d: f64, k: u64) -> f64 {
    (-(k as f64) * d.ln()).exp()
}

fn green_ext(
    map: &HenonMap,
    x0: ExtComplex,
    y0: ExtComplex,
    tol: f64,
    budget: usize,
    offset: u32,
    dir: Direction,
) -> Result<GreenEstimate> {
    let d = map.degree() as f64;
    let r0 = map.escape_radius();
    let log2_r0 = r0.log2();
    let (m_const, drift) = match dir {
        Direction::Forward => (map.forward_perturbation_constant(), 0.0),
        Direction::Backward => (map.backward_perturbation_constant(), map.a().norm().ln() / (d - 1.0)),
    };
    let (mut x, mut y) = (x0, y0);
    // `lead` is the coordinate that grows in the escape region
    let lead = |x: &ExtComplex, y: &ExtComplex| match dir {
        Direction::Forward => *y,
        Direction::Backward => *x,
    };
    let trail = |x: &ExtComplex, y: &ExtComplex| match dir {
        Direction::Forward => *x,
        Direction::Backward => *y,
    };
    let step = |x: ExtComplex, y: ExtComplex| match dir {
        Direction::Forward => map.apply_ext(x, y),
        Direction::Backward => map.apply_inverse_ext(x, y),
    };

    let mut n: usize = 0;
    loop {
        let l2 = lead(&x, &y).log2_abs();
        let t2 = trail(&x, &y).log2_abs();
        if !l2.is_finite() && l2 > 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(Error::OrbitOverflow { last_finite: n.saturating_sub(1) });
        }
        if l2 >= t2.max(log2_r0) {
            break;
        }
        if n >= budget {
            // still outside the escape region
            let sup = x.log2_abs().max(y.log2_abs());
            if sup < log2_r0 {
                let log_a_term = match dir {
                    Direction::Forward => 0.0,
                    Direction::Backward => (1.0 / map.a().norm()).ln().max(0.0),
                };
                let local = r0.ln() + (1.5f64.ln() + log_a_term) / (d - 1.0);
                let bound = (local.ln() - ((n as u64 + offset as u64) as f64) * d.ln()).exp();
                return Ok(GreenEstimate {
                    value: 0.0,
                    error_bound: bound.max(f64::MIN_POSITIVE),
                    iterations: n,
                    escaped: false,
                });
            }
            return Err(Error::Undecided { budget });
        }
        let (nx, ny) = step(x, y);
        x = nx;
        y = ny;
        n += 1;
    }

    // in the escape region: refine until the tail bound meets tol
    let mut extra = 0usize;
    loop {
        let k = (n + offset as usize) as u64;
        let ln_lead = lead(&x, &y).ln_abs();
        let scale = inv_pow(d, k);
        let value = scale * (ln_lead - drift);
        let b = m_const * (-lead(&x, &y).ln_abs()).exp();
        let tail = 2.0 * b * scale / d / (1.0 - 1.0 / (2.0 * d));
        let rounding = 16.0 * EPS * (k as f64 + 4.0) * (value.abs() + scale);
        let err = tail + rounding;
        if tail <= 0.5 * tol || extra >= 64 {
            if !(value > 0.0) {
                return Err(Error::OrbitOverflow { last_finite: n });
            }
            return Ok(GreenEstimate {
                value,
                error_bound: err,
                iterations: n,
                escaped: true,
            });
        }
        let (nx, ny) = step(x, y);
        x = nx;
        y = ny;
        n += 1;
        extra += 1;
    }
}

/// `R_ε`: on `V+_{R_ε}` one has `|G+ - log|y|| <= ε`. Closed-form inverse of
/// the tail majorant `2M / (|y| (d - 1/2))`.
pub fn r_epsilon(map: &HenonMap, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    let d = map.degree() as f64;
    let m = map.forward_perturbation_constant();
    Ok(map.escape_radius().max(2.0 * m / (eps * (d - 0.5))))
}

/// Classify a Green estimate against a level.
pub fn classify_estimate(est: &GreenEstimate, level: LevelSpec) -> Membership {
    if !est.escaped {
        Membership::KPlus
    } else if est.value + est.error_bound < level.c {
        Membership::OmegaPrimeInterior
    } else if est.value - est.error_bound >= level.c {
        Membership::Outside
    } else {
        Membership::BoundaryUnresolved
    }
}

pub fn membership(map: &HenonMap, z: ComplexPair, level: LevelSpec, budget: usize) -> Result<Membership> {
    if budget < 1 {
        return Err(Error::InvalidInput("budget must be at least 1".into()));
    }
    match green_plus_with_budget(map, z, MEMBERSHIP_TOL, budget) {
        Ok(est) => Ok(classify_estimate(&est, level)),
        Err(Error::Undecided { .. }) | Err(Error::OrbitOverflow { .. }) => Ok(Membership::BoundaryUnresolved),
        Err(e) => Err(e),
    }
}
