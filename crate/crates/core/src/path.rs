//! Sampled paths in C^2 and the escape chart of a sample: the first forward
//! iterate that lands in the Böttcher region `V+_{R0} ∩ {|y| >= 2 R0}`.

use rayon::prelude::*;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::ext::ExtComplex;
use crate::greens::{green_plus_ext, GreenEstimate};
use crate::henon::{ComplexPair, HenonMap};
use crate::mp::{real_from_decimal, MpComplex, MpMap, MpPair, Real, F64_PREC};

/// Default bound on the argument change between consecutive samples after
/// pushing into the Böttcher region.
pub const DEFAULT_STEP_BOUND: f64 = std::f64::consts::FRAC_PI_2;

/// An ordered polyline of points; a loop has `first == last`.
/// Points carry their own binary precision (53 for points read from doubles).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub points: Vec<MpPair>,
    /// largest argument step the sampling was designed for
    pub refinement_tol: f64,
}

impl SampledPath {
    pub fn new(points: Vec<MpPair>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("a path needs at least one point".into()));
        }
        Ok(SampledPath {
            points,
            refinement_tol: DEFAULT_STEP_BOUND,
        })
    }

    pub fn from_pairs(points: &[ComplexPair]) -> Result<Self> {
        Self::new(points.iter().map(|&p| MpPair::from_pair(p)).collect())
    }

    /// Constant path at `z`.
    pub fn constant(z: MpPair) -> Self {
        SampledPath {
            points: vec![z.clone(), z],
            refinement_tol: DEFAULT_STEP_BOUND,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> &MpPair {
        &self.points[0]
    }

    pub fn end(&self) -> &MpPair {
        &self.points[self.points.len() - 1]
    }

    pub fn is_loop(&self) -> bool {
        self.start() == self.end()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        SampledPath {
            points,
            refinement_tol: self.refinement_tol,
        }
    }

    /// `self` followed by `other`; the end of `self` must equal the start of `other`.
    pub fn concat(&self, other: &SampledPath) -> Result<Self> {
        if self.end() != other.start() {
            return Err(Error::InvalidInput("paths do not join: end != start".into()));
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().skip(1).cloned());
        Ok(SampledPath {
            points,
            refinement_tol: self.refinement_tol.min(other.refinement_tol),
        })
    }

    /// The loop traversed `m` times (reversed for negative `m`).
    pub fn repeat(&self, m: i64) -> Result<Self> {
        if !self.is_loop() {
            return Err(Error::InvalidInput("only loops can be repeated".into()));
        }
        if m == 0 {
            return Ok(SampledPath::constant(self.start().clone()));
        }
        let base = if m > 0 { self.clone() } else { self.reversed() };
        let mut out = base.clone();
        for _ in 1..m.unsigned_abs() {
            out = out.concat(&base)?;
        }
        Ok(out)
    }

    /// Double-precision view of the samples, `None` if one is out of range.
    pub fn to_pairs(&self) -> Option<Vec<ComplexPair>> {
        self.points.iter().map(|p| p.to_pair()).collect()
    }

    /// JSON array of `[x_re, x_im, y_re, y_im]`. Points beyond double range or
    /// precision are written with as many decimal digits as they carry.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let digits = ((p.precision().max(F64_PREC) as f64) * std::f64::consts::LOG10_2).ceil() as usize + 3;
            let (a, b) = p.x.to_decimal_strings(digits);
            let (c, d) = p.y.to_decimal_strings(digits);
            out.push_str(&format!("[{a},{b},{c},{d}]"));
        }
        out.push(']');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<Vec<Box<RawValue>>> = serde_json::from_str(text)?;
        let mut points = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != 4 {
                return Err(Error::InvalidInput(format!("point {i} needs 4 numbers, got {}", row.len())));
            }
            let mut vals = Vec::with_capacity(4);
            for v in row {
                vals.push(real_from_decimal(v.get())?.0);
            }
            let mut it = vals.into_iter();
            let (a, b, c, d) = (it.next(), it.next(), it.next(), it.next());
            points.push(MpPair {
                x: MpComplex { re: a.unwrap_or(Real::ZERO), im: b.unwrap_or(Real::ZERO) },
                y: MpComplex { re: c.unwrap_or(Real::ZERO), im: d.unwrap_or(Real::ZERO) },
            });
        }
        Self::new(points)
    }
}

/// `H^n(s) = (x, y)` with `(x, y)` in the Böttcher region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub n: u32,
    pub x: ExtComplex,
    pub y: ExtComplex,
}

pub(crate) struct Escape {
    map: HenonMap,
    mp: MpMap,
    log2_r0: f64,
    log2_2r0: f64,
}

impl Escape {
    pub fn new(map: &HenonMap) -> Self {
        let r0 = map.escape_radius();
        Escape {
            map: map.clone(),
            mp: MpMap::new(map),
            log2_r0: r0.log2(),
            log2_2r0: (2.0 * r0).log2(),
        }
    }

    pub fn map(&self) -> &HenonMap {
        &self.map
    }

    pub fn mp(&self) -> &MpMap {
        &self.mp
    }

    fn in_vplus(&self, x: &ExtComplex, y: &ExtComplex) -> bool {
        let ly = y.log2_abs();
        ly >= x.log2_abs().max(self.log2_r0)
    }

    /// Push `s` forward into the Böttcher region. The pre-escape part of the
    /// orbit runs in multiprecision with enough guard bits to absorb the
    /// cancellation in `p(y) - a x`; afterwards extended doubles suffice.
    pub fn chart(&self, s: &MpPair, budget: usize) -> Option<Chart> {
        let (mut x, mut y) = s.to_ext();
        let mut n = 0u32;
        if !self.in_vplus(&x, &y) {
            let mag = s.log2_norm().max(0.0).ceil() as usize;
            let prec = s.precision().max(F64_PREC) + 96 + mag;
            let mut z = s.with_precision(prec);
            loop {
                if n as usize >= budget {
                    return None;
                }
                z = self.mp.apply(&z);
                n += 1;
                let (ex, ey) = z.to_ext();
                x = ex;
                y = ey;
                if self.in_vplus(&x, &y) {
                    break;
                }
            }
        }
        while y.log2_abs() < self.log2_2r0 {
            let (nx, ny) = self.map.apply_ext(x, y);
            x = nx;
            y = ny;
            n += 1;
        }
        Some(Chart { n, x, y })
    }

    pub fn charts(&self, points: &[MpPair], budget: usize) -> Result<Vec<Chart>> {
        let out: Vec<Option<Chart>> = points.par_iter().map(|p| self.chart(p, budget)).collect();
        out.into_iter()
            .enumerate()
            .map(|(index, c)| c.ok_or(Error::PathLeavesUplus { index }))
            .collect()
    }

    pub fn green(&self, chart: &Chart, tol: f64) -> Result<GreenEstimate> {
        green_plus_ext(&self.map, chart.x, chart.y, tol, 64, chart.n)
    }

    /// Push a chart `k` further steps.
    pub fn advance(&self, chart: &Chart, k: u32) -> Chart {
        let (mut x, mut y) = (chart.x, chart.y);
        for _ in 0..k {
            let (nx, ny) = self.map.apply_ext(x, y);
            x = nx;
            y = ny;
        }
        Chart { n: chart.n + k, x, y }
    }
}

/// Certify every sample of a path lies in `Ω'_c`: `0 < G+` and `G+ + err < c`.
pub(crate) fn check_level(esc: &Escape, charts: &[Chart], c: f64) -> Result<Vec<GreenEstimate>> {
    let ests: Vec<Result<GreenEstimate>> = charts.par_iter().map(|ch| esc.green(ch, 1e-13)).collect();
    let mut out = Vec::with_capacity(ests.len());
    for (index, e) in ests.into_iter().enumerate() {
        let e = e.map_err(|_| Error::PathLeavesUplus { index })?;
        if !(e.value - e.error_bound > 0.0) {
            return Err(Error::PathLeavesUplus { index });
        }
        if !(e.value + e.error_bound < c) {
            return Err(Error::PathLeavesLevel {
                index,
                value: e.value,
                error_bound: e.error_bound,
                level: c,
            });
        }
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn json_roundtrip_small_and_huge() {
        let small = MpPair::from_pair(ComplexPair::from_parts(0.5, -1.0, 4.0, 0.1));
        let huge = MpPair::from_ext(
            &ExtComplex::new(Complex64::new(0.6, -0.3), 4000),
            &ExtComplex::new(Complex64::new(0.9, 0.0), 2000),
            4200,
        );
        let path = SampledPath::new(vec![small.clone(), huge.clone(), small]).unwrap();
        let text = path.to_json();
        assert!(text.starts_with("[[0.5,-1.0,4.0,0.1],"));
        let back = SampledPath::from_json(&text).unwrap();
        assert_eq!(back.points[0], path.points[0]);
        let (a, b) = (back.points[1].to_ext(), huge.to_ext());
        assert_eq!(a.0.exponent(), b.0.exponent());
        assert!((a.0.mantissa() - b.0.mantissa()).norm() < 1e-15);
        assert!(back.is_loop());
    }

    #[test]
    fn chart_of_simple_points() {
        let h = HenonMap::quadratic_standard();
        let esc = Escape::new(&h);
        let c = esc.chart(&MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 10.0, 0.0)), 100).unwrap();
        assert_eq!(c.n, 0);
        let c = esc.chart(&MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 4.0, 0.0)), 100).unwrap();
        assert_eq!(c.n, 1);
        assert!(esc.chart(&MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 0.0, 0.0)), 100).is_none());
    }

    #[test]
    fn concat_and_repeat() {
        let a = MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 5.0, 0.0));
        let b = MpPair::from_pair(ComplexPair::from_parts(0.0, 0.0, 0.0, 5.0));
        let l = SampledPath::new(vec![a.clone(), b, a.clone()]).unwrap();
        assert_eq!(l.repeat(3).unwrap().len(), 7);
        assert_eq!(l.repeat(0).unwrap().points, vec![a.clone(), a]);
        assert!(l.concat(&SampledPath::constant(MpPair::from_pair(ComplexPair::from_parts(1.0, 0.0, 0.0, 0.0)))).is_err());
    }
}
