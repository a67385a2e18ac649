//! Green's function on a real 2-parameter slice of `C^2`, written as CSV, an
//! 8-bit PGM and a JSON sidecar describing the gray mapping.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::greens::{classify_estimate, green_plus_with_budget, GreenEstimate, LevelSpec, Membership, DEFAULT_BUDGET};
use crate::henon::{ComplexPair, HenonMap};

/// `z(u, v) = base + u e1 + v e2` for real `u, v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub base: ComplexPair,
    pub e1: ComplexPair,
    pub e2: ComplexPair,
}

impl Slice {
    /// The complex line `{x = x0}`, parametrized by `y = u + iv`.
    pub fn fixed_x(x0: Complex64) -> Self {
        Slice {
            base: ComplexPair::new(x0, Complex64::new(0.0, 0.0)),
            e1: ComplexPair::from_parts(0.0, 0.0, 1.0, 0.0),
            e2: ComplexPair::from_parts(0.0, 0.0, 0.0, 1.0),
        }
    }

    /// The complex line `{y = y0}`, parametrized by `x = u + iv`.
    pub fn fixed_y(y0: Complex64) -> Self {
        Slice {
            base: ComplexPair::new(Complex64::new(0.0, 0.0), y0),
            e1: ComplexPair::from_parts(1.0, 0.0, 0.0, 0.0),
            e2: ComplexPair::from_parts(0.0, 1.0, 0.0, 0.0),
        }
    }

    /// The real plane `(x, y) = (u, v)`.
    pub fn real_plane() -> Self {
        Slice {
            base: ComplexPair::from_parts(0.0, 0.0, 0.0, 0.0),
            e1: ComplexPair::from_parts(1.0, 0.0, 0.0, 0.0),
            e2: ComplexPair::from_parts(0.0, 0.0, 1.0, 0.0),
        }
    }

    pub fn point(&self, u: f64, v: f64) -> ComplexPair {
        ComplexPair::new(
            self.base.x + self.e1.x * u + self.e2.x * v,
            self.base.y + self.e1.y * u + self.e2.y * v,
        )
    }
}

/// `nx × ny` samples over `[u_min, u_max] × [v_min, v_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// `[u_min, u_max, v_min, v_max]`
    pub bounds: [f64; 4],
}

impl Grid {
    pub fn new(nx: usize, ny: usize, bounds: [f64; 4]) -> Result<Self> {
        let g = Grid { nx, ny, bounds };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::BadGrid(format!("empty grid {}x{}", self.nx, self.ny)));
        }
        if self.bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::BadGrid("bounds must be finite".into()));
        }
        let [u0, u1, v0, v1] = self.bounds;
        let ok = |lo: f64, hi: f64, n: usize| if n == 1 { hi >= lo } else { hi > lo };
        if !ok(u0, u1, self.nx) || !ok(v0, v1, self.ny) {
            return Err(Error::BadGrid(format!("bounds {:?} are empty or reversed", self.bounds)));
        }
        Ok(())
    }

    fn coord(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// `(u, v)` of column `i`, row `j`.
    pub fn uv(&self, i: usize, j: usize) -> (f64, f64) {
        let [u0, u1, v0, v1] = self.bounds;
        (Self::coord(u0, u1, self.nx, i), Self::coord(v0, v1, self.ny, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    /// `None` when the orbit was undecided within the budget
    pub estimate: Option<GreenEstimate>,
    pub tag: Membership,
}

impl Cell {
    pub fn value(&self) -> f64 {
        self.estimate.map(|e| e.value).unwrap_or(f64::NAN)
    }

    pub fn error_bound(&self) -> f64 {
        self.estimate.map(|e| e.error_bound).unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rendering {
    pub slice: Slice,
    pub grid: Grid,
    pub level: LevelSpec,
    pub tol: f64,
    pub budget: usize,
    /// row-major: row `j` (increasing `v`), then column `i`
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub tol: f64,
    pub budget: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            tol: 1e-10,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn cell(map: &HenonMap, slice: &Slice, grid: &Grid, level: LevelSpec, opts: RenderOptions, i: usize, j: usize) -> Cell {
    let (u, v) = grid.uv(i, j);
    let z = slice.point(u, v);
    let est = green_plus_with_budget(map, z, opts.tol, opts.budget).ok();
    let tag = match &est {
        Some(e) => classify_estimate(e, level),
        None => Membership::BoundaryUnresolved,
    };
    Cell { i, j, u, v, estimate: est, tag }
}

/// Evaluate `G+` and membership in `Ω'_c` on every grid point, in parallel.
pub fn render_slice(map: &HenonMap, slice: &Slice, grid: &Grid, level: LevelSpec, opts: RenderOptions) -> Result<Rendering> {
    grid.check()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let cells: Vec<Cell> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|k| cell(map, slice, grid, level, opts, k % grid.nx, k / grid.nx))
        .collect();
    Ok(Rendering {
        slice: *slice,
        grid: *grid,
        level,
        tol: opts.tol,
        budget: opts.budget,
        cells,
    })
}

/// How values become gray levels: `gray = round(255 (value - offset) / scale)`,
/// clipped to `[0, 255]`; undecided cells are written as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayMap {
    pub offset: f64,
    pub scale: f64,
}

impl GrayMap {
    pub fn gray(&self, value: f64) -> u8 {
        if !value.is_finite() {
            return 0;
        }
        (255.0 * (value - self.offset) / self.scale).round().clamp(0.0, 255.0) as u8
    }
}

impl Rendering {
    /// Gray mapping from 0 to the level `c`.
    pub fn gray_map(&self) -> GrayMap {
        GrayMap {
            offset: 0.0,
            scale: self.level.c,
        }
    }

    pub fn to_csv(&self, map: &HenonMap) -> String {
        let mut out = String::new();
        let [u0, u1, v0, v1] = self.grid.bounds;
        let _ = writeln!(out, "# shortc2 render v1");
        let _ = writeln!(out, "# map: {}", serde_json::to_string(&map.to_spec()).unwrap_or_default());
        let _ = writeln!(out, "# slice: {}", serde_json::to_string(&self.slice).unwrap_or_default());
        let _ = writeln!(out, "# grid: nx={} ny={} u=[{u0},{u1}] v=[{v0},{v1}]", self.grid.nx, self.grid.ny);
        let _ = writeln!(out, "# level: {} tol: {} budget: {}", self.level.c, self.tol, self.budget);
        let _ = writeln!(out, "# tags: 0=K_plus 1=Omega_prime_interior 2=boundary_unresolved 3=outside");
        let _ = writeln!(out, "i,j,u,v,value,error_bound,iterations,escaped,tag");
        for c in &self.cells {
            let (it, esc) = c.estimate.map(|e| (e.iterations, e.escaped)).unwrap_or((0, false));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.i,
                c.j,
                c.u,
                c.v,
                c.value(),
                c.error_bound(),
                it,
                esc as u8,
                c.tag.as_str()
            );
        }
        out
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let g = self.gray_map();
        let mut out = format!("P5\n{} {}\n255\n", self.grid.nx, self.grid.ny).into_bytes();
        out.extend(self.cells.iter().map(|c| g.gray(c.value())));
        out
    }

    pub fn sidecar(&self, map: &HenonMap, stem: &str) -> serde_json::Value {
        serde_json::json!({
            "schema_version": crate::report::SCHEMA_VERSION,
            "kind": "render",
            "pgm": format!("{stem}.pgm"),
            "csv": format!("{stem}.csv"),
            "width": self.grid.nx,
            "height": self.grid.ny,
            "maxval": 255,
            "row_order": "first row is v_min",
            "gray_map": self.gray_map(),
            "undecided_gray": 0,
            "map": map.to_spec(),
            "slice": self.slice,
            "grid": self.grid,
            "level": self.level.c,
            "tol": self.tol,
            "budget": self.budget,
        })
    }

    /// Write `<stem>.csv`, `<stem>.pgm` and `<stem>.json` into `dir`.
    pub fn write(&self, map: &HenonMap, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let pgm = dir.join(format!("{stem}.pgm"));
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&csv, self.to_csv(map))?;
        std::fs::write(&pgm, self.to_pgm())?;
        let side = serde_json::to_string_pretty(&self.sidecar(map, stem))?;
        std::fs::write(&json, side + "\n")?;
        Ok(vec![csv, pgm, json])
    }
}
