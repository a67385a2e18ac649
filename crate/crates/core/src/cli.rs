//! Command line front end. Every command prints one JSON report on stdout.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 a verification
//! failed, 4 the answer could not be decided.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

use crate::affine::affine_preservers;
use crate::biholo::{biholo_criterion, Level};
use crate::boettcher::winding_report;
use crate::dyadic::DyadicClass;
use crate::error::{Error, Result};
use crate::greens::{classify_estimate, green_minus_with_budget, green_plus_with_budget, LevelSpec, Membership};
use crate::henon::{ComplexPair, HenonMap, MapSpec};
use crate::model::{verify_comm_cover, DeckTransform, Model, ModelPoint};
use crate::path::SampledPath;
use crate::render::{render_slice, Grid, RenderOptions, Slice};
use crate::report::{error_report, report_schema, SCHEMA_VERSION};
use crate::topology::{connect_points_with, ConnectOptions};
use crate::verify::{run_suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "shortc2", version, about = "Hénon maps, Green's functions and Short C^2 sub-level sets")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// map document {"d", "a", "q"}; defaults to (y, y^2 - x)
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// directory for file artifacts
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = crate::greens::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SliceKind {
    /// x fixed, y = u + iv
    FixedX,
    /// y fixed, x = u + iv
    FixedY,
    /// (x, y) = (u, v) real
    Real,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// G+ (or G-) at a point given as x_re x_im y_re y_im
    Green {
        #[arg(num_args = 4, allow_negative_numbers = true, required = true)]
        point: Vec<f64>,
        #[arg(long)]
        minus: bool,
    },
    /// G+ on a grid; writes CSV, PGM and a JSON sidecar
    Render {
        #[arg(long, value_enum, default_value = "fixed-x")]
        slice: SliceKind,
        /// value of the fixed coordinate, re im
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
        at: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 64)]
        ny: usize,
        /// u_min u_max v_min v_max
        #[arg(long, num_args = 4, allow_negative_numbers = true, default_values_t = [-4.0, 4.0, -4.0, 4.0])]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long, default_value = "render")]
        stem: String,
    },
    /// Membership of a point in K+, Ω'_c or its complement
    Member {
        #[arg(num_args = 4, allow_negative_numbers = true, required = true)]
        point: Vec<f64>,
        #[arg(long)]
        level: f64,
    },
    /// Z[1/d] class of a loop stored as a path file
    LoopClass {
        path: PathBuf,
        /// level the loop must stay below
        #[arg(long, default_value_t = 1e6)]
        level: f64,
    },
    /// A path inside Ω'_c joining two points; written to <out>/<name>
    Connect {
        #[arg(long, num_args = 4, allow_negative_numbers = true, required = true)]
        from: Vec<f64>,
        #[arg(long, num_args = 4, allow_negative_numbers = true, required = true)]
        to: Vec<f64>,
        #[arg(long)]
        level: f64,
        #[arg(long, default_value = "connect_path.json")]
        name: String,
    },
    /// The cyclic group of diagonal affine maps preserving K+
    AffineGroup,
    /// Apply a deck transformation, or check its commutation with the lift
    Deck {
        /// class as k/m with m a power of d
        #[arg(long, default_value = "1/2")]
        class: String,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// z_re z_im zeta_re zeta_im
        #[arg(long, num_args = 4, allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long)]
        verify_comm: bool,
        #[arg(long, default_value_t = 6)]
        max_n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// The n with c1 = c2 d^n, or null
    Bihol {
        #[arg(allow_negative_numbers = true)]
        c1: String,
        #[arg(allow_negative_numbers = true)]
        c2: String,
        d: u32,
    },
    /// Run the invariant suite
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Print the JSON schema of all reports
    Schema,
}

/// What a command produced: the report and the exit code it implies.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

fn ok(report: Value) -> Result<Outcome> {
    Ok(Outcome { report, code: EXIT_OK })
}

fn envelope(kind: &str, body: Value) -> Value {
    let mut v = json!({"schema_version": SCHEMA_VERSION, "kind": kind});
    if let (Some(o), Value::Object(b)) = (v.as_object_mut(), body) {
        o.extend(b);
    }
    v
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Undecided { .. } | Error::EndpointUndecided(_) | Error::OrbitOverflow { .. } | Error::PathTooWild(_) => {
            EXIT_UNDECIDED
        }
        _ => EXIT_INVALID,
    }
}

fn load_map(path: &Option<PathBuf>) -> Result<HenonMap> {
    match path {
        None => Ok(HenonMap::quadratic_standard()),
        Some(p) => MapSpec::from_json(&std::fs::read_to_string(p)?),
    }
}

fn pair(v: &[f64]) -> Result<ComplexPair> {
    match v {
        [a, b, c, d] => {
            let z = ComplexPair::from_parts(*a, *b, *c, *d);
            if z.is_finite() {
                Ok(z)
            } else {
                Err(Error::InvalidInput("point must be finite".into()))
            }
        }
        _ => Err(Error::InvalidInput(format!("a point needs 4 numbers, got {}", v.len()))),
    }
}

/// `k/m` with `m = d^n`.
fn parse_class(s: &str, d: u32) -> Result<DyadicClass> {
    let bad = || Error::InvalidInput(format!("class must be k/d^n, got {s:?}"));
    let (k, m) = s.split_once('/').unwrap_or((s, "1"));
    let k: i64 = k.trim().parse().map_err(|_| bad())?;
    let mut m: u64 = m.trim().parse().map_err(|_| bad())?;
    let mut n = 0u32;
    while m > 1 {
        if m % d as u64 != 0 {
            return Err(bad());
        }
        m /= d as u64;
        n += 1;
    }
    if m == 0 {
        return Err(bad());
    }
    DyadicClass::new(k, n, d)
}

fn c64(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        return Err(Error::InvalidInput("--tol must be positive".into()));
    }
    if g.budget < 1 {
        return Err(Error::InvalidInput("--budget must be at least 1".into()));
    }
    match &cli.command {
        Command::Schema => ok(report_schema()),
        Command::Bihol { c1, c2, d } => {
            let (a, b): (Level, Level) = (c1.parse()?, c2.parse()?);
            let r = biholo_criterion(&a, &b, *d)?;
            ok(envelope("bihol", json!({"c1": a.to_string(), "c2": b.to_string(), "d": d, "n": r.n})))
        }
        Command::Green { point, minus } => {
            let map = load_map(&g.map)?;
            let z = pair(point)?;
            let e = if *minus {
                green_minus_with_budget(&map, z, g.tol, g.budget)?
            } else {
                green_plus_with_budget(&map, z, g.tol, g.budget)?
            };
            ok(envelope(
                "green",
                json!({
                    "point": z.as_array(), "direction": if *minus { "minus" } else { "plus" },
                    "value": e.value, "error_bound": e.error_bound,
                    "iterations": e.iterations, "escaped": e.escaped
                }),
            ))
        }
        Command::Member { point, level } => {
            let map = load_map(&g.map)?;
            let z = pair(point)?;
            let lvl = LevelSpec::new(*level)?;
            let (tag, value, err) = match green_plus_with_budget(&map, z, g.tol, g.budget) {
                Ok(e) => (classify_estimate(&e, lvl), Some(e.value), Some(e.error_bound)),
                Err(Error::Undecided { .. }) | Err(Error::OrbitOverflow { .. }) => (Membership::BoundaryUnresolved, None, None),
                Err(e) => return Err(e),
            };
            let report = envelope(
                "member",
                json!({"point": z.as_array(), "level": level, "tag": tag.as_str(), "value": value, "error_bound": err}),
            );
            let code = if tag == Membership::BoundaryUnresolved { EXIT_UNDECIDED } else { EXIT_OK };
            Ok(Outcome { report, code })
        }
        Command::LoopClass { path, level } => {
            let map = load_map(&g.map)?;
            let lp = SampledPath::from_json(&std::fs::read_to_string(path)?)?;
            let w = winding_report(&map, &lp, LevelSpec::new(*level)?)?;
            let d = map.degree();
            ok(envelope(
                "loop-class",
                json!({
                    "d": d, "class": w.class, "display": w.class.display(d),
                    "turns": w.turns, "error_bound": w.drift, "depth": w.depth, "samples": lp.len()
                }),
            ))
        }
        Command::Connect { from, to, level, name } => {
            let map = load_map(&g.map)?;
            let (a, b) = (pair(from)?, pair(to)?);
            let opts = ConnectOptions {
                budget: g.budget,
                ..Default::default()
            };
            let c = connect_points_with(&map, a, b, LevelSpec::new(*level)?, opts)?;
            std::fs::create_dir_all(&g.out)?;
            let file = g.out.join(name);
            std::fs::write(&file, c.path.to_json() + "\n")?;
            ok(envelope(
                "connect",
                json!({
                    "from": a.as_array(), "to": b.as_array(), "level": level,
                    "path_file": file.display().to_string(), "samples": c.path.len(),
                    "max_green": c.info.max_green, "error_bound": c.info.max_green_error,
                    "info": c.info
                }),
            ))
        }
        Command::AffineGroup => {
            let map = load_map(&g.map)?;
            let grp = affine_preservers(&map);
            ok(envelope(
                "affine-group",
                json!({
                    "d": map.degree(), "order": grp.order, "generator_exponent": grp.generator_exponent,
                    "modulus": grp.modulus, "elements": grp.elements
                }),
            ))
        }
        Command::Deck {
            class,
            m,
            point,
            level,
            verify_comm,
            max_n,
            samples,
        } => {
            let map = load_map(&g.map)?;
            let d = map.degree();
            if *verify_comm {
                let mut checks = Vec::new();
                let mut pass = true;
                for n in 0..=*max_n {
                    let r = verify_comm_cover(&map, n, *m, *level, *samples, g.seed)?;
                    pass &= r.pass;
                    checks.push(json!({
                        "name": r.name, "module": "model", "pass": r.pass, "skipped": false,
                        "max_error": r.max_error, "error_bound": r.tolerance, "samples": r.samples,
                        "detail": "relative to the size of the terms"
                    }));
                }
                let report = envelope(
                    "verify",
                    json!({"suite": "deck-comm", "seed": g.seed, "map": map.to_spec(), "checks": checks, "pass": pass}),
                );
                let code = if pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
                return Ok(Outcome { report, code });
            }
            let cls = parse_class(class, d)?;
            let p = point
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("--point is required unless --verify-comm is given".into()))?;
            let pt = ModelPoint::new(Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3]), *level)?;
            let model = Model::new(&map)?;
            let (out, bound) = model.deck_apply_bounded(&DeckTransform { class: cls, m: *m }, pt)?;
            let mp = |q: &ModelPoint| json!({"z": c64(q.z), "zeta": c64(q.zeta), "c": q.c});
            ok(envelope(
                "deck",
                json!({"class": cls, "m": m, "input": mp(&pt), "output": mp(&out), "error_bound": bound}),
            ))
        }
        Command::Verify { suite, samples } => {
            let map = load_map(&g.map)?;
            let opts = VerifyOptions {
                samples: *samples,
                seed: g.seed,
                tol: 1e-8,
            };
            let r = run_suite(&map, suite, &opts)?;
            let code = if r.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
            Ok(Outcome {
                report: serde_json::to_value(&r)?,
                code,
            })
        }
        Command::Render {
            slice,
            at,
            nx,
            ny,
            bounds,
            level,
            stem,
        } => {
            let map = load_map(&g.map)?;
            let w = Complex64::new(at[0], at[1]);
            let s = match slice {
                SliceKind::FixedX => Slice::fixed_x(w),
                SliceKind::FixedY => Slice::fixed_y(w),
                SliceKind::Real => Slice::real_plane(),
            };
            let grid = Grid::new(*nx, *ny, [bounds[0], bounds[1], bounds[2], bounds[3]])?;
            let opts = RenderOptions {
                tol: g.tol,
                budget: g.budget,
            };
            let r = render_slice(&map, &s, &grid, LevelSpec::new(*level)?, opts)?;
            r.write(&map, &g.out, stem)?;
            ok(r.sidecar(&map, stem))
        }
    }
}

/// Parse, run, print; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            let err = Error::InvalidInput(e.kind().to_string());
            println!("{}", serde_json::to_string_pretty(&error_report(&err)).unwrap_or_default());
            return EXIT_INVALID;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.report).unwrap_or_default());
            o.code
        }
        Err(e) => {
            println!("{}", serde_json::to_string_pretty(&error_report(&e)).unwrap_or_default());
            eprintln!("shortc2: {e}");
            exit_code(&e)
        }
    }
}

/// Write a report next to other artifacts.
pub fn write_report(dir: &Path, name: &str, report: &Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(p)
}
