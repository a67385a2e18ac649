use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use shortc2_core::affine::affine_preservers;
use shortc2_core::biholo::{biholo_criterion, Level};
use shortc2_core::boettcher::winding_report;
use shortc2_core::dyadic::DyadicClass;
use shortc2_core::greens::{self, LevelSpec};
use shortc2_core::henon::{self, ComplexPair, MapSpec, MonicPoly};
use shortc2_core::model::{DeckTransform, Model, ModelPoint};
use shortc2_core::path::SampledPath;
use shortc2_core::report::report_schema;
use shortc2_core::topology::connect_points;
use shortc2_core::verify::{run_suite, VerifyOptions};

create_exception!(shortc2, ShortC2Error, PyException, "Raised for any failure; the message starts with its code.");

fn err(e: shortc2_core::Error) -> PyErr {
    ShortC2Error::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    ShortC2Error::new_err(e.to_string())
}

fn pair(z: (Complex64, Complex64)) -> ComplexPair {
    ComplexPair::new(z.0, z.1)
}

/// Hénon map `(x, y) -> (y, p(y) - a x)` with monic `p` and no `y^(d-1)` term.
#[pyclass(name = "HenonMap", frozen)]
pub struct PyHenonMap {
    inner: henon::HenonMap,
}

#[pymethods]
impl PyHenonMap {
    /// `lower` holds the coefficients of `y^0 .. y^(d-2)`.
    #[new]
    #[pyo3(signature = (degree, lower = None, a = Complex64::new(1.0, 0.0)))]
    fn new(degree: u32, lower: Option<Vec<Complex64>>, a: Complex64) -> PyResult<Self> {
        let lower = lower.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); degree.saturating_sub(1) as usize]);
        let p = MonicPoly::new(degree, lower).map_err(err)?;
        Ok(PyHenonMap {
            inner: henon::HenonMap::new(p, a).map_err(err)?,
        })
    }

    #[staticmethod]
    fn quadratic_standard() -> Self {
        PyHenonMap {
            inner: henon::HenonMap::quadratic_standard(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyHenonMap {
            inner: MapSpec::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_spec()).map_err(json_err)
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    #[getter]
    fn a(&self) -> Complex64 {
        self.inner.a()
    }

    fn escape_radius(&self) -> f64 {
        self.inner.escape_radius()
    }

    fn apply(&self, z: (Complex64, Complex64)) -> PyResult<(Complex64, Complex64)> {
        let w = self.inner.apply(pair(z)).map_err(err)?;
        Ok((w.x, w.y))
    }

    fn apply_inverse(&self, z: (Complex64, Complex64)) -> PyResult<(Complex64, Complex64)> {
        let w = self.inner.apply_inverse(pair(z)).map_err(err)?;
        Ok((w.x, w.y))
    }

    /// `(value, error_bound, iterations, escaped)`
    #[pyo3(signature = (z, tol = 1e-10, budget = greens::DEFAULT_BUDGET))]
    fn green_plus(&self, z: (Complex64, Complex64), tol: f64, budget: usize) -> PyResult<(f64, f64, usize, bool)> {
        let e = greens::green_plus_with_budget(&self.inner, pair(z), tol, budget).map_err(err)?;
        Ok((e.value, e.error_bound, e.iterations, e.escaped))
    }

    #[pyo3(signature = (z, tol = 1e-10, budget = greens::DEFAULT_BUDGET))]
    fn green_minus(&self, z: (Complex64, Complex64), tol: f64, budget: usize) -> PyResult<(f64, f64, usize, bool)> {
        let e = greens::green_minus_with_budget(&self.inner, pair(z), tol, budget).map_err(err)?;
        Ok((e.value, e.error_bound, e.iterations, e.escaped))
    }

    /// One of `K_plus`, `Omega_prime_interior`, `boundary_unresolved`, `outside`.
    #[pyo3(signature = (z, level, budget = greens::DEFAULT_BUDGET))]
    fn membership(&self, z: (Complex64, Complex64), level: f64, budget: usize) -> PyResult<&'static str> {
        let lvl = LevelSpec::new(level).map_err(err)?;
        Ok(greens::membership(&self.inner, pair(z), lvl, budget).map_err(err)?.as_str())
    }

    /// Exponents `e` of the preserving maps `(η x, η^d y)`, `η = exp(2πi e/(d²-1))`.
    fn affine_group(&self) -> Vec<u64> {
        affine_preservers(&self.inner).elements.iter().map(|s| s.eta_exponent).collect()
    }

    /// Winding class `(k, n)` of a loop given in path-file JSON.
    #[pyo3(signature = (path_json, level = 1e6))]
    fn loop_class(&self, path_json: &str, level: f64) -> PyResult<(i64, u32)> {
        let lp = SampledPath::from_json(path_json).map_err(err)?;
        let w = winding_report(&self.inner, &lp, LevelSpec::new(level).map_err(err)?).map_err(err)?;
        Ok((w.class.k, w.class.n))
    }

    /// A path inside `{0 < G+ < level}` joining `a` to `b`, as path-file JSON.
    fn connect(&self, a: (Complex64, Complex64), b: (Complex64, Complex64), level: f64) -> PyResult<String> {
        let lvl = LevelSpec::new(level).map_err(err)?;
        let c = connect_points(&self.inner, pair(a), pair(b), lvl).map_err(err)?;
        Ok(c.path.to_json())
    }

    /// Apply `γ_{k/d^n}` to `(z, ζ)` on the annulus of the given level.
    fn deck(&self, k: i64, n: u32, z: Complex64, zeta: Complex64, level: f64) -> PyResult<(Complex64, Complex64)> {
        let model = Model::new(&self.inner).map_err(err)?;
        let d = self.inner.degree();
        let g = DeckTransform {
            class: DyadicClass::new(k, n, d).map_err(err)?,
            m: 0,
        };
        let pt = ModelPoint::new(z, zeta, level).map_err(err)?;
        let out = model.deck_apply(&g, pt).map_err(err)?;
        Ok((out.z, out.zeta))
    }

    /// JSON report of an invariant suite.
    #[pyo3(signature = (suite = "all", samples = 200, seed = 0))]
    fn verify(&self, suite: &str, samples: usize, seed: u64) -> PyResult<String> {
        let opts = VerifyOptions {
            samples,
            seed,
            ..Default::default()
        };
        let r = run_suite(&self.inner, suite, &opts).map_err(err)?;
        serde_json::to_string(&r).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        let s = self.inner.to_spec();
        format!("HenonMap(d={}, a={:?}, q={:?})", s.d, s.a, s.q)
    }
}

/// `n` with `c1 = c2 d^n`, or None. Levels are strings such as `"8"` or `"7/3"`.
#[pyfunction]
fn bihol(c1: &str, c2: &str, d: u32) -> PyResult<Option<i64>> {
    let a: Level = c1.parse().map_err(err)?;
    let b: Level = c2.parse().map_err(err)?;
    Ok(biholo_criterion(&a, &b, d).map_err(err)?.n)
}

#[pyfunction]
fn schema() -> String {
    report_schema().to_string()
}

#[pymodule]
fn shortc2(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHenonMap>()?;
    m.add_function(wrap_pyfunction!(bihol, m)?)?;
    m.add_function(wrap_pyfunction!(schema, m)?)?;
    m.add("ShortC2Error", m.py().get_type::<ShortC2Error>())?;
    Ok(())
}
