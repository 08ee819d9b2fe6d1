//! Python bindings: a thin veneer over the `stochsat` crate.
//!
//! The module exposes the `Problem` class (parsing, benchmark and
//! trajectory constructors) plus `solve`, `certify`, and `mc_reference`
//! functions. Result payloads cross the boundary as plain dicts with the
//! same field names as the crate's JSON reports, so Python consumers and
//! CLI consumers read one schema.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochsat::{
    certify_lower_bound, make_ssmt, make_trajectory_named, parse_problem_named, to_dsl,
    CertifyConfig, ObstacleSpec, SolveConfig, SsmtId, TrajectoryConfig,
};

fn to_py_err(e: stochsat::Error) -> PyErr {
    match e {
        stochsat::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts any serde-serializable payload into Python objects through the
/// stdlib `json` module, keeping the dict layout identical to the CLI's
/// JSON reports.
fn to_py_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value)
        .map_err(|e| PyValueError::new_err(format!("serialization failed: {e}")))?;
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

/// A stochastic constraint problem: deterministic parameters, random
/// variables with distributions, and a quantifier-free polynomial formula.
#[pyclass(name = "Problem", module = "stochsat_py", frozen)]
struct PyProblem {
    inner: stochsat::Problem,
}

#[pymethods]
impl PyProblem {
    /// Parses problem text in the `.ssc` DSL.
    #[staticmethod]
    #[pyo3(signature = (text, name = "problem"))]
    fn parse(text: &str, name: &str) -> PyResult<Self> {
        Ok(PyProblem {
            inner: parse_problem_named(text, name).map_err(to_py_err)?,
        })
    }

    /// Reads and parses a `.ssc` file; the problem is named after the stem.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyIOError::new_err(format!("cannot read {path}: {e}")))?;
        let name = std::path::Path::new(path)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("problem");
        Self::parse(&text, name)
    }

    /// One of the built-in benchmark problems: "phi1" … "phi4".
    #[staticmethod]
    fn benchmark(id: &str) -> PyResult<Self> {
        let found = SsmtId::ALL.iter().copied().find(|i| i.name() == id);
        match found {
            Some(id) => Ok(PyProblem {
                inner: make_ssmt(id),
            }),
            None => Err(PyValueError::new_err(format!(
                "unknown benchmark {id:?}; expected one of phi1, phi2, phi3, phi4"
            ))),
        }
    }

    /// A trajectory-planning instance with `steps` waypoints and circular
    /// obstacles given as `(cx, cy, radius)` triples.
    #[staticmethod]
    #[pyo3(signature = (steps, obstacles = vec![], name = "trajectory"))]
    fn trajectory(steps: usize, obstacles: Vec<(f64, f64, f64)>, name: &str) -> PyResult<Self> {
        let cfg = TrajectoryConfig::new(
            steps,
            obstacles
                .into_iter()
                .map(|(cx, cy, r)| ObstacleSpec::new(cx, cy, r))
                .collect(),
        );
        Ok(PyProblem {
            inner: make_trajectory_named(name, &cfg).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// Number of deterministic parameters.
    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_det()
    }

    /// Number of random variables.
    #[getter]
    fn n_random(&self) -> usize {
        self.inner.n_rand()
    }

    #[getter]
    fn var_names(&self) -> Vec<String> {
        self.inner.var_names()
    }

    /// Canonical DSL rendering; `Problem.parse` round-trips it.
    fn to_dsl(&self) -> String {
        to_dsl(&self.inner)
    }

    /// Evaluates the constraint at concrete parameters and disturbances.
    fn check(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<bool> {
        if x.len() != self.inner.n_det() {
            return Err(PyValueError::new_err(format!(
                "expected {} parameters, got {}",
                self.inner.n_det(),
                x.len()
            )));
        }
        if y.len() != self.inner.n_rand() {
            return Err(PyValueError::new_err(format!(
                "expected {} disturbances, got {}",
                self.inner.n_rand(),
                y.len()
            )));
        }
        Ok(self.inner.eval(&x, &y))
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(name={:?}, params={}, random={})",
            self.inner.name,
            self.inner.n_det(),
            self.inner.n_rand()
        )
    }
}

/// Certifies a lower bound on the satisfaction probability at `at`.
/// Returns the certification record as a dict.
#[pyfunction]
#[pyo3(signature = (problem, at, epsilon0 = 1e-3, truncation_fraction = 0.5,
                    max_boxes = 500_000, max_depth = 64))]
fn certify(
    py: Python<'_>,
    problem: &PyProblem,
    at: Vec<f64>,
    epsilon0: f64,
    truncation_fraction: f64,
    max_boxes: usize,
    max_depth: u32,
) -> PyResult<Py<PyAny>> {
    let cfg = CertifyConfig {
        epsilon0,
        truncation_fraction,
        max_boxes,
        max_depth,
    };
    let result = py
        .detach(|| certify_lower_bound(&problem.inner, &at, &cfg))
        .map_err(to_py_err)?;
    to_py_dict(py, &result)
}

/// Runs the full search-and-certify pipeline. Returns the solve record as
/// a dict (candidate, bound, per-trial breakdown).
#[pyfunction]
#[pyo3(signature = (problem, trials = 30, steps = 50, epsilon0 = 1e-3, seed = 0,
                    workers = 1, samples = 100, directions = 50, sigma = 0.1,
                    epsilon_w = 0.03, alpha0 = 1.0, alpha_max = 4.0, gamma = 0.8,
                    theta = 0.2))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    trials: usize,
    steps: usize,
    epsilon0: f64,
    seed: u64,
    workers: usize,
    samples: usize,
    directions: usize,
    sigma: f64,
    epsilon_w: f64,
    alpha0: f64,
    alpha_max: f64,
    gamma: f64,
    theta: f64,
) -> PyResult<Py<PyAny>> {
    let mut cfg = SolveConfig::default();
    cfg.trials = trials;
    cfg.aloe.k_max = steps;
    cfg.aloe.alpha0 = alpha0;
    cfg.aloe.alpha_max = alpha_max;
    cfg.aloe.gamma = gamma;
    cfg.aloe.theta = theta;
    cfg.aloe.epsilon_w = epsilon_w;
    cfg.oracle.n_samples = samples;
    cfg.oracle.n_directions = directions;
    cfg.oracle.smoothing_radius = sigma;
    cfg.oracle.epsilon_w = epsilon_w;
    cfg.certify.epsilon0 = epsilon0;
    cfg.seed = seed;
    cfg.workers = workers;
    let result = py
        .detach(|| stochsat::solve(&problem.inner, &cfg))
        .map_err(to_py_err)?;
    to_py_dict(py, &result)
}

/// Plain Monte Carlo estimate of the satisfaction probability at `at`,
/// returned as `(estimate, radius)` where `radius` is a conservative
/// confidence half-width. Not a certificate; useful for cross-checks.
#[pyfunction]
#[pyo3(signature = (problem, at, n = 1_000_000, seed = 0))]
fn mc_reference(
    py: Python<'_>,
    problem: &PyProblem,
    at: Vec<f64>,
    n: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    py.detach(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        stochsat::mc_reference(&problem.inner, &at, n, &mut rng)
    })
    .map_err(to_py_err)
}

#[pymodule]
fn stochsat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(mc_reference, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
