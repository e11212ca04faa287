//! Python bindings for `subtrace`.
//!
//! Vectors cross the boundary as lists of Python `complex`, matrices as
//! row-major lists of such lists. Real numbers are accepted wherever a
//! complex entry is expected.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use subtrace::config::parse_experiment;
use subtrace::harness::{run_comparison as core_run_comparison, ExperimentSpec};
use subtrace::metrics;
use subtrace::model::{generate_true_bases, snapshot, ScenarioConfig, TrueBases};
use subtrace::numkit;
use subtrace::rng::{stream, Purpose, StreamRng};
use subtrace::tracker::{self, StepStatus};
use subtrace::{AlgoClass, CMatrix, CVector, ClampPolicy, Mode, TrackerConfig};

fn py_err(e: subtrace::Error) -> PyErr {
    match e {
        subtrace::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

pub fn to_cvector(entries: Vec<Complex64>) -> Result<CVector, subtrace::Error> {
    CVector::new(entries)
}

pub fn to_cmatrix(rows: Vec<Vec<Complex64>>) -> Result<CMatrix, subtrace::Error> {
    let n = rows.len();
    let l = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != l) {
        return Err(subtrace::Error::Config(format!(
            "ragged matrix: expected rows of length {l}, found {}",
            bad.len()
        )));
    }
    CMatrix::new(n, l, rows.into_iter().flatten().collect())
}

pub fn from_cmatrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.as_slice().chunks(m.cols()).map(<[Complex64]>::to_vec).collect()
}

pub fn from_cvector(v: &CVector) -> Vec<Complex64> {
    v.as_slice().to_vec()
}

fn parse<T: std::str::FromStr<Err = subtrace::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

fn status_name(s: StepStatus) -> &'static str {
    match s {
        StepStatus::Applied => "applied",
        StepStatus::SkippedDegenerate => "skipped_degenerate",
        StepStatus::SkippedRankDeficient => "skipped_rank_deficient",
    }
}

/// A streaming DPM or OJA subspace tracker.
#[pyclass(name = "Tracker", module = "pysubtrace")]
pub struct PyTracker {
    inner: subtrace::Tracker,
}

#[pymethods]
impl PyTracker {
    /// `algo` is `"dpm"` or `"oja"`, `mode` is `"signal"` or `"noise"` and
    /// `clamp` is `"off"`, `"generic"` or `"class"`. Without `basis` the
    /// initial basis is drawn at random from `seed`.
    #[new]
    #[pyo3(signature = (algo, mode, beta, n, l, clamp = "generic", seed = 0, basis = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        algo: &str,
        mode: &str,
        beta: f64,
        n: usize,
        l: usize,
        clamp: &str,
        seed: u64,
        basis: Option<Vec<Vec<Complex64>>>,
    ) -> PyResult<Self> {
        let cfg = TrackerConfig::new(
            parse::<AlgoClass>(algo)?,
            parse::<Mode>(mode)?,
            beta,
            parse::<ClampPolicy>(clamp)?,
        );
        let inner = match basis {
            Some(rows) => {
                let b = to_cmatrix(rows).map_err(py_err)?;
                if b.shape() != (n, l) {
                    return Err(PyValueError::new_err(format!(
                        "basis must be {n}x{l}, got {:?}",
                        b.shape()
                    )));
                }
                subtrace::Tracker::with_basis(cfg, b)
            }
            None => subtrace::Tracker::new(cfg, n, l, &mut stream(seed, 0, Purpose::Init)),
        }
        .map_err(py_err)?;
        Ok(PyTracker { inner })
    }

    /// Feeds one snapshot. Returns a dict with `q`, `y`, `p`, `beta_eff` and
    /// `status`.
    fn step<'py>(&mut self, py: Python<'py>, x: Vec<Complex64>) -> PyResult<Bound<'py, PyDict>> {
        let x = to_cvector(x).map_err(py_err)?;
        let rec = self.inner.step(&x).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("q", from_cvector(&rec.q))?;
        d.set_item("y", from_cvector(&rec.y))?;
        d.set_item("p", from_cvector(&rec.p))?;
        d.set_item("beta_eff", rec.beta_eff)?;
        d.set_item("status", status_name(rec.status))?;
        Ok(d)
    }

    fn basis(&self) -> Vec<Vec<Complex64>> {
        from_cmatrix(self.inner.basis())
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.state.step
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.config.beta_nominal
    }

    fn __repr__(&self) -> String {
        let c = &self.inner.config;
        let (n, l) = self.inner.basis().shape();
        format!(
            "Tracker({:?}, {:?}, beta={}, clamp={:?}, shape={n}x{l}, steps={})",
            c.algo_class, c.mode, c.beta_nominal, c.clamp_policy, self.inner.state.step
        )
    }
}

/// Snapshot generator for one draw of the true subspaces.
#[pyclass(name = "Scenario", module = "pysubtrace")]
pub struct PyScenario {
    config: ScenarioConfig,
    truth: TrueBases,
    rng: StreamRng,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (n_sensors = 8, signal_powers = None, noise_variance = 1e-3, seed = 0x5eed, manifold = "random"))]
    fn new(
        n_sensors: usize,
        signal_powers: Option<Vec<f64>>,
        noise_variance: f64,
        seed: u64,
        manifold: &str,
    ) -> PyResult<Self> {
        let reference = ScenarioConfig::reference();
        let signal_powers = signal_powers.unwrap_or(reference.signal_powers.clone());
        let config = ScenarioConfig {
            n_sensors,
            subspace_rank: signal_powers.len(),
            signal_powers,
            noise_variance,
            seed,
            manifold: parse(manifold)?,
            ..reference
        };
        config.validate().map_err(py_err)?;
        let truth = generate_true_bases(&config, &mut stream(seed, 0, Purpose::Truth)).map_err(py_err)?;
        Ok(PyScenario {
            config,
            truth,
            rng: stream(seed, 0, Purpose::Snapshots),
        })
    }

    fn snapshot(&mut self) -> Vec<Complex64> {
        from_cvector(&snapshot(&self.truth, &self.config, &mut self.rng))
    }

    fn signal_basis(&self) -> Vec<Vec<Complex64>> {
        from_cmatrix(&self.truth.signal_basis)
    }

    fn noise_basis(&self) -> Option<Vec<Vec<Complex64>>> {
        self.truth.noise_basis.as_ref().map(from_cmatrix)
    }

    /// `‖P_ref − WWᴴ‖_F²` where `P_ref` projects onto the signal subspace
    /// or its complement depending on `mode`.
    #[pyo3(signature = (w, mode = "signal"))]
    fn projection_error(&self, w: Vec<Vec<Complex64>>, mode: &str) -> PyResult<f64> {
        let w = to_cmatrix(w).map_err(py_err)?;
        metrics::projection_error(&w, &self.truth, parse(mode)?).map_err(py_err)
    }
}

#[pyfunction]
fn orthonormalize(t: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    let t = to_cmatrix(t).map_err(py_err)?;
    numkit::orthonormalize(&t).map(|w| from_cmatrix(&w)).map_err(py_err)
}

#[pyfunction]
fn span_distance(a: Vec<Vec<Complex64>>, b: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let a = to_cmatrix(a).map_err(py_err)?;
    let b = to_cmatrix(b).map_err(py_err)?;
    numkit::span_distance(&a, &b).map_err(py_err)
}

#[pyfunction]
fn orthonormality_error(w: Vec<Vec<Complex64>>) -> PyResult<f64> {
    Ok(metrics::orthonormality_error(&to_cmatrix(w).map_err(py_err)?))
}

#[pyfunction]
fn vector_angle(a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<f64> {
    let a = to_cvector(a).map_err(py_err)?;
    let b = to_cvector(b).map_err(py_err)?;
    if a.len() != b.len() {
        return Err(PyValueError::new_err("vectors differ in length"));
    }
    Ok(numkit::vector_angle(&a, &b))
}

/// Angle between `y` and the rotated vector for stepsize `beta`.
#[pyfunction]
fn gamma_angle(x: Vec<Complex64>, y: Vec<Complex64>, beta: f64) -> PyResult<f64> {
    let x = to_cvector(x).map_err(py_err)?;
    let y = to_cvector(y).map_err(py_err)?;
    tracker::gamma_angle(&x, &y, beta).map_err(py_err)
}

#[pyfunction]
fn to_db(linear: f64) -> f64 {
    metrics::to_db(linear)
}

/// Runs the fixed-stepsize and limited arms of an experiment. `config` is the
/// text of a `key = value` experiment file; without it the reference
/// experiment is used. `n_runs` overrides the run count.
#[pyfunction]
#[pyo3(signature = (config = None, n_runs = None))]
fn run_comparison<'py>(py: Python<'py>, config: Option<&str>, n_runs: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = match config {
        Some(text) => parse_experiment(text).map_err(py_err)?,
        None => ExperimentSpec::reference(),
    };
    if let Some(n) = n_runs {
        spec.n_runs = n;
    }
    let report = py.detach(|| core_run_comparison(&spec)).map_err(py_err)?;

    let series = |s: &subtrace::AggregateSeries| -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("steps", s.steps.clone())?;
        d.set_item("ep_avg", s.ep_avg.clone())?;
        d.set_item("ep_max", s.ep_max.clone())?;
        d.set_item("eta_avg", s.eta_avg.clone())?;
        d.set_item("eta_max", s.eta_max.clone())?;
        Ok(d)
    };
    let sparks = |v: &[subtrace::SparkEvent]| -> Vec<(usize, usize, f64)> {
        v.iter().map(|e| (e.run_index, e.step, e.magnitude_db)).collect()
    };
    let out = PyDict::new(py);
    out.set_item("original", series(&report.series_original)?)?;
    out.set_item("amended", series(&report.series_amended)?)?;
    out.set_item("sparks_original", sparks(&report.sparks_original))?;
    out.set_item("sparks_amended", sparks(&report.sparks_amended))?;
    out.set_item(
        "steady_state_db",
        (report.steady_state_db.original, report.steady_state_db.amended),
    )?;
    out.set_item("break_step", report.break_step)?;
    out.set_item("n_runs", spec.n_runs)?;
    Ok(out)
}

/// `(name, instances, worst, tolerance, passed)`
type CheckRow = (String, usize, f64, f64, bool);

/// Runs the randomized geometry checks, one row per invariant.
#[pyfunction]
#[pyo3(signature = (instances = 1000, seed = 0))]
fn selfcheck(py: Python<'_>, instances: usize, seed: u64) -> PyResult<Vec<CheckRow>> {
    let results = py
        .detach(|| subtrace::selfcheck::run_all(instances, seed))
        .map_err(py_err)?;
    Ok(results
        .into_iter()
        .map(|r| (r.name.to_string(), r.instances, r.worst, r.tolerance, r.passed))
        .collect())
}

#[pymodule]
fn pysubtrace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTracker>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(orthonormalize, m)?)?;
    m.add_function(wrap_pyfunction!(span_distance, m)?)?;
    m.add_function(wrap_pyfunction!(orthonormality_error, m)?)?;
    m.add_function(wrap_pyfunction!(vector_angle, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_angle, m)?)?;
    m.add_function(wrap_pyfunction!(to_db, m)?)?;
    m.add_function(wrap_pyfunction!(run_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(selfcheck, m)?)?;
    Ok(())
}
