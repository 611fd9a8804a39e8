//! Python bindings. Outcomes may be given as bools or as 0/1 numbers.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::corpverify as cv;
use cv::diagnostics as diag;

fn to_py(e: cv::Error) -> PyErr {
    match e {
        cv::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for cv::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Forecast–observation pairs.
#[pyclass(name = "PairSet", frozen)]
struct PyPairSet {
    inner: cv::PairSet,
}

#[pymethods]
impl PyPairSet {
    #[new]
    fn new(forecasts: Vec<f64>, outcomes: Vec<f64>) -> PyResult<Self> {
        Ok(PyPairSet {
            inner: cv::PairSet::from_numeric(forecasts, &outcomes).py()?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn forecasts(&self) -> Vec<f64> {
        self.inner.forecasts().to_vec()
    }

    #[getter]
    fn outcomes(&self) -> Vec<bool> {
        self.inner.outcomes().to_vec()
    }

    #[getter]
    fn n_events(&self) -> usize {
        self.inner.n_events()
    }

    #[getter]
    fn base_rate(&self) -> f64 {
        cv::base_rate(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("PairSet(n={}, events={})", self.inner.len(), self.inner.n_events())
    }
}

/// A proper scoring rule: Brier, log, elementary or FIRM.
#[pyclass(name = "ScoringRule", frozen)]
struct PyScoringRule {
    inner: cv::ScoringRule,
}

#[pymethods]
impl PyScoringRule {
    #[staticmethod]
    fn brier() -> Self {
        PyScoringRule {
            inner: cv::ScoringRule::Brier,
        }
    }

    #[staticmethod]
    fn log() -> Self {
        PyScoringRule {
            inner: cv::ScoringRule::Log,
        }
    }

    #[staticmethod]
    fn elementary(theta: f64) -> PyResult<Self> {
        Ok(PyScoringRule {
            inner: cv::ScoringRule::elementary(theta).py()?,
        })
    }

    #[staticmethod]
    fn firm(thresholds: Vec<f64>, weights: Vec<f64>) -> PyResult<Self> {
        let spec = cv::FirmSpec::new(thresholds, weights).py()?;
        Ok(PyScoringRule {
            inner: cv::ScoringRule::Firm(spec),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyScoringRule {
            inner: cv::ScoringRule::from_json(text).py()?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn score(&self, x: f64, y: bool) -> PyResult<f64> {
        self.inner.score(x, y).py()
    }

    fn mean(&self, pairs: &PyPairSet) -> PyResult<f64> {
        cv::scoring::mean_score(&pairs.inner, &self.inner).py()
    }

    fn __repr__(&self) -> String {
        format!("ScoringRule({})", self.inner.to_json())
    }
}

#[pyclass(name = "Decomposition", frozen, get_all)]
struct PyDecomposition {
    mean_score: f64,
    mcb: f64,
    dsc: f64,
    unc: f64,
    s_calibrated: f64,
    s_reference: f64,
    best_constant: f64,
}

#[pymethods]
impl PyDecomposition {
    fn __repr__(&self) -> String {
        format!(
            "Decomposition(mean_score={}, mcb={}, dsc={}, unc={})",
            self.mean_score, self.mcb, self.dsc, self.unc
        )
    }
}

impl From<cv::Decomposition> for PyDecomposition {
    fn from(d: cv::Decomposition) -> Self {
        PyDecomposition {
            mean_score: d.mean_score,
            mcb: d.mcb,
            dsc: d.dsc,
            unc: d.unc,
            s_calibrated: d.s_calibrated,
            s_reference: d.s_reference,
            best_constant: d.best_constant,
        }
    }
}

/// Isotonic (PAV) fit of outcomes on forecasts.
#[pyclass(name = "IsotonicFit", frozen)]
struct PyIsotonicFit {
    inner: cv::IsotonicFit,
}

#[pymethods]
impl PyIsotonicFit {
    fn apply(&self, x: f64) -> f64 {
        cv::apply_fit(&self.inner, x)
    }

    /// `(forecast_lo, forecast_hi, fitted, count)` per block.
    #[getter]
    fn blocks(&self) -> Vec<(f64, f64, f64, usize)> {
        self.inner
            .blocks
            .iter()
            .map(|b| (b.forecast_lo, b.forecast_hi, b.fitted, b.count))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

#[pyclass(name = "MurphyCurve", frozen)]
struct PyMurphyCurve {
    inner: diag::MurphyCurve,
}

#[pymethods]
impl PyMurphyCurve {
    fn eval(&self, theta: f64) -> f64 {
        self.inner.eval(theta)
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.inner.knots.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn dominates(&self, other: &PyMurphyCurve, tol: f64) -> bool {
        self.inner.dominates(&other.inner, tol)
    }
}

#[pyclass(name = "RocCurve", frozen)]
struct PyRocCurve {
    inner: diag::RocCurve,
}

#[pymethods]
impl PyRocCurve {
    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points.clone()
    }

    #[getter]
    fn auc(&self) -> f64 {
        self.inner.auc
    }

    fn hit_rate_at(&self, far: f64) -> f64 {
        self.inner.hit_rate_at(far)
    }
}

#[pyfunction]
fn brier(x: f64, y: bool) -> PyResult<f64> {
    cv::scoring::brier(x, y).py()
}

#[pyfunction]
fn log_score(x: f64, y: bool) -> PyResult<f64> {
    cv::scoring::log_score(x, y).py()
}

#[pyfunction]
fn elementary_score(theta: f64, x: f64, y: bool) -> PyResult<f64> {
    cv::scoring::elementary_score(theta, x, y).py()
}

/// Mixture of elementary scores; `measure` is "uniform" or "log".
#[pyfunction]
fn mixture_score(x: f64, y: bool, measure: &str) -> PyResult<f64> {
    let m = measure.parse::<cv::scoring::MixingMeasure>().py()?;
    cv::scoring::mixture_score(x, y, m).py()
}

#[pyfunction]
#[pyo3(signature = (pairs, rule = None))]
fn mean_score(pairs: &PyPairSet, rule: Option<&PyScoringRule>) -> PyResult<f64> {
    let rule = rule.map(|r| r.inner.clone()).unwrap_or(cv::ScoringRule::Brier);
    cv::scoring::mean_score(&pairs.inner, &rule).py()
}

#[pyfunction]
fn pav_fit(pairs: &PyPairSet) -> PyResult<PyIsotonicFit> {
    Ok(PyIsotonicFit {
        inner: cv::pav_fit(&pairs.inner).py()?,
    })
}

#[pyfunction]
fn recalibrate(pairs: &PyPairSet) -> PyResult<PyPairSet> {
    Ok(PyPairSet {
        inner: cv::recalibrate(&pairs.inner).py()?,
    })
}

#[pyfunction]
#[pyo3(signature = (pairs, rule = None))]
fn corp_decompose(pairs: &PyPairSet, rule: Option<&PyScoringRule>) -> PyResult<PyDecomposition> {
    let rule = rule.map(|r| r.inner.clone()).unwrap_or(cv::ScoringRule::Brier);
    Ok(cv::corp_decompose(&pairs.inner, &rule).py()?.into())
}

#[pyfunction]
#[pyo3(signature = (pairs, grid = None))]
fn murphy_curve(pairs: &PyPairSet, grid: Option<Vec<f64>>) -> PyResult<PyMurphyCurve> {
    Ok(PyMurphyCurve {
        inner: diag::murphy_curve(&pairs.inner, grid.as_deref()).py()?,
    })
}

#[pyfunction]
#[pyo3(signature = (pairs, concave = false))]
fn roc_curve(pairs: &PyPairSet, concave: bool) -> PyResult<PyRocCurve> {
    Ok(PyRocCurve {
        inner: diag::roc_curve(&pairs.inner, concave).py()?,
    })
}

type PrPoints = Vec<(f64, f64)>;

/// `(points, auc_pr)` with points as `(recall, precision)`.
#[pyfunction]
fn pr_curve(pairs: &PyPairSet) -> PyResult<(PrPoints, Option<f64>)> {
    let c = diag::pr_curve(&pairs.inner).py()?;
    Ok((c.points, c.auc_pr))
}

#[pyfunction]
fn auc_pr(pairs: &PyPairSet) -> PyResult<f64> {
    diag::auc_pr(&pairs.inner).py()
}

/// `(max_csi, threshold)` or `None` when CSI is undefined everywhere.
#[pyfunction]
fn max_csi(pairs: &PyPairSet) -> PyResult<Option<(f64, f64)>> {
    diag::max_csi(&pairs.inner).py()
}

#[pyfunction]
fn contingency<'py>(py: Python<'py>, pairs: &PyPairSet, theta: f64) -> PyResult<Bound<'py, PyDict>> {
    let c = diag::contingency(&pairs.inner, theta).py()?;
    let s = diag::categorical_stats(&c);
    let d = PyDict::new(py);
    d.set_item("hits", c.hits)?;
    d.set_item("misses", c.misses)?;
    d.set_item("false_alarms", c.false_alarms)?;
    d.set_item("correct_negatives", c.correct_negatives)?;
    d.set_item("pod", s.pod)?;
    d.set_item("sr", s.sr)?;
    d.set_item("csi", s.csi)?;
    d.set_item("fb", s.fb)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (diff, lead_day = 1, level = 0.95))]
fn dm_test<'py>(py: Python<'py>, diff: Vec<f64>, lead_day: u32, level: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = cv::inference::dm_test(&diff, lead_day, level).py()?;
    let d = PyDict::new(py);
    d.set_item("mean_diff", r.mean_diff)?;
    d.set_item("statistic", r.statistic)?;
    d.set_item("variance", r.variance)?;
    d.set_item("lags_used", r.lags_used)?;
    d.set_item("ci", r.ci)?;
    d.set_item("level", r.level)?;
    Ok(d)
}

/// Runs the Ideal/Under/Over/Jitter experiment and returns one dict per
/// system.
#[pyfunction]
#[pyo3(signature = (n_trials = 100_000, seed = 1, beta_shape = (1.0, 3.0), support = (0.0, 0.5), jitter_sd = 0.1))]
fn synthetic_experiment<'py>(
    py: Python<'py>,
    n_trials: usize,
    seed: u64,
    beta_shape: (f64, f64),
    support: (f64, f64),
    jitter_sd: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = cv::synthetic::SyntheticConfig {
        n_trials,
        seed,
        beta_shape,
        support,
        jitter_sd,
    };
    let result = py.detach(|| cv::synthetic::run_experiment(&config)).py()?;
    result
        .systems
        .into_iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("name", s.name)?;
            d.set_item("max_csi", s.max_csi)?;
            d.set_item("max_csi_threshold", s.max_csi_threshold)?;
            d.set_item("auc_pr", s.auc_pr)?;
            d.set_item("mean_brier", s.mean_brier)?;
            d.set_item("auc_roc", s.auc_roc)?;
            d.set_item("mcb", s.decomposition.mcb)?;
            d.set_item("dsc", s.decomposition.dsc)?;
            d.set_item("unc", s.decomposition.unc)?;
            Ok(d)
        })
        .collect()
}

/// Runs the command line interface with `args` (without the program name)
/// and returns its exit code.
#[pyfunction]
fn cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("corpverify".to_string()).chain(args).collect();
    py.detach(|| cv::cli::run(argv))
}

#[pymodule(name = "corpverify")]
fn corpverify_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPairSet>()?;
    m.add_class::<PyScoringRule>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyIsotonicFit>()?;
    m.add_class::<PyMurphyCurve>()?;
    m.add_class::<PyRocCurve>()?;
    m.add_function(wrap_pyfunction!(brier, m)?)?;
    m.add_function(wrap_pyfunction!(log_score, m)?)?;
    m.add_function(wrap_pyfunction!(elementary_score, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_score, m)?)?;
    m.add_function(wrap_pyfunction!(mean_score, m)?)?;
    m.add_function(wrap_pyfunction!(pav_fit, m)?)?;
    m.add_function(wrap_pyfunction!(recalibrate, m)?)?;
    m.add_function(wrap_pyfunction!(corp_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(murphy_curve, m)?)?;
    m.add_function(wrap_pyfunction!(roc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(pr_curve, m)?)?;
    m.add_function(wrap_pyfunction!(auc_pr, m)?)?;
    m.add_function(wrap_pyfunction!(max_csi, m)?)?;
    m.add_function(wrap_pyfunction!(contingency, m)?)?;
    m.add_function(wrap_pyfunction!(dm_test, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
