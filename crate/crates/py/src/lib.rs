//! Python bindings. Long-running calls release the GIL.

use gardner_core::capacity::{self, CorrelationParams};
use gardner_core::dynamics::{self, PatternSet};
use gardner_core::gaussian;
use gardner_core::margin::{self, PatternMatrix};
use gardner_core::montecarlo::{self, EnsembleKind, SweepOptions};
use gardner_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    gardner,
    StorageFailed,
    PyRuntimeError,
    "A site admits no column with the requested margin."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(msg) => PyValueError::new_err(msg),
        Error::StorageFailed {
            site,
            ref certificate,
        } => StorageFailed::new_err((e.to_string(), site, certificate.margin_upper)),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn params(m_a: Option<f64>) -> PyResult<Option<CorrelationParams>> {
    m_a.map(CorrelationParams::new).transpose().map_err(to_py)
}

fn ensemble(name: &str, m_a: Option<f64>) -> PyResult<EnsembleKind> {
    let kind = match (name, m_a) {
        ("gaussian", None) => EnsembleKind::Gaussian,
        ("bernoulli", None) => EnsembleKind::BernoulliSymmetric,
        ("asymmetric", Some(m_a)) => EnsembleKind::BernoulliAsymmetric { m_a },
        ("asymmetric", None) => {
            return Err(PyValueError::new_err("the asymmetric ensemble needs m_a"))
        }
        ("gaussian" | "bernoulli", Some(_)) => {
            return Err(PyValueError::new_err(
                "m_a only applies to the asymmetric ensemble",
            ))
        }
        (other, _) => {
            return Err(PyValueError::new_err(format!(
                "unknown ensemble {other:?}; expected gaussian, bernoulli or asymmetric"
            )))
        }
    };
    kind.validate().map_err(to_py)?;
    Ok(kind)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<PatternMatrix> {
    PatternMatrix::from_rows(&rows).map_err(to_py)
}

#[pyclass(frozen, get_all, name = "CapacityResult", skip_from_py_object)]
#[derive(Clone)]
struct PyCapacityResult {
    kappa: f64,
    f_value: f64,
    alpha_c: f64,
    exactness: String,
    v_opt: Option<f64>,
    kappa_adj: Option<f64>,
}

#[pymethods]
impl PyCapacityResult {
    fn __repr__(&self) -> String {
        format!(
            "CapacityResult(kappa={}, alpha_c={}, exactness={})",
            self.kappa, self.alpha_c, self.exactness
        )
    }
}

impl From<capacity::CapacityResult> for PyCapacityResult {
    fn from(r: capacity::CapacityResult) -> Self {
        Self {
            kappa: r.kappa,
            f_value: r.f_value,
            alpha_c: r.alpha_c,
            exactness: r.exactness.to_string(),
            v_opt: r.v_opt,
            kappa_adj: r.kappa_adj,
        }
    }
}

#[pyclass(frozen, get_all, name = "MarginCertificate", skip_from_py_object)]
#[derive(Clone)]
struct PyMarginCertificate {
    x: Vec<f64>,
    #[pyo3(name = "lambda_")]
    lambda: Vec<f64>,
    margin_lower: f64,
    margin_upper: f64,
    gap: f64,
    sphere_margin: f64,
    iterations: usize,
}

#[pymethods]
impl PyMarginCertificate {
    fn __repr__(&self) -> String {
        format!(
            "MarginCertificate(margin_lower={}, margin_upper={}, gap={})",
            self.margin_lower, self.margin_upper, self.gap
        )
    }
}

impl From<margin::MarginCertificate> for PyMarginCertificate {
    fn from(c: margin::MarginCertificate) -> Self {
        Self {
            x: c.x,
            lambda: c.lambda,
            margin_lower: c.margin_lower,
            margin_upper: c.margin_upper,
            gap: c.gap,
            sphere_margin: c.sphere_margin,
            iterations: c.iterations,
        }
    }
}

#[pyclass(frozen, get_all, name = "SweepResult", skip_from_py_object)]
struct PySweepResult {
    grid: Vec<f64>,
    p_feasible: Vec<f64>,
    n_trials: Vec<usize>,
    n_undecided: Vec<usize>,
    wilson_halfwidth: Vec<f64>,
    csv: String,
}

#[pymethods]
impl PySweepResult {
    fn to_csv(&self) -> String {
        self.csv.clone()
    }

    fn __len__(&self) -> usize {
        self.grid.len()
    }
}

/// Standard normal density.
#[pyfunction]
fn std_normal_pdf(z: f64) -> f64 {
    gaussian::std_normal_pdf(z)
}

/// Standard normal distribution function.
#[pyfunction]
fn std_normal_cdf(z: f64) -> f64 {
    gaussian::std_normal_cdf(z)
}

/// Closed-form Gardner integral.
#[pyfunction]
fn f_gar(kappa: f64) -> f64 {
    gaussian::f_gar(kappa)
}

/// Gardner integral by adaptive quadrature.
#[pyfunction]
#[pyo3(signature = (kappa, abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=500))]
fn f_gar_quadrature(
    kappa: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> PyResult<f64> {
    let spec = gaussian::QuadratureSpec::new(abs_tol, rel_tol, max_subdivisions).map_err(to_py)?;
    gaussian::f_gar_quadrature(kappa, &spec).map_err(to_py)
}

/// Capacity at margin `kappa`; pass `m_a` for biased patterns.
#[pyfunction]
#[pyo3(signature = (kappa, m_a=None))]
fn alpha_c(kappa: f64, m_a: Option<f64>) -> PyResult<PyCapacityResult> {
    let r = match params(m_a)? {
        None => capacity::alpha_c_uncorrelated(kappa),
        Some(p) => capacity::alpha_c_correlated(kappa, p).map_err(to_py)?,
    };
    Ok(r.into())
}

#[pyfunction]
fn kappa_adj(kappa: f64, m_a: f64) -> PyResult<f64> {
    capacity::kappa_adj(kappa, CorrelationParams::new(m_a).map_err(to_py)?).map_err(to_py)
}

/// Margin where the adjusted margin vanishes.
#[pyfunction]
#[pyo3(signature = (m_a, tol=1e-10))]
fn kappa_critical(m_a: f64, tol: f64) -> PyResult<f64> {
    capacity::kappa_critical(CorrelationParams::new(m_a).map_err(to_py)?, tol).map_err(to_py)
}

/// Max-margin certificate for constraint rows `h` (list of equal-length lists).
#[pyfunction]
#[pyo3(signature = (h, tol=1e-9, max_iters=margin::DEFAULT_MAX_ITERS))]
fn max_margin(
    py: Python<'_>,
    h: Vec<Vec<f64>>,
    tol: f64,
    max_iters: usize,
) -> PyResult<PyMarginCertificate> {
    let h = matrix(h)?;
    py.detach(|| margin::max_margin(&h, tol, max_iters))
        .map(Into::into)
        .map_err(to_py)
}

/// "Feasible", "Infeasible" or "Undecided".
#[pyfunction]
#[pyo3(signature = (h, kappa, tol=1e-9))]
fn is_feasible(py: Python<'_>, h: Vec<Vec<f64>>, kappa: f64, tol: f64) -> PyResult<&'static str> {
    let h = matrix(h)?;
    py.detach(|| margin::is_feasible(&h, kappa, tol))
        .map(|f| f.as_str())
        .map_err(to_py)
}

/// Feasibility probability along `alpha_grid`.
#[pyfunction]
#[pyo3(signature = (n, kappa, alpha_grid, trials, seed, ensemble="gaussian", m_a=None, solver_tol=1e-6))]
#[allow(clippy::too_many_arguments)]
fn sweep_alpha(
    py: Python<'_>,
    n: usize,
    kappa: f64,
    alpha_grid: Vec<f64>,
    trials: usize,
    seed: u64,
    ensemble: &str,
    m_a: Option<f64>,
    solver_tol: f64,
) -> PyResult<PySweepResult> {
    let kind = self::ensemble(ensemble, m_a)?;
    let options = SweepOptions { solver_tol };
    let r = py
        .detach(|| {
            montecarlo::sweep_alpha_with(n, kappa, kind, &alpha_grid, trials, seed, &options)
        })
        .map_err(to_py)?;
    Ok(PySweepResult {
        csv: r.to_csv(),
        grid: r.grid,
        p_feasible: r.p_feasible,
        n_trials: r.n_trials,
        n_undecided: r.n_undecided,
        wilson_halfwidth: r.wilson_halfwidth,
    })
}

/// Empirical capacity as `(alpha_hat, ci)`.
#[pyfunction]
#[pyo3(signature = (n, kappa, trials, seed, ensemble="gaussian", m_a=None))]
fn estimate_alpha_hat(
    py: Python<'_>,
    n: usize,
    kappa: f64,
    trials: usize,
    seed: u64,
    ensemble: &str,
    m_a: Option<f64>,
) -> PyResult<(f64, f64)> {
    let kind = self::ensemble(ensemble, m_a)?;
    let a = py
        .detach(|| montecarlo::estimate_alpha_hat(n, kappa, kind, trials, seed))
        .map_err(to_py)?;
    Ok((a.alpha_hat, a.ci))
}

/// Stores ±1 `patterns` as margin-`kappa` fixed points. Returns the coupling
/// matrix `X` (list of rows) and the per-site margins.
#[pyfunction]
#[pyo3(signature = (patterns, kappa, tol=1e-9))]
fn store_patterns(
    py: Python<'_>,
    patterns: Vec<Vec<i8>>,
    kappa: f64,
    tol: f64,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let set = PatternSet::from_rows(&patterns).map_err(to_py)?;
    let s = py
        .detach(|| dynamics::store_patterns(&set, kappa, tol))
        .map_err(to_py)?;
    let n = set.n();
    let x = s
        .interactions
        .data()
        .chunks(n)
        .map(<[f64]>::to_vec)
        .collect();
    Ok((x, s.per_site_margin))
}

/// Number of violated `(pattern, site)` fixed-point conditions.
#[pyfunction]
fn count_violations(patterns: Vec<Vec<i8>>, x: Vec<Vec<f64>>, kappa: f64) -> PyResult<usize> {
    let set = PatternSet::from_rows(&patterns).map_err(to_py)?;
    let interactions = interaction_matrix(x)?;
    Ok(dynamics::verify_fixed_points(&set, &interactions, kappa)
        .map_err(to_py)?
        .violations)
}

/// One synchronous update with `sign(0) = +1` and zero thresholds.
#[pyfunction]
fn step_dynamics(state: Vec<i8>, x: Vec<Vec<f64>>) -> PyResult<Vec<i8>> {
    let interactions = interaction_matrix(x)?;
    dynamics::step_dynamics(&state, &interactions).map_err(to_py)
}

fn interaction_matrix(x: Vec<Vec<f64>>) -> PyResult<dynamics::InteractionMatrix> {
    let n = x.len();
    if x.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("X must be square"));
    }
    dynamics::InteractionMatrix::new(n, x.concat(), vec![0.0; n]).map_err(to_py)
}

#[pymodule]
fn gardner(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("StorageFailed", m.py().get_type::<StorageFailed>())?;
    m.add_class::<PyCapacityResult>()?;
    m.add_class::<PyMarginCertificate>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(std_normal_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(f_gar, m)?)?;
    m.add_function(wrap_pyfunction!(f_gar_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_c, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_adj, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_critical, m)?)?;
    m.add_function(wrap_pyfunction!(max_margin, m)?)?;
    m.add_function(wrap_pyfunction!(is_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_alpha_hat, m)?)?;
    m.add_function(wrap_pyfunction!(store_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(count_violations, m)?)?;
    m.add_function(wrap_pyfunction!(step_dynamics, m)?)?;
    Ok(())
}
