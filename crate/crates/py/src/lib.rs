//! Python bindings: evaluation, zeros, critical thresholds, Szego residuals
//! and the identity suite. Families are named as on the command line.

use num_complex::Complex64;
use opsums::asymptotics::scaled_cloud;
use opsums::critical::{self, DEFAULT_TOL};
use opsums::verify::verify_family;
use opsums::{make_family, zeros_aberth, FamilySpec, RecurrenceFamily};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: opsums::Error) -> PyErr {
    if e.is_usage() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(format!("{}: {e}", e.kind()))
    }
}

fn family(name: &str, a: Option<f64>, nu: Option<f64>) -> PyResult<RecurrenceFamily> {
    let mut spec = FamilySpec::new(name);
    if let Some(a) = a {
        spec = spec.with("a", a);
    }
    if let Some(nu) = nu {
        spec = spec.with("nu", nu);
    }
    make_family(&spec).map_err(py_err)
}

/// q_m(x; t) by the direct sum.
#[pyfunction]
#[pyo3(signature = (m, x, t, family="hermite", a=None, nu=None))]
fn eval(m: usize, x: f64, t: f64, family: &str, a: Option<f64>, nu: Option<f64>) -> PyResult<f64> {
    self::family(family, a, nu)?.partial_sum_direct(m, x, t).map_err(py_err)
}

/// q_m(x; t) through the four-term recursion in m.
#[pyfunction]
#[pyo3(signature = (m, x, t, family="hermite", a=None, nu=None))]
fn eval_recurrence(m: usize, x: f64, t: f64, family: &str, a: Option<f64>, nu: Option<f64>) -> PyResult<f64> {
    self::family(family, a, nu)?.partial_sum_recurrence(m, x, t).map_err(py_err)
}

/// All zeros of q_m(.; t), sorted by real then imaginary part.
///
/// With `rescaled`, the zeros of q_m(sqrt(m) x; sqrt(m) t).
#[pyfunction]
#[pyo3(signature = (m, t, family="hermite", a=None, nu=None, method="eig", rescaled=false))]
fn zeros(
    m: usize,
    t: f64,
    family: &str,
    a: Option<f64>,
    nu: Option<f64>,
    method: &str,
    rescaled: bool,
) -> PyResult<Vec<Complex64>> {
    let fam = self::family(family, a, nu)?;
    let zs = match method {
        "eig" => critical::zeros_at(&fam, m, t, rescaled),
        "aberth" => {
            let s = if rescaled { (m as f64).sqrt() } else { 1.0 };
            zeros_aberth(&fam, m, s * t).map(|z| z.divided_by(s))
        }
        other => return Err(PyValueError::new_err(format!("unknown method `{other}` (eig or aberth)"))),
    }
    .map_err(py_err)?;
    Ok(zs.zeros)
}

/// Number of real zeros of q_m(.; t).
#[pyfunction]
#[pyo3(signature = (m, t, family="hermite", a=None, nu=None, rescaled=false, tol_im=1e-9))]
fn real_count(
    m: usize,
    t: f64,
    family: &str,
    a: Option<f64>,
    nu: Option<f64>,
    rescaled: bool,
    tol_im: f64,
) -> PyResult<usize> {
    critical::count_real(&self::family(family, a, nu)?, m, t, tol_im, rescaled).map_err(py_err)
}

/// `(t_crit, x0)`; x0 is None when no collision point was located.
///
/// Rescaled Hermite uses the double-zero method, everything else bisection.
#[pyfunction]
#[pyo3(signature = (m, family="hermite", a=None, nu=None, rescaled=true, tol=DEFAULT_TOL))]
fn t_crit(
    m: usize,
    family: &str,
    a: Option<f64>,
    nu: Option<f64>,
    rescaled: bool,
    tol: f64,
) -> PyResult<(f64, Option<f64>)> {
    let fam = self::family(family, a, nu)?;
    let r = if fam.is_hermite() && rescaled {
        critical::t_crit_hermite_double_zero(m)
    } else {
        critical::t_crit_bisect(&fam, m, critical::default_seed(m, rescaled), tol, rescaled)
    }
    .map_err(py_err)?;
    Ok((r.t_crit, r.x0))
}

/// Largest |log|z e^{1-z}|| over the scaled zeros.
#[pyfunction]
#[pyo3(signature = (m, t, family="hermite", a=None))]
fn szego_max_residual(m: usize, t: f64, family: &str, a: Option<f64>) -> PyResult<f64> {
    let fam = self::family(family, a, None)?;
    let zs = opsums::zeros_eig(&fam, m, t).map_err(py_err)?;
    Ok(scaled_cloud(&fam, &zs).map_err(py_err)?.max_residual())
}

/// Identity suite report as JSON.
#[pyfunction]
#[pyo3(signature = (family="hermite", a=None, nu=None, max_m=30))]
fn verify(family: &str, a: Option<f64>, nu: Option<f64>, max_m: usize) -> PyResult<String> {
    let rep = verify_family(&self::family(family, a, nu)?, max_m).map_err(py_err)?;
    rep.to_json().map_err(py_err)
}

#[pymodule]
fn opsums_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(eval, m)?)?;
    m.add_function(wrap_pyfunction!(eval_recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(zeros, m)?)?;
    m.add_function(wrap_pyfunction!(real_count, m)?)?;
    m.add_function(wrap_pyfunction!(t_crit, m)?)?;
    m.add_function(wrap_pyfunction!(szego_max_residual, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
