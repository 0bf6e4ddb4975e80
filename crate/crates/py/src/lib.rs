//! Python bindings for `mazur-core`.
//!
//! Sequences cross the boundary as `{index: value}` dicts (1-based), matrices
//! as lists of rows. Structured reports come back as plain dicts.

use std::collections::BTreeMap;
use std::fmt::Display;

use mazur_core::certify::{self, ClassificationFlags, Flag, LpArithmetic, Sign, Tri};
use mazur_core::linalg::{self, Matrix};
use mazur_core::mazur as op;
use mazur_core::regsolve::{self, ParameterRule, SolverOptions, TikhonovProblem};
use mazur_core::riesz::{self, RestrictedOperator};
use mazur_core::seqspace::{enumerate_sphere, EnumerationMode, FinSeq};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(
    mazur,
    MazurError,
    PyException,
    "Raised when a core operation fails."
);

fn core_err<E: Display>(e: E) -> PyErr {
    MazurError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<EnumerationMode> {
    mode.parse().map_err(PyValueError::new_err)
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err(
            "expected a nonempty rectangular list of rows",
        ));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn from_matrix(a: &Matrix) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn to_seq(x: BTreeMap<usize, f64>) -> PyResult<FinSeq<f64>> {
    FinSeq::from_pairs(x).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_seq(x: &FinSeq<f64>) -> BTreeMap<usize, f64> {
    x.iter().map(|(i, &v)| (i, v)).collect()
}

/// Converts a serde value into native Python objects.
fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(core_err)?)
}

fn arithmetic(exact: bool) -> LpArithmetic {
    if exact {
        LpArithmetic::Exact
    } else {
        LpArithmetic::Float
    }
}

/// First `n` enumerated sphere directions as `{coordinate: integer}` dicts.
#[pyfunction]
#[pyo3(signature = (n, mode = "canonical"))]
fn enumerate(n: usize, mode: &str) -> PyResult<Vec<BTreeMap<usize, i64>>> {
    let terms = enumerate_sphere(parse_mode(mode)?, n);
    Ok(terms
        .iter()
        .map(|z| z.direction().iter().map(|(i, &v)| (i, v)).collect())
        .collect())
}

/// Finite truncation of `B: l1 -> l2`, `x -> sum x_k zeta_k`.
#[pyclass(name = "MazurOperator", module = "mazur")]
struct PyMazurOperator {
    inner: op::MazurOperator,
}

#[pymethods]
impl PyMazurOperator {
    #[new]
    #[pyo3(signature = (cols, rows, mode = "canonical"))]
    fn new(cols: usize, rows: usize, mode: &str) -> PyResult<Self> {
        let inner = op::MazurOperator::new(parse_mode(mode)?, cols, rows).map_err(core_err)?;
        Ok(PyMazurOperator { inner })
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    #[getter]
    fn truncated_columns(&self) -> usize {
        self.inner.truncated_columns()
    }

    #[getter]
    fn max_truncation_defect(&self) -> f64 {
        self.inner.max_truncation_defect()
    }

    fn apply(&self, x: BTreeMap<usize, f64>) -> PyResult<BTreeMap<usize, f64>> {
        let y = self.inner.apply(&to_seq(x)?).map_err(core_err)?;
        Ok(from_seq(&y))
    }

    fn apply_adjoint(&self, eta: BTreeMap<usize, f64>) -> PyResult<BTreeMap<usize, f64>> {
        let y = self.inner.apply_adjoint(&to_seq(eta)?).map_err(core_err)?;
        Ok(from_seq(&y))
    }

    /// Dense `rows x n` section; all columns by default.
    #[pyo3(signature = (n = None))]
    fn section(&self, n: Option<usize>) -> PyResult<Vec<Vec<f64>>> {
        let s = self
            .inner
            .finite_section(n.unwrap_or(self.inner.cols()))
            .map_err(core_err)?;
        Ok(from_matrix(&s))
    }

    fn rank(&self, n: usize) -> PyResult<usize> {
        Ok(linalg::rank(
            &self.inner.finite_section(n).map_err(core_err)?,
        ))
    }

    fn __repr__(&self) -> String {
        format!(
            "MazurOperator(cols={}, rows={}, mode='{}')",
            self.inner.cols(),
            self.inner.rows(),
            self.inner.mode()
        )
    }
}

/// Greedy Riesz selection of unit vectors close to `e_1, e_2, ...`.
#[pyclass(name = "RieszSelection", module = "mazur")]
struct PyRieszSelection {
    inner: riesz::RieszSelection,
}

#[pymethods]
impl PyRieszSelection {
    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.inner.indices()
    }

    #[getter]
    fn defects(&self) -> Vec<f64> {
        self.inner.defects().to_vec()
    }

    #[getter]
    fn lambda_data(&self) -> f64 {
        self.inner.lambda_data()
    }

    #[getter]
    fn lambda_bound(&self) -> f64 {
        self.inner.lambda_bound()
    }

    #[getter]
    fn row_frame(&self) -> usize {
        self.inner.row_frame()
    }

    /// Matrix of `T: e_l -> zeta_{k_l}` on the row frame.
    fn t_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        let t = riesz::build_t(&self.inner, self.inner.row_frame()).map_err(core_err)?;
        Ok(from_matrix(&t))
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner.report())
    }

    fn __repr__(&self) -> String {
        format!(
            "RieszSelection(levels={}, lambda_data={})",
            self.inner.levels(),
            self.inner.lambda_data()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (levels, mode = "no-singleton", budget = 1_000_000))]
fn greedy_select(levels: usize, mode: &str, budget: usize) -> PyResult<PyRieszSelection> {
    let inner = riesz::greedy_select(parse_mode(mode)?, levels, budget).map_err(core_err)?;
    Ok(PyRieszSelection { inner })
}

/// `sqrt(sum_{l <= levels} 1 / (4 l^2))`; `None` gives the limit.
#[pyfunction]
#[pyo3(signature = (levels = None))]
fn lambda_bound(levels: Option<usize>) -> f64 {
    match levels {
        Some(l) => riesz::lambda_bound(l),
        None => riesz::lambda_bound_limit(),
    }
}

/// Minimizes `|A x - y|_2^2 + alpha |x|_1`.
#[pyfunction]
#[pyo3(signature = (a, y, alpha, tol = 1e-8, max_iter = 100_000))]
fn tikhonov<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    y: Vec<f64>,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let a = to_matrix(&a)?;
    let cols = a.ncols();
    let p = TikhonovProblem::new(a, &FinSeq::from_dense(&y), alpha).map_err(core_err)?;
    let r = regsolve::tikhonov_solve(&p, tol, max_iter).map_err(core_err)?;
    let d = PyDict::new(py);
    d.set_item("minimizer", r.dense(cols))?;
    d.set_item("objective", r.objective)?;
    d.set_item("subgradient_residual", r.subgradient_residual)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    Ok(d)
}

/// Noise-convergence study on the subspace spanned by a Riesz selection.
/// `x_true` maps selection levels (1-based) to values.
#[pyfunction]
#[pyo3(signature = (x_true, deltas, levels = 10, mode = "no-singleton", rule = "a_priori", constant = 1.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn noise_study<'py>(
    py: Python<'py>,
    x_true: BTreeMap<usize, f64>,
    deltas: Vec<f64>,
    levels: usize,
    mode: &str,
    rule: &str,
    constant: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rule = match rule {
        "a_priori" => ParameterRule::APriori { c: constant },
        "discrepancy" => ParameterRule::Discrepancy { tau: constant },
        other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    };
    let sel = riesz::greedy_select(parse_mode(mode)?, levels, 1_000_000).map_err(core_err)?;
    let op = RestrictedOperator::from_selection(&sel, sel.row_frame()).map_err(core_err)?;
    let x = op.lift(&to_seq(x_true)?).map_err(core_err)?;
    let st =
        regsolve::noise_convergence_study(&op, &x, &deltas, rule, seed, SolverOptions::default())
            .map_err(core_err)?;
    report(py, &st)
}

/// Minimal-l1 dual certificate for the two-atom candidate `s_m e_m + s_n e_n`.
#[pyfunction]
#[pyo3(signature = (m, n, k, signs = "++", rows = 20, mode = "canonical", exact = false))]
#[allow(clippy::too_many_arguments)]
fn minnorm_certificate<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    k: usize,
    signs: &str,
    rows: usize,
    mode: &str,
    exact: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let s: Vec<Sign> = signs
        .chars()
        .map(|c| c.to_string().parse::<Sign>())
        .collect::<Result<_, _>>()
        .map_err(PyValueError::new_err)?;
    let [s0, s1] = s[..] else {
        return Err(PyValueError::new_err(
            "signs must have exactly two characters",
        ));
    };
    let b = op::MazurOperator::new(parse_mode(mode)?, k, rows).map_err(core_err)?;
    let c = certify::minnorm_certificate_with(&b, m, n, (s0, s1), k, arithmetic(exact))
        .map_err(core_err)?;
    report(py, &c)
}

/// Quotient-norm distance between the solution sets of `A x = y` and `A x = y2`.
#[pyfunction]
#[pyo3(signature = (a, y, y2, exact = false))]
fn qdist(a: Vec<Vec<f64>>, y: Vec<f64>, y2: Vec<f64>, exact: bool) -> PyResult<f64> {
    let a = to_matrix(&a)?;
    let z = linalg::null_space(&a);
    certify::qdist_with(
        &a,
        &z,
        &FinSeq::from_dense(&y),
        &FinSeq::from_dense(&y2),
        arithmetic(exact),
    )
    .map_err(core_err)
}

fn tri(v: Option<bool>) -> Tri {
    v.map_or(Tri::Unknown, Tri::from)
}

/// Well-posedness verdict from structural flags (`None` = unknown).
#[pyfunction]
#[pyo3(signature = (closed_range = None, complemented_nullspace = None, range_contains_infdim_closed_subspace = None, strictly_singular = None, compact = None))]
fn classify<'py>(
    py: Python<'py>,
    closed_range: Option<bool>,
    complemented_nullspace: Option<bool>,
    range_contains_infdim_closed_subspace: Option<bool>,
    strictly_singular: Option<bool>,
    compact: Option<bool>,
) -> PyResult<Bound<'py, PyAny>> {
    let f = |v| Flag::new(tri(v), "python");
    let flags = ClassificationFlags {
        closed_range: f(closed_range),
        complemented_nullspace: f(complemented_nullspace),
        range_contains_infdim_closed_subspace: f(range_contains_infdim_closed_subspace),
        strictly_singular: f(strictly_singular),
        compact: f(compact),
    };
    report(py, &certify::classify(&flags).map_err(core_err)?)
}

/// Catalog entries with their verdicts.
#[pyfunction]
fn catalog<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let rows = certify::catalog()
        .into_iter()
        .map(|e| {
            let c = certify::classify(&e.flags).map_err(core_err)?;
            Ok(serde_json::json!({ "name": e.name, "description": e.description, "flags": e.flags, "verdict": c.verdict }))
        })
        .collect::<PyResult<Vec<_>>>()?;
    report(py, &rows)
}

/// Residuals of the factorization identities for `A` and a complement basis `U`.
#[pyfunction]
#[pyo3(signature = (a, u, samples = 100, tol = 1e-9, seed = 0))]
fn factorization_check<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = certify::factorization_check(&to_matrix(&a)?, &to_matrix(&u)?, samples, tol, seed)
        .map_err(core_err)?;
    report(py, &r)
}

#[pymodule]
pub fn mazur(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MazurError", m.py().get_type::<MazurError>())?;
    m.add_class::<PyMazurOperator>()?;
    m.add_class::<PyRieszSelection>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_select, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_bound, m)?)?;
    m.add_function(wrap_pyfunction!(tikhonov, m)?)?;
    m.add_function(wrap_pyfunction!(noise_study, m)?)?;
    m.add_function(wrap_pyfunction!(minnorm_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(qdist, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(factorization_check, m)?)?;
    Ok(())
}
