//! Python bindings: generate or build a quadratic, run a method, inspect and
//! verify the certified trace.

use gapcert::diagnostics::{theorem_iterations, CheckStatus};
use gapcert::{
    check_certificate, run_method, CertifiedTrace, GenSpec, Method, MethodKind, PlaneVariant,
    ProblemFile, QuadraticProblem, RunOptions, Schedule, SymMatrix, TraceRow, Vector,
};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: gapcert::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Problem", module = "gapcert_py", frozen)]
pub struct PyProblem {
    inner: QuadraticProblem,
}

#[pymethods]
impl PyProblem {
    /// `a` is a dense symmetric PSD matrix given as a list of rows.
    #[new]
    fn new(a: Vec<Vec<f64>>, b: Vec<f64>, x0: Vec<f64>) -> PyResult<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let m = SymMatrix::from_row_major(n, a.into_iter().flatten().collect()).map_err(err)?;
        let inner = QuadraticProblem::new(m, Vector::new(b), Vector::new(x0)).map_err(err)?;
        Ok(PyProblem { inner })
    }

    /// From a generator spec such as `"n=50,profile=geometric,kappa=100,seed=1"`.
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        let spec: GenSpec = spec.parse().map_err(err)?;
        Ok(PyProblem { inner: spec.generate().map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyProblem { inner: file.into_problem().map_err(err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&ProblemFile::from_problem(&self.inner)).expect("problem serializes")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter(L)]
    fn l(&self) -> f64 {
        self.inner.l()
    }

    #[getter]
    fn f_star(&self) -> f64 {
        self.inner.f_star()
    }

    #[getter]
    fn x0(&self) -> Vec<f64> {
        self.inner.x0().as_slice().to_vec()
    }

    #[getter]
    fn x_star(&self) -> Vec<f64> {
        self.inner.x_star().as_slice().to_vec()
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        gapcert::problem::quad_eval(&self.inner, &Vector::new(x)).map_err(err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = gapcert::problem::quad_grad(&self.inner, &Vector::new(x)).map_err(err)?;
        Ok(g.as_slice().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Problem(n={}, mu={:e}, L={:e})", self.inner.n(), self.inner.mu(), self.inner.l())
    }
}

#[pyclass(name = "Trace", module = "gapcert_py", frozen)]
pub struct PyTrace {
    inner: CertifiedTrace,
}

fn column_value(r: &TraceRow, name: &str) -> PyResult<Option<f64>> {
    Ok(match name {
        "k" | "iter" => Some(r.k as f64),
        "a" => r.a,
        "A" => r.big_a,
        "a_prime" => r.a_prime,
        "f_x" => Some(r.f_x),
        "f_y" => Some(r.f_y),
        "grad_norm" => Some(r.grad_norm),
        "U" => Some(r.upper),
        "L_anchored" | "lower" => r.lower,
        "G_anchored" | "gap" => r.gap,
        "Phi" => r.potential,
        "coupling_residual" => r.coupling_residual,
        other => return Err(PyKeyError::new_err(format!("unknown column {other:?}"))),
    })
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.meta.method.name()
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.name()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn final_gap(&self) -> Option<f64> {
        self.inner.final_gap()
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    /// One column across all rows; `None` where the row has no value.
    fn column(&self, name: &str) -> PyResult<Vec<Option<f64>>> {
        self.inner.rows.iter().map(|r| column_value(r, name)).collect()
    }

    /// Iterate `y_k` of row `k`, if vectors were recorded.
    fn y(&self, k: usize) -> PyResult<Option<Vec<f64>>> {
        let row = self.inner.rows.get(k).ok_or_else(|| PyKeyError::new_err(format!("no row {k}")))?;
        Ok(row.vectors.as_ref().map(|v| v.y.as_slice().to_vec()))
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("trace serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyTrace { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(method={}, iterations={}, status={})",
            self.inner.meta.method.name(),
            self.inner.iterations(),
            self.inner.status.name()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (problem, method="nesterov", plane_variant="span", iters=None, grad_tol=1e-12, anchored=true, paranoid=None, vectors=None))]
#[allow(clippy::too_many_arguments)]
fn run(
    problem: &PyProblem,
    method: &str,
    plane_variant: &str,
    iters: Option<usize>,
    grad_tol: f64,
    anchored: bool,
    paranoid: Option<bool>,
    vectors: Option<bool>,
) -> PyResult<PyTrace> {
    let m: Method = method.parse().map_err(err)?;
    let v: PlaneVariant = plane_variant.parse().map_err(err)?;
    let kind = MethodKind::new(m).with_plane_variant(v);
    let p = &problem.inner;
    let mut opts = RunOptions::for_problem(p).with_grad_tol(grad_tol).with_anchored(anchored);
    if let Some(k) = iters {
        opts = opts.with_iters(k);
    }
    if let Some(on) = paranoid {
        opts = opts.with_paranoid(on);
    }
    if let Some(on) = vectors {
        opts = opts.with_vectors(on);
    }
    let inner = run_method(&kind, p, &opts).map_err(err)?;
    Ok(PyTrace { inner })
}

/// Replays the certificate checks; returns `{"pass": bool, "checks": [...]}`.
#[pyfunction]
fn verify<'py>(py: Python<'py>, trace: &PyTrace) -> PyResult<Bound<'py, PyDict>> {
    let report = check_certificate(&trace.inner).map_err(err)?;
    let checks = report
        .checks
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("check", &c.check)?;
            d.set_item("pass", c.pass)?;
            d.set_item("worst", c.worst)?;
            d.set_item("at_iter", c.at_iter)?;
            d.set_item("tolerance", c.tolerance)?;
            d.set_item(
                "status",
                match c.status {
                    CheckStatus::Checked => "checked",
                    CheckStatus::NotClaimed => "not_claimed",
                    CheckStatus::Skipped => "skipped",
                },
            )?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let out = PyDict::new(py);
    out.set_item("pass", report.pass)?;
    out.set_item("checks", checks)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(name = "theorem_bound", signature = (k, mu, L, r2))]
#[allow(non_snake_case)]
fn py_theorem_bound(k: usize, mu: f64, L: f64, r2: f64) -> PyResult<f64> {
    gapcert::theorem_bound(k, mu, L, r2).map_err(err)
}

#[pyfunction]
#[pyo3(name = "theorem_iterations", signature = (mu, L, r2, target))]
#[allow(non_snake_case)]
fn py_theorem_iterations(mu: f64, L: f64, r2: f64, target: f64) -> PyResult<usize> {
    theorem_iterations(mu, L, r2, target).map_err(err)
}

/// First `count` weights as `(a_k, A_k)` pairs.
#[pyfunction]
#[pyo3(signature = (mu, L, count))]
#[allow(non_snake_case)]
fn schedule(mu: f64, L: f64, count: usize) -> PyResult<Vec<(f64, f64)>> {
    let mut s = Schedule::new(mu, L).map_err(err)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push((s.a(), s.cumulative()));
        s = s.advance();
    }
    Ok(out)
}

#[pymodule]
fn gapcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(py_theorem_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_theorem_iterations, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    Ok(())
}
