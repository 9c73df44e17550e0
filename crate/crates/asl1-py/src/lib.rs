//! Python bindings exposing the main types and operations: projections,
//! active-set machinery, the LASSO/logistic oracles, generators and the
//! three solvers.

// The #[pymethods] expansion inserts identity PyErr conversions.
#![allow(clippy::useless_conversion)]

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use asl1::{
    AtomWeights, ObjectiveOracle, ProblemInstance, SolverConfig, SolverResult, SparseMatrix,
};

fn to_py_err(e: asl1::Error) -> PyErr {
    match e {
        asl1::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// φ(x) = ‖Ax − b‖² over a row-sparse matrix.
#[pyclass(name = "LassoProblem", frozen)]
struct PyLassoProblem {
    inner: Arc<asl1::LassoProblem>,
}

#[pymethods]
impl PyLassoProblem {
    /// Build from CSR arrays: row offsets, 0-based column indices, values.
    #[new]
    fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
        b: Vec<f64>,
    ) -> PyResult<Self> {
        let a =
            SparseMatrix::new(rows, cols, row_offsets, col_indices, values).map_err(to_py_err)?;
        Ok(Self {
            inner: Arc::new(asl1::LassoProblem::new(a, b).map_err(to_py_err)?),
        })
    }

    /// Build from dense rows.
    #[staticmethod]
    fn from_dense(rows: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let a = SparseMatrix::from_dense_rows(&rows, cols).map_err(to_py_err)?;
        Ok(Self {
            inner: Arc::new(asl1::LassoProblem::new(a, b).map_err(to_py_err)?),
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.eval(&x))
    }

    fn grad(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.grad(&x))
    }
}

/// φ(x) = Σ log(1 + exp(−yᵢ·xᵀaᵢ)) with labels ±1.
#[pyclass(name = "LogisticProblem", frozen)]
struct PyLogisticProblem {
    inner: Arc<asl1::LogisticProblem>,
}

#[pymethods]
impl PyLogisticProblem {
    #[new]
    fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
        labels: Vec<f64>,
    ) -> PyResult<Self> {
        let a =
            SparseMatrix::new(rows, cols, row_offsets, col_indices, values).map_err(to_py_err)?;
        Ok(Self {
            inner: Arc::new(asl1::LogisticProblem::new(a, labels).map_err(to_py_err)?),
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn samples(&self) -> usize {
        self.inner.samples()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.eval(&x))
    }

    fn grad(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.grad(&x))
    }
}

fn check_dim(expected: usize, got: usize) -> PyResult<()> {
    if expected != got {
        return Err(PyValueError::new_err(format!(
            "dimension mismatch: expected {expected}, got {got}"
        )));
    }
    Ok(())
}

/// Exact Euclidean projection onto the ℓ1-ball of radius tau.
#[pyfunction]
fn project_l1_ball(v: Vec<f64>, tau: f64) -> PyResult<Vec<f64>> {
    asl1::project_l1_ball(&v, tau).map_err(to_py_err)
}

/// Euclidean projection onto the unit simplex.
#[pyfunction]
fn project_simplex(v: Vec<f64>) -> PyResult<Vec<f64>> {
    asl1::project_simplex(&v).map_err(to_py_err)
}

/// Per-coordinate stationarity violations Ψᵢ(x); zero everywhere iff x is
/// stationary.
#[pyfunction]
fn stationarity_violation(x: Vec<f64>, g: Vec<f64>, tau: f64) -> PyResult<Vec<f64>> {
    if x.len() != g.len() {
        return Err(PyValueError::new_err("x and g must have equal length"));
    }
    Ok(asl1::stationarity_violation(&x, &g, tau))
}

/// Active/non-active/steepest index sets at a feasible point.
#[pyfunction]
fn estimate_active_set(
    x: Vec<f64>,
    g: Vec<f64>,
    tau: f64,
    epsilon: f64,
) -> PyResult<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let p = asl1::estimate(&x, &g, tau, epsilon).map_err(to_py_err)?;
    Ok((
        p.active().to_vec(),
        p.nonactive().to_vec(),
        p.steepest().to_vec(),
    ))
}

/// Max relative disagreement between the oracle gradient and central finite
/// differences at x.
#[pyfunction]
fn gradient_check(problem: &Bound<'_, PyAny>, x: Vec<f64>) -> PyResult<f64> {
    if let Ok(p) = problem.downcast::<PyLassoProblem>() {
        return asl1::gradient_check(&*p.get().inner, &x).map_err(to_py_err);
    }
    if let Ok(p) = problem.downcast::<PyLogisticProblem>() {
        return asl1::gradient_check(&*p.get().inner, &x).map_err(to_py_err);
    }
    Err(PyValueError::new_err(
        "problem must be LassoProblem or LogisticProblem",
    ))
}

/// Synthetic LASSO instance; returns (problem, x_star, tau).
#[pyfunction]
fn generate_lasso(
    py: Python<'_>,
    n: usize,
    seed: u64,
) -> PyResult<(Py<PyLassoProblem>, Vec<f64>, f64)> {
    let (problem, xstar, tau) = asl1::data_io::generate_lasso(n, seed).map_err(to_py_err)?;
    let wrapped = Py::new(
        py,
        PyLassoProblem {
            inner: Arc::new(problem),
        },
    )?;
    Ok((wrapped, xstar, tau))
}

/// Synthetic sparse logistic-regression instance.
#[pyfunction]
fn generate_logistic(
    py: Python<'_>,
    l: usize,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyLogisticProblem>> {
    let problem = asl1::data_io::generate_logistic(l, n, seed).map_err(to_py_err)?;
    Py::new(
        py,
        PyLogisticProblem {
            inner: Arc::new(problem),
        },
    )
}

/// Read a LIBSVM-format binary classification dataset.
#[pyfunction]
#[pyo3(signature = (path, n_override=None))]
fn read_libsvm(
    py: Python<'_>,
    path: &str,
    n_override: Option<usize>,
) -> PyResult<Py<PyLogisticProblem>> {
    let problem =
        asl1::data_io::read_libsvm(std::path::Path::new(path), n_override).map_err(to_py_err)?;
    Py::new(
        py,
        PyLogisticProblem {
            inner: Arc::new(problem),
        },
    )
}

fn result_dict(py: Python<'_>, result: &SolverResult, wall_s: f64) -> PyResult<Py<PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("x", result.x.clone())?;
    d.set_item("objective", result.objective)?;
    d.set_item("residual", result.residual)?;
    d.set_item("iterations", result.iterations)?;
    d.set_item("status", result.status.to_string())?;
    d.set_item("sparsity", result.sparsity)?;
    d.set_item("time_s", wall_s)?;
    Ok(d.into())
}

fn run_solver<O: ObjectiveOracle>(
    py: Python<'_>,
    oracle: &O,
    solver: &str,
    tau: f64,
    x0: Option<Vec<f64>>,
    config: SolverConfig,
) -> PyResult<Py<PyDict>> {
    let problem = ProblemInstance::new(oracle, tau).map_err(to_py_err)?;
    let x0 = x0.unwrap_or_else(|| vec![0.0; oracle.dim()]);
    let started = std::time::Instant::now();
    let (result, _trace) = match solver {
        "asl1" => asl1::solve(&problem, &x0, &config).map_err(to_py_err)?,
        "nmspg" => asl1::solve_nmspg(&problem, &x0, &config).map_err(to_py_err)?,
        "afw" => {
            let weights = if x0.iter().all(|v| *v == 0.0) {
                AtomWeights::origin_pair()
            } else {
                return Err(PyValueError::new_err(
                    "afw starts from the origin; pass x0=None or zeros",
                ));
            };
            asl1::solve_afw(&problem, weights, &config).map_err(to_py_err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown solver '{other}'; expected asl1, nmspg or afw"
            )))
        }
    };
    result_dict(py, &result, started.elapsed().as_secs_f64())
}

/// Minimize a problem over the ℓ1-ball of radius tau.
///
/// Returns a dict with keys x, objective, residual, iterations, status,
/// sparsity and time_s.
#[pyfunction]
#[pyo3(signature = (problem, tau, solver="asl1", x0=None, tol=1e-6, max_iter=100_000, time_limit=3600.0, target_objective=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &Bound<'_, PyAny>,
    tau: f64,
    solver: &str,
    x0: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
    time_limit: f64,
    target_objective: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let config = SolverConfig {
        tolerance: tol,
        max_iterations: max_iter,
        time_limit,
        target_objective,
        ..SolverConfig::default()
    };
    if let Ok(p) = problem.downcast::<PyLassoProblem>() {
        let inner = Arc::clone(&p.get().inner);
        return run_solver(py, &*inner, solver, tau, x0, config);
    }
    if let Ok(p) = problem.downcast::<PyLogisticProblem>() {
        let inner = Arc::clone(&p.get().inner);
        return run_solver(py, &*inner, solver, tau, x0, config);
    }
    Err(PyValueError::new_err(
        "problem must be LassoProblem or LogisticProblem",
    ))
}

#[pymodule]
fn asl1_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLassoProblem>()?;
    m.add_class::<PyLogisticProblem>()?;
    m.add_function(wrap_pyfunction!(project_l1_ball, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(stationarity_violation, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_active_set, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    m.add_function(wrap_pyfunction!(generate_lasso, m)?)?;
    m.add_function(wrap_pyfunction!(generate_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(read_libsvm, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
