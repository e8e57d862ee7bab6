//! Python bindings for `wignerwalk`.
//!
//! Ring sizes are plain integers and disorder kinds are the strings
//! `"none"`, `"dd"`, `"dod"` and `"cdod"`. Grids are exposed as `Grid`
//! objects whose `values` are lists of rows indexed `[x][kappa]`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wignerwalk::io::{read_grid_csv as read_csv, render_heatmap, write_grid_csv, DEFAULT_ZOOM};
use wignerwalk::ensemble::DEFAULT_REALIZATIONS;
use wignerwalk::model::{realize, sample_disorder_uncapped};
use wignerwalk::wigner::wigner_at;
use wignerwalk::{
    DisorderKind, EnsembleRunner, EnsembleSpec, Error, PhaseSpaceGrid, RingSize,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::EigenNoConvergence(_) | Error::NotReal { .. } | Error::Realization { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ring(n: usize) -> PyResult<RingSize> {
    RingSize::new(n).map_err(py_err)
}

fn kind(s: &str) -> PyResult<DisorderKind> {
    s.parse().map_err(|_| PyValueError::new_err(format!("unknown disorder kind `{s}`")))
}

fn rows(n: usize, entry: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n).map(|r| (0..n).map(|c| entry(r, c)).collect()).collect()
}

/// Phase-space grid `W[x][kappa]` with its metadata.
#[pyclass(name = "Grid", module = "wignerwalk", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(PhaseSpaceGrid);

#[pymethods]
impl PyGrid {
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.0.n()).map(|x| self.0.row(x).to_vec()).collect()
    }

    /// Source node.
    #[getter]
    fn j(&self) -> usize {
        self.0.meta.j
    }

    /// `"<t>"`, `"avg<T>"` or `"longtime"`.
    #[getter]
    fn time(&self) -> String {
        self.0.meta.time.to_string()
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.meta.kind.to_string()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.meta.delta
    }

    /// Realizations averaged into the grid.
    #[getter]
    fn r(&self) -> usize {
        self.0.meta.r
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.meta.seed
    }

    fn get(&self, x: usize, kappa: usize) -> PyResult<f64> {
        let n = self.0.n();
        if x >= n || kappa >= n {
            return Err(PyValueError::new_err(format!("index ({x}, {kappa}) outside {n} x {n} grid")));
        }
        Ok(self.0.get(x, kappa))
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn max_abs_diff(&self, other: &PyGrid) -> PyResult<f64> {
        if other.0.n() != self.0.n() {
            return Err(PyValueError::new_err("grids differ in size"));
        }
        Ok(self.0.max_abs_diff(&other.0))
    }

    /// `sum_kappa W[x][kappa]` for each `x`.
    fn marginal_position(&self) -> Vec<f64> {
        wignerwalk::marginal_position(&self.0)
    }

    /// `sum_x W[x][kappa]` for each `kappa`.
    fn marginal_momentum(&self) -> Vec<f64> {
        wignerwalk::marginal_momentum(&self.0)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        write_grid_csv(&self.0, &path).map_err(py_err)
    }

    #[pyo3(signature = (path, zoom = DEFAULT_ZOOM))]
    fn render(&self, path: PathBuf, zoom: usize) -> PyResult<()> {
        render_heatmap(&self.0, &path, zoom).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let m = &self.0.meta;
        format!(
            "Grid(n={}, j={}, time={}, kind={}, delta={}, r={}, seed={})",
            m.n, m.j, m.time, m.kind, m.delta, m.r, m.seed
        )
    }
}

/// Eigenpairs of one ring Hamiltonian, eigenvalues ascending.
#[pyclass(name = "EigenSystem", module = "wignerwalk", frozen)]
struct PyEigenSystem(wignerwalk::EigenSystem);

#[pymethods]
impl PyEigenSystem {
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// Rows are nodes, columns eigenvectors.
    #[getter]
    fn vectors(&self) -> Vec<Vec<f64>> {
        rows(self.0.n(), |x, t| self.0.component(x, t))
    }

    /// Degenerate groups as half-open `(start, end)` index ranges.
    #[getter]
    fn groups(&self) -> Vec<(usize, usize)> {
        self.0.groups().iter().map(|g| (g.start, g.end)).collect()
    }

    #[getter]
    fn eps_deg(&self) -> f64 {
        self.0.eps_deg()
    }

    /// Amplitudes `<x|exp(-iHt)|j>`.
    fn propagate(&self, j: usize, t: f64) -> PyResult<Vec<Complex64>> {
        Ok(wignerwalk::propagate(&self.0, j, t).map_err(py_err)?.amps)
    }

    fn transition_probability(&self, j: usize, t: f64) -> PyResult<Vec<f64>> {
        let a = wignerwalk::propagate(&self.0, j, t).map_err(py_err)?;
        Ok(wignerwalk::transition_probability(&a))
    }

    /// Wigner function at time `t` of the walk started at `j`.
    fn wigner(&self, j: usize, t: f64) -> PyResult<PyGrid> {
        wigner_at(&self.0, j, t).map(PyGrid).map_err(py_err)
    }

    /// Exact infinite-time average.
    fn longtime(&self, j: usize) -> PyResult<PyGrid> {
        wignerwalk::wigner_longtime(&self.0, j).map(PyGrid).map_err(py_err)
    }

    /// Trapezoidal average over `[0, t_max]`.
    #[pyo3(signature = (j, t_max, samples = 200))]
    fn time_average(&self, j: usize, t_max: f64, samples: usize) -> PyResult<PyGrid> {
        wignerwalk::finite_time_average(&self.0, j, t_max, samples)
            .map(PyGrid)
            .map_err(py_err)
    }
}

/// Hamiltonian of the clean ring as a list of rows.
#[pyfunction]
fn build_h0(n: usize) -> PyResult<Vec<Vec<f64>>> {
    let h = wignerwalk::build_h0(ring(n)?);
    Ok(rows(h.n(), |r, c| h.get(r, c)))
}

/// Hamiltonian of one disorder realization as a list of rows.
#[pyfunction]
#[pyo3(signature = (n, kind = "dod", delta = 0.5, seed = 0, allow_strong_disorder = false))]
fn hamiltonian(
    n: usize,
    kind: &str,
    delta: f64,
    seed: u64,
    allow_strong_disorder: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let h = realize(ring(n)?, self::kind(kind)?, delta, seed, allow_strong_disorder).map_err(py_err)?;
    Ok(rows(h.n(), |r, c| h.get(r, c)))
}

/// One disorder draw as `(diag, offdiag)`; `offdiag[j]` couples `j-1` and `j`.
#[pyfunction]
#[pyo3(signature = (n, kind, delta, seed, allow_strong_disorder = false))]
fn sample_disorder(
    n: usize,
    kind: &str,
    delta: f64,
    seed: u64,
    allow_strong_disorder: bool,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let (n, kind) = (ring(n)?, self::kind(kind)?);
    let d = if allow_strong_disorder {
        sample_disorder_uncapped(n, kind, delta, seed)
    } else {
        wignerwalk::sample_disorder(n, kind, delta, seed)
    }
    .map_err(py_err)?;
    Ok((d.diag, d.offdiag))
}

/// Eigendecomposition of the ring Hamiltonian for one disorder realization
/// (the clean ring for `kind="none"`).
#[pyfunction]
#[pyo3(signature = (n, kind = "none", delta = 0.0, seed = 0, eps_deg = None, allow_strong_disorder = false))]
fn eigendecompose(
    py: Python<'_>,
    n: usize,
    kind: &str,
    delta: f64,
    seed: u64,
    eps_deg: Option<f64>,
    allow_strong_disorder: bool,
) -> PyResult<PyEigenSystem> {
    let (n, kind) = (ring(n)?, self::kind(kind)?);
    py.detach(|| {
        let h = realize(n, kind, delta, seed, allow_strong_disorder)?;
        wignerwalk::eigendecompose(&h, eps_deg)
    })
    .map(PyEigenSystem)
    .map_err(py_err)
}

/// Closed-form Wigner function of the clean ring.
#[pyfunction]
fn wigner_bloch(n: usize, j: usize, t: f64) -> PyResult<PyGrid> {
    wignerwalk::wigner_bloch(ring(n)?, j, t).map(PyGrid).map_err(py_err)
}

#[pyfunction]
fn read_grid_csv(path: PathBuf) -> PyResult<PyGrid> {
    read_csv(&path).map(PyGrid).map_err(py_err)
}

#[allow(clippy::too_many_arguments)]
fn spec(
    n: usize,
    j: Option<usize>,
    kind: &str,
    delta: f64,
    r: usize,
    seed: u64,
    times: Vec<f64>,
    eps_deg: Option<f64>,
    allow_strong_disorder: bool,
) -> PyResult<EnsembleSpec> {
    let mut spec = EnsembleSpec::new(ring(n)?, j.unwrap_or(n / 2), self::kind(kind)?, delta, r, seed)
        .with_times(times);
    spec.eps_deg = eps_deg;
    spec.uncapped = allow_strong_disorder;
    Ok(spec)
}

/// Ensemble-mean snapshots, one grid per entry of `times`.
#[pyfunction]
#[pyo3(signature = (
    n, times, j = None, kind = "dod", delta = 0.5, r = DEFAULT_REALIZATIONS, seed = 0,
    workers = None, eps_deg = None, allow_strong_disorder = false
))]
#[allow(clippy::too_many_arguments)]
fn ensemble_snapshot(
    py: Python<'_>,
    n: usize,
    times: Vec<f64>,
    j: Option<usize>,
    kind: &str,
    delta: f64,
    r: usize,
    seed: u64,
    workers: Option<usize>,
    eps_deg: Option<f64>,
    allow_strong_disorder: bool,
) -> PyResult<Vec<PyGrid>> {
    let spec = spec(n, j, kind, delta, r, seed, times, eps_deg, allow_strong_disorder)?;
    let res = py
        .detach(|| EnsembleRunner::new().workers(workers).snapshot(&spec))
        .map_err(py_err)?;
    Ok(res.grids.into_iter().map(PyGrid).collect())
}

/// Ensemble mean of exact long-time averages.
#[pyfunction]
#[pyo3(signature = (
    n, j = None, kind = "dod", delta = 0.5, r = DEFAULT_REALIZATIONS, seed = 0,
    workers = None, eps_deg = None, allow_strong_disorder = false
))]
#[allow(clippy::too_many_arguments)]
fn ensemble_longtime(
    py: Python<'_>,
    n: usize,
    j: Option<usize>,
    kind: &str,
    delta: f64,
    r: usize,
    seed: u64,
    workers: Option<usize>,
    eps_deg: Option<f64>,
    allow_strong_disorder: bool,
) -> PyResult<PyGrid> {
    let spec = spec(n, j, kind, delta, r, seed, Vec::new(), eps_deg, allow_strong_disorder)?;
    let res = py
        .detach(|| EnsembleRunner::new().workers(workers).longtime(&spec))
        .map_err(py_err)?;
    let grid = res.longtime().expect("long-time run yields a long-time grid");
    Ok(PyGrid(grid.clone()))
}

/// Largest deviation between averaging over time then disorder and the
/// reverse order, over the same sample times.
#[pyfunction]
#[pyo3(signature = (n = 21, j = None, kind = "dd", delta = 0.25, r = 20, seed = 0, t_max = 100.0, samples = 200))]
#[allow(clippy::too_many_arguments)]
fn verify_interchange(
    py: Python<'_>,
    n: usize,
    j: Option<usize>,
    kind: &str,
    delta: f64,
    r: usize,
    seed: u64,
    t_max: f64,
    samples: usize,
) -> PyResult<f64> {
    let spec = spec(n, j, kind, delta, r, seed, Vec::new(), None, false)?;
    py.detach(|| wignerwalk::verify_interchange(&spec, t_max, samples))
        .map(|report| report.max_dev)
        .map_err(py_err)
}

#[pymodule]
#[pyo3(name = "wignerwalk")]
fn wignerwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyEigenSystem>()?;
    m.add_function(wrap_pyfunction!(build_h0, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(sample_disorder, m)?)?;
    m.add_function(wrap_pyfunction!(eigendecompose, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_bloch, m)?)?;
    m.add_function(wrap_pyfunction!(read_grid_csv, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_longtime, m)?)?;
    m.add_function(wrap_pyfunction!(verify_interchange, m)?)?;
    Ok(())
}
