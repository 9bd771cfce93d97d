//! Python bindings for the `gfswe` solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gfswe_core::cases::{case_names, find_case};
use gfswe_core::quadrature;
use gfswe_core::solver::{convergence as run_convergence, Simulation, SimulationConfig};
use gfswe_core::weno::{WenoConfig, WenoOrder, WenoReconstructor};
use gfswe_core::{numerical_flux, SchemeKind, SolverError, TimeNodes};

fn to_py(e: SolverError) -> PyErr {
    if e.is_solver_failure() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A configured run of one benchmark case.
#[pyclass(unsendable)]
struct Solver {
    sim: Simulation,
}

#[pymethods]
impl Solver {
    #[new]
    #[pyo3(signature = (case, scheme = "gf_wb", order = 5, cells = None, cfl = None, tend = None, dec_nodes = "equispaced"))]
    fn new(
        case: &str,
        scheme: &str,
        order: usize,
        cells: Option<usize>,
        cfl: Option<f64>,
        tend: Option<f64>,
        dec_nodes: &str,
    ) -> PyResult<Self> {
        let spec = find_case(case).map_err(to_py)?;
        let kind: SchemeKind = scheme.parse().map_err(to_py)?;
        let mut cfg = SimulationConfig::new(kind, order, cells.unwrap_or(spec.default_cells));
        if let Some(c) = cfl {
            cfg.cfl = c;
        }
        cfg.t_end = tend;
        cfg.dec_nodes = TimeNodes::parse(dec_nodes).map_err(to_py)?;
        cfg.snapshots = Some(vec![]);
        cfg.validate().map_err(to_py)?;
        Ok(Self {
            sim: Simulation::new(spec, cfg).map_err(to_py)?,
        })
    }

    /// Takes one time step of at most `max_dt`; returns the step size.
    #[pyo3(signature = (max_dt = f64::INFINITY))]
    fn step(&mut self, max_dt: f64) -> PyResult<f64> {
        self.sim.step(max_dt).map_err(to_py)
    }

    /// Runs to the final time (or to steady state) and returns a summary.
    fn run<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.sim.run(|_, _| Ok(())).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("case", s.case)?;
        d.set_item("scheme", s.scheme.to_string())?;
        d.set_item("order", s.order)?;
        d.set_item("n_cells", s.n_cells)?;
        d.set_item("t_final", s.t_final)?;
        d.set_item("steps", s.steps)?;
        d.set_item("converged", s.converged)?;
        d.set_item("residual_norm", s.residual_norm)?;
        d.set_item("l2_h", s.errors.l2_h)?;
        d.set_item("l2_q", s.errors.l2_q)?;
        d.set_item("q_drift", s.errors.q_drift)?;
        d.set_item("k_drift", s.errors.k_drift)?;
        d.set_item("max_perturbation", s.max_perturbation)?;
        Ok(d)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.sim.time()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.sim.x()
    }

    #[getter]
    fn h(&self) -> Vec<f64> {
        self.sim.h().to_vec()
    }

    #[getter]
    fn q(&self) -> Vec<f64> {
        self.sim.q().to_vec()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.sim.b()
    }

    /// Cell averages of the global momentum flux; `None` for the classical scheme.
    fn k(&mut self) -> PyResult<Option<Vec<f64>>> {
        self.sim.k().map_err(to_py)
    }
}

#[pyfunction]
fn list_cases() -> Vec<String> {
    case_names().iter().map(|s| s.to_string()).collect()
}

/// Gauss-Lobatto nodes and weights on `[0, 1]`.
#[pyfunction]
fn gauss_lobatto(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let rule = quadrature::gauss_lobatto(n).map_err(to_py)?;
    Ok((rule.nodes().to_vec(), rule.weights().to_vec()))
}

/// WENO reconstruction at `points` in the central cell of a `order`-wide window of cell averages.
#[pyfunction]
#[pyo3(signature = (window, order = 5, points = vec![0.0, 1.0]))]
fn weno_reconstruct(window: Vec<f64>, order: usize, points: Vec<f64>) -> PyResult<Vec<f64>> {
    let order = WenoOrder::from_order(order).map_err(to_py)?;
    if window.len() != order.order() {
        return Err(PyValueError::new_err(format!(
            "window must hold {} values",
            order.order()
        )));
    }
    let recon = WenoReconstructor::new(WenoConfig::new(order, &points)).map_err(to_py)?;
    Ok(recon.reconstruct(&window, None).0)
}

/// Depth from `q` and `K - R`; returns `(h, branch)`.
#[pyfunction]
#[pyo3(signature = (q, k, r, eta, b, g = 9.812))]
fn recover_depth(q: f64, k: f64, r: f64, eta: f64, b: f64, g: f64) -> PyResult<(f64, String)> {
    let d = numerical_flux::recover_depth(q, k, r, eta, b, g).map_err(to_py)?;
    Ok((d.h, format!("{:?}", d.branch)))
}

/// Mesh study; rows are `(n_cells, l2_h, eoa_h, l2_q, eoa_q)`.
#[pyfunction]
#[pyo3(signature = (case, meshes, scheme = "gf_wb", order = 5))]
#[allow(clippy::type_complexity)]
fn convergence(
    case: &str,
    meshes: Vec<usize>,
    scheme: &str,
    order: usize,
) -> PyResult<Vec<(usize, f64, Option<f64>, f64, Option<f64>)>> {
    let spec = find_case(case).map_err(to_py)?;
    let kind: SchemeKind = scheme.parse().map_err(to_py)?;
    let cfg = SimulationConfig::new(kind, order, meshes.first().copied().unwrap_or(1));
    cfg.validate().map_err(to_py)?;
    let rows = run_convergence(&spec, &cfg, &meshes).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.n_cells, r.l2_h, r.eoa_h, r.l2_q, r.eoa_q))
        .collect())
}

#[pymodule]
#[pyo3(name = "gfswe")]
fn gfswe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Solver>()?;
    m.add_function(wrap_pyfunction!(list_cases, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_lobatto, m)?)?;
    m.add_function(wrap_pyfunction!(weno_reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(recover_depth, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    Ok(())
}
