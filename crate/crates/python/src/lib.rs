//! Python bindings: closed forms, built-in problems, optimization and the
//! verification harness. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use porotopo::analytic::{self, InterfaceLayout1D, InterfaceOptimum};
use porotopo::benchmarks::{benchmark, BENCHMARK_NAMES};
use porotopo::config::{reference_config, ModelConfig, RunConfig};
use porotopo::models::total_dissipation_k;
use porotopo::primal::{mass_balance, solve_flow};
use porotopo::topopt::{gray_fraction, interface_radius, interpolate_permeability, optimize};
use porotopo::verify::{run_suite, Suite};
use porotopo::{DragLaw, Driving, MaterialModel};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn optimum_dict<'py>(py: Python<'py>, o: &InterfaceOptimum) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("xi_hat", o.xi_hat)?;
    d.set_item("xi_hat_outer", o.xi_hat_outer)?;
    d.set_item("value_inner", o.value_inner)?;
    d.set_item("value_outer", o.value_outer)?;
    d.set_item("verdict", o.verdict.label())?;
    Ok(d)
}

/// Optimal annulus interface for high-k fraction `gamma`.
#[pyfunction]
#[pyo3(signature = (gamma, r_i, r_o, kl = 1.0, kh = 10.0))]
fn optimal_interface_2d(
    py: Python<'_>,
    gamma: f64,
    r_i: f64,
    r_o: f64,
    kl: f64,
    kh: f64,
) -> PyResult<Bound<'_, PyDict>> {
    optimum_dict(
        py,
        &analytic::optimal_interface_2d(gamma, r_i, r_o, kl, kh).map_err(err)?,
    )
}

/// Optimal shell interface (outer radius 1) for high-k fraction `gamma`.
#[pyfunction]
#[pyo3(signature = (gamma, r_i, kl = 1.0, kh = 10.0))]
fn optimal_interface_3d(
    py: Python<'_>,
    gamma: f64,
    r_i: f64,
    kl: f64,
    kh: f64,
) -> PyResult<Bound<'_, PyDict>> {
    optimum_dict(
        py,
        &analytic::optimal_interface_3d(gamma, r_i, kl, kh).map_err(err)?,
    )
}

#[pyfunction]
fn lemma_gap(gamma: f64, r_i: f64) -> PyResult<f64> {
    analytic::lemma_gap(gamma, r_i).map_err(err)
}

/// Closed-form two-material channel: returns the velocity constant, the
/// dissipation and the pressure at the requested points.
#[pyfunction]
#[pyo3(signature = (law, xi, k1, k2, driving = "pressure", beta_b = 0.0, beta_f = 0.0, points = Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn solve_1d<'py>(
    py: Python<'py>,
    law: &str,
    xi: f64,
    k1: f64,
    k2: f64,
    driving: &str,
    beta_b: f64,
    beta_f: f64,
    points: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let model = MaterialModel::new(law.parse::<DragLaw>().map_err(err)?, 1.0, beta_b, beta_f)
        .map_err(err)?;
    let driving: Driving = driving.parse().map_err(err)?;
    let sol = analytic::solve_1d(
        &model,
        driving,
        &InterfaceLayout1D::new(xi, k1, k2).map_err(err)?,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("constant", sol.constant)?;
    d.set_item("phi", sol.phi)?;
    d.set_item(
        "pressure",
        points
            .iter()
            .map(|&x| sol.pressure_at(x))
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pyfunction]
fn benchmark_names() -> Vec<&'static str> {
    BENCHMARK_NAMES.to_vec()
}

#[pyfunction]
fn reference_configuration() -> String {
    reference_config()
}

fn builtin_config(
    name: &str,
    resolution: Option<usize>,
    law: Option<&str>,
    beta_b: f64,
    beta_f: f64,
    gamma: Option<f64>,
) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::builtin(name);
    cfg.problem.resolution = resolution;
    if let Some(law) = law {
        cfg.model = Some(ModelConfig {
            law: law.parse().map_err(err)?,
            mu0: 1.0,
            beta_b,
            beta_f,
        });
    }
    cfg.design.gamma = gamma;
    Ok(cfg)
}

/// Flow through a built-in problem at its uniform initial design.
#[pyfunction]
#[pyo3(signature = (name, resolution = None, law = None, beta_b = 0.0, beta_f = 0.0))]
fn solve_builtin<'py>(
    py: Python<'py>,
    name: &str,
    resolution: Option<usize>,
    law: Option<&str>,
    beta_b: f64,
    beta_f: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let run = builtin_config(name, resolution, law, beta_b, beta_f, None)?
        .resolve()
        .map_err(err)?;
    let p = &run.problem;
    let k: Vec<f64> = run
        .initial
        .iter()
        .map(|&r| interpolate_permeability(r, p.kl, p.kh, p.penal))
        .collect();
    let (flow, phi) = py
        .detach(|| {
            let flow = solve_flow(&p.grid, &k, &run.model, &p.bcs, &p.source, &p.solver)?;
            let phi = total_dissipation_k(&p.grid, &k, &run.model, &flow)?;
            Ok::<_, porotopo::Error>((flow, phi))
        })
        .map_err(err)?;
    let (out, src) = mass_balance(&p.grid, &flow, &p.source);
    let d = PyDict::new(py);
    d.set_item("phi", phi)?;
    d.set_item("net_outflow", out)?;
    d.set_item("source_total", src)?;
    d.set_item("max_speed", flow.max_speed(&p.grid))?;
    d.set_item("picard_iterations", flow.picard_iterations)?;
    d.set_item("dims", p.grid.dims())?;
    d.set_item("pressure", flow.pressure)?;
    Ok(d)
}

/// Runs the design optimization on a built-in problem.
#[pyfunction]
#[pyo3(signature = (name, resolution = None, law = None, beta_b = 0.0, beta_f = 0.0, gamma = None))]
fn optimize_builtin<'py>(
    py: Python<'py>,
    name: &str,
    resolution: Option<usize>,
    law: Option<&str>,
    beta_b: f64,
    beta_f: f64,
    gamma: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let run = builtin_config(name, resolution, law, beta_b, beta_f, gamma)?
        .resolve()
        .map_err(err)?;
    let state = py
        .detach(|| optimize(&run.problem, &run.initial, &run.model))
        .map_err(err)?;
    let grid = &run.problem.grid;
    let d = PyDict::new(py);
    d.set_item("phi", state.phi())?;
    d.set_item("phi_history", &state.phi_history)?;
    d.set_item("volume_history", &state.volume_history)?;
    d.set_item("iterations", state.iteration)?;
    d.set_item("converged", state.converged)?;
    d.set_item("max_speed", state.flow.max_speed(grid))?;
    d.set_item(
        "gray_fraction",
        gray_fraction(grid, &state.physical, 0.05, 0.95),
    )?;
    d.set_item("dims", grid.dims())?;
    d.set_item("rho_physical", &state.physical)?;
    let interface = if grid.n_axes() == 1 {
        interface_radius(grid, &state.physical)
    } else {
        None
    };
    d.set_item("interface", interface)?;
    d.set_item("oracle_interface", run.oracle_interface)?;
    d.set_item("cell_width", grid.min_cell_width())?;
    Ok(d)
}

/// Runs a verification suite; returns (passed, csv report).
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 42, samples = 10_000))]
fn verify(py: Python<'_>, suite: &str, seed: u64, samples: usize) -> PyResult<(bool, String)> {
    let suite: Suite = suite.parse().map_err(err)?;
    let report = py.detach(|| run_suite(suite, seed, samples)).map_err(err)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(err)?;
    Ok((report.passed(), String::from_utf8(csv).map_err(err)?))
}

/// Default resolution of a built-in problem.
#[pyfunction]
fn default_resolution(name: &str) -> PyResult<usize> {
    porotopo::benchmarks::default_resolution(name)
        .ok_or_else(|| err(format!("unknown benchmark '{name}'")))
}

/// Description of a built-in problem.
#[pyfunction]
fn describe_benchmark(name: &str) -> PyResult<String> {
    Ok(benchmark(name, None).map_err(err)?.description.to_string())
}

#[pymodule]
fn porotopo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(optimal_interface_2d, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_interface_3d, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_gap, m)?)?;
    m.add_function(wrap_pyfunction!(solve_1d, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_names, m)?)?;
    m.add_function(wrap_pyfunction!(default_resolution, m)?)?;
    m.add_function(wrap_pyfunction!(describe_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(reference_configuration, m)?)?;
    m.add_function(wrap_pyfunction!(solve_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
