//! Python bindings: frames, the safety model, synthesis, table IO,
//! switching and closed-loop simulation.

use awe_core::frames::{self, FramePair, Rotation3, SphericalPos, Vec3};
use awe_core::hjsolver::{
    self, brs_query, costate_at, h_fn, l_fn, optimal_control, optimal_disturbance, SafetyGame,
    SolverConfig, NDIM,
};
use awe_core::hybrid_control::{safety_command, switch_eval, ForceHistory, SwitchConfig};
use awe_core::path_guidance::{booth_point, total_arc_length, BoothCurve};
use awe_core::plant::{Control, Disturbance, SafetyState};
use awe_core::sim::{self, RunConfig, SafetyTables};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::PathBuf;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn state(x: [f64; NDIM]) -> SafetyState {
    SafetyState::from_array(x)
}

/// Rotation matrix (row-major nested lists) for a frame pair.
///
/// `kind` is one of "ab", "tau_w", "o_w", "abar_a", "abar_o", "w_p".
#[pyfunction]
fn rotation(kind: &str, angles: Vec<f64>) -> PyResult<[[f64; 3]; 3]> {
    let need = |n: usize| {
        if angles.len() == n {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("{kind} takes {n} angle(s), got {}", angles.len())))
        }
    };
    let pair = match kind {
        "ab" => need(2).map(|_| FramePair::AB { alpha: angles[0], beta: angles[1] }),
        "tau_w" => need(2).map(|_| FramePair::TauW { lambda: angles[0], phi: angles[1] }),
        "o_w" => need(1).map(|_| FramePair::OW { xi: angles[0] }),
        "abar_a" => need(1).map(|_| FramePair::AbarA { mu: angles[0] }),
        "abar_o" => need(2).map(|_| FramePair::AbarO { chi: angles[0], gamma: angles[1] }),
        "w_p" => need(1).map(|_| FramePair::WP { psi0: angles[0] }),
        other => Err(PyValueError::new_err(format!("unknown frame pair '{other}'"))),
    }?;
    Ok(Rotation3::build(pair).map_err(value_err)?.to_rows())
}

#[pyfunction]
fn cart_from_spherical(lambda: f64, phi: f64, h_tau: f64) -> PyResult<[f64; 3]> {
    let p = SphericalPos::new(lambda, phi, h_tau).map_err(value_err)?;
    let v = frames::cart_from_spherical(&p);
    Ok([v.x, v.y, v.z])
}

/// Inverse of `cart_from_spherical`: returns (λ, φ, h_τ).
#[pyfunction]
fn spherical_from_cart(p: [f64; 3]) -> PyResult<(f64, f64, f64)> {
    let s = frames::spherical_from_cart(&Vec3::new(p[0], p[1], p[2])).map_err(value_err)?;
    Ok((s.lambda, s.phi, s.h_tau))
}

/// Great-circle distance and departure direction (north, east).
#[pyfunction]
fn geodesic(from: (f64, f64), to: (f64, f64), radius: f64) -> PyResult<(f64, [f64; 2])> {
    let g = frames::geodesic(from, to, radius).map_err(value_err)?;
    Ok((g.distance, [g.direction.x, g.direction.y]))
}

/// Point and tangent of the figure-eight at parameter `s`, W frame.
#[pyfunction]
#[pyo3(signature = (s, h_tau, a_booth=120.0, b_booth=200.0, psi0=std::f64::consts::FRAC_PI_6))]
fn booth(s: f64, h_tau: f64, a_booth: f64, b_booth: f64, psi0: f64) -> ([f64; 3], [f64; 3]) {
    let curve = BoothCurve { a_booth, b_booth, psi0, ..BoothCurve::default() };
    let b = booth_point(&curve, s, h_tau);
    ([b.point.x, b.point.y, b.point.z], [b.tangent.x, b.tangent.y, b.tangent.z])
}

#[pyfunction]
#[pyo3(signature = (h_tau, a_booth=120.0, b_booth=200.0, psi0=std::f64::consts::FRAC_PI_6))]
fn arc_length(h_tau: f64, a_booth: f64, b_booth: f64, psi0: f64) -> f64 {
    let curve = BoothCurve { a_booth, b_booth, psi0, ..BoothCurve::default() };
    total_arc_length(&curve, h_tau)
}

/// Moving-average switching flags (S1, S2) for a force history.
#[pyfunction]
#[pyo3(signature = (times, forces, f_rupture=1870.0, window=0.2))]
fn switch_flags(times: Vec<f64>, forces: Vec<f64>, f_rupture: f64, window: f64) -> PyResult<(bool, bool)> {
    if times.len() != forces.len() {
        return Err(PyValueError::new_err("times and forces differ in length"));
    }
    let cfg = SwitchConfig { f_rupture, window, ..SwitchConfig::default() };
    let mut h = ForceHistory::new(window);
    for (t, f) in times.iter().zip(&forces) {
        h.push(*t, *f);
    }
    switch_eval(&cfg, &h).map_err(value_err)
}

/// Run configuration; every section defaults when left out.
#[pyclass(name = "Config", module = "awe_safety", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(text) => RunConfig::from_toml(text).map_err(value_err)?,
            None => RunConfig::default(),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: RunConfig::load(&path).map_err(value_err)? })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.sim.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.sim.seed = seed;
    }

    #[getter]
    fn f_rupture(&self) -> f64 {
        self.inner.switch.f_rupture
    }

    fn __repr__(&self) -> String {
        format!("Config(seed={}, hybrid={})", self.inner.sim.seed, self.inner.sim.hybrid)
    }
}

/// The 7-state synthesis model built from a configuration.
#[pyclass(name = "SafetyModel", module = "awe_safety")]
struct PySafetyModel {
    game: SafetyGame,
}

#[pymethods]
impl PySafetyModel {
    #[new]
    #[pyo3(signature = (config=None))]
    fn new(config: Option<PyConfig>) -> Self {
        let cfg = config.map(|c| c.inner).unwrap_or_default();
        Self { game: SafetyGame::new(cfg.safety_model(), cfg.game_config()) }
    }

    /// Full 7-state derivative f(x, u, d).
    fn f(&self, x: [f64; NDIM], alpha: f64, mu: f64, d_delta_t: f64, d_turb: [f64; 3]) -> PyResult<[f64; NDIM]> {
        let d = Disturbance { d_delta_t, d_turb: Vec3::from(d_turb) };
        self.game.model.f(&state(x), &Control { alpha, mu }, &d).map_err(value_err)
    }

    /// Control-affected rates (v̇, χ̇, γ̇).
    fn f_hat(&self, x: [f64; NDIM], alpha: f64, mu: f64) -> PyResult<[f64; 3]> {
        self.game.model.f_hat(&state(x), &Control { alpha, mu }).map_err(value_err)
    }

    /// Remaining terms of the derivative, disturbance included.
    fn f_c(&self, x: [f64; NDIM], d_delta_t: f64, d_turb: [f64; 3]) -> PyResult<[f64; NDIM]> {
        let d = Disturbance { d_delta_t, d_turb: Vec3::from(d_turb) };
        self.game.model.f_c(&state(x), &d).map_err(value_err)
    }

    /// Normalized avoid function (positive above the rupture force).
    fn h(&self, x: [f64; NDIM]) -> PyResult<f64> {
        h_fn(&self.game.model, &self.game.cfg, &state(x)).map_err(value_err)
    }

    /// Normalized reach function (non-positive when aligned).
    fn l(&self, x: [f64; NDIM]) -> PyResult<f64> {
        l_fn(&self.game.model, &self.game.cfg, &state(x)).map_err(value_err)
    }

    /// Straight-tether force magnitude at the aircraft (N).
    fn tether_force(&self, x: [f64; NDIM]) -> PyResult<f64> {
        Ok(self.game.model.evaluate(&state(x)).map_err(value_err)?.f_t_o.norm())
    }

    /// Minimizing control for costate `q`: (α, μ).
    fn optimal_control(&self, x: [f64; NDIM], q: [f64; NDIM]) -> PyResult<(f64, f64)> {
        let p = self.game.model.evaluate(&state(x)).map_err(value_err)?;
        let u = optimal_control(&p, &q, &self.game.controls);
        Ok((u.alpha, u.mu))
    }

    /// Maximizing disturbance for costate `q`: (d_Δt, d_turb).
    fn optimal_disturbance(&self, x: [f64; NDIM], q: [f64; NDIM]) -> PyResult<(f64, [f64; 3])> {
        let p = self.game.model.evaluate(&state(x)).map_err(value_err)?;
        let d = optimal_disturbance(&p, &q, &self.game.cfg.disturbance);
        Ok((d.d_delta_t, [d.d_turb.x, d.d_turb.y, d.d_turb.z]))
    }
}

/// Value function over the 7-axis grid.
#[pyclass(name = "ValueFunction", module = "awe_safety", from_py_object)]
#[derive(Clone)]
struct PyValueFunction {
    inner: hjsolver::GriddedValueFunction,
}

#[pymethods]
impl PyValueFunction {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: hjsolver::load_value(&path).map_err(|e| PyIOError::new_err(e.to_string()))? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        hjsolver::save_value(&path, &self.inner).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// (value, inside) by multilinear interpolation.
    fn query(&self, x: [f64; NDIM]) -> PyResult<(f64, bool)> {
        brs_query(&self.inner, &x).map_err(value_err)
    }

    fn costate(&self, x: [f64; NDIM]) -> PyResult<[f64; NDIM]> {
        Ok(costate_at(&self.inner, &x).map_err(value_err)?.q)
    }

    /// Axis sample counts in (s, σ, h_τ, v_a, χ_a, γ_a, Δ_t) order.
    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.grid.axes.iter().map(|a| a.n).collect()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    /// Flat row-major values, last axis fastest.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }
}

/// Per-node safety controls.
#[pyclass(name = "ControlTable", module = "awe_safety", from_py_object)]
#[derive(Clone)]
struct PyControlTable {
    inner: hjsolver::ControlTable,
}

#[pymethods]
impl PyControlTable {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: hjsolver::load_controls(&path).map_err(|e| PyIOError::new_err(e.to_string()))? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        hjsolver::save_controls(&path, &self.inner).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Nearest-node control (α, μ).
    fn lookup(&self, x: [f64; NDIM]) -> PyResult<(f64, f64)> {
        let u = safety_command(&self.inner, &x).map_err(value_err)?;
        Ok((u.alpha, u.mu))
    }

    fn __len__(&self) -> usize {
        self.inner.alpha.len()
    }
}

/// Solve the reach-avoid game on the configured grid.
#[pyfunction]
#[pyo3(signature = (config=None, horizon=None))]
fn synthesize(py: Python<'_>, config: Option<PyConfig>, horizon: Option<f64>) -> PyResult<(PyValueFunction, PyControlTable)> {
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let mut solver: SolverConfig = cfg.synthesis.solver;
    if let Some(h) = horizon {
        solver.horizon = h;
    }
    let sol = py.detach(|| {
        let grid = cfg.synthesis.grid.grid()?;
        let game = SafetyGame::new(cfg.safety_model(), cfg.game_config()).with_grid(&grid)?;
        hjsolver::solve_brs(&game, &grid, &solver, None)
    });
    let sol = sol.map_err(runtime_err)?;
    Ok((PyValueFunction { inner: sol.value }, PyControlTable { inner: sol.controls }))
}

/// Run one closed-loop episode. Returns a dict with the outcome, summary
/// figures, the power report and the trace as CSV text.
#[pyfunction]
#[pyo3(signature = (config=None, value=None, controls=None))]
fn simulate<'py>(
    py: Python<'py>,
    config: Option<PyConfig>,
    value: Option<PyValueFunction>,
    controls: Option<PyControlTable>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = config.map(|c| c.inner).unwrap_or_default();
    let tables = match (value, controls) {
        (Some(v), Some(c)) => Some(SafetyTables { value: v.inner, controls: c.inner }),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("value and controls go together")),
    };
    cfg.sim.hybrid |= tables.is_some();
    let res = py.detach(|| sim::simulate(&cfg, tables.as_ref())).map_err(runtime_err)?;
    let mut csv = Vec::new();
    sim::write_trace(&mut csv, &res.trace).map_err(runtime_err)?;
    let report = PyDict::new(py);
    let r = &res.report;
    for (k, v) in [
        ("p_mech_mean", r.p_mech_mean),
        ("p_mech_min", r.p_mech_min),
        ("p_mech_max", r.p_mech_max),
        ("energy", r.energy),
        ("duration", r.duration),
        ("c_l", r.c_l),
        ("c_d", r.c_d),
        ("c_d_tether", r.c_d_tether),
        ("zeta", r.zeta),
        ("wind_speed", r.wind_speed),
    ] {
        report.set_item(k, v)?;
    }
    report.set_item("e", r.e)?;
    report.set_item("p_bound", r.p_bound)?;
    let out = PyDict::new(py);
    out.set_item("outcome", res.outcome.as_str())?;
    out.set_item("reason", res.reason)?;
    out.set_item("duration", res.duration)?;
    out.set_item("cycles", res.cycles)?;
    out.set_item("max_force", res.max_force)?;
    out.set_item("safety_fraction", res.safety_fraction)?;
    out.set_item("power", report)?;
    out.set_item("trace_csv", String::from_utf8(csv).map_err(runtime_err)?)?;
    Ok(out)
}

#[pymodule]
fn awe_safety(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(rotation, m)?)?;
    m.add_function(wrap_pyfunction!(cart_from_spherical, m)?)?;
    m.add_function(wrap_pyfunction!(spherical_from_cart, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(booth, m)?)?;
    m.add_function(wrap_pyfunction!(arc_length, m)?)?;
    m.add_function(wrap_pyfunction!(switch_flags, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySafetyModel>()?;
    m.add_class::<PyValueFunction>()?;
    m.add_class::<PyControlTable>()?;
    m.add("NDIM", NDIM)?;
    Ok(())
}
