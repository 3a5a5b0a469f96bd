//! Explicit level-set time stepping of the reach-avoid QVI.

use super::game::Game;
use super::grid::{costate_at, ControlTable, Grid7, GriddedValueFunction, Index, NDIM};
use super::SolveError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Nodes per parallel work item.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Backward horizon T (s).
    pub horizon: f64,
    pub cfl: f64,
    /// Upper bound on the time step (s).
    pub dt_max: f64,
    /// Second-order ENO spatial differences.
    #[serde(default)]
    pub eno2: bool,
    /// Second-order TVD Runge-Kutta in time.
    #[serde(default)]
    pub tvd_rk2: bool,
    /// Fixed per-axis dissipation instead of the sampled bound.
    #[serde(default)]
    pub dissipation: Option<[f64; NDIM]>,
    /// Local Lax-Friedrichs: dissipation from the speed bounds of each node
    /// and its axis neighbours instead of the grid-wide maximum.
    #[serde(default)]
    pub local_lf: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { horizon: 0.1, cfl: 0.5, dt_max: 0.01, eno2: false, tvd_rk2: false, dissipation: None, local_lf: false }
    }
}

/// Lax-Friedrichs dissipation per axis and the matching stable step.
#[derive(Debug, Clone, PartialEq)]
pub struct LfBounds {
    pub alpha: [f64; NDIM],
    pub dt: f64,
    /// Per-node speed bounds when local dissipation is enabled.
    pub local: Option<Vec<[f64; NDIM]>>,
}

/// Map every node through `f`, in parallel, reporting the lowest failing index.
pub(crate) fn par_nodes<T, F>(len: usize, f: F) -> Result<Vec<T>, SolveError>
where
    T: Send,
    F: Fn(usize) -> Result<T, SolveError> + Sync,
{
    let chunks: Vec<Result<Vec<T>, SolveError>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).collect())
        .collect();
    let mut out = Vec::with_capacity(len);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn node_of<G: Game>(game: &G, grid: &Grid7, k: usize) -> Result<(Index, G::Node), SolveError> {
    let idx = grid.multi(k);
    let node = game.node(Some(&idx), &grid.point(&idx)).map_err(|e| e.at(k))?;
    Ok((idx, node))
}

/// Avoid and target functions at every node.
pub fn terminal_fields<G: Game>(game: &G, grid: &Grid7) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let hl = par_nodes(grid.len(), |k| {
        let (_, n) = node_of(game, grid, k)?;
        Ok((game.avoid(&n), game.target(&n)))
    })?;
    Ok(hl.into_iter().unzip())
}

/// V(x, 0) = max{h(x), l(x)}.
pub fn terminal_value<G: Game>(game: &G, grid: &Grid7) -> Result<GriddedValueFunction, SolveError> {
    let (h, l) = terminal_fields(game, grid)?;
    let values = h.iter().zip(&l).map(|(a, b)| a.max(*b)).collect();
    Ok(GriddedValueFunction { grid: *grid, values, t: 0.0 })
}

/// Global dissipation from the per-node speed bounds and the CFL step.
pub fn lf_bounds<G: Game>(game: &G, grid: &Grid7, cfg: &SolverConfig) -> Result<LfBounds, SolveError> {
    let (alpha, local) = match cfg.dissipation {
        Some(a) => (a, None),
        None => {
            let per_node = par_nodes(grid.len(), |k| {
                let (_, n) = node_of(game, grid, k)?;
                Ok(game.speed_bound(&n))
            })?;
            let mut a = [0.0f64; NDIM];
            for b in &per_node {
                for d in 0..NDIM {
                    a[d] = a[d].max(b[d]);
                }
            }
            (a, cfg.local_lf.then_some(per_node))
        }
    };
    Ok(LfBounds { alpha, dt: cfl_step(&alpha, grid, cfg), local })
}

fn cfl_step(alpha: &[f64; NDIM], grid: &Grid7, cfg: &SolverConfig) -> f64 {
    let rate: f64 = (0..NDIM)
        .filter(|&d| !grid.axes[d].is_frozen())
        .map(|d| alpha[d] / grid.axes[d].spacing())
        .sum();
    if rate > 0.0 {
        (cfg.cfl / rate).min(cfg.dt_max)
    } else {
        cfg.dt_max
    }
}

/// Largest speed bound along axis `d` over node `k` and its two neighbours.
fn local_alpha(bounds: &[[f64; NDIM]], grid: &Grid7, strides: &[usize; NDIM], k: usize, idx: &Index, d: usize) -> f64 {
    let a = &grid.axes[d];
    let n = a.n as isize;
    let base = k - idx[d] * strides[d];
    let mut m = bounds[k][d];
    for j in [idx[d] as isize - 1, idx[d] as isize + 1] {
        let j = if a.periodic {
            j.rem_euclid(n)
        } else if (0..n).contains(&j) {
            j
        } else {
            continue;
        };
        m = m.max(bounds[base + j as usize * strides[d]][d]);
    }
    m
}

/// Left and right differences along one axis.
fn one_sided(values: &[f64], grid: &Grid7, strides: &[usize; NDIM], k: usize, idx: &Index, d: usize, eno2: bool) -> (f64, f64) {
    let a = &grid.axes[d];
    if a.is_frozen() {
        return (0.0, 0.0);
    }
    let h = a.spacing();
    let n = a.n as isize;
    let i = idx[d] as isize;
    let at = |o: isize| -> Option<f64> {
        let j = i + o;
        let j = if a.periodic {
            j.rem_euclid(n)
        } else if (0..n).contains(&j) {
            j
        } else {
            return None;
        };
        Some(values[k - idx[d] * strides[d] + j as usize * strides[d]])
    };
    let v0 = values[k];
    let (vm, vp) = (at(-1), at(1));
    let (pm, pp) = match (vm, vp) {
        (Some(m), Some(p)) => ((v0 - m) / h, (p - v0) / h),
        (None, Some(p)) => ((p - v0) / h, (p - v0) / h),
        (Some(m), None) => ((v0 - m) / h, (v0 - m) / h),
        (None, None) => (0.0, 0.0),
    };
    if !eno2 {
        return (pm, pp);
    }
    let (Some(m1), Some(p1)) = (vm, vp) else { return (pm, pp) };
    let d2_0 = (p1 - 2.0 * v0 + m1) / (h * h);
    let pick = |a: f64, b: f64| if a.abs() <= b.abs() { a } else { b };
    let pm = match at(-2) {
        Some(m2) => pm + 0.5 * h * pick((v0 - 2.0 * m1 + m2) / (h * h), d2_0),
        None => pm,
    };
    let pp = match at(2) {
        Some(p2) => pp - 0.5 * h * pick(d2_0, (p2 - 2.0 * p1 + v0) / (h * h)),
        None => pp,
    };
    (pm, pp)
}

fn euler_project<G: Game>(
    game: &G,
    grid: &Grid7,
    values: &[f64],
    h: &[f64],
    lf: &LfBounds,
    dt: f64,
    eno2: bool,
) -> Result<Vec<f64>, SolveError> {
    let strides = grid.strides();
    par_nodes(grid.len(), |k| {
        let (idx, node) = node_of(game, grid, k)?;
        let mut q = [0.0; NDIM];
        let mut diss = 0.0;
        for d in 0..NDIM {
            let (pm, pp) = one_sided(values, grid, &strides, k, &idx, d, eno2);
            q[d] = 0.5 * (pm + pp);
            let alpha = match &lf.local {
                Some(b) => local_alpha(b, grid, &strides, k, &idx, d),
                None => lf.alpha[d],
            };
            diss += alpha * 0.5 * (pp - pm);
        }
        let v = values[k] + dt * (game.hamiltonian(&node, &q) + diss);
        Ok(v.max(h[k]))
    })
}

/// One backward step of V_t + H = 0 followed by V ← max(V, h).
pub fn qvi_step<G: Game>(
    game: &G,
    v: &GriddedValueFunction,
    h: &[f64],
    lf: &LfBounds,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<GriddedValueFunction, SolveError> {
    if dt > lf.dt * (1.0 + 1e-12) {
        return Err(SolveError::Cfl { dt, limit: lf.dt });
    }
    let grid = &v.grid;
    let mut next = euler_project(game, grid, &v.values, h, lf, dt, cfg.eno2)?;
    if cfg.tvd_rk2 {
        let second = euler_project(game, grid, &next, h, lf, dt, cfg.eno2)?;
        for ((n, s), (old, hk)) in next.iter_mut().zip(&second).zip(v.values.iter().zip(h)) {
            *n = (0.5 * old + 0.5 * s).max(*hk);
        }
    }
    Ok(GriddedValueFunction { grid: *grid, values: next, t: v.t - dt })
}

/// Result of a backward reachable set computation.
#[derive(Debug, Clone)]
pub struct BrsSolution {
    pub value: GriddedValueFunction,
    pub controls: ControlTable,
    /// Avoid function at every node.
    pub avoid: Vec<f64>,
    pub lf: LfBounds,
    pub steps: usize,
    pub dt: f64,
}

/// Called after each step with the step number, the new value function and h.
pub type Observer<'a> = dyn FnMut(usize, &GriddedValueFunction, &[f64]) + 'a;

/// Integrate from the terminal value back to t = −T, then record the
/// optimal control at every node from the final costate.
pub fn solve_brs<G: Game>(
    game: &G,
    grid: &Grid7,
    cfg: &SolverConfig,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<BrsSolution, SolveError> {
    if !(cfg.horizon >= 0.0) || !(cfg.cfl > 0.0) || !(cfg.dt_max > 0.0) {
        return Err(SolveError::Grid("horizon, cfl and dt_max must be positive".into()));
    }
    let (avoid, target) = terminal_fields(game, grid)?;
    let mut v = GriddedValueFunction {
        grid: *grid,
        values: avoid.iter().zip(&target).map(|(a, b)| a.max(*b)).collect(),
        t: 0.0,
    };
    let lf = lf_bounds(game, grid, cfg)?;
    let steps = if cfg.horizon == 0.0 { 0 } else { (cfg.horizon / lf.dt - 1e-9).ceil().max(1.0) as usize };
    let dt = if steps == 0 { 0.0 } else { cfg.horizon / steps as f64 };
    for step in 1..=steps {
        v = qvi_step(game, &v, &avoid, &lf, dt, cfg)?;
        if v.values.iter().any(|x| !x.is_finite()) {
            return Err(SolveError::Divergence { step });
        }
        if let Some(obs) = observer.as_mut() {
            obs(step, &v, &avoid);
        }
    }
    let controls = record_controls(game, &v)?;
    Ok(BrsSolution { value: v, controls, avoid, lf, steps, dt })
}

/// u*(x_node, ∂V/∂x(x_node)) at every node.
pub fn record_controls<G: Game>(game: &G, v: &GriddedValueFunction) -> Result<ControlTable, SolveError> {
    let grid = &v.grid;
    let u = par_nodes(grid.len(), |k| {
        let (idx, node) = node_of(game, grid, k)?;
        let q = costate_at(v, &grid.point(&idx))?;
        Ok(game.optimal_control(&node, &q.q))
    })?;
    Ok(ControlTable { grid: *grid, alpha: u.iter().map(|c| c.alpha).collect(), mu: u.iter().map(|c| c.mu).collect() })
}
