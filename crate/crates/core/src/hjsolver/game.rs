//! The reach-avoid game on the safety model: terminal functions, optimal
//! inputs and the Hamiltonian.

use super::grid::{Grid7, Index, Point, NDIM};
use std::f64::consts::PI;
use super::SolveError;
use crate::frames::{tau_angles_to_o, wrap_pi, Vec3};
use crate::path_guidance::commanded_angles;
use crate::plant::{Control, Disturbance, DisturbanceBounds, PlantError, SafetyModel, SafetyPoint, SafetyState, Site};
use serde::{Deserialize, Serialize};

/// What the solver needs from a differential game.
pub trait Game: Sync {
    type Node: Send;
    /// Evaluate the model at a grid node (`idx` given) or at an arbitrary point.
    fn node(&self, idx: Option<&Index>, x: &Point) -> Result<Self::Node, SolveError>;
    /// Avoid function h; the avoid set is {h > 0}.
    fn avoid(&self, node: &Self::Node) -> f64;
    /// Reach function l; the target set is {l ≤ 0}.
    fn target(&self, node: &Self::Node) -> f64;
    /// min_u max_d qᵀf.
    fn hamiltonian(&self, node: &Self::Node, q: &[f64; NDIM]) -> f64;
    fn optimal_control(&self, node: &Self::Node, q: &[f64; NDIM]) -> Control;
    /// Upper bound of |f_i| over U × D at this node.
    fn speed_bound(&self, node: &Self::Node) -> [f64; NDIM];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlGridSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub n_alpha: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub n_mu: usize,
}

impl Default for ControlGridSpec {
    fn default() -> Self {
        Self { alpha_min: -0.1, alpha_max: 0.25, n_alpha: 15, mu_min: -1.2, mu_max: 1.2, n_mu: 15 }
    }
}

impl ControlGridSpec {
    pub fn refined(&self, factor: usize) -> Self {
        Self { n_alpha: (self.n_alpha - 1) * factor + 1, n_mu: (self.n_mu - 1) * factor + 1, ..*self }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Discrete control set with per-α aerodynamic vectors and per-μ sine/cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    pub alpha: Vec<f64>,
    pub mu: Vec<f64>,
    pub ca: Vec<Vec3>,
    pub sc_mu: Vec<(f64, f64)>,
    max_x: f64,
    max_yz: f64,
}

impl ControlGrid {
    pub fn new(spec: &ControlGridSpec, model: &SafetyModel) -> Self {
        let alpha = linspace(spec.alpha_min, spec.alpha_max, spec.n_alpha.max(1));
        let mu = linspace(spec.mu_min, spec.mu_max, spec.n_mu.max(1));
        let ca: Vec<Vec3> = alpha.iter().map(|&a| model.aircraft.aero.coeffs_a(a)).collect();
        let sc_mu = mu.iter().map(|m| m.sin_cos()).collect();
        let max_x = ca.iter().map(|c| c.x.abs()).fold(0.0, f64::max);
        let max_yz = ca.iter().map(|c| c.y.hypot(c.z)).fold(0.0, f64::max);
        Self { alpha, mu, ca, sc_mu, max_x, max_yz }
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn control(&self, i: usize, j: usize) -> Control {
        Control { alpha: self.alpha[i], mu: self.mu[j] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    /// Tether force at which the tether ruptures (N).
    pub f_rupture: f64,
    /// Alignment tolerance of the target set (rad).
    pub eps_align: f64,
    /// Force excess that maps to a unit avoid value (N).
    pub h_scale: f64,
    /// Angle error that maps to a unit reach value (rad).
    pub l_scale: f64,
    /// Guidance look-ahead distance (m).
    pub delta0: f64,
    pub disturbance: DisturbanceBounds,
    pub controls: ControlGridSpec,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            f_rupture: 1870.0,
            eps_align: 0.087,
            h_scale: 1870.0,
            l_scale: PI,
            delta0: 25.0,
            disturbance: DisturbanceBounds::default(),
            controls: ControlGridSpec::default(),
        }
    }
}

/// Avoid function (‖F_t‖ − F_rupture)/h_scale.
pub fn h_fn(model: &SafetyModel, cfg: &GameConfig, x: &SafetyState) -> Result<f64, PlantError> {
    Ok(h_from_point(&model.evaluate(x)?, cfg))
}

fn h_from_point(p: &SafetyPoint, cfg: &GameConfig) -> f64 {
    (p.f_t_o.norm() - cfg.f_rupture) / cfg.h_scale
}

/// Commanded (χ, γ) in NED at a site.
pub fn commanded_o(model: &SafetyModel, site: &Site, delta0: f64) -> (f64, f64) {
    let (chi_tau, gamma_tau) = commanded_angles(&site.geo, delta0);
    tau_angles_to_o(&site.geo.pos, model.wind.xi, chi_tau, gamma_tau)
}

/// Reach function: (largest course or path-angle error − ε_align)/l_scale.
pub fn l_fn(model: &SafetyModel, cfg: &GameConfig, x: &SafetyState) -> Result<f64, PlantError> {
    let site = model.site(x.s, x.sigma, x.h_tau)?;
    Ok(l_from_site(model, &site, cfg, x))
}

fn l_from_site(model: &SafetyModel, site: &Site, cfg: &GameConfig, x: &SafetyState) -> f64 {
    let (chi_cmd, gamma_cmd) = commanded_o(model, site, cfg.delta0);
    let e_chi = wrap_pi(chi_cmd - x.chi_a).abs();
    let e_gamma = wrap_pi(gamma_cmd - x.gamma_a).abs();
    (e_chi.max(e_gamma) - cfg.eps_align) / cfg.l_scale
}

/// Minimizer of qᵀf̂ over the control grid with its value. Ties keep the
/// first minimum in α-major order.
pub fn control_search(p: &SafetyPoint, q: &[f64; NDIM], grid: &ControlGrid) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for (i, ca) in grid.ca.iter().enumerate() {
        for (j, &(smu, cmu)) in grid.sc_mu.iter().enumerate() {
            let f = p.f_hat(ca, smu, cmu);
            let obj = q[3] * f[0] + q[4] * f[1] + q[5] * f[2];
            if obj < best.2 {
                best = (i, j, obj);
            }
        }
    }
    best
}

pub fn optimal_control(p: &SafetyPoint, q: &[f64; NDIM], grid: &ControlGrid) -> Control {
    let (i, j, _) = control_search(p, q, grid);
    grid.control(i, j)
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Maximizer of qᵀf_C over the disturbance box. Zero costate components
/// pick the positive bound.
pub fn optimal_disturbance(p: &SafetyPoint, q: &[f64; NDIM], bounds: &DisturbanceBounds) -> Disturbance {
    let g = gust_sensitivity(p, q);
    Disturbance {
        d_delta_t: sign(q[6]) * bounds.d_delta_t_max,
        d_turb: Vec3::new(sign(g.x), sign(g.y), sign(g.z)) * bounds.d_turb_max,
    }
}

/// W-frame vector whose dot product with d_turb is the gust part of qᵀf_C.
pub fn gust_sensitivity(p: &SafetyPoint, q: &[f64; NDIM]) -> Vec3 {
    let tn = p.t_tau.norm();
    let g_tau = p.t_tau * (q[0] / (tn * p.l_gamma)) + p.t_perp_tau * (q[1] / tn) - Vec3::z() * q[2];
    p.m_tau_w.transpose() * g_tau
}

pub fn dot7(q: &[f64; NDIM], f: &[f64; NDIM]) -> f64 {
    q.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// qᵀf̂(u*) + qᵀf_C(d*).
pub fn hamiltonian(p: &SafetyPoint, q: &[f64; NDIM], grid: &ControlGrid, bounds: &DisturbanceBounds) -> f64 {
    let (_, _, u_part) = control_search(p, q, grid);
    let d = optimal_disturbance(p, q, bounds);
    u_part + dot7(q, &p.f_c(&d))
}

/// Per-node data of the safety game.
#[derive(Debug, Clone, Copy)]
pub struct SafetyNode {
    pub point: SafetyPoint,
    pub h: f64,
    pub l: f64,
}

/// The safety game on a grid, with position geometry cached per (s, σ, h_τ).
pub struct SafetyGame {
    pub model: SafetyModel,
    pub cfg: GameConfig,
    pub controls: ControlGrid,
    sites: Option<(Grid7, Vec<Site>)>,
}

impl SafetyGame {
    pub fn new(model: SafetyModel, cfg: GameConfig) -> Self {
        let controls = ControlGrid::new(&cfg.controls, &model);
        Self { model, cfg, controls, sites: None }
    }

    /// Precompute the position geometry for every (s, σ, h_τ) node of `grid`.
    pub fn with_grid(mut self, grid: &Grid7) -> Result<Self, SolveError> {
        let [a0, a1, a2, ..] = grid.axes;
        let mut sites = Vec::with_capacity(a0.n * a1.n * a2.n);
        for i in 0..a0.n {
            for j in 0..a1.n {
                for k in 0..a2.n {
                    let site = self.model.site(a0.coord(i), a1.coord(j), a2.coord(k)).map_err(|e| {
                        SolveError::Node { index: grid.flat(&[i, j, k, 0, 0, 0, 0]), source: e }
                    })?;
                    sites.push(site);
                }
            }
        }
        self.sites = Some((*grid, sites));
        Ok(self)
    }

    /// Same game with the disturbance switched off.
    pub fn without_disturbance(&self) -> Self {
        let mut cfg = self.cfg;
        cfg.disturbance = DisturbanceBounds { d_delta_t_max: 0.0, d_turb_max: 0.0 };
        Self { model: self.model.clone(), cfg, controls: self.controls.clone(), sites: self.sites.clone() }
    }

    fn site_for(&self, idx: Option<&Index>, x: &SafetyState) -> Result<Site, PlantError> {
        if let (Some(idx), Some((g, sites))) = (idx, &self.sites) {
            return Ok(sites[(idx[0] * g.axes[1].n + idx[1]) * g.axes[2].n + idx[2]]);
        }
        self.model.site(x.s, x.sigma, x.h_tau)
    }

    pub fn evaluate(&self, idx: Option<&Index>, x: &Point) -> Result<SafetyNode, PlantError> {
        let st = SafetyState::from_array(*x);
        let site = self.site_for(idx, &st)?;
        let point = self.model.point(&site, &st)?;
        Ok(SafetyNode { point, h: h_from_point(&point, &self.cfg), l: l_from_site(&self.model, &site, &self.cfg, &st) })
    }
}

impl Game for SafetyGame {
    type Node = SafetyNode;

    fn node(&self, idx: Option<&Index>, x: &Point) -> Result<SafetyNode, SolveError> {
        self.evaluate(idx, x).map_err(|e| SolveError::Node { index: usize::MAX, source: e })
    }

    fn avoid(&self, n: &SafetyNode) -> f64 {
        n.h
    }

    fn target(&self, n: &SafetyNode) -> f64 {
        n.l
    }

    fn hamiltonian(&self, n: &SafetyNode, q: &[f64; NDIM]) -> f64 {
        hamiltonian(&n.point, q, &self.controls, &self.cfg.disturbance)
    }

    fn optimal_control(&self, n: &SafetyNode, q: &[f64; NDIM]) -> Control {
        optimal_control(&n.point, q, &self.controls)
    }

    fn speed_bound(&self, n: &SafetyNode) -> [f64; NDIM] {
        let p = &n.point;
        let b = &self.cfg.disturbance;
        let mut out = [0.0; NDIM];
        for (i, o) in out.iter_mut().enumerate().take(3) {
            let mut q = [0.0; NDIM];
            q[i] = 1.0;
            let g = gust_sensitivity(p, &q);
            *o = p.f_c0[i].abs() + b.d_turb_max * (g.x.abs() + g.y.abs() + g.z.abs());
        }
        let qbm = p.qbar_over_m;
        out[3] = p.f_c0[3].abs() + qbm * self.controls.max_x;
        out[4] = p.f_c0[4].abs() + qbm * self.controls.max_yz / (p.v_a * p.cos_gamma);
        out[5] = p.f_c0[5].abs() + qbm * self.controls.max_yz / p.v_a;
        out[6] = b.d_delta_t_max;
        out
    }
}
