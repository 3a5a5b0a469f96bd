//! NDI path-following controller, safety-table lookup, switching laws and
//! the two-mode automaton.

use crate::frames::{cart_from_spherical, wrap_pi, Rotation3, Vec3};
use crate::hjsolver::{ControlTable, NDIM};
use crate::plant::{f_hat_parts, gravity_force_o, AircraftParams, AircraftState, Atmosphere, Control};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("state leaves the table envelope on axis {axis} (value {value})")]
    OutOfEnvelope { axis: usize, value: f64 },
    #[error("force history holds {0} samples; at least 2 are needed")]
    InsufficientHistory(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NdiGains {
    pub k_chi: f64,
    pub k_gamma: f64,
}

impl Default for NdiGains {
    fn default() -> Self {
        Self { k_chi: 1.5, k_gamma: 1.5 }
    }
}

/// Admissible control box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlBounds {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl Default for ControlBounds {
    fn default() -> Self {
        Self { alpha_min: -0.1, alpha_max: 0.25, mu_min: -1.2, mu_max: 1.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NdiCommand {
    pub chi: f64,
    pub gamma: f64,
    pub chi_dot: f64,
    pub gamma_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdiOutput {
    pub control: Control,
    /// Pseudo-controls (ν_χ, ν_γ).
    pub nu: (f64, f64),
    /// The inversion hit a bound of U.
    pub saturated: bool,
}

pub fn pseudo_controls(state: &AircraftState, cmd: &NdiCommand, est: (f64, f64), gains: &NdiGains) -> (f64, f64) {
    (
        cmd.chi_dot + gains.k_chi * wrap_pi(cmd.chi - state.chi_a) - est.0,
        cmd.gamma_dot + gains.k_gamma * wrap_pi(cmd.gamma - state.gamma_a) - est.1,
    )
}

/// Rates from gravity and the measured tether force projected onto the
/// line to the ground station.
pub fn ndi_estimated_rates(state: &AircraftState, f_t_norm: f64, xi: f64, p: &AircraftParams, atm: &Atmosphere) -> (f64, f64) {
    let p_w = cart_from_spherical(&state.pos());
    let p_o = Rotation3::o_w(xi) * p_w;
    let f_t_o = if p_o.norm() > 0.0 { -p_o / p_o.norm() * f_t_norm } else { Vec3::zeros() };
    let f = Rotation3::abar_o(state.chi_a, state.gamma_a) * (gravity_force_o(p.mass, atm.g) + f_t_o);
    let (v, cg) = (state.v_a, state.gamma_a.cos());
    (f.y / (p.mass * v * cg), -f.z / (p.mass * v))
}

/// Aerodynamic χ̇ and γ̇ contributions for a control.
fn aero_rates(state: &AircraftState, alpha: f64, mu: f64, p: &AircraftParams, atm: &Atmosphere) -> (f64, f64) {
    let qbm = 0.5 * atm.rho * p.s_ref * state.v_a * state.v_a / p.mass;
    let (smu, cmu) = mu.sin_cos();
    let f = f_hat_parts(&p.aero.coeffs_a(alpha), smu, cmu, qbm, state.v_a, state.gamma_a.cos());
    (f[1], f[2])
}

/// Bisection tolerance on α (rad).
const ALPHA_TOL: f64 = 1e-6;

/// Invert the aerodynamic rate model: μ from the ratio of the two channels,
/// α by bisection on the dominant channel.
pub fn ndi_command(
    state: &AircraftState,
    cmd: &NdiCommand,
    est: (f64, f64),
    gains: &NdiGains,
    bounds: &ControlBounds,
    p: &AircraftParams,
    atm: &Atmosphere,
) -> NdiOutput {
    let nu = pseudo_controls(state, cmd, est, gains);
    // Lift-direction components: (L/m) sin μ = ν_χ v cos γ, (L/m) cos μ = ν_γ v.
    let a = nu.0 * state.v_a * state.gamma_a.cos();
    let b = nu.1 * state.v_a;
    let mu_raw = a.atan2(b);
    let mu = mu_raw.clamp(bounds.mu_min, bounds.mu_max);
    let mut saturated = mu != mu_raw;
    let (smu, cmu) = mu.sin_cos();
    let (use_gamma, target) = if cmu.abs() >= smu.abs() { (true, nu.1) } else { (false, nu.0) };
    let resid = |alpha: f64| {
        let r = aero_rates(state, alpha, mu, p, atm);
        (if use_gamma { r.1 } else { r.0 }) - target
    };
    let (mut lo, mut hi) = (bounds.alpha_min, bounds.alpha_max);
    let (mut f_lo, f_hi) = (resid(lo), resid(hi));
    let alpha = if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        saturated = true;
        if f_lo.abs() <= f_hi.abs() {
            lo
        } else {
            hi
        }
    } else {
        while hi - lo > ALPHA_TOL {
            let mid = 0.5 * (lo + hi);
            let f_mid = resid(mid);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    NdiOutput { control: Control { alpha, mu }, nu, saturated }
}

/// Stored control at the node nearest to `x`. Non-periodic axes accept up
/// to one cell beyond the grid and clamp.
pub fn safety_command(table: &ControlTable, x: &[f64; NDIM]) -> Result<Control, ControlError> {
    let mut idx = [0usize; NDIM];
    for d in 0..NDIM {
        let a = &table.grid.axes[d];
        if a.is_frozen() {
            continue;
        }
        let u = (x[d] - a.min) / a.spacing();
        idx[d] = if a.periodic {
            (u.round().rem_euclid(a.n as f64) as usize) % a.n
        } else {
            if u < -1.0 || u > a.n as f64 {
                return Err(ControlError::OutOfEnvelope { axis: d, value: x[d] });
            }
            u.round().clamp(0.0, (a.n - 1) as f64) as usize
        };
    }
    let k = table.grid.flat(&idx);
    Ok(Control { alpha: table.alpha[k], mu: table.mu[k] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchConfig {
    pub f_rupture: f64,
    /// Engage when the force is within this margin of rupture (N).
    pub engage_margin: f64,
    /// Engage when the extrapolated force is within this margin (N).
    pub predict_margin: f64,
    /// Release only below this margin, or on a falling average (N).
    pub release_margin: f64,
    /// Extrapolation horizon (s).
    pub horizon: f64,
    /// Moving-average window (s).
    pub window: f64,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            f_rupture: 1870.0,
            engage_margin: 30.0,
            predict_margin: 50.0,
            release_margin: 40.0,
            horizon: 0.1,
            window: 0.2,
        }
    }
}

/// Time-stamped tether-force samples covering the averaging window.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceHistory {
    samples: VecDeque<(f64, f64)>,
    window: f64,
}

impl ForceHistory {
    pub fn new(window: f64) -> Self {
        Self { samples: VecDeque::new(), window }
    }

    pub fn push(&mut self, t: f64, force: f64) {
        self.samples.push_back((t, force));
        // Keep one extra sample before the window for the previous average.
        while self.samples.len() > 2 && self.samples[1].0 < t - self.window - 1e-12 {
            self.samples.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn latest(&self) -> Option<(f64, f64)> {
        self.samples.back().copied()
    }

    /// Mean of the samples in (t_end − window, t_end], ending at sample `end`.
    fn mean_ending(&self, end: usize) -> f64 {
        let t_end = self.samples[end].0;
        let (sum, n) = self
            .samples
            .iter()
            .take(end + 1)
            .filter(|(t, _)| *t > t_end - self.window - 1e-12)
            .fold((0.0, 0usize), |(s, n), (_, f)| (s + f, n + 1));
        sum / n as f64
    }

    /// Moving average and its backward-difference rate (N/s).
    pub fn average_and_rate(&self) -> Result<(f64, f64), ControlError> {
        let n = self.samples.len();
        if n < 2 {
            return Err(ControlError::InsufficientHistory(n));
        }
        let now = self.mean_ending(n - 1);
        let prev = self.mean_ending(n - 2);
        let dt = self.samples[n - 1].0 - self.samples[n - 2].0;
        Ok((now, (now - prev) / dt))
    }
}

/// Engage (S1) and release (S2) conditions.
pub fn switch_eval(cfg: &SwitchConfig, history: &ForceHistory) -> Result<(bool, bool), ControlError> {
    let (_, rate) = history.average_and_rate()?;
    let (_, f) = history.latest().expect("non-empty history");
    let s1 = f >= cfg.f_rupture - cfg.engage_margin || f + rate * cfg.horizon >= cfg.f_rupture - cfg.predict_margin;
    let s2 = !s1 && (f <= cfg.f_rupture - cfg.release_margin || rate <= 0.0);
    Ok((s1, s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Ndi,
    Safety,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Ndi => "NDI",
            Mode::Safety => "SAFETY",
        }
    }
}

pub fn automaton_step(mode: Mode, s1: bool, s2: bool) -> Mode {
    match (mode, s1, s2) {
        (Mode::Ndi, true, _) => Mode::Safety,
        (Mode::Safety, _, true) => Mode::Ndi,
        (m, _, _) => m,
    }
}

/// Controller mode together with its force history.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMode {
    pub mode: Mode,
    pub history: ForceHistory,
}

impl HybridMode {
    pub fn new(window: f64) -> Self {
        Self { mode: Mode::Ndi, history: ForceHistory::new(window) }
    }

    /// Record a force sample and advance the automaton. Returns (S1, S2).
    pub fn update(&mut self, cfg: &SwitchConfig, t: f64, force: f64) -> (bool, bool) {
        self.history.push(t, force);
        match switch_eval(cfg, &self.history) {
            Ok((s1, s2)) => {
                self.mode = automaton_step(self.mode, s1, s2);
                (s1, s2)
            }
            Err(_) => (false, false),
        }
    }
}
