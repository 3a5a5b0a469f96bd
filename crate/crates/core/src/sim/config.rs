//! Run configuration, read from TOML. Every section is optional and falls
//! back to its defaults; unknown keys are rejected.

use crate::environment::{DrydenParams, WindParams};
use crate::hjsolver::{Axis, ControlGridSpec, GameConfig, Grid7, SolveError, SolverConfig};
use crate::hybrid_control::{ControlBounds, NdiGains, SwitchConfig};
use crate::path_guidance::{BoothCurve, GammaFrame};
use crate::plant::{AircraftParams, Atmosphere, DisturbanceBounds, SafetyModel, WinchParams};
use crate::tether::TetherParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config syntax: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    /// Controller and logging step (s).
    pub dt: f64,
    /// Maximum simulated time (s).
    pub duration: f64,
    /// Stop once the aircraft has flown this many figure-eights.
    pub cycles: Option<f64>,
    pub seed: u64,
    /// Use the hybrid NDI/safety controller (needs tables).
    pub hybrid: bool,
    /// Log every k-th controller step.
    pub trace_every: usize,
    /// Let gusts act on the airspeed through the aircraft's inertia instead
    /// of shifting its inertial velocity directly.
    pub gust_inertia: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { dt: 0.01, duration: 60.0, cycles: None, seed: 1, hybrid: false, trace_every: 1, gust_inertia: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialCondition {
    /// Curve parameter of the start point (rad).
    pub s: f64,
    /// Tether length (m).
    pub h_tau: f64,
    /// Airspeed (m/s).
    pub v_a: f64,
    /// Initial tether tension (N).
    pub tension: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self { s: 0.0, h_tau: 250.0, v_a: 31.0, tension: 1760.0 }
    }
}

/// Tether properties; the rest length follows the reeled-out length and
/// air density and gravity come from the atmosphere section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TetherSettings {
    pub n: usize,
    pub k: f64,
    pub c: f64,
    pub m_t: f64,
    pub d_t: f64,
    pub cd_t: f64,
}

impl Default for TetherSettings {
    fn default() -> Self {
        let p = TetherParams::default();
        Self { n: p.n, k: p.k, c: p.c, m_t: p.m_t, d_t: p.d_t, cd_t: p.cd_t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceSettings {
    /// Look-ahead distance of the course command (m).
    pub delta0: f64,
    /// Half-width of the band the navigator accepts (m).
    pub sigma_max: f64,
    /// Search window around the previous foot point (rad).
    pub window: f64,
}

impl Default for GuidanceSettings {
    fn default() -> Self {
        Self { delta0: 25.0, sigma_max: 150.0, window: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorParams {
    /// First-order lag time constant (s).
    pub tau: f64,
    /// Rate limits (rad/s).
    pub alpha_rate: f64,
    pub mu_rate: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self { tau: 0.05, alpha_rate: 1.0, mu_rate: 2.0 }
    }
}

/// Invented plumbing: constant-speed reel-in between two tether lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetractionParams {
    pub enabled: bool,
    /// Switch to retraction above this tether length (m).
    pub l_max: f64,
    /// Switch back to traction below this tether length (m).
    pub l_min: f64,
    /// Reel-in speed (m/s).
    pub reel_in_speed: f64,
    /// Speed-loop gain (N·m per m/s).
    pub speed_gain: f64,
}

impl Default for RetractionParams {
    fn default() -> Self {
        Self { enabled: false, l_max: 500.0, l_min: 250.0, reel_in_speed: 8.0, speed_gain: 40.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub s: Axis,
    pub sigma: Axis,
    pub h_tau: Axis,
    pub v_a: Axis,
    pub chi_a: Axis,
    pub gamma_a: Axis,
    pub delta_t: Axis,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            s: Axis::new(31, 0.0, 2.0 * PI, true),
            sigma: Axis::new(7, -30.0, 30.0, false),
            h_tau: Axis::new(5, 200.0, 600.0, false),
            v_a: Axis::new(7, 15.0, 45.0, false),
            chi_a: Axis::new(9, -PI, PI, true),
            gamma_a: Axis::new(7, -1.2, 1.2, false),
            delta_t: Axis::new(5, 0.0175, 0.0195, false),
        }
    }
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid7, SolveError> {
        Grid7::new([self.s, self.sigma, self.h_tau, self.v_a, self.chi_a, self.gamma_a, self.delta_t])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSettings {
    /// Alignment tolerance of the target set (rad).
    pub eps_align: f64,
    /// Force excess that maps to a unit avoid value (N); defaults to the rupture force.
    pub h_scale: Option<f64>,
    /// Angle error that maps to a unit reach value (rad).
    pub l_scale: f64,
    /// Bound of the top-segment stretch rate disturbance (m/s).
    pub d_delta_t_max: f64,
    pub n_alpha: usize,
    pub n_mu: usize,
    /// Half-width of the synthesis band (m); σ outside it is rejected.
    pub sigma_max: f64,
    pub grid: GridSpec,
    pub solver: SolverConfig,
}

impl Default for SynthesisSettings {
    fn default() -> Self {
        Self {
            eps_align: 0.087,
            h_scale: None,
            l_scale: std::f64::consts::PI,
            d_delta_t_max: 0.005,
            n_alpha: 15,
            n_mu: 15,
            sigma_max: 60.0,
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sim: SimSettings,
    pub initial: InitialCondition,
    pub aircraft: AircraftParams,
    pub atmosphere: Atmosphere,
    pub tether: TetherSettings,
    pub winch: WinchParams,
    pub wind: WindParams,
    pub turbulence: DrydenParams,
    pub curve: BoothCurve,
    pub guidance: GuidanceSettings,
    pub ndi: NdiGains,
    pub bounds: ControlBounds,
    pub actuator: ActuatorParams,
    pub switch: SwitchConfig,
    pub retraction: RetractionParams,
    pub synthesis: SynthesisSettings,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.sim.dt > 0.0 && self.sim.duration > 0.0) {
            return bad("sim.dt and sim.duration must be positive");
        }
        if self.sim.trace_every == 0 {
            return bad("sim.trace_every must be at least 1");
        }
        if self.tether.n < 1 || !(self.tether.k > 0.0 && self.tether.c >= 0.0 && self.tether.m_t > 0.0) {
            return bad("tether needs n ≥ 1, k > 0, c ≥ 0, m_t > 0");
        }
        if !(self.aircraft.mass > 0.0 && self.aircraft.s_ref > 0.0) {
            return bad("aircraft mass and reference area must be positive");
        }
        if !(self.winch.j_w > 0.0 && self.winch.r_w > 0.0) {
            return bad("winch inertia and drum radius must be positive");
        }
        if !(self.initial.h_tau > 0.0 && self.initial.v_a > self.aircraft.v_stall_floor) {
            return bad("initial tether length must be positive and airspeed above the stall floor");
        }
        if !(self.bounds.alpha_max > self.bounds.alpha_min && self.bounds.mu_max > self.bounds.mu_min) {
            return bad("control bounds must be non-empty");
        }
        let s = &self.switch;
        if !(s.predict_margin >= s.release_margin && s.release_margin >= s.engage_margin && s.engage_margin > 0.0) {
            return bad("switch margins must satisfy predict ≥ release ≥ engage > 0");
        }
        let h_scale = self.synthesis.h_scale.unwrap_or(self.switch.f_rupture);
        if !(h_scale > 0.0 && self.synthesis.l_scale > 0.0 && self.synthesis.eps_align >= 0.0) {
            return bad("synthesis scales must be positive and eps_align non-negative");
        }
        self.synthesis.grid.grid().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn tether_params(&self, l_s: f64) -> TetherParams {
        let t = &self.tether;
        TetherParams {
            n: t.n,
            k: t.k,
            c: t.c,
            l_s,
            m_t: t.m_t,
            d_t: t.d_t,
            cd_t: t.cd_t,
            rho: self.atmosphere.rho,
            g: self.atmosphere.g,
        }
    }

    pub fn disturbance_bounds(&self) -> DisturbanceBounds {
        DisturbanceBounds { d_delta_t_max: self.synthesis.d_delta_t_max, d_turb_max: self.wind.d_turb_max }
    }

    pub fn game_config(&self) -> GameConfig {
        GameConfig {
            f_rupture: self.switch.f_rupture,
            eps_align: self.synthesis.eps_align,
            h_scale: self.synthesis.h_scale.unwrap_or(self.switch.f_rupture),
            l_scale: self.synthesis.l_scale,
            delta0: self.guidance.delta0,
            disturbance: self.disturbance_bounds(),
            controls: ControlGridSpec {
                alpha_min: self.bounds.alpha_min,
                alpha_max: self.bounds.alpha_max,
                n_alpha: self.synthesis.n_alpha,
                mu_min: self.bounds.mu_min,
                mu_max: self.bounds.mu_max,
                n_mu: self.synthesis.n_mu,
            },
        }
    }

    /// The synthesis model; the straight tether uses the rest length of the
    /// reference tether length.
    pub fn safety_model(&self) -> SafetyModel {
        let n = self.tether.n;
        SafetyModel {
            aircraft: self.aircraft,
            atm: self.atmosphere,
            tether: self.tether_params(self.curve.h_tau_ref / (n + 1) as f64),
            wind: self.wind,
            frame: GammaFrame::new(self.curve, self.synthesis.sigma_max),
        }
    }

    pub fn guidance_frame(&self) -> GammaFrame {
        GammaFrame::new(self.curve, self.guidance.sigma_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[sim]\nspeed = 3\n").is_err());
        assert!(RunConfig::from_toml("[nonsense]\n").is_err());
        assert!(RunConfig::from_toml("[sim]\nduration = 5.0\n").is_ok());
    }
}
