//! Wind field: logarithmic shear profile plus Dryden turbulence.

use crate::frames::{Rotation3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FT_PER_M: f64 = 1.0 / 0.3048;
/// Altitudes below this (ft) use the clamped shear value.
pub const SHEAR_CLAMP_FT: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("altitude must be positive, got {0} m")]
    NonPositiveAltitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindParams {
    /// Wind speed at 20 ft (m/s).
    pub w20: f64,
    /// Roughness length (ft).
    pub z0_ft: f64,
    /// Mean wind direction, rotation of W about the NED down axis (rad).
    pub xi: f64,
    /// Per-axis turbulence bound assumed by the synthesis (m/s).
    pub d_turb_max: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self { w20: 9.0, z0_ft: 0.15, xi: std::f64::consts::PI, d_turb_max: 4.0 }
    }
}

/// Log-law magnitude at `h_ft` feet, without clamping.
pub fn log_law(h_ft: f64, w20: f64, z0_ft: f64) -> f64 {
    w20 * (h_ft / z0_ft).ln() / (20.0 / z0_ft).ln()
}

/// Shear wind at altitude `h` (m), NED frame.
pub fn wind_shear(h: f64, p: &WindParams) -> Result<Vec3, EnvironmentError> {
    if !(h > 0.0) {
        return Err(EnvironmentError::NonPositiveAltitude(h));
    }
    Ok(Rotation3::o_w(p.xi) * Vec3::new(shear_speed(h, p), 0.0, 0.0))
}

/// Shear wind speed at altitude `h` (m) with the low-altitude clamp; zero
/// at and below the ground.
pub fn shear_speed(h: f64, p: &WindParams) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    log_law((h * FT_PER_M).max(SHEAR_CLAMP_FT), p.w20, p.z0_ft)
}

/// Shear wind at altitude `h` (m) in the wind frame.
pub fn wind_shear_w(h: f64, p: &WindParams) -> Vec3 {
    Vec3::new(shear_speed(h, p), 0.0, 0.0)
}

pub fn wind_total(shear: &Vec3, turb: &Vec3) -> Vec3 {
    shear + turb
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrydenParams {
    /// Wind speed at 20 ft used for the low-altitude intensities (m/s).
    pub w20: f64,
    /// High-altitude intensity, all axes (m/s).
    pub sigma_high: f64,
    /// High-altitude scale length (ft).
    pub scale_high_ft: f64,
    /// Turbulence is disabled when false.
    pub enabled: bool,
}

impl Default for DrydenParams {
    fn default() -> Self {
        Self { w20: 9.0, sigma_high: 1.5, scale_high_ft: 1750.0, enabled: true }
    }
}

/// Intensities (m/s) and scale lengths (m) of one filter bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrydenDesign {
    pub sigma: [f64; 3],
    pub scale: [f64; 3],
}

pub const LOW_ALTITUDE_FT: f64 = 1000.0;
pub const HIGH_ALTITUDE_FT: f64 = 2000.0;

/// Low-altitude intensities and scale lengths.
pub fn low_altitude_design(h: f64, p: &DrydenParams) -> DrydenDesign {
    let h_ft = (h * FT_PER_M).clamp(10.0, LOW_ALTITUDE_FT);
    let base = 0.177 + 0.000823 * h_ft;
    let l_uv = h_ft / base.powf(1.2) / FT_PER_M;
    let sigma_w = 0.1 * p.w20;
    let sigma_uv = sigma_w / base.powf(0.4);
    DrydenDesign { sigma: [sigma_uv, sigma_uv, sigma_w], scale: [l_uv, l_uv, h_ft / FT_PER_M] }
}

pub fn high_altitude_design(p: &DrydenParams) -> DrydenDesign {
    let l = p.scale_high_ft / FT_PER_M;
    DrydenDesign { sigma: [p.sigma_high; 3], scale: [l; 3] }
}

/// Weight of the high-altitude bank at altitude `h` (m).
pub fn high_weight(h: f64) -> f64 {
    let h_ft = h * FT_PER_M;
    ((h_ft - LOW_ALTITUDE_FT) / (HIGH_ALTITUDE_FT - LOW_ALTITUDE_FT)).clamp(0.0, 1.0)
}

/// Filter memory: u is first order, v and w second order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Bank {
    u: f64,
    v: [f64; 2],
    w: [f64; 2],
}

impl Bank {
    fn step(&mut self, d: &DrydenDesign, airspeed: f64, dt: f64, noise: [f64; 3]) -> Vec3 {
        let tau_u = d.scale[0] / airspeed;
        let k_u = d.sigma[0] * (2.0 * tau_u).sqrt();
        let e = (-dt / tau_u).exp();
        self.u = e * self.u + k_u * (1.0 - e) * noise[0];
        let v = second_order(&mut self.v, d.sigma[1], d.scale[1] / airspeed, dt, noise[1]);
        let w = second_order(&mut self.w, d.sigma[2], d.scale[2] / airspeed, dt, noise[2]);
        Vec3::new(self.u, v, w)
    }
}

/// Advance K(1 + √3τs)/(1 + τs)² by one held-input step; returns the new output.
fn second_order(x: &mut [f64; 2], sigma: f64, tau: f64, h: f64, w: f64) -> f64 {
    let k = sigma * tau.sqrt();
    let r = h / tau;
    let e = (-r).exp();
    let x0 = e * ((1.0 + r) * x[0] + h * x[1]);
    let x1 = e * (-r / tau * x[0] + (1.0 - r) * x[1]);
    x[0] = x0 + tau * tau * (1.0 - e * (1.0 + r)) * w;
    x[1] = x1 + h * e * w;
    k / (tau * tau) * x[0] + k * 3f64.sqrt() / tau * x[1]
}

/// Turbulence filter state with its noise source.
#[derive(Debug, Clone)]
pub struct DrydenState {
    low: Bank,
    high: Bank,
    rng: ChaCha8Rng,
    pub params: DrydenParams,
}

impl DrydenState {
    pub fn new(params: DrydenParams, seed: u64) -> Self {
        Self { low: Bank::default(), high: Bank::default(), rng: ChaCha8Rng::seed_from_u64(seed), params }
    }

    /// Advance by `dt` at altitude `h` (m) and airspeed `airspeed`; returns
    /// (u_g, v_g, w_g) in the wind frame.
    pub fn step(&mut self, h: f64, airspeed: f64, dt: f64) -> Vec3 {
        let scale = 1.0 / dt.sqrt();
        let noise: [f64; 3] = std::array::from_fn(|_| self.rng.sample::<f64, _>(StandardNormal) * scale);
        self.step_with_noise(h, airspeed, dt, noise)
    }

    /// Advance with an explicit held noise sample (variance 1/dt for white noise).
    pub fn step_with_noise(&mut self, h: f64, airspeed: f64, dt: f64, noise: [f64; 3]) -> Vec3 {
        if !self.params.enabled {
            return Vec3::zeros();
        }
        let v = airspeed.max(1.0);
        let wgt = high_weight(h);
        let lo = self.low.step(&low_altitude_design(h, &self.params), v, dt, noise);
        let hi = self.high.step(&high_altitude_design(&self.params), v, dt, noise);
        lo * (1.0 - wgt) + hi * wgt
    }
}
