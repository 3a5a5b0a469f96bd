//! Aircraft point-mass dynamics, winch, and the 7-state safety model used
//! for synthesis.
//!
//! The safety model splits its vector field as `f(x,u,d) = f̂(x,u) + f_C(x,d)`.
//! `f̂` carries the aerodynamic force (the only place the controls enter);
//! `f_C` carries kinematics, tether and gravity and is affine in the
//! disturbance.

use crate::environment::{wind_shear, EnvironmentError, WindParams};
use crate::frames::{FrameError, Rotation3, SphericalPos, Vec3};
use crate::path_guidance::{GammaCoord, GammaFrame, GammaGeometry, GuidanceError};
use crate::tether::{straight_tether_force, TetherError, TetherParams};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("airspeed {v_a} m/s is at or below the stall floor {floor} m/s")]
    Stall { v_a: f64, floor: f64 },
    #[error("flight path angle {0} rad is too close to vertical")]
    VerticalFlight(f64),
    #[error("position too close to the pole (phi = {0})")]
    Pole(f64),
    #[error("tether length must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Tether(#[from] TetherError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
}

/// Quadratic `c0 + c1 α + c2 α²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly2(pub [f64; 3]);

impl Poly2 {
    pub fn eval(&self, a: f64) -> f64 {
        let [c0, c1, c2] = self.0;
        c0 + a * (c1 + a * c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AeroModel {
    pub cx0: Poly2,
    pub cx_de: Poly2,
    pub cy_da: Poly2,
    pub cy_dr: Poly2,
    pub cz0: Poly2,
    pub cz_de: Poly2,
    /// Fixed aileron deflection (rad).
    pub delta_a: f64,
    /// Fixed elevator deflection (rad).
    pub delta_e: f64,
    /// Fixed rudder deflection (rad).
    pub delta_r: f64,
    /// Angle of attack range (rad) over which the polynomials are trusted.
    pub alpha_valid: [f64; 2],
}

impl Default for AeroModel {
    /// Small rigid wing: C_L ≈ 0.4 + 4.5α, C_D ≈ 0.06 + 0.6α².
    fn default() -> Self {
        Self {
            cx0: Poly2([-0.06, 0.4, 3.9]),
            cx_de: Poly2([0.0, 0.0, 0.0]),
            cy_da: Poly2([0.0, 0.0, 0.0]),
            cy_dr: Poly2([0.0, 0.0, 0.0]),
            cz0: Poly2([-0.4, -4.5, 0.2]),
            cz_de: Poly2([-0.4, 0.0, 0.0]),
            delta_a: 0.0,
            delta_e: 0.0,
            delta_r: 0.0,
            alpha_valid: [-0.15, 0.3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoeffs {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    /// The angle of attack was outside the validity range.
    pub extrapolated: bool,
}

impl AeroModel {
    pub fn coeffs(&self, alpha: f64) -> AeroCoeffs {
        AeroCoeffs {
            cx: self.cx0.eval(alpha) + self.cx_de.eval(alpha) * self.delta_e,
            cy: self.cy_da.eval(alpha) * self.delta_a + self.cy_dr.eval(alpha) * self.delta_r,
            cz: self.cz0.eval(alpha) + self.cz_de.eval(alpha) * self.delta_e,
            extrapolated: alpha < self.alpha_valid[0] || alpha > self.alpha_valid[1],
        }
    }

    /// Coefficient vector rotated into the aerodynamic frame (β = 0).
    pub fn coeffs_a(&self, alpha: f64) -> Vec3 {
        let c = self.coeffs(alpha);
        Rotation3::ab(alpha, 0.0) * Vec3::new(c.cx, c.cy, c.cz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AircraftParams {
    /// Mass (kg).
    pub mass: f64,
    /// Wing reference area (m²).
    pub s_ref: f64,
    pub aero: AeroModel,
    /// Airspeed below which the model is considered stalled (m/s).
    pub v_stall_floor: f64,
}

impl Default for AircraftParams {
    fn default() -> Self {
        Self { mass: 36.8, s_ref: 3.0, aero: AeroModel::default(), v_stall_floor: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Atmosphere {
    /// Air density (kg/m³).
    pub rho: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for Atmosphere {
    fn default() -> Self {
        Self { rho: 1.225, g: 9.81 }
    }
}

pub fn aero_coeffs(alpha: f64, p: &AircraftParams) -> AeroCoeffs {
    p.aero.coeffs(alpha)
}

pub fn aero_force_b(alpha: f64, v_a: f64, p: &AircraftParams, rho: f64) -> Vec3 {
    let c = p.aero.coeffs(alpha);
    Vec3::new(c.cx, c.cy, c.cz) * (0.5 * rho * p.s_ref * v_a * v_a)
}

pub fn gravity_force_o(mass: f64, g: f64) -> Vec3 {
    Vec3::new(0.0, 0.0, mass * g)
}

/// Rates of the spherical position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRates {
    pub lambda_dot: f64,
    pub phi_dot: f64,
    pub h_dot: f64,
}

pub fn polar_rates(pos: &SphericalPos, v_k_tau: &Vec3) -> Result<PolarRates, PlantError> {
    let cp = pos.phi.cos();
    if cp.abs() < 1e-9 {
        return Err(PlantError::Pole(pos.phi));
    }
    if !(pos.h_tau > 0.0) {
        return Err(PlantError::NonPositiveRadius(pos.h_tau));
    }
    Ok(PolarRates {
        lambda_dot: v_k_tau.y / (cp * pos.h_tau),
        phi_dot: v_k_tau.x / pos.h_tau,
        h_dot: -v_k_tau.z,
    })
}

/// Six-state aircraft: spherical position, airspeed, course and path angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftState {
    pub lambda: f64,
    pub phi: f64,
    pub h_tau: f64,
    pub v_a: f64,
    pub chi_a: f64,
    pub gamma_a: f64,
}

impl AircraftState {
    pub fn pos(&self) -> SphericalPos {
        SphericalPos { lambda: self.lambda, phi: self.phi, h_tau: self.h_tau }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.lambda, self.phi, self.h_tau, self.v_a, self.chi_a, self.gamma_a]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self { lambda: y[0], phi: y[1], h_tau: y[2], v_a: y[3], chi_a: y[4], gamma_a: y[5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    /// Angle of attack (rad).
    pub alpha: f64,
    /// Bank angle (rad).
    pub mu: f64,
}

/// Airspeed vector in NED from the Ā-frame angles.
pub fn airspeed_o(v_a: f64, chi: f64, gamma: f64) -> Vec3 {
    let (sx, cx) = chi.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    Vec3::new(v_a * cx * cg, v_a * sx * cg, -v_a * sg)
}

/// Map from NED to the τ frame at `pos`.
pub fn m_tau_o(pos: &SphericalPos, xi: f64) -> Matrix3<f64> {
    pos.m_tau_w().matrix() * Rotation3::o_w(xi).transpose().matrix()
}

/// Kinematic velocity, NED.
pub fn kinematic_velocity_o(state: &AircraftState, wind_o: &Vec3) -> Vec3 {
    airspeed_o(state.v_a, state.chi_a, state.gamma_a) + wind_o
}

/// Rates of the six aircraft states together with the τ-frame kinematic
/// velocity they were derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftRates {
    pub rates: [f64; 6],
    pub v_k_tau: Vec3,
}

fn check_flight(v_a: f64, gamma: f64, p: &AircraftParams) -> Result<(), PlantError> {
    if !(v_a > p.v_stall_floor) {
        return Err(PlantError::Stall { v_a, floor: p.v_stall_floor });
    }
    if gamma.cos() < 1e-6 {
        return Err(PlantError::VerticalFlight(gamma));
    }
    Ok(())
}

/// Point-mass equations of motion. `f_t_o` is the tether force acting on
/// the aircraft, NED.
pub fn aircraft_rates(
    state: &AircraftState,
    u: &Control,
    f_t_o: &Vec3,
    wind_o: &Vec3,
    xi: f64,
    p: &AircraftParams,
    atm: &Atmosphere,
) -> Result<AircraftRates, PlantError> {
    check_flight(state.v_a, state.gamma_a, p)?;
    let pos = state.pos();
    let v_k_o = kinematic_velocity_o(state, wind_o);
    let v_k_tau = m_tau_o(&pos, xi) * v_k_o;
    let pr = polar_rates(&pos, &v_k_tau)?;
    let m_abar_o = Rotation3::abar_o(state.chi_a, state.gamma_a);
    let f_b = aero_force_b(u.alpha, state.v_a, p, atm.rho);
    let total = m_abar_o * (gravity_force_o(p.mass, atm.g) + f_t_o)
        + Rotation3::abar_a(u.mu) * (Rotation3::ab(u.alpha, 0.0) * f_b);
    let (v, cg) = (state.v_a, state.gamma_a.cos());
    Ok(AircraftRates {
        rates: [
            pr.lambda_dot,
            pr.phi_dot,
            pr.h_dot,
            total.x / p.mass,
            total.y / (p.mass * v * cg),
            -total.z / (p.mass * v),
        ],
        v_k_tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WinchParams {
    /// Drum inertia (kg·m²).
    pub j_w: f64,
    /// Drum radius (m).
    pub r_w: f64,
    /// Viscous friction (N·m·s).
    pub nu_w: f64,
    /// Proportional gain (N·m/N); negative so excess force reels out.
    pub kp: f64,
    /// Integral gain (N·m/(N·s)).
    pub ki: f64,
    /// Control moment limits (N·m).
    pub mc_min: f64,
    pub mc_max: f64,
    /// Reference tether force (N).
    pub f_ref: f64,
}

impl Default for WinchParams {
    fn default() -> Self {
        Self { j_w: 0.08, r_w: 0.1, nu_w: 1.0, kp: -0.05, ki: -0.5, mc_min: -400.0, mc_max: 400.0, f_ref: 1760.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WinchState {
    /// Drum angle (rad); reeled-out length is r_w·θ_w.
    pub theta: f64,
    /// Drum rate (rad/s), positive reeling out.
    pub omega: f64,
}

/// Drum dynamics driven by the ground-station force `f_w` (N).
pub fn winch_rates(w: &WinchState, f_w: f64, m_c: f64, p: &WinchParams) -> (f64, f64) {
    (w.omega, (p.r_w * f_w - p.nu_w * w.omega + m_c) / p.j_w)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PiState {
    /// ∫(F_ref − F) dt (N·s).
    pub integral: f64,
}

/// Force-tracking PI with clamping anti-windup: the integrator is frozen
/// while the output is saturated in the direction the error would push it.
pub fn winch_pi(f_w: f64, f_ref: f64, st: &mut PiState, dt: f64, p: &WinchParams) -> f64 {
    let e = f_ref - f_w;
    let trial = st.integral + e * dt;
    let unsat = p.kp * e + p.ki * trial;
    let pushes_high = unsat > p.mc_max && p.ki * e > 0.0;
    let pushes_low = unsat < p.mc_min && p.ki * e < 0.0;
    if !(pushes_high || pushes_low) {
        st.integral = trial;
    }
    (p.kp * e + p.ki * st.integral).clamp(p.mc_min, p.mc_max)
}

/// The 7-state synthesis state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SafetyState {
    pub s: f64,
    pub sigma: f64,
    pub h_tau: f64,
    pub v_a: f64,
    pub chi_a: f64,
    pub gamma_a: f64,
    pub delta_t: f64,
}

impl SafetyState {
    pub fn to_array(&self) -> [f64; 7] {
        [self.s, self.sigma, self.h_tau, self.v_a, self.chi_a, self.gamma_a, self.delta_t]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self { s: a[0], sigma: a[1], h_tau: a[2], v_a: a[3], chi_a: a[4], gamma_a: a[5], delta_t: a[6] }
    }

    pub fn coord(&self) -> GammaCoord {
        GammaCoord { s: self.s, sigma: self.sigma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Disturbance {
    /// Adversarial stretch rate of the top segment (m/s).
    pub d_delta_t: f64,
    /// Adversarial gust, wind frame (m/s).
    pub d_turb: Vec3,
}

/// Bounds of the disturbance set D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisturbanceBounds {
    pub d_delta_t_max: f64,
    pub d_turb_max: f64,
}

impl Default for DisturbanceBounds {
    fn default() -> Self {
        Self { d_delta_t_max: 0.005, d_turb_max: 4.0 }
    }
}

/// Everything the synthesis model needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyModel {
    pub aircraft: AircraftParams,
    pub atm: Atmosphere,
    pub tether: TetherParams,
    pub wind: WindParams,
    pub frame: GammaFrame,
}

/// Position-dependent part of the model: depends on (s, σ, h_τ) only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub geo: GammaGeometry,
    /// NED → τ.
    pub m_tau_o: Matrix3<f64>,
    pub shear_o: Vec3,
}

/// Model evaluated at one state: `f_C` at d = 0 plus what is needed to add
/// the disturbance and the control terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyPoint {
    pub f_c0: [f64; 7],
    pub v_k0_tau: Vec3,
    pub m_tau_w: Matrix3<f64>,
    pub t_tau: Vec3,
    pub t_perp_tau: Vec3,
    pub l_gamma: f64,
    pub v_a: f64,
    pub cos_gamma: f64,
    /// ½ρS v_a² / m.
    pub qbar_over_m: f64,
    /// Tether force on the aircraft, NED.
    pub f_t_o: Vec3,
    pub pos: SphericalPos,
}

impl SafetyModel {
    pub fn site(&self, s: f64, sigma: f64, h_tau: f64) -> Result<Site, PlantError> {
        let geo = self.frame.geometry(GammaCoord { s, sigma }, h_tau)?;
        let altitude = h_tau * geo.pos.phi.sin();
        let shear_o = if altitude > 0.0 { wind_shear(altitude, &self.wind)? } else { Vec3::zeros() };
        Ok(Site { geo, m_tau_o: m_tau_o(&geo.pos, self.wind.xi), shear_o })
    }

    /// Base (zero-gust) kinematic velocity in τ.
    pub fn base_velocity_tau(&self, site: &Site, x: &SafetyState) -> Vec3 {
        site.m_tau_o * (airspeed_o(x.v_a, x.chi_a, x.gamma_a) + site.shear_o)
    }

    /// Tether force on the aircraft (NED) from the straight model with the
    /// zero-gust kinematics.
    pub fn tether_force_o(&self, site: &Site, x: &SafetyState, v_k0_tau: &Vec3) -> Result<Vec3, PlantError> {
        let rates = polar_rates(&site.geo.pos, v_k0_tau)?;
        let f_top_w = straight_tether_force(x.delta_t, &site.geo.pos, &rates, &self.tether)?;
        Ok(-(Rotation3::o_w(self.wind.xi) * f_top_w))
    }

    pub fn point(&self, site: &Site, x: &SafetyState) -> Result<SafetyPoint, PlantError> {
        check_flight(x.v_a, x.gamma_a, &self.aircraft)?;
        let v_k0_tau = self.base_velocity_tau(site, x);
        let f_t_o = self.tether_force_o(site, x, &v_k0_tau)?;
        let rates = self.frame.gamma_rates(&site.geo, &v_k0_tau)?;
        let m_abar_o = Rotation3::abar_o(x.chi_a, x.gamma_a);
        let m = self.aircraft.mass;
        let ft = m_abar_o * f_t_o;
        let fg = m_abar_o * gravity_force_o(m, self.atm.g);
        let (v, cg) = (x.v_a, x.gamma_a.cos());
        let f_c0 = [
            rates.s_dot,
            rates.sigma_dot,
            -v_k0_tau.z,
            ft.x / m + fg.x / m,
            ft.y / (m * v * cg) + fg.y / (m * v * cg),
            -ft.z / (m * v) - fg.z / (m * v),
            0.0,
        ];
        Ok(SafetyPoint {
            f_c0,
            v_k0_tau,
            m_tau_w: *site.geo.m_tau_w.matrix(),
            t_tau: site.geo.t_tau,
            t_perp_tau: site.geo.t_perp_tau,
            l_gamma: self.frame.l_gamma,
            v_a: v,
            cos_gamma: cg,
            qbar_over_m: 0.5 * self.atm.rho * self.aircraft.s_ref * v * v / m,
            f_t_o,
            pos: site.geo.pos,
        })
    }

    pub fn evaluate(&self, x: &SafetyState) -> Result<SafetyPoint, PlantError> {
        let site = self.site(x.s, x.sigma, x.h_tau)?;
        self.point(&site, x)
    }

    /// Control-dependent rates (v̇_a, χ̇_a, γ̇_a).
    pub fn f_hat(&self, x: &SafetyState, u: &Control) -> Result<[f64; 3], PlantError> {
        check_flight(x.v_a, x.gamma_a, &self.aircraft)?;
        let qbar_over_m = 0.5 * self.atm.rho * self.aircraft.s_ref * x.v_a * x.v_a / self.aircraft.mass;
        let (smu, cmu) = u.mu.sin_cos();
        Ok(f_hat_parts(&self.aircraft.aero.coeffs_a(u.alpha), smu, cmu, qbar_over_m, x.v_a, x.gamma_a.cos()))
    }

    /// Disturbance-dependent remainder, all seven rows.
    pub fn f_c(&self, x: &SafetyState, d: &Disturbance) -> Result<[f64; 7], PlantError> {
        Ok(self.evaluate(x)?.f_c(d))
    }

    /// Monolithic vector field through the six-state aircraft equations.
    pub fn f(&self, x: &SafetyState, u: &Control, d: &Disturbance) -> Result<[f64; 7], PlantError> {
        let site = self.site(x.s, x.sigma, x.h_tau)?;
        let v_k0_tau = self.base_velocity_tau(&site, x);
        let f_t_o = self.tether_force_o(&site, x, &v_k0_tau)?;
        let pos = site.geo.pos;
        let state = AircraftState {
            lambda: pos.lambda,
            phi: pos.phi,
            h_tau: pos.h_tau,
            v_a: x.v_a,
            chi_a: x.chi_a,
            gamma_a: x.gamma_a,
        };
        let wind_o = site.shear_o + Rotation3::o_w(self.wind.xi) * d.d_turb;
        let r = aircraft_rates(&state, u, &f_t_o, &wind_o, self.wind.xi, &self.aircraft, &self.atm)?;
        let g = self.frame.gamma_rates(&site.geo, &r.v_k_tau)?;
        Ok([g.s_dot, g.sigma_dot, r.rates[2], r.rates[3], r.rates[4], r.rates[5], d.d_delta_t])
    }
}

/// f̂ from the A-frame coefficient vector and the bank angle's sine/cosine.
#[inline]
pub fn f_hat_parts(ca: &Vec3, smu: f64, cmu: f64, qbar_over_m: f64, v_a: f64, cos_gamma: f64) -> [f64; 3] {
    let fx = qbar_over_m * ca.x;
    let fy = qbar_over_m * (cmu * ca.y - smu * ca.z);
    let fz = qbar_over_m * (smu * ca.y + cmu * ca.z);
    [fx, fy / (v_a * cos_gamma), -fz / v_a]
}

impl SafetyPoint {
    /// Disturbance in τ.
    pub fn gust_tau(&self, d: &Disturbance) -> Vec3 {
        self.m_tau_w * d.d_turb
    }

    pub fn f_c(&self, d: &Disturbance) -> [f64; 7] {
        let g = self.gust_tau(d);
        let tn = self.t_tau.norm();
        let mut f = self.f_c0;
        f[0] += self.t_tau.dot(&g) / (tn * self.l_gamma);
        f[1] += self.t_perp_tau.dot(&g) / tn;
        f[2] -= g.z;
        f[6] += d.d_delta_t;
        f
    }

    pub fn f_hat(&self, ca: &Vec3, smu: f64, cmu: f64) -> [f64; 3] {
        f_hat_parts(ca, smu, cmu, self.qbar_over_m, self.v_a, self.cos_gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aero_zero_and_no_deflection() {
        let mut p = AircraftParams::default();
        let c = aero_coeffs(0.1, &p);
        assert_eq!((c.cx, c.cy, c.cz), (p.aero.cx0.eval(0.1), 0.0, p.aero.cz0.eval(0.1)));
        assert!(!c.extrapolated);
        assert!(aero_coeffs(1.0, &p).extrapolated);
        p.aero = AeroModel {
            cx0: Poly2::default(),
            cz0: Poly2::default(),
            cz_de: Poly2::default(),
            ..AeroModel::default()
        };
        let c = aero_coeffs(0.2, &p);
        assert_eq!((c.cx, c.cy, c.cz), (0.0, 0.0, 0.0));
    }

    #[test]
    fn aero_force_arithmetic() {
        let mut p = AircraftParams::default();
        p.aero.cx0 = Poly2([-0.1, 0.0, 0.0]);
        p.aero.cz0 = Poly2([-1.0, 0.0, 0.0]);
        let f = aero_force_b(0.05, 30.0, &p, 1.225);
        let q = 0.5 * 1.225 * 3.0 * 900.0;
        assert_relative_eq!(f.x, -0.1 * q, max_relative = 1e-14);
        assert_relative_eq!(f.z, -q, max_relative = 1e-14);
        let f2 = aero_force_b(0.05, 60.0, &p, 1.225);
        assert_relative_eq!(f2.z, 4.0 * f.z, max_relative = 1e-14);
    }

    #[test]
    fn gravity_values() {
        assert_eq!(gravity_force_o(1.0, 9.81), Vec3::new(0.0, 0.0, 9.81));
        assert!((gravity_force_o(36.8, 9.81).z - 361.0).abs() < 0.1);
    }

    #[test]
    fn polar_rate_signs() {
        let pos = SphericalPos::new(0.2, 0.3, 200.0).unwrap();
        let r = polar_rates(&pos, &Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert_eq!((r.lambda_dot, r.phi_dot, r.h_dot), (0.0, 0.0, 1.0));
        let r = polar_rates(&pos, &Vec3::new(200.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.phi_dot, 1.0);
    }

    #[test]
    fn winch_balance_and_zero() {
        let p = WinchParams::default();
        let w = WinchState { theta: 0.0, omega: 3.0 };
        let mc = p.nu_w * w.omega - p.r_w * 1500.0;
        assert_eq!(winch_rates(&w, 1500.0, mc, &p).1, 0.0);
        assert_eq!(winch_rates(&WinchState::default(), 0.0, 0.0, &p), (0.0, 0.0));
    }

    #[test]
    fn pi_zero_error_and_constant_error() {
        let p = WinchParams { mc_min: -1e9, mc_max: 1e9, ..Default::default() };
        let mut st = PiState::default();
        assert_eq!(winch_pi(1600.0, 1600.0, &mut st, 0.01, &p), 0.0);
        let e = 20.0;
        for _ in 0..1000 {
            winch_pi(1600.0 - e, 1600.0, &mut st, 0.001, &p);
        }
        assert!((p.ki * st.integral - p.ki * e * 1.0).abs() < 1e-9);
    }
}
