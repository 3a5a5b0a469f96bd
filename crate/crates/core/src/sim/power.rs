//! Mechanical power at the winch and the theoretical power bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("total drag coefficient must be positive, got {0}")]
    ZeroDrag(f64),
    #[error("force balance is infeasible: arcsine argument {0} outside [-1, 1]")]
    InfeasibleBalance(f64),
}

/// Reel-out speed times ground force (W); negative while reeling in.
pub fn power_mech(omega_w: f64, r_w: f64, f_w: f64) -> f64 {
    r_w * omega_w * f_w
}

/// ζ = (4/27)·C_L³/(C_D + C_D,t)².
pub fn harvesting_factor(c_l: f64, c_d: f64, c_d_tether: f64) -> Result<f64, PowerError> {
    let cd = c_d + c_d_tether;
    if !(cd > 0.0) {
        return Err(PowerError::ZeroDrag(cd));
    }
    Ok(4.0 / 27.0 * c_l.powi(3) / (cd * cd))
}

/// e = cos³(ψ0 + asin((F_drag/F_a) sin ψ0 + (F_g/F_a) cos ψ0)).
pub fn efficiency_factor(f_drag: f64, f_a: f64, f_g: f64, psi0: f64) -> Result<f64, PowerError> {
    let arg = f_drag / f_a * psi0.sin() + f_g / f_a * psi0.cos();
    if !(-1.0..=1.0).contains(&arg) {
        return Err(PowerError::InfeasibleBalance(arg));
    }
    Ok((psi0 + arg.asin()).cos().powi(3))
}

/// P̃ = e·A_eff·ζ·½ρ‖v_W‖³.
pub fn power_bound(e: f64, a_eff: f64, zeta: f64, rho: f64, v_w: f64) -> f64 {
    e * a_eff * zeta * 0.5 * rho * v_w.powi(3)
}

/// Equivalent tether drag coefficient referred to the wing area: a quarter
/// of the tether's frontal area acts at the aircraft speed.
pub fn tether_drag_coefficient(cd_t: f64, d_t: f64, length: f64, s_ref: f64) -> f64 {
    cd_t * d_t * length / (4.0 * s_ref)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// Time-averaged mechanical power (W).
    pub p_mech_mean: f64,
    pub p_mech_min: f64,
    pub p_mech_max: f64,
    /// Energy delivered at the winch (J).
    pub energy: f64,
    pub duration: f64,
    pub c_l: f64,
    pub c_d: f64,
    pub c_d_tether: f64,
    pub zeta: f64,
    /// Efficiency factor; `None` when the averaged forces admit no balance.
    pub e: Option<f64>,
    /// Mean wind speed at the aircraft (m/s).
    pub wind_speed: f64,
    /// Theoretical power bound (W), available with `e`.
    pub p_bound: Option<f64>,
}
