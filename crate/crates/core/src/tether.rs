//! Tether models: a lumped-mass spring-damper chain for simulation and the
//! straight-line approximation used by the synthesis model and the NDI
//! force estimate.
//!
//! Segment `i` (1-based) joins particle `i-1` to particle `i`; particle 0 is
//! the ground anchor at the origin and particle `n+1` is the aircraft. The
//! segment force `F_s,i = T_i ŝ_i` points from `i-1` toward `i`, so the
//! tether pulls the aircraft with `-F_s,n+1`.

use crate::frames::{SphericalPos, Vec3};
use crate::plant::PolarRates;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Segments shorter than this are treated as singular.
pub const MIN_SEGMENT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TetherError {
    #[error("segment {0} has (near) zero length")]
    ZeroLengthSegment(usize),
    #[error("invalid straight-tether geometry: {0}")]
    InvalidGeometry(String),
    #[error("tether state has {got} particles, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TetherParams {
    /// Number of particles; the chain has n+1 segments.
    pub n: usize,
    /// Segment spring constant (N/m).
    pub k: f64,
    /// Segment damping constant (N·s/m).
    pub c: f64,
    /// Segment rest length (m). Tracks the reeled-out length in simulation.
    pub l_s: f64,
    /// Particle mass (kg).
    pub m_t: f64,
    /// Tether diameter (m).
    pub d_t: f64,
    /// Cylinder drag coefficient.
    pub cd_t: f64,
    /// Air density (kg/m³).
    pub rho: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for TetherParams {
    fn default() -> Self {
        Self { n: 5, k: 1.0e5, c: 12.0, l_s: 250.0 / 6.0, m_t: 0.35, d_t: 0.004, cd_t: 1.1, rho: 1.225, g: 9.81 }
    }
}

impl TetherParams {
    /// Largest RK4 step for which the chain stays well inside the stability
    /// region: 0.9·2/|λ_max|, with λ_max the fastest eigenvalue of the
    /// highest chain mode (effective stiffness 4k, damping 4c).
    pub fn stable_dt(&self) -> f64 {
        let km = self.k * self.m_t;
        let lambda_max = if self.c * self.c > km {
            2.0 * (self.c + (self.c * self.c - km).sqrt()) / self.m_t
        } else {
            2.0 * (self.k / self.m_t).sqrt()
        };
        0.9 * 2.0 / lambda_max
    }
}

/// Hooke's law with damping, as printed. May be compressive.
pub fn segment_tension(s: &Vec3, sv: &Vec3, p: &TetherParams) -> Result<Vec3, TetherError> {
    let len = s.norm();
    if len <= MIN_SEGMENT {
        return Err(TetherError::ZeroLengthSegment(0));
    }
    let u = s / len;
    Ok(u * (p.k * (len - p.l_s) + p.c * u.dot(sv)))
}

/// Tension-only variant: zero when the segment is slack or being released
/// faster than the spring can hold.
pub fn taut_tension(s: &Vec3, sv: &Vec3, p: &TetherParams) -> Result<Vec3, TetherError> {
    let len = s.norm();
    if len <= MIN_SEGMENT {
        return Err(TetherError::ZeroLengthSegment(0));
    }
    if len <= p.l_s {
        return Ok(Vec3::zeros());
    }
    let u = s / len;
    let t = p.k * (len - p.l_s) + p.c * u.dot(sv);
    Ok(u * t.max(0.0))
}

/// Crossflow drag on a segment from the apparent air velocity `v_air`.
pub fn segment_drag(s: &Vec3, v_air: &Vec3, p: &TetherParams) -> Result<Vec3, TetherError> {
    let len = s.norm();
    if len <= MIN_SEGMENT {
        return Err(TetherError::ZeroLengthSegment(0));
    }
    let vn = v_air.norm();
    if vn < 1e-12 {
        return Ok(Vec3::zeros());
    }
    let u = s / len;
    let v_perp = v_air - u * u.dot(v_air);
    let v_hat = v_air / vn;
    let a_eff = p.d_t * (s - v_hat * s.dot(&v_hat)).norm();
    Ok(v_perp * (0.5 * p.rho * p.cd_t * v_perp.norm() * a_eff))
}

/// Particle positions and velocities, W frame, particles 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct TetherState {
    pub pos: Vec<Vec3>,
    pub vel: Vec<Vec3>,
}

impl TetherState {
    /// Particles evenly spaced on the straight line to `p_air`, moving with
    /// the proportional share of `v_air`.
    pub fn straight(n: usize, p_air: &Vec3, v_air: &Vec3) -> Self {
        let f = |i: usize| i as f64 / (n + 1) as f64;
        Self {
            pos: (1..=n).map(|i| p_air * f(i)).collect(),
            vel: (1..=n).map(|i| v_air * f(i)).collect(),
        }
    }
}

/// Time derivatives of the chain and the loads at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TetherDerivatives {
    pub dpos: Vec<Vec3>,
    pub dvel: Vec<Vec3>,
    /// `F_s,n+1`; the aircraft feels the negative of this.
    pub f_top: Vec3,
    /// `F_s,1`, the load on the ground station.
    pub f_ground: Vec3,
}

/// Chain dynamics with the aircraft end prescribed. `wind` maps an
/// altitude (m, W-frame z) to the W-frame wind at that height.
pub fn tether_derivatives<W: Fn(f64) -> Vec3>(
    st: &TetherState,
    p_air: &Vec3,
    v_air: &Vec3,
    wind: W,
    p: &TetherParams,
) -> Result<TetherDerivatives, TetherError> {
    let n = p.n;
    if st.pos.len() != n || st.vel.len() != n {
        return Err(TetherError::Dimension { got: st.pos.len(), expected: n });
    }
    let point = |i: usize| -> Vec3 {
        if i == 0 {
            Vec3::zeros()
        } else if i == n + 1 {
            *p_air
        } else {
            st.pos[i - 1]
        }
    };
    let vel = |i: usize| -> Vec3 {
        if i == 0 {
            Vec3::zeros()
        } else if i == n + 1 {
            *v_air
        } else {
            st.vel[i - 1]
        }
    };
    let mut seg_force = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let s = point(i) - point(i - 1);
        let sv = vel(i) - vel(i - 1);
        seg_force.push(taut_tension(&s, &sv, p).map_err(|_| TetherError::ZeroLengthSegment(i))?);
    }
    let weight = Vec3::new(0.0, 0.0, p.m_t * p.g);
    let mut dvel = Vec::with_capacity(n);
    for i in 1..=n {
        // Drag of the segment above particle i, with the wind at particle i.
        let s = point(i + 1) - point(i);
        let v_app = wind(point(i).z) - (vel(i + 1) + vel(i)) * 0.5;
        let drag = segment_drag(&s, &v_app, p).map_err(|_| TetherError::ZeroLengthSegment(i + 1))?;
        let f = seg_force[i] - seg_force[i - 1] - weight + drag;
        dvel.push(f / p.m_t);
    }
    Ok(TetherDerivatives {
        dpos: st.vel.clone(),
        dvel,
        f_top: seg_force[n],
        f_ground: seg_force[0],
    })
}

/// Velocity of particle `i` on the straight tether, as printed.
pub fn straight_particle_velocity(i: usize, n: usize, pos: &SphericalPos, r: &PolarRates) -> Vec3 {
    let (sl, cl) = pos.lambda.sin_cos();
    let (sp, cp) = pos.phi.sin_cos();
    let f = i as f64 / (n + 1) as f64;
    let radial = Vec3::new(cp * cl, cp * sl, sp);
    let turn = Vec3::new(
        sp * r.phi_dot * cl + cp * sl * r.lambda_dot,
        sp * r.phi_dot * sl - cp * cl * r.lambda_dot,
        -cp * r.phi_dot,
    );
    radial * (f * r.h_dot) - turn * (f * pos.h_tau)
}

/// Tether force on the straight-tether abstraction: `F_s,n+1` with the
/// stretch term k·Δ_t. Tension only; the aircraft feels the negative.
pub fn straight_tether_force(
    delta_t: f64,
    pos: &SphericalPos,
    rates: &PolarRates,
    p: &TetherParams,
) -> Result<Vec3, TetherError> {
    if !(pos.h_tau > 0.0) {
        return Err(TetherError::InvalidGeometry(format!("h_tau = {}", pos.h_tau)));
    }
    let n = p.n;
    let radial = pos.radial();
    let p_n = radial * (pos.h_tau * n as f64 / (n + 1) as f64);
    let s = radial * pos.h_tau - p_n;
    let sv = straight_particle_velocity(n + 1, n, pos, rates) - straight_particle_velocity(n, n, pos, rates);
    let len = s.norm();
    if len <= MIN_SEGMENT {
        return Err(TetherError::ZeroLengthSegment(n + 1));
    }
    let u = s / len;
    let t = p.k * delta_t + p.c * u.dot(&sv);
    Ok(u * t.max(0.0))
}

/// Stretch rate of the top segment with the reel-out share removed.
pub fn delta_t_rate(s: &Vec3, sv: &Vec3, theta_dot: f64, r_w: f64, n: usize) -> Result<f64, TetherError> {
    let len = s.norm();
    if len <= MIN_SEGMENT {
        return Err(TetherError::ZeroLengthSegment(n + 1));
    }
    Ok(sv.dot(s) / len - r_w * theta_dot / (n + 1) as f64)
}

/// Potential plus kinetic energy of the chain (no gravity), for audits.
pub fn chain_energy(st: &TetherState, p_air: &Vec3, p: &TetherParams) -> f64 {
    let n = p.n;
    let point = |i: usize| -> Vec3 {
        if i == 0 {
            Vec3::zeros()
        } else if i == n + 1 {
            *p_air
        } else {
            st.pos[i - 1]
        }
    };
    let spring: f64 = (1..=n + 1)
        .map(|i| {
            let ext = ((point(i) - point(i - 1)).norm() - p.l_s).max(0.0);
            0.5 * p.k * ext * ext
        })
        .sum();
    let kinetic: f64 = st.vel.iter().map(|v| 0.5 * p.m_t * v.norm_squared()).sum();
    spring + kinetic
}
