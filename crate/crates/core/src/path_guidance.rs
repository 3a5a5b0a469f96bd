//! Figure-eight reference path (lemniscate of Booth on the sphere), the
//! curve-attached (s, σ) coordinates and the course command that steers the
//! aircraft onto the path.
//!
//! σ is positive to the left of the curve when looking along the tangent
//! from above.

use crate::frames::{
    spherical_from_cart, wrap_2pi, wrap_pi, FrameError, Rotation3, SphericalPos, Vec3,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("distance {sigma} m to the reference curve exceeds the band half-width {sigma_max} m")]
    OutOfBand { sigma: f64, sigma_max: f64 },
    #[error("several curve points are equally close and the velocity is zero")]
    Ambiguous,
    #[error("curve tangent is degenerate (norm {0})")]
    DegenerateTangent(f64),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Lemniscate of Booth, rotated up by ψ0 about the W y-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoothCurve {
    /// Height parameter (m).
    pub a_booth: f64,
    /// Width parameter (m).
    pub b_booth: f64,
    /// Elevation of the curve centre (rad).
    pub psi0: f64,
    /// Tether length at which the normalization constant l_Γ is evaluated (m).
    pub h_tau_ref: f64,
}

impl Default for BoothCurve {
    fn default() -> Self {
        Self { a_booth: 120.0, b_booth: 200.0, psi0: 30f64.to_radians(), h_tau_ref: 250.0 }
    }
}

/// Curve sample in both the flat (P) angles and W-frame Cartesian form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoothPoint {
    pub lambda_gamma: f64,
    pub phi_gamma: f64,
    pub point: Vec3,
    pub tangent: Vec3,
}

pub fn booth_point(curve: &BoothCurve, s: f64, h_tau: f64) -> BoothPoint {
    let (sn, c) = s.sin_cos();
    let r = (curve.a_booth / curve.b_booth).powi(2);
    let d = 1.0 + r * c * c;
    let lam = curve.b_booth * sn / (h_tau * d);
    let phi = curve.a_booth * sn * c / (h_tau * d);
    let dlam = curve.b_booth / h_tau * c * (d + 2.0 * r * sn * sn) / (d * d);
    let dphi = curve.a_booth / h_tau * ((c * c - sn * sn) * d + 2.0 * r * c * c * sn * sn) / (d * d);

    let (sl, cl) = lam.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let gamma_p = Vec3::new(cl * cp, sl * cp, sp) * h_tau;
    let d_lam = Vec3::new(-sl * cp, cl * cp, 0.0) * h_tau;
    let d_phi = Vec3::new(-cl * sp, -sl * sp, cp) * h_tau;
    let m_wp = Rotation3::w_p(curve.psi0);
    BoothPoint {
        lambda_gamma: lam,
        phi_gamma: phi,
        point: m_wp * gamma_p,
        tangent: m_wp * (d_lam * dlam + d_phi * dphi),
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
}

/// Arc length of one full figure eight at tether length `h_tau`.
pub fn total_arc_length(curve: &BoothCurve, h_tau: f64) -> f64 {
    let f = |s: f64| booth_point(curve, s, h_tau).tangent.norm();
    // Split into panels so the initial estimate already resolves both lobes.
    let panels = 16;
    let step = 2.0 * PI / panels as f64;
    let rough: f64 = (0..panels).map(|i| f(i as f64 * step) * step).sum();
    let tol = 1e-10 * rough / panels as f64;
    (0..panels)
        .map(|i| {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let (fa, fb) = (f(a), f(b));
            let (whole, m, fm) = simpson(&f, a, fa, b, fb);
            adaptive(&f, a, fa, b, fb, whole, m, fm, tol, 40)
        })
        .sum()
}

/// Curve-attached coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCoord {
    pub s: f64,
    pub sigma: f64,
}

/// Geometry of the curve as seen from an aircraft at (s, σ, h_τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGeometry {
    pub coord: GammaCoord,
    pub pos: SphericalPos,
    /// Curve tangent dΓ/ds at the foot point, W frame.
    pub tangent_w: Vec3,
    /// Tangent expressed in the aircraft's τ frame (horizontal there).
    pub t_tau: Vec3,
    /// Left-pointing perpendicular r̂ × t in τ.
    pub t_perp_tau: Vec3,
    pub m_tau_w: Rotation3,
}

/// Rates of the curve-attached coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRates {
    pub s_dot: f64,
    pub sigma_dot: f64,
}

/// Number of coarse samples in the foot-point search.
pub const SCAN_SAMPLES: usize = 720;
/// Candidates within this distance (m) of the best are disambiguated by velocity.
pub const TIE_TOLERANCE: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-10;

/// The reference curve together with the constants of the (s, σ) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFrame {
    pub curve: BoothCurve,
    /// Arc length at `curve.h_tau_ref`; the divisor in ṡ.
    pub l_gamma: f64,
    /// Band half-width (m).
    pub sigma_max: f64,
}

impl GammaFrame {
    pub fn new(curve: BoothCurve, sigma_max: f64) -> Self {
        let l_gamma = total_arc_length(&curve, curve.h_tau_ref);
        Self { curve, l_gamma, sigma_max }
    }

    /// Position at (s, σ) on the sphere of radius `h_tau`.
    pub fn from_gamma(&self, coord: GammaCoord, h_tau: f64) -> Result<SphericalPos, GuidanceError> {
        let bp = booth_point(&self.curve, coord.s, h_tau);
        let c_hat = bp.point / h_tau;
        let t_hat = unit_tangent(&bp, &c_hat)?;
        let n_hat = c_hat.cross(&t_hat);
        let ang = coord.sigma / h_tau;
        let k = (c_hat * ang.cos() + n_hat * ang.sin()) * h_tau;
        Ok(spherical_from_cart(&k)?)
    }

    /// Frame geometry for an aircraft at `coord` and tether length `h_tau`.
    pub fn geometry(&self, coord: GammaCoord, h_tau: f64) -> Result<GammaGeometry, GuidanceError> {
        let pos = self.from_gamma(coord, h_tau)?;
        let bp = booth_point(&self.curve, coord.s, h_tau);
        Ok(self.geometry_with(coord, pos, bp.tangent))
    }

    fn geometry_with(&self, coord: GammaCoord, pos: SphericalPos, tangent_w: Vec3) -> GammaGeometry {
        let m_tau_w = pos.m_tau_w();
        let t = m_tau_w * tangent_w;
        let t_tau = Vec3::new(t.x, t.y, 0.0);
        let t_perp_tau = Vec3::new(t_tau.y, -t_tau.x, 0.0);
        GammaGeometry { coord, pos, tangent_w, t_tau, t_perp_tau, m_tau_w }
    }

    /// Foot point and signed distance for an aircraft at `pos` moving with
    /// τ-frame velocity `v_k_tau`.
    pub fn to_gamma(&self, pos: &SphericalPos, v_k_tau: &Vec3) -> Result<GammaCoord, GuidanceError> {
        self.locate(pos, v_k_tau, None).map(|g| g.coord)
    }

    /// As [`to_gamma`](Self::to_gamma) but restricted to foot points within
    /// `window` rad of `s_hint`, falling back to the global search when none
    /// exists. Keeps the branch continuous near the self-intersection.
    pub fn to_gamma_near(
        &self,
        pos: &SphericalPos,
        v_k_tau: &Vec3,
        s_hint: f64,
        window: f64,
    ) -> Result<GammaGeometry, GuidanceError> {
        self.locate(pos, v_k_tau, Some((s_hint, window)))
    }

    /// Full geometry from a global search.
    pub fn locate_geometry(&self, pos: &SphericalPos, v_k_tau: &Vec3) -> Result<GammaGeometry, GuidanceError> {
        self.locate(pos, v_k_tau, None)
    }

    fn locate(
        &self,
        pos: &SphericalPos,
        v_k_tau: &Vec3,
        hint: Option<(f64, f64)>,
    ) -> Result<GammaGeometry, GuidanceError> {
        let h = pos.h_tau;
        let k_hat = pos.radial();
        // Minimizing the angle is maximizing the cosine.
        let cosine = |s: f64| booth_point(&self.curve, s, h).point.dot(&k_hat) / h;
        let step = 2.0 * PI / SCAN_SAMPLES as f64;
        let samples: Vec<f64> = (0..SCAN_SAMPLES).map(|j| cosine(j as f64 * step)).collect();
        let mut cands: Vec<(f64, f64)> = Vec::new();
        for j in 0..SCAN_SAMPLES {
            let prev = samples[(j + SCAN_SAMPLES - 1) % SCAN_SAMPLES];
            let next = samples[(j + 1) % SCAN_SAMPLES];
            if samples[j] >= prev && samples[j] > next {
                let s0 = j as f64 * step;
                let s = golden_max(&cosine, s0 - step, s0 + step);
                let s = polish(&self.curve, s, h, &k_hat);
                let d = h * angle_between(&booth_point(&self.curve, s, h).point, &k_hat);
                cands.push((wrap_2pi(s), d));
            }
        }
        if let Some((s_hint, window)) = hint {
            let near: Vec<(f64, f64)> =
                cands.iter().copied().filter(|(s, _)| wrap_pi(s - s_hint).abs() <= window).collect();
            if !near.is_empty() {
                cands = near;
            }
        }
        let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let mut ties: Vec<(f64, f64)> = Vec::new();
        for &(s, d) in cands.iter().filter(|c| c.1 <= best + TIE_TOLERANCE) {
            if !ties.iter().any(|(t, _)| wrap_pi(t - s).abs() < 1e-6) {
                ties.push((s, d));
            }
        }
        let (s, dist) = if ties.len() == 1 {
            ties[0]
        } else {
            let v_h = Vec3::new(v_k_tau.x, v_k_tau.y, 0.0);
            let vn = v_h.norm();
            if vn < 1e-12 {
                return Err(GuidanceError::Ambiguous);
            }
            let m_tau_w = pos.m_tau_w();
            let score = |s: f64| {
                let t = m_tau_w * booth_point(&self.curve, s, h).tangent;
                let t = Vec3::new(t.x, t.y, 0.0);
                t.dot(&v_h) / (t.norm() * vn)
            };
            // First strict maximum wins.
            let mut pick = ties[0];
            let mut best_score = score(pick.0);
            for &cand in &ties[1..] {
                let sc = score(cand.0);
                if sc > best_score {
                    best_score = sc;
                    pick = cand;
                }
            }
            pick
        };
        let bp = booth_point(&self.curve, s, h);
        let c_hat = bp.point / h;
        let t_hat = unit_tangent(&bp, &c_hat)?;
        let side = c_hat.cross(&t_hat).dot(&(k_hat - c_hat * k_hat.dot(&c_hat)));
        let sigma = if side < 0.0 { -dist } else { dist };
        if sigma.abs() > self.sigma_max {
            return Err(GuidanceError::OutOfBand { sigma, sigma_max: self.sigma_max });
        }
        let coord = GammaCoord { s, sigma };
        Ok(self.geometry_with(coord, *pos, bp.tangent))
    }

    /// ṡ and σ̇ from the τ-frame kinematic velocity.
    pub fn gamma_rates(&self, geo: &GammaGeometry, v_k_tau: &Vec3) -> Result<GammaRates, GuidanceError> {
        let tn = geo.t_tau.norm();
        if tn <= 1e-12 {
            return Err(GuidanceError::DegenerateTangent(tn));
        }
        Ok(GammaRates {
            s_dot: geo.t_tau.dot(v_k_tau) / (tn * self.l_gamma),
            sigma_dot: geo.t_perp_tau.dot(v_k_tau) / tn,
        })
    }

    /// Coefficient vector g with (ṡ, σ̇, ḣ_τ)·(q1, q2, q3) = g·v_k_tau.
    pub fn position_costate_direction(&self, geo: &GammaGeometry, q: [f64; 3]) -> Vec3 {
        let tn = geo.t_tau.norm();
        geo.t_tau * (q[0] / (tn * self.l_gamma)) + geo.t_perp_tau * (q[1] / tn)
            - Vec3::new(0.0, 0.0, q[2])
    }
}

fn unit_tangent(bp: &BoothPoint, c_hat: &Vec3) -> Result<Vec3, GuidanceError> {
    let t = bp.tangent - c_hat * bp.tangent.dot(c_hat);
    let n = t.norm();
    if n <= 1e-12 {
        return Err(GuidanceError::DegenerateTangent(n));
    }
    Ok(t / n)
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Secant refinement on the foot-point condition K·t(s) = 0, which has a
/// simple root; the golden-section stage only resolves a flat maximum.
fn polish(curve: &BoothCurve, s: f64, h: f64, k_hat: &Vec3) -> f64 {
    let g = |s: f64| booth_point(curve, s, h).tangent.dot(k_hat);
    let (mut s0, mut s1) = (s - 1e-7, s);
    let (mut g0, mut g1) = (g(s0), g(s1));
    for _ in 0..4 {
        if g1 == g0 {
            break;
        }
        let s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
        if !s2.is_finite() || (s2 - s).abs() > 1e-3 {
            return s;
        }
        s0 = s1;
        g0 = g1;
        s1 = s2;
        g1 = g(s1);
    }
    s1
}

/// τ-frame course and path command: γ = 0 and the tangent course offset by
/// arctan(σ/δ0) toward the curve.
pub fn commanded_angles(geo: &GammaGeometry, delta0: f64) -> (f64, f64) {
    let chi_par = geo.t_tau.y.atan2(geo.t_tau.x);
    let sigma = geo.coord.sigma;
    let d_chi = (sigma.signum() * sigma.abs() / delta0).atan();
    (wrap_pi(chi_par + d_chi), 0.0)
}
