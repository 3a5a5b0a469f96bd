//! Direction-cosine matrices between the flight frames, spherical position
//! helpers and closed-form great-circle geodesy.
//!
//! Frame conventions:
//! * `O`: north-east-down.
//! * `W`: x along the mean wind, z up. Aircraft positions are spherical in W.
//! * `τ`: tangential frame at the aircraft; x north (increasing φ), y east
//!   (increasing λ), z toward the origin.
//! * `Ā`: O rotated by the course and path angle; `A` is Ā banked by μ;
//!   `B` is A pitched by the angle of attack.
//!
//! A matrix `M_XY` maps coordinates from frame Y to frame X.

use nalgebra::{Matrix3, Vector2, Vector3};
use std::f64::consts::PI;
use std::ops::Mul;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Latitudes closer than this to ±π/2 are rejected.
pub const POLE_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("non-finite angle {name} = {value}")]
    NonFiniteAngle { name: &'static str, value: f64 },
    #[error("latitude {0} rad is within the pole margin; longitude is undefined")]
    DegenerateLongitude(f64),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("antipodal points: great-circle direction is undefined")]
    Antipodal,
}

/// Frame pair with the angles that parameterize its rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FramePair {
    /// `M_AB(α, β)`.
    AB { alpha: f64, beta: f64 },
    /// `M_τW(λ, φ)`.
    TauW { lambda: f64, phi: f64 },
    /// `M_OW(ξ)`.
    OW { xi: f64 },
    /// `M_ĀA(μ)`.
    AbarA { mu: f64 },
    /// `M_ĀO(χ, γ)`.
    AbarO { chi: f64, gamma: f64 },
    /// `M_WP(ψ0)`.
    WP { psi0: f64 },
}

/// Proper orthogonal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

fn check(name: &'static str, value: f64) -> Result<(), FrameError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(FrameError::NonFiniteAngle { name, value })
    }
}

impl Rotation3 {
    /// Build the matrix for `pair`, checking that every angle is finite.
    pub fn build(pair: FramePair) -> Result<Self, FrameError> {
        match pair {
            FramePair::AB { alpha, beta } => {
                check("alpha", alpha)?;
                check("beta", beta)?;
                Ok(Self::ab(alpha, beta))
            }
            FramePair::TauW { lambda, phi } => {
                check("lambda", lambda)?;
                check("phi", phi)?;
                Ok(Self::tau_w(lambda, phi))
            }
            FramePair::OW { xi } => {
                check("xi", xi)?;
                Ok(Self::o_w(xi))
            }
            FramePair::AbarA { mu } => {
                check("mu", mu)?;
                Ok(Self::abar_a(mu))
            }
            FramePair::AbarO { chi, gamma } => {
                check("chi", chi)?;
                check("gamma", gamma)?;
                Ok(Self::abar_o(chi, gamma))
            }
            FramePair::WP { psi0 } => {
                check("psi0", psi0)?;
                Ok(Self::w_p(psi0))
            }
        }
    }

    #[rustfmt::skip]
    pub fn ab(alpha: f64, beta: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        Self(Matrix3::new(
            ca * cb, sb, sa * cb,
            -ca * sb, cb, -sa * sb,
            -sa, 0.0, ca,
        ))
    }

    #[rustfmt::skip]
    pub fn tau_w(lambda: f64, phi: f64) -> Self {
        let (sl, cl) = lambda.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(Matrix3::new(
            -sp * cl, -sp * sl, cp,
            -sl, cl, 0.0,
            -cp * cl, -cp * sl, -sp,
        ))
    }

    #[rustfmt::skip]
    pub fn o_w(xi: f64) -> Self {
        let (s, c) = xi.sin_cos();
        Self(Matrix3::new(
            c, s, 0.0,
            s, -c, 0.0,
            0.0, 0.0, -1.0,
        ))
    }

    #[rustfmt::skip]
    pub fn abar_a(mu: f64) -> Self {
        let (s, c) = mu.sin_cos();
        Self(Matrix3::new(
            1.0, 0.0, 0.0,
            0.0, c, -s,
            0.0, s, c,
        ))
    }

    #[rustfmt::skip]
    pub fn abar_o(chi: f64, gamma: f64) -> Self {
        let (sx, cx) = chi.sin_cos();
        let (sg, cg) = gamma.sin_cos();
        Self(Matrix3::new(
            cx * cg, sx * cg, -sg,
            -sx, cx, 0.0,
            cx * sg, sx * sg, cg,
        ))
    }

    #[rustfmt::skip]
    pub fn w_p(psi0: f64) -> Self {
        let (s, c) = psi0.sin_cos();
        Self(Matrix3::new(
            c, 0.0, -s,
            0.0, 1.0, 0.0,
            s, 0.0, c,
        ))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// The inverse rotation.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Entries in row-major order.
    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }
}

impl Mul<Vec3> for Rotation3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.0 * v
    }
}

impl Mul<&Vec3> for &Rotation3 {
    type Output = Vec3;
    fn mul(self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

/// Wrap to [−π, π).
pub fn wrap_pi(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let y = x - two_pi * ((x + PI) / two_pi).floor();
    // Rounding can land exactly on +π.
    if y >= PI {
        y - two_pi
    } else {
        y
    }
}

/// Wrap to [0, 2π).
pub fn wrap_2pi(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let y = x - two_pi * (x / two_pi).floor();
    if y >= two_pi {
        0.0
    } else {
        y
    }
}

/// Aircraft position relative to the ground station, spherical in W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPos {
    pub lambda: f64,
    pub phi: f64,
    pub h_tau: f64,
}

impl SphericalPos {
    /// Validated constructor; wraps λ.
    pub fn new(lambda: f64, phi: f64, h_tau: f64) -> Result<Self, FrameError> {
        check("lambda", lambda)?;
        check("phi", phi)?;
        if !(h_tau.is_finite() && h_tau > 0.0) {
            return Err(FrameError::InvalidRadius(h_tau));
        }
        if phi.abs() >= PI / 2.0 - POLE_MARGIN {
            return Err(FrameError::DegenerateLongitude(phi));
        }
        Ok(Self { lambda: wrap_pi(lambda), phi, h_tau })
    }

    /// Outward unit normal in W.
    pub fn radial(&self) -> Vec3 {
        unit_from_angles(self.lambda, self.phi)
    }

    pub fn m_tau_w(&self) -> Rotation3 {
        Rotation3::tau_w(self.lambda, self.phi)
    }
}

/// Unit vector in W for longitude `lambda`, latitude `phi`.
pub fn unit_from_angles(lambda: f64, phi: f64) -> Vec3 {
    let (sl, cl) = lambda.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(cl * cp, sl * cp, sp)
}

pub fn cart_from_spherical(p: &SphericalPos) -> Vec3 {
    p.radial() * p.h_tau
}

pub fn spherical_from_cart(v: &Vec3) -> Result<SphericalPos, FrameError> {
    let r = v.norm();
    if !(r.is_finite() && r > 0.0) {
        return Err(FrameError::InvalidRadius(r));
    }
    let horiz = v.x.hypot(v.y);
    let phi = v.z.atan2(horiz);
    if phi.abs() >= PI / 2.0 - POLE_MARGIN {
        return Err(FrameError::DegenerateLongitude(phi));
    }
    Ok(SphericalPos { lambda: wrap_pi(v.y.atan2(v.x)), phi, h_tau: r })
}

/// Great-circle distance and the τ-frame departure direction (x north,
/// y east) at the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub distance: f64,
    pub direction: Vector2<f64>,
}

/// Central angles above `π − ANTIPODAL_TOL` count as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-9;

pub fn geodesic(from: (f64, f64), to: (f64, f64), radius: f64) -> Result<Geodesic, FrameError> {
    for (name, v) in [("lambda", from.0), ("phi", from.1), ("lambda", to.0), ("phi", to.1)] {
        check(name, v)?;
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(FrameError::InvalidRadius(radius));
    }
    let a = unit_from_angles(from.0, from.1);
    let b = unit_from_angles(to.0, to.1);
    let angle = a.cross(&b).norm().atan2(a.dot(&b));
    if angle > PI - ANTIPODAL_TOL {
        return Err(FrameError::Antipodal);
    }
    if angle == 0.0 {
        return Ok(Geodesic { distance: 0.0, direction: Vector2::new(1.0, 0.0) });
    }
    let (phi1, phi2) = (from.1, to.1);
    let dl = to.0 - from.0;
    let y = dl.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dl.cos();
    let bearing = y.atan2(x);
    Ok(Geodesic {
        distance: radius * angle,
        direction: Vector2::new(bearing.cos(), bearing.sin()),
    })
}

/// Express an aircraft-centred direction given by τ-frame course/path
/// angles as O-frame course/path angles.
pub fn tau_angles_to_o(pos: &SphericalPos, xi: f64, chi_tau: f64, gamma_tau: f64) -> (f64, f64) {
    let (sc, cc) = chi_tau.sin_cos();
    let (sg, cg) = gamma_tau.sin_cos();
    let d_tau = Vec3::new(cg * cc, cg * sc, -sg);
    let d_o = Rotation3::o_w(xi) * (pos.m_tau_w().transpose() * d_tau);
    (d_o.y.atan2(d_o.x), (-d_o.z).clamp(-1.0, 1.0).asin())
}
