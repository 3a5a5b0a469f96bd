use approx::assert_relative_eq;
use awe_core::frames::{
    cart_from_spherical, geodesic, spherical_from_cart, unit_from_angles, FrameError, FramePair, Rotation3,
    SphericalPos, Vec3,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn all_pairs(a: f64, b: f64) -> [FramePair; 6] {
    [
        FramePair::AB { alpha: a, beta: b },
        FramePair::TauW { lambda: a, phi: b },
        FramePair::OW { xi: a },
        FramePair::AbarA { mu: a },
        FramePair::AbarO { chi: a, gamma: b },
        FramePair::WP { psi0: b },
    ]
}

fn max_identity_error(m: &nalgebra::Matrix3<f64>) -> f64 {
    (m - nalgebra::Matrix3::identity()).abs().max()
}

/// Arc length of the chord between two unit vectors projected onto the
/// sphere, by composite Simpson over a dense parameter grid.
fn projected_chord_length(a: &Vec3, b: &Vec3, radius: f64, panels: usize) -> f64 {
    let speed = |t: f64| {
        let c = a * (1.0 - t) + b * t;
        let n = c.norm();
        let dc = b - a;
        // d/dt (c/|c|) = (dc − ĉ(ĉ·dc))/|c|
        let u = c / n;
        ((dc - u * u.dot(&dc)) / n).norm() * radius
    };
    let h = 1.0 / panels as f64;
    let mut sum = speed(0.0) + speed(1.0);
    for i in 1..panels {
        sum += speed(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn wind_to_ned_at_downwind_heading() {
    let m = Rotation3::build(FramePair::OW { xi: PI }).unwrap().to_rows();
    let want = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
    for (row, want_row) in m.iter().zip(&want) {
        for (x, w) in row.iter().zip(want_row) {
            assert!((x - w).abs() < 1e-15);
        }
    }
}

#[test]
fn positions_on_axes() {
    let p = cart_from_spherical(&SphericalPos::new(0.0, 0.0, 250.0).unwrap());
    assert_relative_eq!(p, Vec3::new(250.0, 0.0, 0.0), epsilon = 1e-12);
    let p = cart_from_spherical(&SphericalPos::new(PI / 2.0, 0.0, 1.0).unwrap());
    assert_relative_eq!(p, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
}

#[test]
fn invalid_positions_are_rejected() {
    assert!(matches!(SphericalPos::new(0.0, PI / 2.0, 1.0), Err(FrameError::DegenerateLongitude(_))));
    assert!(matches!(SphericalPos::new(0.0, 0.0, 0.0), Err(FrameError::InvalidRadius(_))));
    assert!(matches!(SphericalPos::new(f64::INFINITY, 0.0, 1.0), Err(FrameError::NonFiniteAngle { .. })));
    assert!(matches!(geodesic((0.0, 0.0), (0.1, 0.0), -1.0), Err(FrameError::InvalidRadius(_))));
}

#[test]
fn longitude_is_wrapped() {
    let p = SphericalPos::new(3.0 * PI + 0.25, 0.1, 10.0).unwrap();
    assert_relative_eq!(p.lambda, -PI + 0.25, epsilon = 1e-12);
}

#[test]
fn antipodal_pair_is_ambiguous() {
    assert_eq!(geodesic((0.2, 0.3), (0.2 - PI, -0.3), 10.0), Err(FrameError::Antipodal));
}

#[test]
fn quarter_circle() {
    let g = geodesic((0.0, 0.0), (PI / 2.0, 0.0), 1.0).unwrap();
    assert_relative_eq!(g.distance, PI / 2.0, epsilon = 1e-15);
    assert_eq!(geodesic((0.5, -0.2), (0.5, -0.2), 7.0).unwrap().distance, 0.0);
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn latitude() -> impl Strategy<Value = f64> {
    -1.5..1.5f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rotations_are_proper_and_orthogonal(a in angle(), b in angle()) {
        for pair in all_pairs(a, b) {
            let r = Rotation3::build(pair).unwrap();
            let m = r.matrix();
            prop_assert!(max_identity_error(&(m * m.transpose())) <= 1e-12, "{pair:?}");
            prop_assert!((m.determinant() - 1.0).abs() <= 1e-12, "{pair:?}");
            let back = (r * r.transpose()).matrix().to_owned();
            prop_assert!(max_identity_error(&back) <= 1e-12);
        }
    }

    #[test]
    fn spherical_round_trip(lambda in -PI..PI, phi in latitude(), h in 1.0..2000.0f64) {
        let p = SphericalPos::new(lambda, phi, h).unwrap();
        let back = spherical_from_cart(&cart_from_spherical(&p)).unwrap();
        let err = (cart_from_spherical(&back) - cart_from_spherical(&p)).norm();
        prop_assert!(err < 1e-9 * h);
        prop_assert!((back.h_tau - h).abs() < 1e-9 * h);
        prop_assert!((back.phi - phi).abs() < 1e-9);
    }

    #[test]
    fn geodesic_is_symmetric(l1 in -PI..PI, p1 in latitude(), l2 in -PI..PI, p2 in latitude()) {
        let ab = geodesic((l1, p1), (l2, p2), 3.0);
        let ba = geodesic((l2, p2), (l1, p1), 3.0);
        match (ab, ba) {
            (Ok(ab), Ok(ba)) => prop_assert!((ab.distance - ba.distance).abs() <= 1e-12 * ab.distance.max(1.0)),
            (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
            other => prop_assert!(false, "asymmetric outcome {other:?}"),
        }
    }

    #[test]
    fn geodesic_triangle_inequality(
        a in (-PI..PI, latitude()),
        b in (-PI..PI, latitude()),
        c in (-PI..PI, latitude()),
    ) {
        let d = |x: (f64, f64), y: (f64, f64)| geodesic(x, y, 1.0).map(|g| g.distance);
        if let (Ok(ab), Ok(bc), Ok(ac)) = (d(a, b), d(b, c), d(a, c)) {
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn geodesic_matches_quadrature(l1 in -PI..PI, p1 in latitude(), l2 in -PI..PI, p2 in latitude(), r in 1.0..500.0f64) {
        let a = unit_from_angles(l1, p1);
        let b = unit_from_angles(l2, p2);
        // The projected chord degenerates near antipodes.
        prop_assume!(a.dot(&b) > -0.9);
        let g = geodesic((l1, p1), (l2, p2), r).unwrap();
        prop_assume!(g.distance > 1e-6 * r);
        let quad = projected_chord_length(&a, &b, r, 2000);
        prop_assert!((g.distance - quad).abs() <= 1e-6 * quad, "{} vs {}", g.distance, quad);

        // Departure direction vs the chord's tangent at the start, in (north, east).
        let tangent = b - a * a.dot(&b);
        let north = Vec3::new(-p1.sin() * l1.cos(), -p1.sin() * l1.sin(), p1.cos());
        let east = Vec3::new(-l1.sin(), l1.cos(), 0.0);
        let dir = nalgebra::Vector2::new(tangent.dot(&north), tangent.dot(&east)).normalize();
        prop_assert!((dir - g.direction).norm() < 1e-9);
    }
}
