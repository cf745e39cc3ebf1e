mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;
use sphcoords::geometry::{
    apply, area, procrustes_align, rotate_about, signed_area, tangent_project, track_barycenter,
    SpherePoint, SphericalTriangle, FOUR_PI,
};

fn point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("away from the origin", |(x, y, z)| {
            x * x + y * y + z * z > 0.01
        })
        .prop_map(|(x, y, z)| SpherePoint::new(x, y, z).unwrap())
}

fn rotation() -> impl Strategy<Value = Matrix3<f64>> {
    (-PI..PI, -PI..PI, -PI..PI)
        .prop_map(|(a, b, c)| *Rotation3::from_euler_angles(a, b, c).matrix())
}

fn sp(x: f64, y: f64, z: f64) -> SpherePoint {
    SpherePoint::new(x, y, z).unwrap()
}

/// Triangles with sides at least ~0.06 rad and away from a great circle.
fn triangle() -> impl Strategy<Value = [SpherePoint; 3]> {
    (point(), point(), point())
        .prop_filter("non-degenerate", |(a, b, c)| {
            let (a, b, c) = (a.vector(), b.vector(), c.vector());
            let side = [a.cross(b).norm(), b.cross(c).norm(), c.cross(a).norm()]
                .into_iter()
                .fold(1.0, f64::min);
            side > 0.06 && a.dot(&b.cross(c)).abs() > 1e-3
        })
        .prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #[test]
    fn lhuilier_agrees_with_girard(t in triangle()) {
        let inside = SpherePoint::from_vector(t[0].vector() + t[1].vector() + t[2].vector()).unwrap();
        let tri = SphericalTriangle::new(t[0], t[1], t[2], inside);
        let g = common::girard_excess(t[0].vector(), t[1].vector(), t[2].vector());
        prop_assert!((area(&tri) - g).abs() < 1e-9);
    }

    #[test]
    fn complementary_areas_fill_the_sphere(t in triangle()) {
        let inside = SpherePoint::from_vector(t[0].vector() + t[1].vector() + t[2].vector()).unwrap();
        let small = SphericalTriangle::new(t[0], t[1], t[2], inside);
        let big = SphericalTriangle::new(t[0], t[1], t[2], inside.antipode());
        prop_assert!((area(&small) + area(&big) - FOUR_PI).abs() < 1e-9);
        prop_assert!((0.0..=FOUR_PI).contains(&area(&big)));
        // the two regions have opposite boundary orientations
        prop_assert!(signed_area(&small) * signed_area(&big) < 0.0);
    }

    #[test]
    fn tangent_projection(p in point(), v in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)) {
        let v = Vector3::new(v.0, v.1, v.2);
        let t = tangent_project(&p, &v);
        prop_assert!(t.dot(p.vector()).abs() < 1e-12);
        prop_assert!((tangent_project(&p, &t) - t).norm() < 1e-12);
    }

    #[test]
    fn unit_norm_after_construction(x in -1e6f64..1e6, y in -1e6f64..1e6, z in 1.0f64..1e6) {
        let p = sp(x, y, z);
        prop_assert!((p.vector().norm() - 1.0).abs() < 1e-12);
        let q = SpherePoint::from_az_el(p.azimuth(), p.elevation());
        prop_assert!((q.vector() - p.vector()).norm() < 1e-12);
    }

    #[test]
    fn rotations_keep_points_on_the_sphere(axis in point(), p in point(), angle in -10.0f64..10.0) {
        let r = rotate_about(&axis, angle, p.vector());
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        prop_assert!((r.dot(axis.vector()) - p.dot(&axis)).abs() < 1e-12);
    }

    #[test]
    fn procrustes_identity_and_rotation(pts in prop::collection::vec(point(), 4..20), q in rotation()) {
        let id = procrustes_align(&pts, &pts).unwrap();
        prop_assert!((id - Matrix3::identity()).norm() < 1e-9);
        let moved: Vec<SpherePoint> = pts.iter().map(|p| apply(&q, p)).collect();
        let found = procrustes_align(&pts, &moved).unwrap();
        prop_assert!((found - q).norm() < 1e-8);
    }

    #[test]
    fn alignment_residual_ignores_prerotation(
        a in prop::collection::vec(point(), 4..20),
        seed in prop::collection::vec(point(), 20),
        q in rotation(),
    ) {
        let b = &seed[..a.len()];
        let residual = |x: &[SpherePoint]| {
            let m = procrustes_align(x, b).unwrap();
            x.iter().zip(b).map(|(p, t)| (apply(&m, p).vector() - t.vector()).norm_squared()).sum::<f64>()
        };
        let rotated: Vec<SpherePoint> = a.iter().map(|p| apply(&q, p)).collect();
        prop_assert!((residual(&a) - residual(&rotated)).abs() < 1e-8);
    }

    #[test]
    fn tracked_barycenter_keeps_its_side(t in triangle()) {
        let inside = SpherePoint::from_vector(t[0].vector() + t[1].vector() + t[2].vector()).unwrap();
        for b in [inside, inside.antipode()] {
            let tri = SphericalTriangle::new(t[0], t[1], t[2], b);
            let next = SphericalTriangle { barycenter: track_barycenter(&tri), ..tri };
            prop_assert!((area(&next) - area(&tri)).abs() < 1e-12);
        }
    }
}

fn octant(bary: SpherePoint) -> SphericalTriangle {
    SphericalTriangle::new(sp(1., 0., 0.), sp(0., 1., 0.), sp(0., 0., 1.), bary)
}

#[test]
fn octant_areas() {
    let inside = sp(1., 1., 1.);
    assert_abs_diff_eq!(area(&octant(inside)), PI / 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        area(&octant(inside.antipode())),
        FOUR_PI - PI / 2.0,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(signed_area(&octant(inside)), PI / 2.0, epsilon = 1e-12);
}

#[test]
fn coincident_vertices_have_no_area() {
    let a = sp(0., 0., 1.);
    let t = SphericalTriangle::new(a, a, sp(1., 0., 0.), sp(1., 0., 1.));
    assert_eq!(area(&t), 0.0);
    assert_eq!(signed_area(&t), 0.0);
    let t = SphericalTriangle::new(a, a, a, a);
    assert_eq!(area(&t), 0.0);
}

#[test]
fn wound_faces() {
    let p = sp(1., 0., 0.);
    for n in [1i64, -1, 3] {
        let t = SphericalTriangle {
            winding: n,
            orientation: n.signum() as i8,
            ..SphericalTriangle::new(p, p, p, p)
        };
        assert_eq!(area(&t), FOUR_PI * n.abs() as f64);
        assert_eq!(signed_area(&t), FOUR_PI * n as f64);
    }
}

#[test]
fn hemisphere_sized_triangle() {
    // three points on the equator spaced by 120 degrees bound a hemisphere
    let pts: Vec<SpherePoint> = (0..3)
        .map(|k| SpherePoint::from_az_el(2.0 * PI * k as f64 / 3.0, 1e-9))
        .collect();
    let t = SphericalTriangle::new(pts[0], pts[1], pts[2], sp(0., 0., 1.));
    assert_abs_diff_eq!(area(&t), 2.0 * PI, epsilon = 1e-7);
}

#[test]
fn degenerate_alignment_is_rejected() {
    let p = sp(1., 0., 0.);
    assert!(procrustes_align(&[p, p, p], &[p, p, p]).is_err());
    assert!(procrustes_align(&[p, p, p], &[p, p]).is_err());
    assert!(SpherePoint::new(0.0, 0.0, 0.0).is_err());
}
