mod common;

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use proptest::prelude::*;
use sphcoords::cohomology::{Cochain, Coefficients};
use sphcoords::complex::{FilteredComplex, FilteredSimplex, Simplex};
use sphcoords::energy::{
    face_contributions, total_energy, total_energy_1d, vertex_updates, vertex_updates_1d,
    EnergyConfig,
};
use sphcoords::geometry::{area, SpherePoint, FOUR_PI};
use sphcoords::mapping::{initial_circular_map, initial_spherical_map, SphericalMapState};

fn s(v: &[usize]) -> Simplex {
    Simplex::new(v).unwrap()
}

fn complex(faces: &[&[usize]]) -> FilteredComplex {
    let list: Vec<FilteredSimplex> = faces
        .iter()
        .map(|f| FilteredSimplex {
            vertices: s(f),
            value: 1.0,
        })
        .collect();
    FilteredComplex::from_simplices(&list).unwrap()
}

fn flat_state(c: &FilteredComplex) -> SphericalMapState {
    initial_spherical_map(
        &Cochain::zero(2, Coefficients::Integers),
        c,
        SpherePoint::new(1.0, 0.0, 0.0).unwrap(),
    )
    .unwrap()
}

/// Places the vertices and puts every barycenter inside the small triangle.
fn place(m: &mut SphericalMapState, pts: &[SpherePoint]) {
    for (v, p) in pts.iter().enumerate() {
        m.positions[v] = *p;
    }
    for i in 0..m.faces().len() {
        let [a, b, c] = m.face_vertices(i);
        let sum = pts[a].vector() + pts[b].vector() + pts[c].vector();
        m.face_states[i].barycenter = SpherePoint::from_vector(sum).unwrap();
        m.face_states[i].orientation = 1;
    }
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("away from the origin", |(x, y, z)| {
            x * x + y * y + z * z > 0.01
        })
        .prop_map(|(x, y, z)| SpherePoint::new(x, y, z).unwrap())
}

fn triangle() -> impl Strategy<Value = Vec<SpherePoint>> {
    prop::collection::vec(point(), 3).prop_filter("non-degenerate", |t| {
        let (a, b, c) = (t[0].vector(), t[1].vector(), t[2].vector());
        let side = [a.cross(b).norm(), b.cross(c).norm(), c.cross(a).norm()]
            .into_iter()
            .fold(1.0, f64::min);
        side > 0.05 && a.dot(&b.cross(c)).abs() > 1e-3
    })
}

fn energy_kind() -> impl Strategy<Value = EnergyConfig> {
    prop_oneof![
        Just(EnergyConfig::harmonic()),
        (0.5f64..3.0, 0.0f64..0.05).prop_map(|(k, r)| EnergyConfig::spring(k, r))
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn small_steps_against_the_update_descend(t in triangle(), corner in 0usize..3, cfg in energy_kind()) {
        let c = complex(&[&[0, 1, 2]]);
        let mut m = flat_state(&c);
        place(&mut m, &t);
        let before = area(&m.triangle(0));
        prop_assume!(before > cfg.rest + 1e-6);
        let dir = face_contributions(&m, &cfg, 0)[corner];
        prop_assert!(dir.norm() > 0.0);
        let p = m.positions[corner];
        m.positions[corner] = SpherePoint::from_vector(p.vector() - 1e-6 * dir.normalize()).unwrap();
        let after = area(&m.triangle(0));
        prop_assert!(cfg.term(after) < cfg.term(before));
    }
}

proptest! {
    #[test]
    fn updates_add_over_faces(pts in prop::collection::vec(point(), 4), cfg in energy_kind()) {
        let both = complex(&[&[0, 1, 2], &[1, 2, 3]]);
        let mut m = flat_state(&both);
        place(&mut m, &pts);
        let total = vertex_updates(&m, &cfg);
        let mut sum = vec![Vector3::zeros(); 4];
        for face in [[0usize, 1, 2], [1, 2, 3]] {
            let c = complex(&[&face]);
            let mut single = flat_state(&c);
            single.positions.resize(4, pts[0]);
            place(&mut single, &pts);
            for (acc, u) in sum.iter_mut().zip(vertex_updates(&single, &cfg)) {
                *acc += u;
            }
        }
        for (a, b) in total.iter().zip(&sum) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn updates_are_tangent(pts in prop::collection::vec(point(), 4), cfg in energy_kind()) {
        let c = complex(&[&[0, 1, 2], &[1, 2, 3], &[0, 2, 3]]);
        let mut m = flat_state(&c);
        place(&mut m, &pts);
        for (u, p) in vertex_updates(&m, &cfg).iter().zip(&m.positions) {
            prop_assert!(u.dot(p.vector()).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_spring_without_rest_is_harmonic(pts in prop::collection::vec(point(), 4)) {
        let c = complex(&[&[0, 1, 2], &[1, 2, 3], &[0, 2, 3]]);
        let mut m = flat_state(&c);
        place(&mut m, &pts);
        prop_assert_eq!(total_energy(&m, &EnergyConfig::harmonic()), total_energy(&m, &EnergyConfig::spring(1.0, 0.0)));
    }
}

#[test]
fn flat_and_wound_energies() {
    let c = common::tetrahedron_boundary();
    let m = flat_state(&c);
    assert_eq!(total_energy(&m, &EnergyConfig::harmonic()), 0.0);
    assert!(vertex_updates(&m, &EnergyConfig::harmonic())
        .iter()
        .all(|u| u.norm() == 0.0));
    let m = initial_spherical_map(
        &common::unit_cocycle(&c),
        &c,
        SpherePoint::new(1.0, 0.0, 0.0).unwrap(),
    )
    .unwrap();
    let e = total_energy(&m, &EnergyConfig::harmonic());
    assert!((e - 0.5 * FOUR_PI * FOUR_PI).abs() < 1e-12);
    assert!((e - 78.957).abs() < 1e-3);
}

#[test]
fn spring_at_rest_contributes_nothing() {
    let c = complex(&[&[0, 1, 2]]);
    let mut m = flat_state(&c);
    place(
        &mut m,
        &[
            SpherePoint::new(1., 0., 0.).unwrap(),
            SpherePoint::new(0., 1., 0.).unwrap(),
            SpherePoint::new(0., 0., 1.).unwrap(),
        ],
    );
    let a = area(&m.triangle(0));
    let cfg = EnergyConfig::spring(2.0, a);
    assert!(face_contributions(&m, &cfg, 0)
        .iter()
        .all(|u| u.norm() == 0.0));
    assert_eq!(total_energy(&m, &cfg), 0.0);
}

#[test]
fn octant_corners_shrink_the_area() {
    let c = complex(&[&[0, 1, 2]]);
    let mut m = flat_state(&c);
    let pts = [
        SpherePoint::new(1., 0., 0.).unwrap(),
        SpherePoint::new(0., 1., 0.).unwrap(),
        SpherePoint::new(0., 0., 1.).unwrap(),
    ];
    place(&mut m, &pts);
    let cfg = EnergyConfig::harmonic();
    let dirs = face_contributions(&m, &cfg, 0);
    for k in 0..3 {
        let h = 1e-6;
        let mut fwd = m.clone();
        fwd.positions[k] =
            SpherePoint::from_vector(pts[k].vector() - h * dirs[k].normalize()).unwrap();
        let mut back = m.clone();
        back.positions[k] =
            SpherePoint::from_vector(pts[k].vector() + h * dirs[k].normalize()).unwrap();
        assert!(area(&fwd.triangle(0)) < area(&back.triangle(0)));
    }
}

fn cycle(n: usize) -> FilteredComplex {
    let list: Vec<FilteredSimplex> = (0..n)
        .map(|i| FilteredSimplex {
            vertices: s(&[i, (i + 1) % n]),
            value: 1.0,
        })
        .collect();
    FilteredComplex::from_simplices(&list).unwrap()
}

#[test]
fn circular_energies() {
    let c = cycle(2);
    let alpha = Cochain::from_values(1, Coefficients::Integers, [(s(&[0, 1]), 1)]).unwrap();
    let m = initial_circular_map(&alpha, &c, 0.0).unwrap();
    assert!((total_energy_1d(&m, &EnergyConfig::harmonic()) - 0.5 * TAU * TAU).abs() < 1e-12);

    let zero =
        initial_circular_map(&Cochain::zero(1, Coefficients::Integers), &cycle(5), 1.0).unwrap();
    assert_eq!(total_energy_1d(&zero, &EnergyConfig::harmonic()), 0.0);

    let n = 8;
    let c = cycle(n);
    let mut m = initial_circular_map(&Cochain::zero(1, Coefficients::Integers), &c, 0.0).unwrap();
    for v in 0..n {
        m.angles[v] = TAU * v as f64 / n as f64;
    }
    // the closing edge [0, n-1] runs backwards, so total winding 1 needs no extra wrap
    let arc = TAU / n as f64;
    let e = total_energy_1d(&m, &EnergyConfig::harmonic());
    assert!((e - n as f64 * 0.5 * arc * arc).abs() < 1e-12);
    assert!(vertex_updates_1d(&m, &EnergyConfig::harmonic())
        .iter()
        .all(|u| u.abs() < 1e-12));
    let at_rest = EnergyConfig::spring(1.0, arc);
    assert!(total_energy_1d(&m, &at_rest) < 1e-24);
}

#[test]
fn long_edges_pull_their_ends_together() {
    let c = cycle(4);
    let mut m = initial_circular_map(&Cochain::zero(1, Coefficients::Integers), &c, 0.0).unwrap();
    m.angles = vec![0.0, 0.2, 0.4, 1.6];
    let u = vertex_updates_1d(&m, &EnergyConfig::harmonic());
    // edge [2, 3] is the long one: stepping against u moves 3 down and 2 up
    assert!(u[3] > 0.0 && u[2] < 0.0);
    let step = 1e-4;
    let mut moved = m.clone();
    for v in 0..4 {
        moved.angles[v] -= step * u[v];
    }
    assert!(
        total_energy_1d(&moved, &EnergyConfig::harmonic())
            < total_energy_1d(&m, &EnergyConfig::harmonic())
    );
    let _ = PI;
}
