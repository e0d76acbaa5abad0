mod common;

use std::f64::consts::PI;

use common::ORIGIN;
use minnaert::oracle::spheroid_area;
use minnaert::vec3;
use minnaert::{make_ellipsoid, make_sphere, make_volume_quadrature, scale_mesh, ScalingMap};
use proptest::prelude::*;

#[test]
fn normals_are_unit_and_outward() {
    for mesh in [
        make_sphere(ORIGIN, 1.0, 3).unwrap(),
        make_ellipsoid([0.5, -0.2, 1.0], [1.0, 1.5, 2.0], 2).unwrap(),
    ] {
        let b = mesh.barycenter();
        for (n, c) in mesh.normals().iter().zip(mesh.centroids()) {
            assert!((vec3::norm(*n) - 1.0).abs() <= 1e-12);
            assert!(vec3::dot(*n, vec3::sub(*c, b)) > 0.0);
        }
    }
}

#[test]
fn sphere_area_and_panel_count() {
    let unit = make_sphere(ORIGIN, 1.0, 3).unwrap();
    assert_eq!(unit.len(), 1280);
    assert!((unit.total_area() / (4.0 * PI) - 1.0).abs() <= 1e-2);
    let two = make_sphere(ORIGIN, 2.0, 3).unwrap();
    assert!((two.total_area() / (16.0 * PI) - 1.0).abs() <= 1e-2);
}

#[test]
fn icosahedron_area_is_the_flat_face_sum() {
    let mesh = make_sphere(ORIGIN, 1.0, 0).unwrap();
    assert_eq!(mesh.len(), 20);
    // Regular icosahedron inscribed in the unit sphere.
    let edge = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
    let exact = 5.0 * 3f64.sqrt() * edge * edge;
    assert!((mesh.total_area() - exact).abs() <= 1e-12 * exact);
}

#[test]
fn area_error_decreases_through_level_five() {
    let errors: Vec<f64> = (1..=5)
        .map(|l| (make_sphere(ORIGIN, 1.0, l).unwrap().total_area() - 4.0 * PI).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn discrete_gauss_identity() {
    for mesh in [
        make_sphere(ORIGIN, 1.0, 3).unwrap(),
        make_ellipsoid(ORIGIN, [2.0, 1.0, 1.0], 3).unwrap(),
    ] {
        let flux: f64 = (0..mesh.len())
            .map(|i| mesh.areas()[i] * vec3::dot(mesh.normals()[i], mesh.centroids()[i]))
            .sum();
        let v = mesh.enclosed_volume();
        assert!((flux / 3.0 - v).abs() <= 1e-2 * v);
    }
}

#[test]
fn identity_stretch_reproduces_the_sphere() {
    let s = make_sphere(ORIGIN, 1.0, 3).unwrap();
    let e = make_ellipsoid(ORIGIN, [1.0, 1.0, 1.0], 3).unwrap();
    for (a, b) in s.vertices().iter().zip(e.vertices()) {
        assert!(vec3::dist(*a, *b) <= 1e-14);
    }
}

#[test]
fn ellipsoid_area_and_volume() {
    let prolate = make_ellipsoid(ORIGIN, [1.0, 1.0, 2.0], 3).unwrap();
    let exact = spheroid_area(1.0, 2.0);
    assert!((exact - 21.48).abs() < 5e-3);
    assert!((prolate.total_area() / exact - 1.0).abs() <= 1e-2);
    let e = make_ellipsoid(ORIGIN, [2.0, 1.0, 1.0], 3).unwrap();
    assert!((e.enclosed_volume() / (8.0 * PI / 3.0) - 1.0).abs() <= 1e-2);
}

#[test]
fn volume_quadrature_totals() {
    let sphere = make_sphere(ORIGIN, 1.0, 3).unwrap();
    let vq = make_volume_quadrature(&sphere, ORIGIN, 4).unwrap();
    assert!((vq.total_volume() / (4.0 * PI / 3.0) - 1.0).abs() <= 1e-2);
    let ones = vec![1.0; vq.len()];
    assert_eq!(vq.integrate(&ones), vq.weights().iter().sum::<f64>());
    let prolate = make_ellipsoid(ORIGIN, [1.0, 1.0, 2.0], 3).unwrap();
    let vq = make_volume_quadrature(&prolate, ORIGIN, 4).unwrap();
    assert!((vq.total_volume() / (8.0 * PI / 3.0) - 1.0).abs() <= 1e-2);
}

#[test]
fn volume_quadrature_integrates_radial_polynomials() {
    // ∫ |x|² over the inscribed polyhedron, by cones: Σ ∫ over each cone.
    let mesh = make_sphere(ORIGIN, 1.0, 2).unwrap();
    let lo = make_volume_quadrature(&mesh, ORIGIN, 3).unwrap();
    let hi = make_volume_quadrature(&mesh, ORIGIN, 8).unwrap();
    let f = |v: &minnaert::VolumeQuadrature| {
        let vals: Vec<f64> = v.nodes().iter().map(|x| vec3::dot(*x, *x)).collect();
        v.integrate(&vals)
    };
    assert!((f(&lo) - f(&hi)).abs() <= 1e-2 * f(&hi));
}

#[test]
fn scaling_the_sphere() {
    let mesh = make_sphere(ORIGIN, 1.0, 3).unwrap();
    let half = scale_mesh(&mesh, ScalingMap::new(ORIGIN, 0.5).unwrap()).unwrap();
    assert!((half.total_area() - 0.25 * mesh.total_area()).abs() <= 1e-12 * mesh.total_area());
    let same = scale_mesh(&mesh, ScalingMap::new([1.0, 2.0, 3.0], 1.0).unwrap()).unwrap();
    assert_eq!(same.vertices(), mesh.vertices());
    assert_eq!(same.panels(), mesh.panels());
}

#[test]
fn scaling_rejects_nonpositive_factors() {
    assert!(ScalingMap::new(ORIGIN, 0.0).is_err());
    assert!(ScalingMap::new(ORIGIN, -1.0).is_err());
    assert!(make_sphere(ORIGIN, -1.0, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_round_trip(
        eps in 0.01f64..10.0,
        cx in -2.0f64..2.0,
        cy in -2.0f64..2.0,
        cz in -2.0f64..2.0,
    ) {
        let mesh = make_sphere([0.3, -0.1, 0.2], 1.0, 1).unwrap();
        let map = ScalingMap::new([cx, cy, cz], eps).unwrap();
        let there = scale_mesh(&mesh, map).unwrap();
        let back = scale_mesh(&there, map.inverse()).unwrap();
        for (a, b) in mesh.vertices().iter().zip(back.vertices()) {
            prop_assert!(vec3::dist(*a, *b) <= 1e-14 * (1.0 + vec3::norm(*a) + vec3::norm([cx, cy, cz])) * 4.0);
        }
        prop_assert!((there.total_area() - eps * eps * mesh.total_area()).abs() <= 1e-12 * there.total_area());
    }
}
