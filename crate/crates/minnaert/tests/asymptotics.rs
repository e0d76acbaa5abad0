mod common;

use std::f64::consts::PI;

use common::c;
use minnaert::asymptotics::{
    denominator, denominator_lower_bound_check, free_resolvent, hamiltonian_free_resolvent, minnaert_frequency,
    point_perturbation_resolvent, point_scatterer_field, resolvent_leading, resonance_first_order,
    AsymptoticConfig, LeadingForm, SourceBump, SourceQuadrature,
};
use minnaert::scattering::Medium;
use minnaert::{Error, C64};
use proptest::prelude::*;

fn canonical(eps: f64) -> AsymptoticConfig {
    AsymptoticConfig::sphere(1.0, Medium::canonical(eps)).unwrap()
}

fn green(z: C64, r: f64) -> C64 {
    (C64::i() * z * r).exp() / (4.0 * PI * r)
}

#[test]
fn minnaert_frequency_of_spheres() {
    let cfg = canonical(0.1);
    assert!((minnaert_frequency(&cfg) - 3f64.sqrt()).abs() <= 1e-12);
    assert_eq!(cfg.omega_m(), minnaert_frequency(&cfg));
    let mut m = Medium::canonical(0.1);
    m.k1 *= 4.0;
    let stiff = AsymptoticConfig::sphere(1.0, m).unwrap();
    assert!((minnaert_frequency(&stiff) / minnaert_frequency(&cfg) - 2.0).abs() <= 1e-12);
    for r in [0.5, 2.0, 3.0] {
        let cfg = AsymptoticConfig::sphere(r, Medium::canonical(0.1)).unwrap();
        assert!((minnaert_frequency(&cfg) - 3f64.sqrt() / r).abs() <= 1e-12);
    }
}

#[test]
fn denominator_values() {
    let cfg = canonical(0.1);
    let wm = cfg.omega_m();
    assert!((denominator(&cfg, c(0.0, 0.0), 0.1) - wm * wm).norm() <= 1e-14);
    let d = denominator(&cfg, c(wm, 0.0), 0.1);
    assert!((d - c(0.0, -0.1 * 3.0 * 3f64.sqrt())).norm() <= 1e-12, "{d}");
    let z = c(0.7, 0.4);
    let a = denominator(&cfg, -z.conj(), 0.1);
    let b = denominator(&cfg, z, 0.1).conj();
    assert!((a - b).norm() <= 1e-14);
}

#[test]
fn denominator_bound_on_the_canonical_window() {
    let cfg = canonical(0.01);
    let wm = cfg.omega_m();
    let samples: Vec<C64> = (0..10)
        .flat_map(|i| {
            (0..10).map(move |j| c(wm / 2.0 + 1.5 * wm * i as f64 / 9.0, j as f64 / 9.0))
        })
        .collect();
    let report = denominator_lower_bound_check(&cfg, &samples, 0.01).unwrap();
    assert_eq!(report.samples.len(), 100);
    assert!(report.all_pass());
    let imaginary = denominator_lower_bound_check(&cfg, &[c(0.0, 1.0)], 0.01).unwrap();
    assert!(imaginary.all_pass());
    let d_max = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d_min = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let edge = (1.0 / (2.0 * d_max)).min(1.0 / d_min);
    assert!(matches!(
        denominator_lower_bound_check(&cfg, &samples, edge),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        denominator_lower_bound_check(&cfg, &[c(1.0, -0.1)], 0.01),
        Err(Error::Domain(_))
    ));
}

#[test]
fn point_scatterer_coefficients() {
    let cfg = canonical(0.1);
    let x = [[2.0, 0.0, 0.0]];
    let zero = point_scatterer_field(&cfg, 1.0, 0.1, c(0.0, 0.0), &x).unwrap();
    assert_eq!(zero[0], c(0.0, 0.0));
    let wm = cfg.omega_m();
    for eps in [0.1, 0.01] {
        let v = point_scatterer_field(&cfg, wm, eps, c(1.0, 0.0), &x).unwrap()[0];
        let coef = v / green(c(wm, 0.0), 2.0);
        assert!((coef - c(0.0, 4.0 * PI / wm)).norm() <= 1e-12, "{coef}");
    }
    let v = point_scatterer_field(&cfg, 1.0, 0.1, c(1.0, 0.0), &x).unwrap()[0];
    let direct = (0.1 * 4.0 * PI / denominator(&cfg, c(1.0, 0.0), 0.1)).norm() / (8.0 * PI);
    assert!((v.norm() - direct).abs() <= 1e-6);
    assert!(((v / green(c(1.0, 0.0), 2.0)).norm() - 0.6283).abs() <= 5e-3);
}

#[test]
fn narrow_gaussian_tends_to_the_kernel() {
    let src = SourceBump::normalized([0.0; 3], 0.05, 1.0).unwrap();
    let v = free_resolvent(c(1.0, 0.0), &src, &SourceQuadrature::default(), &[[2.0, 0.0, 0.0]])[0];
    let want = c(0.0, 2.0).exp() / (8.0 * PI);
    assert!((v - want).norm() <= 1e-2 * want.norm(), "{v} {want}");
}

#[test]
fn zero_sources_give_zero_fields() {
    let cfg = canonical(0.1);
    let src = SourceBump::gaussian([3.0, 0.0, 0.0], 0.2, c(0.0, 0.0)).unwrap();
    let rule = SourceQuadrature::default();
    let pts = [[0.0, 2.0, 0.0], [3.0, 0.1, 0.0]];
    assert!(free_resolvent(c(1.0, 0.0), &src, &rule, &pts).iter().all(|v| *v == c(0.0, 0.0)));
    assert!(point_perturbation_resolvent(&cfg, c(1.0, 0.0), &src, &rule, &pts)
        .unwrap()
        .iter()
        .all(|v| *v == c(0.0, 0.0)));
    assert!(hamiltonian_free_resolvent(c(0.0, 0.0), 1.0, &src, &rule, &pts).is_err());
}

#[test]
fn point_perturbation_adds_a_pure_monopole() {
    let cfg = canonical(0.1);
    let src = SourceBump::gaussian([2.0, 1.0, 0.0], 0.2, c(1.0, 0.5)).unwrap();
    let rule = SourceQuadrature::default();
    let z = c(1.3, 0.2);
    let pts = [[0.0, 3.0, 0.0], [-2.0, -2.0, 1.0], [0.0, 0.0, 4.0], [5.0, 0.0, 0.0]];
    let pp = point_perturbation_resolvent(&cfg, z, &src, &rule, &pts).unwrap();
    let free = hamiltonian_free_resolvent(z, 1.0, &src, &rule, &pts).unwrap();
    let consts: Vec<C64> = pts
        .iter()
        .zip(pp.iter().zip(&free))
        .map(|(x, (p, f))| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            (p - f) * 4.0 * PI * r * (-C64::i() * z * r).exp()
        })
        .collect();
    for k in &consts[1..] {
        assert!((k - consts[0]).norm() <= 1e-10 * consts[0].norm());
    }
}

#[test]
fn leading_terms_limits() {
    let cfg = canonical(0.1);
    let pts = [[0.0, 2.0, 0.0], [1.0, 1.0, 1.0]];
    let free = [c(0.3, 0.1), c(-0.2, 0.4)];
    let z = c(1.1, 0.1);
    let at_zero = resolvent_leading(&cfg, z, 0.0, c(0.5, 0.0), c(0.2, 0.1), &free, &pts, LeadingForm::HamiltonianWithSource)
        .unwrap();
    assert_eq!(at_zero, free.to_vec());
    let a = resolvent_leading(&cfg, z, 0.1, c(0.0, 0.0), c(0.2, 0.1), &free, &pts, LeadingForm::Hamiltonian).unwrap();
    let b = resolvent_leading(&cfg, z, 0.1, c(0.0, 0.0), c(0.2, 0.1), &free, &pts, LeadingForm::HamiltonianWithSource)
        .unwrap();
    assert_eq!(a, b);
    let wm = cfg.omega_m();
    let rh = c(0.2, 0.1);
    let v = resolvent_leading(&cfg, c(wm, 0.0), 1e-9, c(0.0, 0.0), rh, &free, &pts, LeadingForm::Hamiltonian).unwrap();
    let coef = (v[0] - free[0]) / green(c(wm, 0.0), 2.0);
    let want = c(0.0, 4.0 * PI / wm) * rh;
    assert!((coef - want).norm() <= 1e-6 * want.norm(), "{coef} {want}");
    let p = resolvent_leading(&cfg, z, 0.1, c(0.0, 0.0), rh, &free, &pts, LeadingForm::Propagator).unwrap();
    assert_eq!(p, a);
    assert!(resolvent_leading(&cfg, z, 0.1, c(0.0, 0.0), rh, &free[..1], &pts, LeadingForm::Hamiltonian).is_err());
}

#[test]
fn first_order_resonances() {
    let cfg = canonical(0.1);
    let (zp, zm) = resonance_first_order(&cfg, 0.1);
    assert!((zp - c(3f64.sqrt(), -0.15)).norm() <= 1e-12);
    assert_eq!(zm, -zp.conj());
    let (z0, _) = resonance_first_order(&cfg, 0.0);
    assert_eq!(z0, c(cfg.omega_m(), 0.0));
}

#[test]
fn evaluators_are_deterministic() {
    let cfg = canonical(0.1);
    let src = SourceBump::gaussian([2.0, 0.0, 1.0], 0.3, c(1.0, 0.0)).unwrap();
    let rule = SourceQuadrature::default();
    let pts = [[0.0, 3.0, 0.0]];
    let a = point_perturbation_resolvent(&cfg, c(1.0, 0.1), &src, &rule, &pts).unwrap();
    let b = point_perturbation_resolvent(&cfg, c(1.0, 0.1), &src, &rule, &pts).unwrap();
    assert_eq!(a[0].re.to_bits(), b[0].re.to_bits());
    assert_eq!(a[0].im.to_bits(), b[0].im.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_seeds_lie_below_the_axis(eps in 1e-4f64..1.0, r in 0.2f64..5.0) {
        let cfg = AsymptoticConfig::sphere(r, Medium::canonical(eps)).unwrap();
        let (zp, zm) = resonance_first_order(&cfg, eps);
        prop_assert!(zp.im < 0.0 && zm.im < 0.0);
        prop_assert_eq!(zm, -zp.conj());
    }

    #[test]
    fn denominator_vanishes_to_second_order_at_the_seeds(eps in 1e-3f64..0.1) {
        let cfg = canonical(eps);
        let wm = cfg.omega_m();
        let (zp, zm) = resonance_first_order(&cfg, eps);
        for z in [zp, zm] {
            prop_assert!(denominator(&cfg, z, eps).norm() <= 10.0 * eps * eps * wm * wm);
        }
    }

    #[test]
    fn reflected_wavenumber_conjugates_the_resolvent(
        zr in 0.1f64..2.0,
        zi in 0.0f64..0.5,
        ar in -1.0f64..1.0,
        ai in -1.0f64..1.0,
    ) {
        let src = SourceBump::gaussian([0.5, 0.0, 0.0], 0.25, c(ar, ai)).unwrap();
        let rule = SourceQuadrature { radial: 12, polar: 8, azimuthal: 16 };
        let pts = [[0.0, 2.0, 0.0], [0.6, 0.1, 0.0]];
        let z = c(zr, zi);
        let a = free_resolvent(-z.conj(), &src, &rule, &pts);
        let b = free_resolvent(z, &src.conj(), &rule, &pts);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y.conj()).norm() <= 1e-12 * (1.0 + x.norm()));
        }
    }
}
