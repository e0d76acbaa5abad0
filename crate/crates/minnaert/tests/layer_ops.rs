mod common;

use std::f64::consts::PI;

use common::{c, unit_sphere, ORIGIN};
use faer::linalg::solvers::Solve;
use faer::Mat;
use minnaert::layer_ops::{
    analytic, assemble_k, assemble_kstar, assemble_n, assemble_s, assemble_s0_real, eval_n, eval_sl,
    load_operator, operator_series_term, save_operator, KstarSeries, SeriesKind,
};
use minnaert::oracle::brute_force_entry;
use minnaert::{make_sphere, make_volume_quadrature, vec3, Density, KernelKind, TraceSpace, VolumeField, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_entry_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn max_entry(a: &Mat<C64>) -> f64 {
    max_entry_diff(a, &Mat::zeros(a.nrows(), a.ncols()))
}

#[test]
fn area_weighted_s_is_complex_symmetric() {
    let mesh = make_sphere(ORIGIN, 1.0, 2).unwrap();
    let s = assemble_s(&mesh, c(1.2, 0.3)).matrix;
    let a = mesh.areas();
    let scale = max_entry(&s) * a.iter().copied().fold(0.0, f64::max);
    for i in 0..mesh.len() {
        for j in 0..i {
            let d = s[(i, j)] * a[i] - s[(j, i)] * a[j];
            assert!(d.norm() <= 1e-10 * scale, "({i},{j}) {d}");
        }
    }
}

#[test]
fn static_operators_are_real() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let zero = c(0.0, 0.0);
    for m in [assemble_s(&mesh, zero), assemble_k(&mesh, zero), assemble_kstar(&mesh, zero)] {
        assert!(m.matrix.col_iter().all(|col| col.iter().all(|v| v.im == 0.0)));
    }
    let s0 = assemble_s0_real(&mesh);
    assert!(s0.col_iter().all(|col| col.iter().all(|v| *v > 0.0)));
}

#[test]
fn constant_charge_potential_equals_radius() {
    for r in [1.0, 2.0] {
        let mesh = make_sphere(ORIGIN, r, 3).unwrap();
        let s = assemble_s(&mesh, c(0.0, 0.0));
        let v = s.apply(&Density::constant(&mesh, c(1.0, 0.0))).unwrap();
        for x in &v.coefficients {
            assert!((x.re / r - 1.0).abs() <= 1e-2, "{x}");
        }
    }
}

#[test]
fn double_layer_of_constants_and_the_capacity_density() {
    let (mesh, frame) = unit_sphere(3);
    let k = assemble_k(&mesh, c(0.0, 0.0));
    let v = k.apply(&Density::constant(&mesh, c(1.0, 0.0))).unwrap();
    for x in &v.coefficients {
        assert!((x.re + 0.5).abs() <= 1e-2);
    }
    let e = frame.eigen_density();
    let ks = assemble_kstar(&mesh, c(0.0, 0.0));
    let ke = ks.apply(e).unwrap();
    let num: f64 = ke.coefficients.iter().zip(&e.coefficients).map(|(a, b)| (a + b * 0.5).norm_sqr()).sum();
    let den: f64 = e.coefficients.iter().map(|b| b.norm_sqr() * 0.25).sum();
    assert!((num / den).sqrt() <= 2e-2);
}

#[test]
fn exterior_potential_of_the_capacity_density() {
    let mesh = make_sphere(ORIGIN, 1.0, 3).unwrap();
    let s0 = assemble_s0_real(&mesh);
    let ones = Mat::<f64>::from_fn(mesh.len(), 1, |_, _| 1.0);
    let sigma = s0.partial_piv_lu().solve(&ones);
    let d = Density::new(
        &mesh,
        (0..mesh.len()).map(|i| c(sigma[(i, 0)], 0.0)).collect(),
        TraceSpace::SurfaceDensity,
    )
    .unwrap();
    let v = eval_sl(&mesh, &d, c(0.0, 0.0), &[[2.0, 0.0, 0.0], [0.0, 0.0, -2.0]]).unwrap();
    for x in v {
        assert!((x.re - 0.5).abs() <= 5e-3, "{x}");
    }
    let zero = Density::constant(&mesh, c(0.0, 0.0));
    let v = eval_sl(&mesh, &zero, c(1.0, 0.0), &[[2.0, 0.0, 0.0]]).unwrap();
    assert_eq!(v[0], c(0.0, 0.0));
}

#[test]
fn single_layer_in_the_lower_half_plane_matches_direct_summation() {
    let mesh = make_sphere(ORIGIN, 1.0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coef: Vec<C64> = (0..mesh.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let d = Density::new(&mesh, coef.clone(), TraceSpace::SurfaceDensity).unwrap();
    let z = c(1.5, -0.4);
    let x = [0.0, 2.0, 0.0];
    let got = eval_sl(&mesh, &d, z, &[x]).unwrap()[0];
    let mut want = c(0.0, 0.0);
    for (j, cj) in coef.iter().enumerate() {
        for (y, w) in mesh.quad_points(j).iter().zip(mesh.quad_weights(j)) {
            let r = vec3::dist(x, *y);
            want += (C64::i() * z * r).exp() / (4.0 * PI * r) * *w * cj;
        }
    }
    assert!((got - want).norm() <= 1e-10 * want.norm(), "{got} {want}");
}

#[test]
fn reflected_wavenumber_conjugates_the_operators() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let z = c(0.8, 0.3);
    let zr = -z.conj();
    for (a, b) in [
        (assemble_s(&mesh, z).matrix, assemble_s(&mesh, zr).matrix),
        (assemble_k(&mesh, z).matrix, assemble_k(&mesh, zr).matrix),
    ] {
        let conj = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj());
        assert!(max_entry_diff(&conj, &b) <= 1e-12 * max_entry(&a));
    }
}

#[test]
fn brute_force_spot_checks() {
    let mesh = make_sphere(ORIGIN, 1.0, 2).unwrap();
    let z = c(1.0, 0.0);
    let s = assemble_s(&mesh, z).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let i = rng.gen_range(0..mesh.len());
        let mut j = rng.gen_range(0..mesh.len());
        while j == i {
            j = rng.gen_range(0..mesh.len());
        }
        let b = brute_force_entry(&mesh, KernelKind::S, z, i, j, 16);
        assert!((s[(i, j)] - b).norm() <= 1e-6 * b.norm(), "({i},{j}) {} {b}", s[(i, j)]);
    }
    let s0 = assemble_s0_real(&mesh);
    for i in [0, 200] {
        let t = mesh.triangle(i);
        let exact = analytic::self_double_integral(&t) / (4.0 * PI * mesh.areas()[i]);
        assert!((s0[(i, i)] - exact).abs() <= 1e-4 * exact);
        let b = brute_force_entry(&mesh, KernelKind::S, c(0.0, 0.0), i, i, 16);
        assert_eq!(b.im, 0.0);
        assert!((b.re - exact).abs() <= 1e-4 * exact, "{} {exact}", b.re);
    }
}

#[test]
fn first_series_terms() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let s1 = operator_series_term(SeriesKind::S, 1, &mesh, None).unwrap();
    for i in 0..mesh.len() {
        for j in 0..mesh.len() {
            let want = c(0.0, mesh.areas()[j] / (4.0 * PI));
            assert!((s1[(i, j)] - want).norm() <= 1e-14);
        }
    }
    for kind in [SeriesKind::K, SeriesKind::Kstar] {
        let k1 = operator_series_term(kind, 1, &mesh, None).unwrap();
        assert_eq!(max_entry(&k1), 0.0);
    }
    assert!(operator_series_term(SeriesKind::N, 1, &mesh, None).is_err());
    assert!(operator_series_term(SeriesKind::S, 0, &mesh, None).is_err());
}

#[test]
fn second_order_truncation_exponent() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let s0 = assemble_s(&mesh, c(0.0, 0.0)).matrix;
    let s1 = operator_series_term(SeriesKind::S, 1, &mesh, None).unwrap();
    let s2 = operator_series_term(SeriesKind::S, 2, &mesh, None).unwrap();
    let zs = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = zs
        .iter()
        .map(|&z| {
            let zc = c(z, 0.0);
            let approx = &s0 + Mat::from_fn(s0.nrows(), s0.ncols(), |i, j| s1[(i, j)] * zc + s2[(i, j)] * zc * zc);
            (&assemble_s(&mesh, zc).matrix - &approx).norm_l2()
        })
        .collect();
    let slope = common::loglog_slope(&zs, &errs);
    assert!(slope >= 2.7, "{slope} {errs:?}");
}

#[test]
fn kstar_series_error_decreases_with_order() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let kappa = c(0.5, 0.0);
    let direct = assemble_kstar(&mesh, kappa).matrix;
    let errs: Vec<f64> = (2..=10)
        .map(|j| (&KstarSeries::new(&mesh, j).evaluate(kappa) - &direct).norm_l2())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn newtonian_potential_of_the_unit_ball() {
    let mesh = make_sphere(ORIGIN, 1.0, 3).unwrap();
    let vq = make_volume_quadrature(&mesh, ORIGIN, 4).unwrap();
    let ones = VolumeField::new(&vq, vec![c(1.0, 0.0); vq.len()]).unwrap();
    let v = eval_n(&vq, &ones, c(0.0, 0.0), &[ORIGIN]).unwrap()[0];
    assert!((v.re - 0.5).abs() <= 5e-3, "{v}");
    let zero = VolumeField::new(&vq, vec![c(0.0, 0.0); vq.len()]).unwrap();
    let v = eval_n(&vq, &zero, c(1.0, 0.0), &[ORIGIN, [2.0, 0.0, 0.0]]).unwrap();
    assert!(v.iter().all(|x| *x == c(0.0, 0.0)));
    let n = assemble_n(&vq, c(0.7, 0.0));
    assert_eq!(n.nrows(), vq.len());
}

#[test]
fn operators_reject_densities_from_other_meshes() {
    let a = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let b = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let s = assemble_s(&a, c(1.0, 0.0));
    assert!(s.apply(&Density::constant(&b, c(1.0, 0.0))).is_err());
}

#[test]
fn operator_files_round_trip() {
    let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let op = assemble_kstar(&mesh, c(0.4, -0.1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kstar.bin");
    save_operator(&op, &path).unwrap();
    let back = load_operator(&path, &mesh).unwrap();
    assert_eq!(back.kind, KernelKind::Kstar);
    assert_eq!(back.z, op.z);
    assert_eq!(max_entry_diff(&back.matrix, &op.matrix), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn double_layer_duality(seed in any::<u64>(), zr in -1.0f64..1.0, zi in 0.0f64..0.5) {
        let mesh = make_sphere(ORIGIN, 1.0, 1).unwrap();
        let z = c(zr, zi);
        let k = assemble_k(&mesh, z);
        let ks = assemble_kstar(&mesh, z);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rand_density = || {
            let v = (0..mesh.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            Density::new(&mesh, v, TraceSpace::SurfaceDensity).unwrap()
        };
        let phi = rand_density();
        let psi = rand_density();
        let a = mesh.areas();
        let kphi = ks.apply(&phi).unwrap();
        let kpsi = k.apply(&psi).unwrap();
        let lhs: C64 = (0..mesh.len()).map(|i| kphi.coefficients[i] * psi.coefficients[i] * a[i]).sum();
        let rhs: C64 = (0..mesh.len()).map(|i| phi.coefficients[i] * kpsi.coefficients[i] * a[i]).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }
}
