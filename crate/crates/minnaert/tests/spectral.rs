mod common;

use std::f64::consts::PI;

use common::{c, unit_sphere, ORIGIN};
use faer::linalg::solvers::Solve;
use faer::Mat;
use minnaert::scattering::Medium;
use minnaert::spectral::{
    block_decompose_matrix, block_invert, build_frame, integral_identities, invert_lambda2, project_p,
    s0_inner, SpectralFrame,
};
use minnaert::{make_sphere, Density, SurfaceMesh, TraceSpace, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density(mesh: &SurfaceMesh, seed: u64) -> Density {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..mesh.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Density::new(mesh, v, TraceSpace::SurfaceDensity).unwrap()
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn complement(frame: &SpectralFrame, phi: &Density) -> Density {
    let p = project_p(frame, phi).unwrap();
    let v = phi.coefficients.iter().zip(&p.coefficients).map(|(a, b)| a - b).collect();
    Density { coefficients: v, ..phi.clone() }
}

#[test]
fn capacitance_of_spheres() {
    let (_, frame) = unit_sphere(3);
    assert!((frame.capacitance() / (4.0 * PI) - 1.0).abs() <= 1e-2);
    let two = make_sphere(ORIGIN, 2.0, 3).unwrap();
    let f2 = build_frame(&two).unwrap();
    assert!((f2.capacitance() / (8.0 * PI) - 1.0).abs() <= 1e-2);
    // Kernel homogeneity makes the discrete capacitance scale exactly.
    assert!((f2.capacitance() / frame.capacitance() - 2.0).abs() <= 1e-10);
    let half = make_sphere(ORIGIN, 0.5, 3).unwrap();
    let fh = build_frame(&half).unwrap();
    assert!((fh.capacitance() / frame.capacitance() - 0.5).abs() <= 1e-2);
}

#[test]
fn eigendensity_is_normalised_and_nearly_an_eigenvector() {
    let (mesh, frame) = unit_sphere(3);
    let e = frame.eigen_density();
    assert!((s0_inner(&frame, e, e).unwrap() - 1.0).norm() <= 1e-10);
    assert!((frame.gram() - 1.0).abs() <= 1e-10);
    assert!(frame.eigen_residual() <= 2e-2);
    let phi = complement(&frame, &random_density(&mesh, 3));
    assert!(s0_inner(&frame, &phi, e).unwrap().norm() <= 1e-10);
}

#[test]
fn eigen_residual_decreases_with_refinement() {
    let r: Vec<f64> = (1..=3).map(|l| unit_sphere(l).1.eigen_residual()).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

#[test]
fn surface_volume_identities() {
    let (mesh, frame) = unit_sphere(3);
    for (got, want) in integral_identities(&frame, &mesh).unwrap() {
        assert!((got / want - 1.0).abs() <= 2e-2, "{got} {want}");
    }
}

#[test]
fn projector_fixes_the_eigendensity() {
    let (_, frame) = unit_sphere(2);
    let e = frame.eigen_density();
    let pe = project_p(&frame, e).unwrap();
    assert!(diff_norm(&pe.coefficients, &e.coefficients) <= 1e-10 * norm(&e.coefficients));
}

#[test]
fn identity_block_inverse() {
    let (mesh, frame) = unit_sphere(2);
    let n = mesh.len();
    let h = Mat::<C64>::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let b = block_decompose_matrix(&frame, &h).unwrap();
    let phi = random_density(&mesh, 11);
    let f = block_invert(&b, &phi).unwrap();
    assert!(diff_norm(&f.coefficients, &phi.coefficients) <= 1e-12 * norm(&phi.coefficients));
}

#[test]
fn decoupled_block_inverse() {
    let (mesh, frame) = unit_sphere(1);
    let n = mesh.len();
    let e = &frame.eigen_density().coefficients;
    // Functional of the projector, read off from P applied to unit vectors.
    let func: Vec<C64> = (0..n)
        .map(|j| {
            let mut u = vec![c(0.0, 0.0); n];
            u[j] = c(1.0, 0.0);
            let d = Density::new(&mesh, u, TraceSpace::SurfaceDensity).unwrap();
            frame.coefficient(&d.coefficients)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = Mat::<C64>::from_fn(n, n, |i, j| {
        if i == j {
            c(4.0, 1.0)
        } else {
            c(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02))
        }
    });
    let p = Mat::<C64>::from_fn(n, n, |i, j| e[i] * func[j]);
    let id = Mat::<C64>::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let q = &id - &p;
    let a = c(0.5, -2.0);
    let h = Mat::<C64>::from_fn(n, n, |i, j| p[(i, j)] * a) + &q * &m * &q;
    let b = block_decompose_matrix(&frame, &h).unwrap();
    assert!(b.h10.iter().all(|v| v.norm() <= 1e-12));
    let phi = random_density(&mesh, 8);
    let f = block_invert(&b, &phi).unwrap();
    let want = frame.coefficient(&phi.coefficients) / a;
    assert!((frame.coefficient(&f.coefficients) - want).norm() <= 1e-10 * want.norm());
}

#[test]
fn lambda2_inverse_of_the_eigendensity() {
    let (mesh, frame) = unit_sphere(3);
    let medium = Medium::canonical(0.05);
    let mut errs = Vec::new();
    for eps in [0.05, 0.025] {
        let (f, lead) =
            invert_lambda2(&frame, &mesh, c(1.0, 0.0), eps, 0.0, &medium, frame.eigen_density()).unwrap();
        let got = frame.coefficient(&f.coefficients);
        errs.push((got / lead - 1.0).norm());
    }
    assert!(errs[0] <= 0.15 && errs[1] <= 0.08, "{errs:?}");
}

#[test]
fn lambda2_inverse_on_the_complement_is_second_order() {
    let (mesh, frame) = unit_sphere(2);
    let medium = Medium::canonical(0.05);
    let phi = complement(&frame, &random_density(&mesh, 21));
    let norms: Vec<f64> = [0.05, 0.025]
        .iter()
        .map(|&eps| {
            let (f, lead) = invert_lambda2(&frame, &mesh, c(1.0, 0.0), eps, 0.0, &medium, &phi).unwrap();
            assert!(lead.norm() <= 1e-12);
            f.l2_norm(&mesh)
        })
        .collect();
    let ratio = norms[0] / norms[1];
    assert!((ratio / 4.0 - 1.0).abs() <= 0.3, "{ratio}");
}

#[test]
fn lambda2_penalty_shrinks_the_leading_coefficient() {
    let (mesh, frame) = unit_sphere(2);
    let medium = Medium::canonical(0.05);
    let coefs: Vec<f64> = [0.0, 1.0, 10.0, 1e3, 1e6]
        .iter()
        .map(|&beta| {
            let (f, _) =
                invert_lambda2(&frame, &mesh, c(1.0, 0.0), 0.05, beta, &medium, frame.eigen_density()).unwrap();
            frame.coefficient(&f.coefficients).norm()
        })
        .collect();
    assert!(coefs.windows(2).all(|w| w[1] < w[0]), "{coefs:?}");
    assert!(invert_lambda2(&frame, &mesh, c(1.0, 0.0), 0.05, -1.0, &medium, frame.eigen_density()).is_err());
}

#[test]
fn frames_reject_foreign_densities() {
    let (_, frame) = unit_sphere(1);
    let other = make_sphere(ORIGIN, 1.0, 1).unwrap();
    let d = Density::constant(&other, c(1.0, 0.0));
    assert!(project_p(&frame, &d).is_err());
    assert!(s0_inner(&frame, &d, &d).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projector_is_idempotent(seed in any::<u64>()) {
        let (mesh, frame) = unit_sphere(1);
        let phi = random_density(&mesh, seed);
        let p1 = project_p(&frame, &phi).unwrap();
        let p2 = project_p(&frame, &p1).unwrap();
        prop_assert!(diff_norm(&p1.coefficients, &p2.coefficients) <= 1e-10 * (1.0 + norm(&p1.coefficients)));
        let q = complement(&frame, &phi);
        prop_assert!(s0_inner(&frame, &q, frame.eigen_density()).unwrap().norm() <= 1e-10 * (1.0 + norm(&phi.coefficients)));
    }

    #[test]
    fn inner_product_is_bilinear(seed in any::<u64>(), ar in -3.0f64..3.0, ai in -3.0f64..3.0) {
        let (mesh, frame) = unit_sphere(1);
        let phi = random_density(&mesh, seed);
        let psi = random_density(&mesh, seed.wrapping_add(1));
        let a = c(ar, ai);
        let scaled = Density { coefficients: phi.coefficients.iter().map(|v| v * a).collect(), ..phi.clone() };
        let lhs = s0_inner(&frame, &scaled, &psi).unwrap();
        let rhs = s0_inner(&frame, &phi, &psi).unwrap() * a;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn block_inverse_round_trip(seed in any::<u64>()) {
        let (mesh, frame) = unit_sphere(1);
        let n = mesh.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Mat::<C64>::from_fn(n, n, |i, j| {
            let off = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / n as f64;
            if i == j { off + c(2.0 + rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0)) } else { off }
        });
        let b = block_decompose_matrix(&frame, &h).unwrap();
        let phi = random_density(&mesh, seed ^ 0x5a5a);
        let f = block_invert(&b, &phi).unwrap();
        let col = Mat::<C64>::from_fn(n, 1, |i, _| phi.coefficients[i]);
        let dense = h.partial_piv_lu().solve(&col);
        let dense: Vec<C64> = (0..n).map(|i| dense[(i, 0)]).collect();
        prop_assert!(diff_norm(&f.coefficients, &dense) <= 1e-9 * norm(&dense));
        let hf: Vec<C64> = (0..n).map(|i| (0..n).map(|j| h[(i, j)] * f.coefficients[j]).sum()).collect();
        prop_assert!(diff_norm(&hf, &phi.coefficients) <= 1e-9 * norm(&phi.coefficients));
    }
}
