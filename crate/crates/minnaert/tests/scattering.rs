mod common;

use std::f64::consts::PI;

use common::{c, canonical_system, medium_system, rel_l2, spiral_points};
use minnaert::asymptotics::AsymptoticConfig;
use minnaert::layer_ops::{assemble_k, assemble_s};
use minnaert::oracle::mie_scatter;
use minnaert::scattering::{
    check_flux_identity, energy_flux, eval_field, eval_scattered, solve_bubble, BubbleSystem, IncidentField, Medium,
    ScatterSolution,
};
use minnaert::{vec3, Error, C64};
use faer::linalg::solvers::Solve;
use faer::Mat;

fn plane_z(omega: f64) -> IncidentField {
    IncidentField::plane_wave([0.0, 0.0, 1.0], omega, 1.0).unwrap()
}

fn equivalent_radius(sys: &BubbleSystem) -> f64 {
    (3.0 * sys.frame().volume() / (4.0 * PI)).cbrt()
}

/// Mie fields of the volume-equivalent sphere, sampled as solver unknowns.
fn mie_solution(sys: &BubbleSystem, inc: IncidentField) -> ScatterSolution {
    let m = sys.medium();
    let eps = m.epsilon;
    let mie = mie_scatter(m, 1.0, &inc).unwrap();
    let nodes: Vec<[f64; 3]> = sys.volume().nodes().iter().map(|y| sys.to_physical(*y)).collect();
    let w = mie.total(&nodes);
    let mesh = sys.mesh();
    let psi: Vec<C64> = (0..mesh.len())
        .map(|i| {
            let mut acc = c(0.0, 0.0);
            for (x, wt) in mesh.quad_points(i).iter().zip(mesh.quad_weights(i)) {
                let radial = vec3::normalize(*x);
                let cos = vec3::dot(radial, mesh.normals()[i]);
                acc += mie.interior_radial_derivative(sys.to_physical(*x)) * (eps * cos * wt);
            }
            acc / mesh.areas()[i]
        })
        .collect();
    ScatterSolution::from_parts(sys, inc, w, psi).unwrap()
}

#[test]
fn zero_incident_field_gives_zero_solution() {
    let sys = canonical_system(1, 0.1);
    let inc = plane_z(1.0).scaled(c(0.0, 0.0));
    let sol = solve_bubble(&sys, 1.0, &inc).unwrap();
    assert!(sol.boundary_density.coefficients.iter().all(|v| *v == c(0.0, 0.0)));
    assert!(sol.interior_values.values.iter().all(|v| *v == c(0.0, 0.0)));
    let sc = eval_scattered(&sol, &spiral_points(5, 2.0)).unwrap();
    assert!(sc.iter().all(|v| *v == c(0.0, 0.0)));
    let flux = check_flux_identity(&sol);
    assert_eq!((flux.lhs, flux.rhs, flux.residual), (c(0.0, 0.0), c(0.0, 0.0), 0.0));
}

#[test]
fn matches_the_volume_equivalent_mie_sphere() {
    for medium in [
        Medium::canonical(0.1),
        Medium::new(1.0, 1.0, 1.0, 2.0, 0.1, [0.0; 3]).unwrap(),
    ] {
        let sys = medium_system(2, medium);
        let inc = plane_z(1.0);
        let sol = solve_bubble(&sys, 1.0, &inc).unwrap();
        let pts = spiral_points(20, 0.3);
        let got = eval_scattered(&sol, &pts).unwrap();
        let mie = mie_scatter(&medium, equivalent_radius(&sys), &inc).unwrap();
        let err = rel_l2(&got, &mie.scattered(&pts));
        assert!(err <= 2e-3, "{medium:?}: {err}");
        let d = sol.diagnostics.as_ref().unwrap();
        assert!(d.residual <= 1e-10 && d.warning.is_none());
    }
}

#[test]
fn boundary_density_is_second_order_in_epsilon() {
    let norms: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&eps| {
            let sys = canonical_system(2, eps);
            let sol = solve_bubble(&sys, 1.0, &plane_z(1.0)).unwrap();
            sol.boundary_density.l2_norm(sys.mesh())
        })
        .collect();
    let ratio = norms[0] / norms[1];
    assert!((ratio / 4.0 - 1.0).abs() <= 0.3, "{ratio}");
}

#[test]
fn mirror_symmetry_about_the_incidence_axis() {
    let sys = canonical_system(2, 0.1);
    let sol = solve_bubble(&sys, 1.3, &plane_z(1.3)).unwrap();
    let base = [[0.7, 1.1, 0.4], [1.5, -0.2, -0.9], [0.3, 0.4, 2.0]];
    for p in base {
        let v = eval_scattered(&sol, &[p, [-p[0], p[1], p[2]], [p[0], -p[1], p[2]]]).unwrap();
        assert!((v[1] - v[0]).norm() <= 1e-6 * v[0].norm());
        assert!((v[2] - v[0]).norm() <= 1e-6 * v[0].norm());
    }
}

#[test]
fn flux_identity_for_solver_and_mie_data() {
    let sys = canonical_system(2, 0.1);
    let inc = plane_z(1.0);
    let sol = solve_bubble(&sys, 1.0, &inc).unwrap();
    let check = check_flux_identity(&sol);
    assert!(check.residual <= 2e-2, "{check:?}");
    let mie = mie_solution(&sys, inc);
    let check = check_flux_identity(&mie);
    assert!(check.residual <= 2e-2, "{check:?}");
    let coupled = medium_system(2, Medium::new(1.0, 1.0, 1.0, 2.0, 0.1, [0.0; 3]).unwrap());
    let sol = solve_bubble(&coupled, 1.0, &inc).unwrap();
    assert!(check_flux_identity(&sol).residual <= 2e-2);
}

#[test]
fn energy_flux_is_not_negative() {
    for omega in [0.8, 1.7, 2.5] {
        let sys = canonical_system(2, 0.1);
        let sol = solve_bubble(&sys, omega, &plane_z(omega)).unwrap();
        assert!(energy_flux(&sol).unwrap() >= -1e-6);
    }
}

#[test]
fn dirichlet_to_neumann_cross_check() {
    // ∂_ν w^in = S_κ⁻¹ (1/2 + K_κ) w^in for the interior solution w^in.
    let sys = canonical_system(3, 0.2);
    let omega = 1.5;
    let inc = IncidentField::plane_wave([0.3, -0.5, 0.8], omega, 1.0).unwrap();
    let mesh = sys.mesh();
    let kappa = sys.kappa(c(omega, 0.0));
    let trace = sys_panel_average(&sys, |x, _| inc.value(sys.to_physical(x)));
    let exact = sys_panel_average(&sys, |x, nu| {
        let g = inc.gradient(sys.to_physical(x));
        (g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2]) * 0.2
    });
    let s = assemble_s(mesh, kappa).matrix;
    let k = assemble_k(mesh, kappa).matrix;
    let n = mesh.len();
    let rhs = Mat::<C64>::from_fn(n, 1, |i, _| {
        trace[i] * 0.5 + (0..n).map(|j| k[(i, j)] * trace[j]).sum::<C64>()
    });
    let psi = s.partial_piv_lu().solve(&rhs);
    let psi: Vec<C64> = (0..n).map(|i| psi[(i, 0)]).collect();
    let err = rel_l2(&psi, &exact);
    assert!(err <= 5e-2, "{err}");
}

fn sys_panel_average<F: Fn([f64; 3], [f64; 3]) -> C64>(sys: &BubbleSystem, f: F) -> Vec<C64> {
    let mesh = sys.mesh();
    (0..mesh.len())
        .map(|i| {
            let nu = mesh.normals()[i];
            let s: C64 = mesh
                .quad_points(i)
                .iter()
                .zip(mesh.quad_weights(i))
                .map(|(x, w)| f(*x, nu) * *w)
                .sum();
            s / mesh.areas()[i]
        })
        .collect()
}

#[test]
fn incident_plane_wave_solves_helmholtz() {
    let inc = IncidentField::plane_wave([1.0, 2.0, -0.5], 1.7, 1.3).unwrap();
    let x = [0.2, -0.3, 0.5];
    let h = 1e-3;
    let mut lap = c(0.0, 0.0);
    for k in 0..3 {
        let mut p = x;
        let mut m = x;
        p[k] += h;
        m[k] -= h;
        lap += (inc.value(p) - inc.value(x) * 2.0 + inc.value(m)) / (h * h);
    }
    let k2 = inc.wavenumber() * inc.wavenumber();
    assert!((lap + inc.value(x) * k2).norm() <= 1e-5);
    let g = inc.gradient(x);
    let fd = (inc.value([x[0] + h, x[1], x[2]]) - inc.value([x[0] - h, x[1], x[2]])) / (2.0 * h);
    assert!((g[0] - fd).norm() <= 1e-6);
}

#[test]
fn resonant_enhancement_near_the_minnaert_frequency() {
    let eps = 0.1;
    let sys = canonical_system(2, eps);
    let omegas: Vec<f64> = (0..=20).map(|k| 1.2 + 0.05 * k as f64).collect();
    let amps: Vec<f64> = omegas
        .iter()
        .map(|&w| {
            let sol = solve_bubble(&sys, w, &plane_z(w)).unwrap();
            eval_scattered(&sol, &[[0.0, 3.0, 0.0]]).unwrap()[0].norm()
        })
        .collect();
    let k = (0..amps.len()).max_by(|&a, &b| amps[a].total_cmp(&amps[b])).unwrap();
    let wm = AsymptoticConfig::from_frame(sys.frame(), *sys.medium()).unwrap().omega_m();
    assert!((omegas[k] - wm).abs() <= 5.0 * eps, "{} {wm}", omegas[k]);
    assert!(k > 0 && k < omegas.len() - 1);
}

#[test]
fn point_source_incident_field() {
    let sys = canonical_system(2, 0.1);
    let inc = IncidentField::point_source([0.0, 0.0, 0.5], 1.0, 1.0).unwrap();
    let sol = solve_bubble(&sys, 1.0, &inc).unwrap();
    assert!(check_flux_identity(&sol).residual <= 2e-2);
    let total = eval_field(&sol, &[[0.0, 1.0, 0.0]]).unwrap()[0];
    let sc = eval_scattered(&sol, &[[0.0, 1.0, 0.0]]).unwrap()[0];
    assert!((total - sc - inc.value([0.0, 1.0, 0.0])).norm() <= 1e-14);
    let inside = IncidentField::point_source([0.0, 0.0, 0.02], 1.0, 1.0).unwrap();
    assert!(matches!(solve_bubble(&sys, 1.0, &inside), Err(Error::Config(_))));
}

#[test]
fn invalid_requests_are_rejected() {
    let sys = canonical_system(1, 0.1);
    assert!(matches!(solve_bubble(&sys, 2.0, &plane_z(1.0)), Err(Error::Usage(_))));
    assert!(solve_bubble(&sys, -1.0, &plane_z(1.0)).is_err());
    let wrong_c0 = IncidentField::plane_wave([0.0, 0.0, 1.0], 1.0, 2.0).unwrap();
    assert!(matches!(solve_bubble(&sys, 1.0, &wrong_c0), Err(Error::Usage(_))));
    let sol = solve_bubble(&sys, 1.0, &plane_z(1.0)).unwrap();
    let on_surface = [0.0, 0.0, 0.1 * sys.mesh().vertices()[0][2].abs().max(1.0)];
    let vertex = sys.to_physical(sys.mesh().centroids()[0]);
    assert!(matches!(
        eval_scattered(&sol, &[vertex]),
        Err(Error::NearSingularEvaluation { .. })
    ));
    let _ = on_surface;
}
