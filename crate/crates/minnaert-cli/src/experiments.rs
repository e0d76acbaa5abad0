//! One function per subcommand.

use std::f64::consts::PI;

use minnaert::asymptotics::{
    hamiltonian_free_resolvent, point_scatterer_field, resolvent_leading, resonance_first_order, AsymptoticConfig,
    LeadingForm, SourceQuadrature,
};
use minnaert::oracle::{mie_resonance, mie_scatter};
use minnaert::resonances::{cubic_characteristic_roots, find_resonances_with_landscape};
use minnaert::scattering::{
    check_flux_identity, energy_flux, eval_field, eval_scattered, resolvent_apply, solve_bubble, BubbleSystem,
    IncidentField, Medium, ResolventNormalization,
};
use minnaert::spectral::build_frame;
use minnaert::{Vec3, C64};
use serde_json::{json, Value};

use crate::config::{Constants, Experiment, RunConfig};
use crate::failure::Failure;
use crate::output::{Check, Table};

/// Results of one experiment before serialisation.
pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
    pub checks: Vec<Check>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.experiment.as_ref().expect("resolved on load") {
        Experiment::Capacitance {} => capacitance(cfg),
        Experiment::Minnaert {} => minnaert_frequency(cfg),
        Experiment::Scatter { omega, direction, points, sample_radius, sample_count } => {
            let pts = points
                .clone()
                .unwrap_or_else(|| spiral(cfg.medium.center, *sample_radius, *sample_count));
            scatter(cfg, *omega, *direction, &pts)
        }
        Experiment::Sweep { omega_min, omega_max, steps, direction, point } => {
            sweep(cfg, *omega_min, *omega_max, *steps, *direction, *point)
        }
        Experiment::Resolvent { z, epsilons, source, normalization, sample_radius, sample_count } => {
            let eps = epsilons.clone().unwrap_or_else(|| vec![cfg.medium.epsilon]);
            let zs: Vec<C64> = z.iter().map(|v| C64::new(v[0], v[1])).collect();
            let pts = spiral(cfg.medium.center, *sample_radius, *sample_count);
            let src = source.bump()?;
            resolvent(cfg, &zs, &eps, src, (*normalization).into(), &pts)
        }
        Experiment::Resonances { epsilons, search_radius, landscape_refinement } => {
            resonances(cfg, epsilons, *search_radius, landscape_refinement.unwrap_or(cfg.refinement()))
        }
        Experiment::Convergence { omega, epsilons, direction, sample_radius, sample_count, constants } => {
            let pts = spiral(cfg.medium.center, *sample_radius, *sample_count);
            convergence(cfg, *omega, epsilons, *direction, &pts, *constants)
        }
    }
}

/// Points on a sphere of radius `r` about `center`, spread by a golden spiral.
fn spiral(center: Vec3, r: f64, n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let y = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let rho = (1.0 - y * y).sqrt();
            let t = golden * k as f64;
            [center[0] + r * rho * t.cos(), center[1] + r * y, center[2] + r * rho * t.sin()]
        })
        .collect()
}

fn system(cfg: &RunConfig, refinement: u32) -> Result<BubbleSystem, Failure> {
    Ok(BubbleSystem::new(cfg.mesh(refinement)?, cfg.medium(), cfg.radial_order)?)
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn capacitance(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let mesh = cfg.mesh(cfg.refinement())?;
    let frame = build_frame(&mesh)?;
    let mut checks = vec![Check::at_most("eigen_residual", frame.eigen_residual(), 2e-2)];
    if let Some(r) = cfg.sphere_radius() {
        let err = (frame.capacitance() / (4.0 * PI * r) - 1.0).abs();
        checks.push(Check::at_most("capacitance_relative_error", err, 1e-2));
    }
    Ok(Outcome {
        results: json!({
            "capacitance": frame.capacitance(),
            "volume": frame.volume(),
            "area": mesh.total_area(),
            "refinement": cfg.refinement(),
            "panels": mesh.len(),
            "eigen_residual": frame.eigen_residual(),
        }),
        table: None,
        checks,
    })
}

fn minnaert_frequency(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let mesh = cfg.mesh(cfg.refinement())?;
    let frame = build_frame(&mesh)?;
    let ac = AsymptoticConfig::from_frame(&frame, cfg.medium())?;
    let mut checks = Vec::new();
    if let Some(r) = cfg.sphere_radius() {
        let exact = AsymptoticConfig::sphere(r, cfg.medium())?.omega_m();
        checks.push(Check::at_most("omega_M_relative_error", (ac.omega_m() / exact - 1.0).abs(), 1e-2));
    }
    Ok(Outcome {
        results: json!({
            "omega_M": ac.omega_m(),
            "capacitance": frame.capacitance(),
            "volume": frame.volume(),
        }),
        table: None,
        checks,
    })
}

fn scatter(cfg: &RunConfig, omega: f64, direction: Vec3, pts: &[Vec3]) -> Result<Outcome, Failure> {
    let sys = system(cfg, cfg.refinement())?;
    let medium = cfg.medium();
    let inc = IncidentField::plane_wave(direction, omega, medium.c0())?;
    let sol = solve_bubble(&sys, omega, &inc)?;
    let sc = eval_scattered(&sol, pts)?;
    let total = eval_field(&sol, pts)?;
    let flux = check_flux_identity(&sol);
    let energy = energy_flux(&sol)?;
    let mut checks = vec![
        Check::at_most("flux_identity_residual", flux.residual, 2e-2),
        Check::at_least("energy_flux", energy, -1e-6),
    ];
    let mie = match cfg.sphere_radius() {
        Some(r) => Some(mie_scatter(&medium, r, &inc)?.scattered(pts)),
        None => None,
    };
    let mie_error = mie.as_ref().map(|m| rel_l2(&sc, m));
    if let Some(e) = mie_error {
        checks.push(Check::at_most("mie_relative_l2_error", e, 1e-2));
    }
    let mut table = Table::new(&[
        "x", "y", "z", "scattered_re", "scattered_im", "total_re", "total_im", "mie_re", "mie_im",
    ]);
    for (k, x) in pts.iter().enumerate() {
        let m = mie.as_ref().map(|m| m[k]);
        table.push(vec![
            x[0].into(),
            x[1].into(),
            x[2].into(),
            sc[k].re.into(),
            sc[k].im.into(),
            total[k].re.into(),
            total[k].im.into(),
            m.map(|v| v.re).into(),
            m.map(|v| v.im).into(),
        ]);
    }
    let d = sol.diagnostics.as_ref();
    Ok(Outcome {
        results: json!({
            "omega": omega,
            "points": pts.len(),
            "residual": d.map(|d| d.residual),
            "condition_estimate": d.map(|d| d.condition_estimate),
            "warning": d.and_then(|d| d.warning.clone()),
            "flux_identity": { "lhs": complex(flux.lhs), "rhs": complex(flux.rhs), "residual": flux.residual },
            "energy_flux": energy,
            "mie_relative_l2_error": mie_error,
        }),
        table: Some(table),
        checks,
    })
}

fn sweep(
    cfg: &RunConfig,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
    direction: Vec3,
    point: Vec3,
) -> Result<Outcome, Failure> {
    let sys = system(cfg, cfg.refinement())?;
    let medium = cfg.medium();
    let wm = AsymptoticConfig::from_frame(sys.frame(), medium)?.omega_m();
    let mut table = Table::new(&["omega", "amplitude", "scattered_re", "scattered_im"]);
    let mut best = (f64::NAN, -1.0);
    for k in 0..steps {
        let w = omega_min + (omega_max - omega_min) * k as f64 / (steps - 1) as f64;
        let inc = IncidentField::plane_wave(direction, w, medium.c0())?;
        let sol = solve_bubble(&sys, w, &inc)?;
        let v = eval_scattered(&sol, &[point])?[0];
        if v.norm() > best.1 {
            best = (w, v.norm());
        }
        table.push(vec![w.into(), v.norm().into(), v.re.into(), v.im.into()]);
    }
    let tol = 5.0 * medium.epsilon;
    Ok(Outcome {
        results: json!({
            "omega_M": wm,
            "argmax_omega": best.0,
            "peak_amplitude": best.1,
            "point": point,
        }),
        table: Some(table),
        checks: vec![Check::at_most("argmax_minus_omega_M", (best.0 - wm).abs(), tol)],
    })
}

fn resolvent(
    cfg: &RunConfig,
    zs: &[C64],
    epsilons: &[f64],
    src: minnaert::asymptotics::SourceBump,
    normalization: ResolventNormalization,
    pts: &[Vec3],
) -> Result<Outcome, Failure> {
    let base = system(cfg, cfg.refinement())?;
    let medium = cfg.medium();
    let rule = SourceQuadrature::default();
    let form = match normalization {
        ResolventNormalization::Hamiltonian => LeadingForm::HamiltonianWithSource,
        ResolventNormalization::Propagator => LeadingForm::Propagator,
    };
    let h0 = src.value(medium.center);
    let mut table = Table::new(&[
        "epsilon", "z_re", "z_im", "x", "y", "z", "full_re", "full_im", "leading_re", "leading_im", "residual",
    ]);
    let mut residuals = Vec::new();
    let mut worst: Vec<Vec<f64>> = vec![Vec::new(); zs.len()];
    for &eps in epsilons {
        let m = medium.with_epsilon(eps);
        let sys = base.with_medium(m)?;
        let ac = AsymptoticConfig::from_frame(sys.frame(), m)?;
        for (iz, &z) in zs.iter().enumerate() {
            let field = resolvent_apply(&sys, z, &src, &rule, normalization)?;
            let u = field.eval(pts)?;
            let free = field.free(pts);
            let rh0 = hamiltonian_free_resolvent(z, m.c0(), &src, &rule, &[m.center])?[0];
            let lead = resolvent_leading(&ac, z, eps, h0, rh0, &free, pts, form)?;
            for (k, x) in pts.iter().enumerate() {
                table.push(vec![
                    eps.into(),
                    z.re.into(),
                    z.im.into(),
                    x[0].into(),
                    x[1].into(),
                    x[2].into(),
                    u[k].re.into(),
                    u[k].im.into(),
                    lead[k].re.into(),
                    lead[k].im.into(),
                    (u[k] - lead[k]).norm().into(),
                ]);
            }
            let r = max_diff(&u, &lead);
            worst[iz].push(r);
            residuals.push(json!({ "epsilon": eps, "z": complex(z), "max_residual": r }));
        }
    }
    let mut ratios = Vec::new();
    let mut checks = Vec::new();
    for (iz, z) in zs.iter().enumerate() {
        for k in 1..epsilons.len() {
            let ratio = worst[iz][k - 1] / worst[iz][k];
            // ε^{3/2} remainder, with the 2.4 floor used for a halving.
            let want = 0.85 * (epsilons[k - 1] / epsilons[k]).powf(1.5);
            checks.push(Check::at_least(&format!("residual_ratio z={z} eps {}->{}", epsilons[k - 1], epsilons[k]), ratio, want));
            ratios.push(json!({ "z": complex(*z), "from": epsilons[k - 1], "to": epsilons[k], "ratio": ratio }));
        }
    }
    Ok(Outcome {
        results: json!({ "residuals": residuals, "ratios": ratios }),
        table: Some(table),
        checks,
    })
}

fn resonances(cfg: &RunConfig, epsilons: &[f64], radius: f64, landscape_level: u32) -> Result<Outcome, Failure> {
    let base = system(cfg, cfg.refinement())?;
    let coarse = if landscape_level == cfg.refinement() { base.clone() } else { system(cfg, landscape_level)? };
    let medium = cfg.medium();
    let mut table = Table::new(&[
        "epsilon", "z_plus_re", "z_plus_im", "z_minus_re", "z_minus_im", "sigma_min", "iterations", "cubic_re",
        "cubic_im", "mie_re", "mie_im",
    ]);
    let mut pairs = Vec::new();
    let mut checks = Vec::new();
    for &eps in epsilons {
        let m: Medium = medium.with_epsilon(eps);
        let sys = base.with_medium(m)?;
        let land = coarse.with_medium(m)?;
        let pair = find_resonances_with_landscape(&sys, &land, radius)?;
        let ac = AsymptoticConfig::from_frame(sys.frame(), m)?;
        let (first, _) = resonance_first_order(&ac, eps);
        let cubic = cubic_characteristic_roots(&ac, eps)?.physical_z().map(|p| p[0]);
        let mie = match cfg.sphere_radius() {
            Some(r) => Some(mie_resonance(&m, r, pair.z_plus)?),
            None => None,
        };
        let zp = pair.z_plus;
        table.push(vec![
            eps.into(),
            zp.re.into(),
            zp.im.into(),
            pair.z_minus.re.into(),
            pair.z_minus.im.into(),
            pair.sigma_plus.max(pair.sigma_minus).into(),
            pair.iterations.into(),
            cubic.map(|c| c.re).into(),
            cubic.map(|c| c.im).into(),
            mie.map(|c| c.re).into(),
            mie.map(|c| c.im).into(),
        ]);
        let tag = |s: &str| format!("{s} eps={eps}");
        checks.push(Check::at_most(&tag("im_ratio_vs_first_order"), (zp.im / first.im - 1.0).abs(), 0.1));
        checks.push(Check::at_most(&tag("re_minus_omega_M"), (zp.re - ac.omega_m()).abs(), 0.05));
        checks.push(Check::at_most(&tag("symmetry"), (pair.z_minus + zp.conj()).norm(), 1e-6));
        if let Some(c) = cubic {
            checks.push(Check::at_most(&tag("cubic_distance"), (c - zp).norm(), 0.05));
        }
        if let Some(r) = mie {
            checks.push(Check::at_most(&tag("mie_distance"), (r - zp).norm(), 0.03));
        }
        pairs.push(json!({
            "epsilon": eps,
            "z_plus": complex(zp),
            "z_minus": complex(pair.z_minus),
            "first_order": complex(first),
            "sigma_plus": pair.sigma_plus,
            "sigma_minus": pair.sigma_minus,
            "operator_norm": pair.operator_norm,
            "iterations": pair.iterations,
            "minima": pair.minima,
            "cubic": cubic.map(complex),
            "mie": mie.map(complex),
        }));
    }
    Ok(Outcome {
        results: json!({ "landscape_refinement": landscape_level, "pairs": pairs }),
        table: Some(table),
        checks,
    })
}

fn convergence(
    cfg: &RunConfig,
    omega: f64,
    epsilons: &[f64],
    direction: Vec3,
    pts: &[Vec3],
    constants: Constants,
) -> Result<Outcome, Failure> {
    let base = system(cfg, cfg.refinement())?;
    let medium = cfg.medium();
    let mut table = Table::new(&["epsilon", "error"]);
    let mut errors = Vec::new();
    for &eps in epsilons {
        let m = medium.with_epsilon(eps);
        let sys = base.with_medium(m)?;
        let inc = IncidentField::plane_wave(direction, omega, m.c0())?;
        let sol = solve_bubble(&sys, omega, &inc)?;
        let u = eval_scattered(&sol, pts)?;
        let ac = match (constants, cfg.sphere_radius()) {
            (Constants::Mesh, _) => AsymptoticConfig::from_frame(sys.frame(), m)?,
            (Constants::Analytic, Some(r)) => AsymptoticConfig::sphere(r, m)?,
            (Constants::Analytic, None) => {
                return Err(Failure::Config("experiment.constants \"analytic\" needs a sphere".into()))
            }
        };
        let lead = point_scatterer_field(&ac, omega, eps, inc.value(m.center), pts)?;
        let err = max_diff(&u, &lead);
        table.push(vec![eps.into(), err.into()]);
        errors.push(err);
    }
    let slope = loglog_slope(epsilons, &errors);
    Ok(Outcome {
        results: json!({ "omega": omega, "epsilons": epsilons, "errors": errors, "slope": slope }),
        table: Some(table),
        checks: vec![Check::within("slope", slope, 1.3, 1.8)],
    })
}
