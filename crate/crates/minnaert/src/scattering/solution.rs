//! Plane-wave and point-source scattering: solve, field evaluation and the
//! flux identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::medium::{IncidentField, IncidentKind};
use super::system::{solve_scaled, BubbleSystem, SolveDiagnostics};
use crate::error::{Error, Result};
use crate::layer_ops::{
    self, analytic, assemble_n, normal_derivative_n_matrix, single_layer_values, Density,
    TraceSpace, VolumeField,
};
use crate::layer_ops::volume_values;
use crate::vec3::Vec3;

type C64 = Complex64;

/// Solution of the scaled system for one incident wave.
#[derive(Debug, Clone)]
pub struct ScatterSolution {
    pub omega: f64,
    pub medium: super::Medium,
    /// `∂_ν w` on the reference surface (interior trace).
    pub boundary_density: Density,
    /// `w` on the reference volume nodes.
    pub interior_values: VolumeField,
    pub incident: IncidentField,
    /// `None` for solutions assembled from external data.
    pub diagnostics: Option<SolveDiagnostics>,
    system: BubbleSystem,
}

/// Both sides of the flux identity and their relative mismatch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

impl ScatterSolution {
    /// Wraps externally computed `w` (volume nodes) and `∂_ν w` (panels).
    pub fn from_parts(
        system: &BubbleSystem,
        incident: IncidentField,
        interior: Vec<C64>,
        boundary: Vec<C64>,
    ) -> Result<Self> {
        Ok(Self {
            omega: incident.omega,
            medium: *system.medium(),
            boundary_density: Density::new(system.mesh(), boundary, TraceSpace::SurfaceDensity)?,
            interior_values: VolumeField::new(system.volume(), interior)?,
            incident,
            diagnostics: None,
            system: system.clone(),
        })
    }

    pub fn system(&self) -> &BubbleSystem {
        &self.system
    }
}

/// Generalised winding number of Γ about `xi`; 1 inside, 0 outside.
pub(crate) fn winding(sys: &BubbleSystem, xi: Vec3) -> f64 {
    let mesh = sys.mesh();
    (0..mesh.len())
        .map(|i| analytic::solid_angle(xi, &mesh.triangle(i)))
        .sum::<f64>()
        / (4.0 * PI)
}

fn check_incident(sys: &BubbleSystem, omega: f64, incident: &IncidentField) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Config(format!("omega must be positive, got {omega}")));
    }
    if (incident.omega - omega).abs() > 1e-12 * omega {
        return Err(Error::Usage(format!(
            "incident field has frequency {}, solve requested at {omega}",
            incident.omega
        )));
    }
    let c0 = sys.medium().c0();
    if (incident.c0 - c0).abs() > 1e-12 * c0 {
        return Err(Error::Usage(format!(
            "incident field uses c0 = {}, medium has {c0}",
            incident.c0
        )));
    }
    if let IncidentKind::PointSource { location } = incident.kind {
        let xi = sys.to_reference(location);
        sys.check_distance(xi)?;
        if winding(sys, xi) > 0.5 {
            return Err(Error::Config("point source lies inside the bubble".into()));
        }
    }
    Ok(())
}

/// Solves for `(w, ∂_ν w)` on the reference domain at real frequency `omega`.
pub fn solve_bubble(system: &BubbleSystem, omega: f64, incident: &IncidentField) -> Result<ScatterSolution> {
    check_incident(system, omega, incident)?;
    let c = system.coefficients();
    let a: Vec<C64> = system
        .volume()
        .nodes()
        .iter()
        .map(|y| incident.value(system.to_physical(*y)))
        .collect();
    let b: Vec<C64> = system
        .panel_average(|x, nu| {
            let g = incident.gradient(system.to_physical(x));
            (g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2]) * c.eps
        })
        .into_iter()
        .map(|v| v * c.q)
        .collect();
    let sol = solve_scaled(system, C64::new(omega, 0.0), &a, &b)?;
    if let Some(w) = &sol.diagnostics.warning {
        log::warn!("{w}");
    }
    Ok(ScatterSolution {
        omega,
        medium: *system.medium(),
        boundary_density: Density::new(system.mesh(), sol.psi, TraceSpace::SurfaceDensity)?,
        interior_values: VolumeField::new(system.volume(), sol.w)?,
        incident: *incident,
        diagnostics: Some(sol.diagnostics),
        system: system.clone(),
    })
}

/// `N_κ(charge)(ξ) − β SL_κ ψ(ξ)` at reference points.
pub(crate) fn representation(
    sys: &BubbleSystem,
    kappa: C64,
    charge: Option<&[C64]>,
    psi: &[C64],
    reference_points: &[Vec3],
) -> Vec<C64> {
    let beta = sys.coefficients().beta;
    let sl = single_layer_values(sys.mesh(), psi, kappa, reference_points);
    match charge {
        Some(f) => {
            let nv = volume_values(sys.volume(), f, kappa, reference_points);
            sl.iter().zip(&nv).map(|(s, n)| n - s * beta).collect()
        }
        None => sl.iter().map(|s| -s * beta).collect(),
    }
}

pub(crate) fn reference_points(sys: &BubbleSystem, points: &[Vec3]) -> Result<Vec<Vec3>> {
    points
        .iter()
        .map(|x| {
            let xi = sys.to_reference(*x);
            sys.check_distance(xi)?;
            Ok(xi)
        })
        .collect()
}

/// Volume charge `αε²ω² w` of the representation, if the speeds differ.
fn charge(sol: &ScatterSolution) -> Option<Vec<C64>> {
    let c = sol.system.coefficients();
    (c.alpha != 0.0).then(|| {
        let g = c.alpha * c.eps * c.eps * sol.omega * sol.omega;
        sol.interior_values.values.iter().map(|v| v * g).collect()
    })
}

/// Scattered field `u − u^in` at physical points away from Γ_ε.
pub fn eval_scattered(solution: &ScatterSolution, points: &[Vec3]) -> Result<Vec<C64>> {
    let sys = &solution.system;
    let xi = reference_points(sys, points)?;
    let kappa = sys.kappa(C64::new(solution.omega, 0.0));
    let q = charge(solution);
    Ok(representation(
        sys,
        kappa,
        q.as_deref(),
        &solution.boundary_density.coefficients,
        &xi,
    ))
}

/// Total field at physical points away from Γ_ε.
pub fn eval_field(solution: &ScatterSolution, points: &[Vec3]) -> Result<Vec<C64>> {
    let sc = eval_scattered(solution, points)?;
    Ok(points
        .iter()
        .zip(sc)
        .map(|(x, s)| solution.incident.value(*x) + s)
        .collect())
}

/// Compares `⟨∂_ν N w, e⟩_{S₀}` with
/// `−(ε²ω²/(C c₀²)) ∫∫ G w + (c₁²/(ε²ω²)) ⟨∂_ν w, e⟩_{S₀}` for `e = S₀⁻¹1`,
/// using `⟨φ, S₀⁻¹1⟩_{S₀} = C⁻¹ ∫_Γ φ`.
pub fn check_flux_identity(solution: &ScatterSolution) -> FluxCheck {
    let sys = &solution.system;
    let mesh = sys.mesh();
    let vq = sys.volume();
    let c = sys.coefficients();
    let cap = sys.frame().capacitance();
    let kappa = sys.kappa(C64::new(solution.omega, 0.0));
    let w = &solution.interior_values.values;
    let dn = normal_derivative_n_matrix(mesh, vq, kappa, &sys.statics().s0)
        .expect("volume rule belongs to the mesh");
    let dnw = layer_ops::matvec(&dn, w);
    let lhs: C64 = dnw.iter().zip(mesh.areas()).map(|(v, a)| v * a).sum::<C64>() / cap;
    let nw = layer_ops::matvec(&assemble_n(vq, kappa), w);
    let double: C64 = nw.iter().zip(vq.weights()).map(|(v, a)| v * a).sum();
    let flux = solution.boundary_density.integral(mesh) / cap;
    let c1 = sys.medium().c1();
    let e2w2 = c.eps * c.eps * solution.omega * solution.omega;
    let rhs = -kappa * kappa / cap * double + flux * (c1 * c1 / e2w2);
    let scale = lhs.norm().max(rhs.norm());
    let residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale };
    FluxCheck { lhs, rhs, residual }
}

/// `Im ∫_Γ conj(w) ∂_ν w⁺ dσ` normalised by `∫_Γ |w| |∂_ν w⁺| dσ`.
/// The scaled integral is proportional to the energy flux through Γ_ε.
pub fn energy_flux(solution: &ScatterSolution) -> Result<f64> {
    let sys = &solution.system;
    let mesh = sys.mesh();
    let c = sys.coefficients();
    let kappa = sys.kappa(C64::new(solution.omega, 0.0));
    let psi = &solution.boundary_density.coefficients;
    let s = sys.statics().s(mesh, kappa)?;
    let spsi = layer_ops::matvec(&s.matrix, psi);
    let inc = sys.panel_average(|x, _| solution.incident.value(sys.to_physical(x)));
    let vol = match charge(solution) {
        Some(q) => {
            let pts: Vec<Vec3> = (0..mesh.len()).flat_map(|i| mesh.quad_points(i).to_vec()).collect();
            let vals = volume_values(sys.volume(), &q, kappa, &pts);
            let mut k = 0;
            (0..mesh.len())
                .map(|i| {
                    let mut acc = C64::new(0.0, 0.0);
                    for w in mesh.quad_weights(i) {
                        acc += vals[k] * *w;
                        k += 1;
                    }
                    acc / mesh.areas()[i]
                })
                .collect()
        }
        None => vec![C64::new(0.0, 0.0); mesh.len()],
    };
    let r = 1.0 / c.q;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..mesh.len() {
        let trace = inc[i] + vol[i] - spsi[i] * c.beta;
        let dplus = psi[i] * r;
        num += mesh.areas()[i] * (trace.conj() * dplus).im;
        den += mesh.areas()[i] * trace.norm() * dplus.norm();
    }
    Ok(if den == 0.0 { 0.0 } else { num / den })
}
