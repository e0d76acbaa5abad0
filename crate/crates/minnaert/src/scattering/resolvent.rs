//! The bubble resolvent applied to a compactly supported source.
//!
//! With `v = R^H₀(z) f` the free field, the scaled unknowns solve the bubble
//! system with data `ṽ + ε²α N_κ f̃` in Ω and `q(∂_ν ṽ + ε²α ∂_ν N_κ f̃)` on Γ,
//! and the field is `v + N_κ(αε²(z² w + f̃)) − β SL_κ ψ` in reference
//! coordinates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solution::{reference_points, representation};
use super::system::{solve_scaled, BubbleSystem, SolveDiagnostics};
use crate::asymptotics::{convolve, SourceBump, SourceQuadrature};
use crate::error::{Error, Result};
use crate::layer_ops::{self, assemble_n, normal_derivative_n_matrix};
use crate::vec3::Vec3;

type C64 = Complex64;

/// Normalisation of the resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolventNormalization {
    /// `u` solves `k_ε∇·ρ_ε⁻¹∇u + z²u = −h`.
    Hamiltonian,
    /// `u` solves `∇·ρ_ε⁻¹∇u + z²u/k_ε = −h`, i.e. the Hamiltonian resolvent of `k_ε h`.
    Propagator,
}

/// Resolvent field `u = R(z) h`, evaluable off Γ_ε.
#[derive(Debug, Clone)]
pub struct ResolventField {
    pub z: C64,
    pub normalization: ResolventNormalization,
    pub source: SourceBump,
    pub rule: SourceQuadrature,
    pub diagnostics: SolveDiagnostics,
    system: BubbleSystem,
    psi: Vec<C64>,
    charge: Option<Vec<C64>>,
    /// Factor on the free field of `h`: `k₀` for the propagator, else 1.
    scale: f64,
}

impl ResolventField {
    pub fn system(&self) -> &BubbleSystem {
        &self.system
    }

    /// `(R^H₀(z) h)(x)` at physical points, without the bubble.
    pub fn free(&self, points: &[Vec3]) -> Vec<C64> {
        let c0 = self.system.medium().c0();
        let z = self.z / c0;
        points
            .par_iter()
            .map(|x| convolve(z, &self.source, &self.rule, *x, false).0 / (c0 * c0))
            .collect()
    }

    /// Full resolvent field at physical points away from Γ_ε.
    pub fn eval(&self, points: &[Vec3]) -> Result<Vec<C64>> {
        let sys = &self.system;
        let xi = reference_points(sys, points)?;
        let kappa = sys.kappa(self.z);
        let bubble = representation(sys, kappa, self.charge.as_deref(), &self.psi, &xi);
        let free = self.free(points);
        Ok(free
            .iter()
            .zip(bubble)
            .map(|(v, b)| v * self.scale + b)
            .collect())
    }

    /// `∂_ν ũ` on the reference surface (interior trace).
    pub fn boundary_density(&self) -> &[C64] {
        &self.psi
    }
}

/// Applies the bubble resolvent at `z` (closed upper half-plane, `z ≠ 0`)
/// to `source`.
pub fn resolvent_apply(
    system: &BubbleSystem,
    z: C64,
    source: &SourceBump,
    rule: &SourceQuadrature,
    normalization: ResolventNormalization,
) -> Result<ResolventField> {
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain("the resolvent needs a finite z ≠ 0".into()));
    }
    if z.im < 0.0 {
        return Err(Error::Domain(format!("z = {z} lies in the lower half-plane")));
    }
    let m = system.medium();
    let c = system.coefficients();
    let c0 = m.c0();
    let kz = z / c0;
    let eps = c.eps;
    let nodes = system.volume().nodes();
    let h_nodes: Vec<C64> = nodes.iter().map(|y| source.value(system.to_physical(*y))).collect();
    let inside = h_nodes.iter().any(|v| v.norm() > 0.0);
    let (scale, f_nodes, inner) = match normalization {
        ResolventNormalization::Hamiltonian => (1.0, h_nodes.clone(), 0.0),
        ResolventNormalization::Propagator => {
            let kin = m.k1 * eps * eps;
            (
                m.k0,
                h_nodes.iter().map(|v| v * kin).collect::<Vec<_>>(),
                (kin - m.k0) / (c0 * c0) * eps * eps,
            )
        }
    };
    let v_nodes: Vec<C64> = nodes
        .par_iter()
        .map(|y| convolve(kz, source, rule, system.to_physical(*y), false).0 * (scale / (c0 * c0)))
        .collect();
    let dv = system.panel_average(|x, nu| {
        let (_, g) = convolve(kz, source, rule, system.to_physical(x), true);
        (g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2]) * (eps * scale / (c0 * c0))
    });
    let mut a = v_nodes;
    let mut b = dv;
    // Volume terms driven by the source inside the bubble.
    let source_charge: Option<Vec<C64>> = inside.then(|| {
        f_nodes
            .iter()
            .zip(&h_nodes)
            .map(|(f, h)| f * (c.alpha * eps * eps) + h * inner)
            .collect()
    });
    if let Some(g) = &source_charge {
        let kappa = system.kappa(z);
        let n = assemble_n(system.volume(), kappa);
        let dn = normal_derivative_n_matrix(system.mesh(), system.volume(), kappa, &system.statics().s0)?;
        let ng = layer_ops::matvec(&n, g);
        let dng = layer_ops::matvec(&dn, g);
        for (ai, v) in a.iter_mut().zip(ng) {
            *ai += v;
        }
        for (bi, v) in b.iter_mut().zip(dng) {
            *bi += v;
        }
    }
    for bi in b.iter_mut() {
        *bi *= c.q;
    }
    let sol = solve_scaled(system, z, &a, &b)?;
    if sol.diagnostics.warning.is_some() {
        return Err(Error::NearResonance {
            schur: 1.0 / sol.diagnostics.condition_estimate,
            threshold: 1.0 / super::system::CONDITION_WARNING,
        });
    }
    let mut charge: Option<Vec<C64>> = source_charge;
    if c.alpha != 0.0 {
        let g = z * z * (c.alpha * eps * eps);
        let wq: Vec<C64> = sol.w.iter().map(|w| w * g).collect();
        charge = Some(match charge {
            Some(s) => s.iter().zip(&wq).map(|(p, q)| p + q).collect(),
            None => wq,
        });
    }
    Ok(ResolventField {
        z,
        normalization,
        source: *source,
        rule: *rule,
        diagnostics: sol.diagnostics,
        system: system.clone(),
        psi: sol.psi,
        charge,
        scale,
    })
}
