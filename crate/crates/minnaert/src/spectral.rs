//! The `S₀`-weighted inner product, capacitance, the `−1/2` eigendensity of
//! `K₀*`, the rank-one projector onto it and the 2×2 block inverse built on it.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{fresh_id, SurfaceMesh};
use crate::layer_ops::{self, BoundaryOperator, Density, StaticOperators, TraceSpace};
use crate::scattering::Medium;
use crate::vec3;

type C64 = Complex64;

/// Relative size of the Schur scalar below which the block inverse reports
/// a resonance.
pub const SCHUR_THRESHOLD: f64 = 1e-13;

/// Capacitance, eigendensity and inner product of one mesh.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    id: u64,
    mesh_id: u64,
    statics: Arc<StaticOperators>,
    eigen_density: Density,
    capacitance: f64,
    gram: f64,
    /// `⟨φ, e⟩ = Σ_i functional_i φ_i`.
    functional: Vec<f64>,
    areas: Vec<f64>,
    volume: f64,
}

/// Builds the frame, assembling the static operators of `mesh`.
pub fn build_frame(mesh: &SurfaceMesh) -> Result<SpectralFrame> {
    SpectralFrame::with_statics(mesh, Arc::new(StaticOperators::new(mesh)))
}

impl SpectralFrame {
    /// Builds the frame from already assembled static operators.
    pub fn with_statics(mesh: &SurfaceMesh, statics: Arc<StaticOperators>) -> Result<Self> {
        if statics.mesh_id() != mesh.id() {
            return Err(Error::MeshMismatch {
                expected: mesh.id(),
                actual: statics.mesh_id(),
            });
        }
        let n = mesh.len();
        let s0 = &statics.s0;
        let one = Mat::<f64>::from_fn(n, 1, |_, _| 1.0);
        let raw = s0.partial_piv_lu().solve(&one);
        let residual = (s0 * &raw - &one).norm_l2() / one.norm_l2();
        if !raw.norm_l2().is_finite() || residual > 1e-8 {
            return Err(Error::Numerical(format!(
                "static single-layer matrix is singular (solve residual {residual:.3e}, condition estimate {:.3e})",
                raw.norm_l2() * s0.norm_l2() / one.norm_l2()
            )));
        }
        let areas = mesh.areas().to_vec();
        let capacitance: f64 = (0..n).map(|i| areas[i] * raw[(i, 0)]).sum();
        if !(capacitance > 0.0) {
            return Err(Error::Numerical(format!("nonpositive capacitance {capacitance}")));
        }
        let s_raw = s0 * &raw;
        let gram_raw: f64 = (0..n).map(|i| areas[i] * s_raw[(i, 0)] * raw[(i, 0)]).sum::<f64>() / capacitance;
        let scale = 1.0 / gram_raw.sqrt();
        let e: Vec<f64> = (0..n).map(|i| raw[(i, 0)] * scale).collect();
        // The form is symmetric because diag(a) S₀ is.
        let functional: Vec<f64> = (0..n).map(|i| areas[i] * s_raw[(i, 0)] * scale / capacitance).collect();
        let gram: f64 = functional.iter().zip(&e).map(|(a, b)| a * b).sum();
        Ok(Self {
            id: fresh_id(),
            mesh_id: mesh.id(),
            statics,
            eigen_density: Density {
                coefficients: e.iter().map(|v| C64::new(*v, 0.0)).collect(),
                mesh_id: mesh.id(),
                trace_space: TraceSpace::SurfaceDensity,
            },
            capacitance,
            gram,
            functional,
            areas,
            volume: mesh.enclosed_volume(),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    /// `C_Ω = ∫_Γ S₀⁻¹1`.
    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    /// Volume enclosed by the mesh.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Normalised eigendensity `e ∝ S₀⁻¹1`.
    pub fn eigen_density(&self) -> &Density {
        &self.eigen_density
    }

    /// `⟨e, e⟩` after normalisation.
    pub fn gram(&self) -> f64 {
        self.gram
    }

    pub fn statics(&self) -> &Arc<StaticOperators> {
        &self.statics
    }

    fn check(&self, d: &Density) -> Result<()> {
        if d.mesh_id != self.mesh_id {
            return Err(Error::MeshMismatch {
                expected: self.mesh_id,
                actual: d.mesh_id,
            });
        }
        Ok(())
    }

    /// `⟨φ, e⟩` for a raw coefficient vector.
    pub fn coefficient(&self, phi: &[C64]) -> C64 {
        phi.iter().zip(&self.functional).map(|(p, f)| p * f).sum()
    }

    fn e(&self) -> &[C64] {
        &self.eigen_density.coefficients
    }

    /// `(I − P) φ` for a raw coefficient vector.
    fn complement(&self, phi: &[C64]) -> Vec<C64> {
        let a = self.coefficient(phi);
        phi.iter().zip(self.e()).map(|(p, e)| p - a * e).collect()
    }

    /// `‖(1/2 + K₀*) e‖ / ‖e‖` in the area-weighted L² norm.
    pub fn eigen_residual(&self) -> f64 {
        let e: Vec<f64> = self.e().iter().map(|c| c.re).collect();
        let n = e.len();
        let k = &self.statics.k0star;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let r: f64 = 0.5 * e[i] + (0..n).map(|j| k[(i, j)] * e[j]).sum::<f64>();
            num += self.areas[i] * r * r;
            den += self.areas[i] * e[i] * e[i];
        }
        (num / den).sqrt()
    }
}

/// `C_Ω⁻¹ ∫_Γ (S₀φ) ψ dσ` (bilinear, not sesquilinear).
pub fn s0_inner(frame: &SpectralFrame, phi: &Density, psi: &Density) -> Result<C64> {
    frame.check(phi)?;
    frame.check(psi)?;
    let s = layer_ops::matvec_real(&frame.statics.s0, &phi.coefficients);
    Ok(s.iter()
        .zip(&psi.coefficients)
        .zip(&frame.areas)
        .map(|((a, b), w)| a * b * *w)
        .sum::<C64>()
        / frame.capacitance)
}

/// `P φ = ⟨φ, e⟩ e`.
pub fn project_p(frame: &SpectralFrame, phi: &Density) -> Result<Density> {
    frame.check(phi)?;
    let a = frame.coefficient(&phi.coefficients);
    Ok(Density {
        coefficients: frame.e().iter().map(|e| a * e).collect(),
        mesh_id: frame.mesh_id,
        trace_space: phi.trace_space,
    })
}

/// Operator split along `span{e} ⊕ span{e}^⊥`.
///
/// Complement vectors are kept in full coordinates; `H₁₁` acts as
/// `(I − P) H (I − P)` and is inverted through `(I − P) H (I − P) + P`.
pub struct BlockOperator {
    pub h00: C64,
    /// Row functional `ψ ↦ ⟨Hψ, e⟩` restricted to the complement.
    pub h01: Vec<C64>,
    /// `(I − P) H e`.
    pub h10: Vec<C64>,
    /// Full matrix of `H`; applied on the complement with re-projection.
    pub h11: Mat<C64>,
    pub frame_id: u64,
    norm: f64,
    lu: PartialPivLu<C64>,
    e: Vec<C64>,
    functional: Vec<f64>,
    /// `H₁₁⁻¹ H₁₀`.
    y2: Vec<C64>,
    schur: C64,
}

impl std::fmt::Debug for BlockOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockOperator")
            .field("h00", &self.h00)
            .field("schur", &self.schur)
            .field("dim", &self.h11.nrows())
            .field("frame_id", &self.frame_id)
            .finish()
    }
}

fn col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

impl BlockOperator {
    /// `H₀₀ − H₀₁ H₁₁⁻¹ H₁₀`.
    pub fn schur(&self) -> C64 {
        self.schur
    }

    /// Frobenius norm of `H`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn complement(&self, v: &[C64]) -> Vec<C64> {
        let a: C64 = v.iter().zip(&self.functional).map(|(p, f)| p * f).sum();
        v.iter().zip(&self.e).map(|(p, e)| p - a * e).collect()
    }

    fn solve_complement(&self, rhs: &[C64]) -> Vec<C64> {
        let y = self.lu.solve(&col(rhs));
        let y: Vec<C64> = (0..rhs.len()).map(|i| y[(i, 0)]).collect();
        self.complement(&y)
    }

    /// Block form applied to `a e + r` with `r` in the complement.
    pub fn apply(&self, phi: &[C64]) -> Vec<C64> {
        let a: C64 = phi.iter().zip(&self.functional).map(|(p, f)| p * f).sum();
        let r = self.complement(phi);
        let hr = layer_ops::matvec(&self.h11, &r);
        let h01r: C64 = self.h01.iter().zip(&r).map(|(x, y)| x * y).sum();
        let h11r = self.complement(&hr);
        (0..phi.len())
            .map(|i| (self.h00 * a + h01r) * self.e[i] + self.h10[i] * a + h11r[i])
            .collect()
    }
}

/// Splits a dense matrix on the frame's mesh into its 2×2 block form.
pub fn block_decompose_matrix(frame: &SpectralFrame, h: &Mat<C64>) -> Result<BlockOperator> {
    let n = frame.e().len();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::Usage(format!("operator is {}×{}, frame has {n} panels", h.nrows(), h.ncols())));
    }
    let e = frame.e().to_vec();
    let ell = &frame.functional;
    let he = layer_ops::matvec(h, &e);
    let h00: C64 = he.iter().zip(ell).map(|(a, b)| a * b).sum();
    // ℓᵀ H.
    let h01: Vec<C64> = (0..n)
        .map(|j| (0..n).map(|i| ell[i] * h[(i, j)]).sum())
        .collect();
    let h10 = frame.complement(&he);
    // M = (I − P) H (I − P) + P with P = e ℓᵀ.
    let mut m = h.clone();
    for j in 0..n {
        for i in 0..n {
            let p_ij = e[i] * ell[j];
            m[(i, j)] += -e[i] * h01[j] - he[i] * ell[j] + h00 * p_ij + p_ij;
        }
    }
    let lu = m.partial_piv_lu();
    let norm = h.norm_l2();
    let mut b = BlockOperator {
        h00,
        h01,
        h10,
        h11: h.clone(),
        frame_id: frame.id,
        norm,
        lu,
        e,
        functional: ell.clone(),
        y2: Vec::new(),
        schur: C64::new(0.0, 0.0),
    };
    let y2 = b.solve_complement(&b.h10);
    let h01y2: C64 = b.h01.iter().zip(&y2).map(|(a, c)| a * c).sum();
    b.schur = b.h00 - h01y2;
    b.y2 = y2;
    Ok(b)
}

/// Splits a boundary operator into its 2×2 block form.
pub fn block_decompose(frame: &SpectralFrame, h: &BoundaryOperator) -> Result<BlockOperator> {
    if h.mesh_id != frame.mesh_id {
        return Err(Error::MeshMismatch {
            expected: frame.mesh_id,
            actual: h.mesh_id,
        });
    }
    block_decompose_matrix(frame, &h.matrix)
}

/// Solves `H f = φ` with the block formula
/// `f = a_f e + H₁₁⁻¹(φ_r − a_f H₁₀)`, `a_f = (a_φ − H₀₁H₁₁⁻¹φ_r)/(H₀₀ − H₀₁H₁₁⁻¹H₁₀)`.
pub fn block_invert(b: &BlockOperator, phi: &Density) -> Result<Density> {
    if phi.coefficients.len() != b.e.len() {
        return Err(Error::Usage("density size does not match the block operator".into()));
    }
    let threshold = SCHUR_THRESHOLD * b.norm;
    if b.schur.norm() < threshold {
        return Err(Error::NearResonance {
            schur: b.schur.norm(),
            threshold,
        });
    }
    let a_phi: C64 = phi.coefficients.iter().zip(&b.functional).map(|(p, f)| p * f).sum();
    let phi_r = b.complement(&phi.coefficients);
    let y1 = b.solve_complement(&phi_r);
    let h01y1: C64 = b.h01.iter().zip(&y1).map(|(a, c)| a * c).sum();
    let a_f = (a_phi - h01y1) / b.schur;
    let coefficients = (0..y1.len())
        .map(|i| a_f * b.e[i] + y1[i] - a_f * b.y2[i])
        .collect();
    Ok(Density {
        coefficients,
        mesh_id: phi.mesh_id,
        trace_space: phi.trace_space,
    })
}

/// `Λ⁽²⁾ = (1/2)(1+q) I + (1−q) K*_κ` with `q = ρ₁ε²/ρ₀`, `κ = εz/c₀`.
pub fn lambda2_matrix(kstar: &Mat<C64>, q: f64) -> Mat<C64> {
    let n = kstar.nrows();
    Mat::from_fn(n, n, |i, j| {
        let d = if i == j { 0.5 * (1.0 + q) } else { 0.0 };
        kstar[(i, j)] * (1.0 - q) + d
    })
}

/// `ε² (Λ⁽²⁾ + ε²βP)⁻¹ φ` and the closed-form leading coefficient
/// `⟨φ,e⟩ / (ρ₁/ρ₀ + β − z²|Ω|/(C c₀²) − i z³ |Ω| ε/(4π c₀³))` of its `e` component.
pub fn invert_lambda2(
    frame: &SpectralFrame,
    mesh: &SurfaceMesh,
    z: C64,
    epsilon: f64,
    beta: f64,
    medium: &Medium,
    phi: &Density,
) -> Result<(Density, C64)> {
    frame.check(phi)?;
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("beta must be nonnegative, got {beta}")));
    }
    let c0 = medium.c0();
    let kappa = z * epsilon / c0;
    let kstar = frame.statics.kstar(mesh, kappa)?;
    let q = medium.rho1 * epsilon * epsilon / medium.rho0;
    let mut h = lambda2_matrix(&kstar.matrix, q);
    let pen = epsilon * epsilon * beta;
    let e = frame.e();
    for j in 0..e.len() {
        for i in 0..e.len() {
            h[(i, j)] += e[i] * frame.functional[j] * pen;
        }
    }
    let b = block_decompose_matrix(frame, &h)?;
    let mut f = block_invert(&b, phi)?;
    for c in f.coefficients.iter_mut() {
        *c *= epsilon * epsilon;
    }
    let vol = frame.volume;
    let cap = frame.capacitance;
    let denom = medium.rho1 / medium.rho0 + beta
        - z * z * vol / (cap * c0 * c0)
        - C64::i() * z * z * z * vol * epsilon / (4.0 * PI * c0 * c0 * c0);
    let lead = frame.coefficient(&phi.coefficients) / denom;
    Ok((f, lead))
}

/// `⟨f, e⟩` of a density, i.e. the coefficient on the eigendensity.
pub fn e_coefficient(frame: &SpectralFrame, f: &Density) -> Result<C64> {
    frame.check(f)?;
    Ok(frame.coefficient(&f.coefficients))
}

/// The three surface identities relating the eigendensity to the volume:
/// `(1/8π)∫∫ ν(x)·(x−y)/|x−y| e(y) = |Ω|`,
/// `(1/8π)∫∫ ν(y)·(x−y)/|x−y| e(x) = −|Ω|` and
/// `∫∫ ν(x)·(x−y) e(y) = C_Ω|Ω|·3`, with `e = S₀⁻¹1`.
/// Returns `(computed, expected)` pairs.
pub fn integral_identities(frame: &SpectralFrame, mesh: &SurfaceMesh) -> Result<[(f64, f64); 3]> {
    if mesh.id() != frame.mesh_id {
        return Err(Error::MeshMismatch {
            expected: frame.mesh_id,
            actual: mesh.id(),
        });
    }
    // e = S₀⁻¹1 without the unit normalisation.
    let scale = frame.capacitance / frame.areas.iter().zip(frame.e()).map(|(a, e)| a * e.re).sum::<f64>();
    let e: Vec<f64> = frame.e().iter().map(|c| c.re * scale).collect();
    let n = mesh.len();
    let mut sums = [0.0; 3];
    for i in 0..n {
        let ni = mesh.normals()[i];
        for j in 0..n {
            if i == j {
                continue;
            }
            let nj = mesh.normals()[j];
            for (x, wx) in mesh.quad_points(i).iter().zip(mesh.quad_weights(i)) {
                for (y, wy) in mesh.quad_points(j).iter().zip(mesh.quad_weights(j)) {
                    let d = vec3::sub(*x, *y);
                    let r = vec3::norm(d);
                    let w = wx * wy;
                    sums[0] += w * vec3::dot(ni, d) / r * e[j];
                    sums[1] += w * vec3::dot(nj, d) / r * e[i];
                    sums[2] += w * vec3::dot(ni, d) * e[j];
                }
            }
        }
    }
    let vol = mesh.enclosed_volume();
    Ok([
        (sums[0] / (8.0 * PI), vol),
        (sums[1] / (8.0 * PI), -vol),
        (sums[2], 3.0 * frame.capacitance * vol),
    ])
}
