//! The scaled bubble system on the reference domain.
//!
//! Unknowns are `w` on the volume nodes and `ψ = ∂_ν w` (interior trace) on
//! the panels, at wavenumber `κ = εz/c₀`:
//!
//! ```text
//! w − αε²z² N_κ w + β SL_κ ψ = a
//! −qαε²z² ∂_ν N_κ w + Λ⁽²⁾ ψ = b
//! ```
//!
//! with `q = ρ₁ε²/ρ₀`, `β = 1/q − 1`, `α = 1/c₁² − 1/c₀²` and
//! `Λ⁽²⁾ = (1+q)/2 + (1−q) K*_κ`.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::medium::Medium;
use crate::error::{Error, Result};
use crate::geometry::{make_volume_quadrature, SurfaceMesh, VolumeQuadrature};
use crate::layer_ops::{
    self, assemble_n, normal_derivative_n_matrix, single_layer_remainder_matrix,
    single_layer_static_matrix, KstarSeries, StaticOperators,
};
use crate::spectral::{build_frame, lambda2_matrix, SpectralFrame};
use crate::vec3::{self, Vec3};

type C64 = Complex64;

/// Condition estimate above which a solve is reported as near-singular.
pub const CONDITION_WARNING: f64 = 1e10;

/// Order of the cached Taylor expansion of `K*_κ`.
pub const SERIES_ORDER: usize = 14;

/// Relative truncation bound below which the expansion replaces direct assembly.
pub const SERIES_TOLERANCE: f64 = 1e-14;

/// Frequency-independent data built on first use.
#[derive(Debug, Default)]
struct Cache {
    series: OnceLock<Arc<KstarSeries>>,
    /// Static single layer from panels to the volume nodes.
    sl0: OnceLock<Mat<f64>>,
}

/// Discretisation of the reference bubble: surface mesh, cone-rule volume
/// quadrature about the bubble center and the static spectral data.
#[derive(Debug, Clone)]
pub struct BubbleSystem {
    mesh: Arc<SurfaceMesh>,
    volume: Arc<VolumeQuadrature>,
    frame: Arc<SpectralFrame>,
    medium: Medium,
    cache: Arc<Cache>,
}

impl BubbleSystem {
    /// Assembles the static operators of `mesh` and the volume rule about
    /// `medium.center`.
    pub fn new(mesh: SurfaceMesh, medium: Medium, radial_order: usize) -> Result<Self> {
        medium.validate()?;
        let frame = build_frame(&mesh)?;
        Self::with_frame(Arc::new(mesh), Arc::new(frame), medium, radial_order)
    }

    /// Reuses an existing frame of `mesh`.
    pub fn with_frame(
        mesh: Arc<SurfaceMesh>,
        frame: Arc<SpectralFrame>,
        medium: Medium,
        radial_order: usize,
    ) -> Result<Self> {
        medium.validate()?;
        if frame.mesh_id() != mesh.id() {
            return Err(Error::MeshMismatch {
                expected: mesh.id(),
                actual: frame.mesh_id(),
            });
        }
        let volume = make_volume_quadrature(&mesh, medium.center, radial_order)?;
        Ok(Self {
            mesh,
            volume: Arc::new(volume),
            frame,
            medium,
            cache: Arc::new(Cache::default()),
        })
    }

    /// Same discretisation with other material parameters.
    pub fn with_medium(&self, medium: Medium) -> Result<Self> {
        medium.validate()?;
        if medium.center == self.medium.center {
            return Ok(Self {
                medium,
                ..self.clone()
            });
        }
        let sys = Self::with_frame(self.mesh.clone(), self.frame.clone(), medium, self.radial_order())?;
        if let Some(series) = self.cache.series.get() {
            let _ = sys.cache.series.set(series.clone());
        }
        Ok(sys)
    }

    /// Taylor expansion of `K*_κ`, assembled on first use.
    pub fn kstar_series(&self) -> &KstarSeries {
        self.cache
            .series
            .get_or_init(|| Arc::new(KstarSeries::new(&self.mesh, SERIES_ORDER)))
    }

    /// `K*_κ`, from the cached expansion when it is accurate enough.
    pub fn kstar_matrix(&self, kappa: C64) -> Result<Mat<C64>> {
        if kappa.norm() * self.mesh_diameter() < 1.0 {
            let series = self.kstar_series();
            if series.truncation_bound(kappa) < SERIES_TOLERANCE {
                return Ok(series.evaluate(kappa));
            }
        }
        Ok(self.statics().kstar(&self.mesh, kappa)?.matrix)
    }

    fn mesh_diameter(&self) -> f64 {
        let v = self.mesh.vertices();
        let c = self.mesh.barycenter();
        2.0 * v.iter().map(|p| vec3::dist(*p, c)).fold(0.0, f64::max)
    }

    /// `SL_κ` from panels to the volume nodes.
    pub fn single_layer_to_nodes(&self, kappa: C64) -> Mat<C64> {
        let sl0 = self
            .cache
            .sl0
            .get_or_init(|| single_layer_static_matrix(&self.mesh, self.volume.nodes()));
        let mut m = if kappa == C64::new(0.0, 0.0) {
            Mat::zeros(sl0.nrows(), sl0.ncols())
        } else {
            single_layer_remainder_matrix(&self.mesh, kappa, self.volume.nodes())
        };
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] += sl0[(i, j)];
            }
        }
        m
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn volume(&self) -> &VolumeQuadrature {
        &self.volume
    }

    pub fn frame(&self) -> &SpectralFrame {
        &self.frame
    }

    pub fn frame_arc(&self) -> &Arc<SpectralFrame> {
        &self.frame
    }

    pub fn statics(&self) -> &StaticOperators {
        self.frame.statics()
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn radial_order(&self) -> usize {
        self.volume.len() / self.mesh.len()
    }

    /// `Φ_ε(ξ) = y₀ + ε(ξ − y₀)`.
    pub fn to_physical(&self, xi: Vec3) -> Vec3 {
        let y0 = self.medium.center;
        vec3::add(y0, vec3::scale(vec3::sub(xi, y0), self.medium.epsilon))
    }

    /// `Φ_{1/ε}(x)`.
    pub fn to_reference(&self, x: Vec3) -> Vec3 {
        let y0 = self.medium.center;
        vec3::add(y0, vec3::scale(vec3::sub(x, y0), 1.0 / self.medium.epsilon))
    }

    /// Scaled boundary wavenumber `εz/c₀`.
    pub fn kappa(&self, z: C64) -> C64 {
        z * (self.medium.epsilon / self.medium.c0())
    }

    pub(crate) fn coefficients(&self) -> Coefficients {
        let m = &self.medium;
        let eps = m.epsilon;
        let q = m.rho1 * eps * eps / m.rho0;
        let alpha = if m.matched_speeds() {
            0.0
        } else {
            1.0 / (m.c1() * m.c1()) - 1.0 / (m.c0() * m.c0())
        };
        Coefficients {
            eps,
            q,
            beta: 1.0 / q - 1.0,
            alpha,
        }
    }

    /// Fails when `x` is within one minimal panel diameter of Γ in
    /// reference coordinates.
    pub(crate) fn check_distance(&self, xi: Vec3) -> Result<()> {
        let h = self.mesh.h_min();
        let d = self.mesh.distance_to_centroids(xi);
        if d <= h {
            return Err(Error::NearSingularEvaluation {
                distance: d * self.medium.epsilon,
                minimum: h * self.medium.epsilon,
            });
        }
        Ok(())
    }

    /// Panel averages of `f` over the panel quadrature points.
    pub(crate) fn panel_average<F: Fn(Vec3, Vec3) -> C64>(&self, f: F) -> Vec<C64> {
        let mesh = &*self.mesh;
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
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Coefficients {
    pub eps: f64,
    pub q: f64,
    pub beta: f64,
    pub alpha: f64,
}

/// Solver diagnostics reported with every solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    /// `‖A x − b‖ / ‖b‖` of the assembled system (0 for a zero right-hand side).
    pub residual: f64,
    /// Lower estimate of the 2-norm condition number.
    pub condition_estimate: f64,
    /// Unknown count of the dense system.
    pub unknowns: usize,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    /// Set when the system is close to singular; the solution is still returned.
    pub warning: Option<String>,
}

/// Operators of the scaled system at one complex frequency.
pub(crate) struct ScaledOperators {
    pub lambda2: Mat<C64>,
    /// `SL_κ` from panels to volume nodes.
    pub sl: Mat<C64>,
    /// `N_κ` on the volume nodes.
    pub n: Option<Mat<C64>>,
    /// `∂_ν N_κ` from volume nodes to panels.
    pub dn: Option<Mat<C64>>,
}

impl ScaledOperators {
    pub fn new(sys: &BubbleSystem, z: C64, with_volume: bool) -> Result<Self> {
        let kappa = sys.kappa(z);
        let c = sys.coefficients();
        let lambda2 = lambda2_matrix(&sys.kstar_matrix(kappa)?, c.q);
        let sl = sys.single_layer_to_nodes(kappa);
        let (n, dn) = if with_volume {
            (
                Some(assemble_n(sys.volume(), kappa)),
                Some(normal_derivative_n_matrix(
                    sys.mesh(),
                    sys.volume(),
                    kappa,
                    &sys.statics().s0,
                )?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            lambda2,
            sl,
            n,
            dn,
        })
    }
}

/// Solution `(w, ψ)` of the scaled system.
pub(crate) struct ScaledSolution {
    pub w: Vec<C64>,
    pub psi: Vec<C64>,
    pub diagnostics: SolveDiagnostics,
}

fn column(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic probe vector for the condition estimate.
fn probe(n: usize) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_894_9;
            C64::new((t * 7.0).sin(), (t * 3.0).cos())
        })
        .collect()
}

/// Dense LU solve with residual and condition diagnostics.
fn dense_solve(a: &Mat<C64>, b: &[C64]) -> Result<(Vec<C64>, f64, f64)> {
    let n = b.len();
    let lu = a.partial_piv_lu();
    let x = lu.solve(&column(b));
    let x: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical("dense solve produced non-finite values".into()));
    }
    let ax = layer_ops::matvec(a, &x);
    let bn = norm(b);
    let residual = if bn == 0.0 {
        norm(&ax)
    } else {
        ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt() / bn
    };
    let p = probe(n);
    let y = lu.solve(&column(&p));
    let growth = (0..n).map(|i| y[(i, 0)].norm_sqr()).sum::<f64>().sqrt() / norm(&p);
    let growth = if bn > 0.0 { growth.max(norm(&x) / bn) } else { growth };
    // ‖A‖₂ ≥ ‖A‖_F/√n.
    let cond = a.norm_l2() / (n as f64).sqrt() * growth;
    Ok((x, residual, cond))
}

/// Full block operator over (volume nodes, panels).
fn block_matrix(ops: &ScaledOperators, c: &Coefficients, z: C64) -> Mat<C64> {
    let nm = ops.n.as_ref().expect("volume operators assembled");
    let dn = ops.dn.as_ref().expect("volume operators assembled");
    let m = nm.nrows();
    let n = ops.lambda2.nrows();
    let g = z * z * (c.alpha * c.eps * c.eps);
    let mut full = Mat::<C64>::zeros(m + n, m + n);
    for j in 0..m {
        for i in 0..m {
            full[(i, j)] = -nm[(i, j)] * g;
        }
        full[(j, j)] += C64::new(1.0, 0.0);
        for i in 0..n {
            full[(m + i, j)] = -dn[(i, j)] * g * c.q;
        }
    }
    for j in 0..n {
        for i in 0..m {
            full[(i, m + j)] = ops.sl[(i, j)] * c.beta;
        }
        for i in 0..n {
            full[(m + i, m + j)] = ops.lambda2[(i, j)];
        }
    }
    full
}

/// Operator whose loss of injectivity marks a resonance: `Λ⁽²⁾` when the
/// speeds match, else the full block.
pub(crate) fn characteristic_matrix(sys: &BubbleSystem, z: C64) -> Result<Mat<C64>> {
    let c = sys.coefficients();
    if c.alpha == 0.0 {
        let kappa = sys.kappa(z);
        return Ok(lambda2_matrix(&sys.kstar_matrix(kappa)?, c.q));
    }
    let ops = ScaledOperators::new(sys, z, true)?;
    Ok(block_matrix(&ops, &c, z))
}

/// Solves the scaled system with right-hand sides `a` (volume nodes) and
/// `b` (panels, already multiplied by `q`).
pub(crate) fn solve_scaled(
    sys: &BubbleSystem,
    z: C64,
    a: &[C64],
    b: &[C64],
) -> Result<ScaledSolution> {
    let c = sys.coefficients();
    let coupled = c.alpha != 0.0;
    let t0 = Instant::now();
    let ops = ScaledOperators::new(sys, z, coupled)?;
    let assembly_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let m = a.len();
    let n = b.len();
    let (w, psi, residual, cond, unknowns) = if !coupled {
        let (psi, residual, cond) = dense_solve(&ops.lambda2, b)?;
        let slpsi = layer_ops::matvec(&ops.sl, &psi);
        let w: Vec<C64> = a.iter().zip(&slpsi).map(|(ai, s)| ai - s * c.beta).collect();
        (w, psi, residual, cond, n)
    } else {
        let full = block_matrix(&ops, &c, z);
        let rhs: Vec<C64> = a.iter().chain(b).copied().collect();
        let (x, residual, cond) = dense_solve(&full, &rhs)?;
        (x[..m].to_vec(), x[m..].to_vec(), residual, cond, m + n)
    };
    let solve_seconds = t1.elapsed().as_secs_f64();
    let warning = (cond > CONDITION_WARNING || residual > 1e-8).then(|| {
        format!(
            "system close to singular near z = {z}: condition estimate {cond:.3e}, residual {residual:.3e}"
        )
    });
    Ok(ScaledSolution {
            w,
            psi,
            diagnostics: SolveDiagnostics {
                residual,
                condition_estimate: cond,
                unknowns,
                assembly_seconds,
                solve_seconds,
                warning,
            },
        })
}
