//! Dense discrete layer potentials on flat-panel meshes.
//!
//! Densities are piecewise constant on panels. Boundary operators are
//! Galerkin matrices normalised by the test-panel area,
//! `A_ij = (1/a_i) ∫_{T_i} ∫_{T_j} k(x, y) dσ(y) dσ(x)`, so that `A φ` holds
//! panel averages and the identity keeps unit diagonal. With this choice the
//! area-weighted matrix `diag(a) S` is exactly symmetric and
//! `diag(a) K = (diag(a) K*)ᵀ` holds to rounding.
//!
//! The static parts use closed forms: the self term of `S₀` is integrated
//! analytically, touching and near panels use the analytic triangle potential
//! inside a graded outer rule, and `K₀` is built from exact solid angles so
//! that `K₀ 1 = −1/2` holds row by row. The `z`-dependent remainders are
//! bounded kernels integrated with product rules.

pub mod analytic;
mod dump;
mod kernels;
mod volume;

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, VolumeQuadrature};
use crate::quadrature::TriangleRule;
use crate::vec3::{self, Vec3};

pub use dump::{load_operator, save_operator};
pub use kernels::{remainder_factor, sl_remainder};
pub(crate) use volume::newtonian_values as volume_values;
pub use volume::{
    assemble_n, eval_n, normal_derivative_n_matrix, normal_derivative_of_n, single_layer_matrix,
    single_layer_remainder_matrix, single_layer_static_matrix,
};

type C64 = Complex64;

const INV_4PI: f64 = 0.25 / PI;
/// Centroid distance, in panel diameters, below which static entries use the
/// analytic triangle potential.
pub const NEAR_RATIO: f64 = 3.0;
/// Centroid distance, in panel diameters, beyond which a 3×3 product rule is used.
pub const FAR_RATIO: f64 = 8.0;

/// Which boundary integral operator a matrix discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    S,
    K,
    Kstar,
}

impl KernelKind {
    pub(crate) fn code(self) -> u32 {
        match self {
            KernelKind::S => 0,
            KernelKind::K => 1,
            KernelKind::Kstar => 2,
        }
    }

    pub(crate) fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(KernelKind::S),
            1 => Some(KernelKind::K),
            2 => Some(KernelKind::Kstar),
            _ => None,
        }
    }
}

/// Role of a surface density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceSpace {
    /// Acts like a charge or normal derivative.
    SurfaceDensity,
    /// Acts like a Dirichlet trace.
    SurfaceTrace,
}

/// Piecewise-constant complex density on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub coefficients: Vec<C64>,
    pub mesh_id: u64,
    pub trace_space: TraceSpace,
}

impl Density {
    pub fn new(mesh: &SurfaceMesh, coefficients: Vec<C64>, trace_space: TraceSpace) -> Result<Self> {
        if coefficients.len() != mesh.len() {
            return Err(Error::Usage(format!(
                "density has {} coefficients for {} panels",
                coefficients.len(),
                mesh.len()
            )));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("density has non-finite entries".into()));
        }
        Ok(Self {
            coefficients,
            mesh_id: mesh.id(),
            trace_space,
        })
    }

    /// Constant density.
    pub fn constant(mesh: &SurfaceMesh, value: C64) -> Self {
        Self {
            coefficients: vec![value; mesh.len()],
            mesh_id: mesh.id(),
            trace_space: TraceSpace::SurfaceDensity,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// ∫_Γ φ dσ.
    pub fn integral(&self, mesh: &SurfaceMesh) -> C64 {
        self.coefficients
            .iter()
            .zip(mesh.areas())
            .map(|(c, a)| c * a)
            .sum()
    }

    /// Area-weighted L² norm.
    pub fn l2_norm(&self, mesh: &SurfaceMesh) -> f64 {
        self.coefficients
            .iter()
            .zip(mesh.areas())
            .map(|(c, a)| c.norm_sqr() * a)
            .sum::<f64>()
            .sqrt()
    }
}

/// Complex field sampled on volume quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeField {
    pub values: Vec<C64>,
    pub quadrature_id: u64,
}

impl VolumeField {
    pub fn new(quadrature: &VolumeQuadrature, values: Vec<C64>) -> Result<Self> {
        if values.len() != quadrature.len() {
            return Err(Error::Usage(format!(
                "volume field has {} values for {} nodes",
                values.len(),
                quadrature.len()
            )));
        }
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("volume field has non-finite entries".into()));
        }
        Ok(Self {
            values,
            quadrature_id: quadrature.id(),
        })
    }
}

/// Dense discrete boundary operator.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub matrix: Mat<C64>,
    pub kind: KernelKind,
    pub z: C64,
    pub mesh_id: u64,
}

impl BoundaryOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix-vector product; fails when the density lives on another mesh.
    pub fn apply(&self, density: &Density) -> Result<Density> {
        if density.mesh_id != self.mesh_id {
            return Err(Error::MeshMismatch {
                expected: self.mesh_id,
                actual: density.mesh_id,
            });
        }
        let trace_space = match self.kind {
            KernelKind::S | KernelKind::K => TraceSpace::SurfaceTrace,
            KernelKind::Kstar => TraceSpace::SurfaceDensity,
        };
        Ok(Density {
            coefficients: matvec(&self.matrix, &density.coefficients),
            mesh_id: self.mesh_id,
            trace_space,
        })
    }
}

/// Dense complex matrix-vector product.
pub fn matvec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for (j, xj) in x.iter().enumerate() {
        if *xj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

/// Real matrix applied to a complex vector.
pub fn matvec_real(a: &Mat<f64>, x: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for (j, xj) in x.iter().enumerate() {
        let col = a.col(j);
        for i in 0..n {
            y[i] += xj * col[i];
        }
    }
    y
}

/// Interaction class of a panel pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tier {
    SelfPanel,
    Touching,
    Near,
    Mid,
    Far,
}

pub(crate) fn tier(mesh: &SurfaceMesh, i: usize, j: usize) -> Tier {
    if i == j {
        return Tier::SelfPanel;
    }
    if mesh.touching(i, j) {
        return Tier::Touching;
    }
    let d = vec3::dist(mesh.centroids()[i], mesh.centroids()[j]);
    let diam = mesh.diameters()[i].max(mesh.diameters()[j]);
    if d < NEAR_RATIO * diam {
        Tier::Near
    } else if d < FAR_RATIO * diam {
        Tier::Mid
    } else {
        Tier::Far
    }
}

/// Quadrature points for product rules, cached per mesh.
pub(crate) struct PanelRules {
    fine_len: usize,
    fine_points: Vec<Vec3>,
    fine_weights: Vec<f64>,
    coarse_points: Vec<Vec3>,
    coarse_weights: Vec<f64>,
}

impl PanelRules {
    pub(crate) fn new(mesh: &SurfaceMesh) -> Self {
        let coarse = TriangleRule::three_point();
        let mut coarse_points = Vec::with_capacity(3 * mesh.len());
        let mut coarse_weights = Vec::with_capacity(3 * mesh.len());
        let mut fine_points = Vec::new();
        let mut fine_weights = Vec::new();
        for i in 0..mesh.len() {
            let t = mesh.triangle(i);
            for (l, w) in coarse.points.iter().zip(&coarse.weights) {
                coarse_points.push(vec3::barycentric(&t, *l));
                coarse_weights.push(w * mesh.areas()[i]);
            }
            fine_points.extend_from_slice(mesh.quad_points(i));
            fine_weights.extend_from_slice(mesh.quad_weights(i));
        }
        Self {
            fine_len: mesh.quad_points(0).len(),
            fine_points,
            fine_weights,
            coarse_points,
            coarse_weights,
        }
    }

    pub(crate) fn rule(&self, i: usize, tier: Tier) -> (&[Vec3], &[f64]) {
        if tier == Tier::Far {
            (&self.coarse_points[3 * i..3 * i + 3], &self.coarse_weights[3 * i..3 * i + 3])
        } else {
            let k = self.fine_len;
            (&self.fine_points[k * i..k * (i + 1)], &self.fine_weights[k * i..k * (i + 1)])
        }
    }
}

fn rule_on(mesh: &SurfaceMesh, i: usize, rule: &TriangleRule) -> Vec<(Vec3, f64)> {
    let t = mesh.triangle(i);
    let a = mesh.areas()[i];
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| (vec3::barycentric(&t, *l), w * a))
        .collect()
}

/// Outer rules for the analytic-inner static entries.
pub(crate) struct NearRules {
    touching: TriangleRule,
    near: TriangleRule,
}

impl NearRules {
    pub(crate) fn new() -> Self {
        Self {
            touching: TriangleRule::edge_graded(8, 3),
            near: TriangleRule::six_point().subdivided(1),
        }
    }
}

/// `∫_{T_i} ∫_{T_j} 1/(4π|x−y|)` for a touching or near pair, averaged over
/// both orderings of the outer/inner roles.
fn static_single_layer_pair(mesh: &SurfaceMesh, rules: &NearRules, i: usize, j: usize, t: Tier) -> f64 {
    let rule = if t == Tier::Touching { &rules.touching } else { &rules.near };
    let one_way = |p: usize, q: usize| -> f64 {
        let tq = mesh.triangle(q);
        rule_on(mesh, p, rule)
            .iter()
            .map(|(x, w)| w * analytic::triangle_potential(*x, &tq))
            .sum::<f64>()
    };
    0.5 * (one_way(i, j) + one_way(j, i)) * INV_4PI
}

/// Galerkin integral `∫_{T_i} ∫_{T_j} 1/(4π|x−y|)` for every pair class.
pub(crate) fn static_single_layer_entry(
    mesh: &SurfaceMesh,
    rules: &PanelRules,
    near: &NearRules,
    i: usize,
    j: usize,
) -> f64 {
    let t = tier(mesh, i, j);
    match t {
        Tier::SelfPanel => analytic::self_double_integral(&mesh.triangle(i)) * INV_4PI,
        Tier::Touching | Tier::Near => static_single_layer_pair(mesh, near, i, j, t),
        Tier::Mid | Tier::Far => {
            // The coarse far rule is kept for smooth remainders only.
            let (xi, wi) = rules.rule(i, Tier::Mid);
            let (yj, wj) = rules.rule(j, Tier::Mid);
            let mut s = 0.0;
            for (x, wx) in xi.iter().zip(wi) {
                for (y, wy) in yj.iter().zip(wj) {
                    s += wx * wy / vec3::dist(*x, *y);
                }
            }
            s * INV_4PI
        }
    }
}

/// Static single-layer matrix `S₀` (real).
pub fn assemble_s0_real(mesh: &SurfaceMesh) -> Mat<f64> {
    let n = mesh.len();
    let rules = PanelRules::new(mesh);
    let near = NearRules::new();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| static_single_layer_entry(mesh, &rules, &near, i, j))
                .collect()
        })
        .collect();
    let areas = mesh.areas();
    let mut m = Mat::<f64>::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (k, w) in row.iter().enumerate() {
            let j = i + k;
            m[(i, j)] = w / areas[i];
            m[(j, i)] = w / areas[j];
        }
    }
    m
}

/// Static double-layer matrix `K₀` (real), from exact solid angles.
///
/// For `x` inside a flat panel the solid angles of all other panels of a
/// closed mesh add up to `2π`, so exact Galerkin rows sum to `−1/2` and the
/// diagonal vanishes. The outer integrals are graded towards touching
/// panels; the diagonal absorbs what remains of the quadrature error, which
/// keeps `K₀ 1 = −1/2` exact.
pub fn assemble_k0_real(mesh: &SurfaceMesh) -> Mat<f64> {
    let n = mesh.len();
    let near = NearRules::new();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pts = mesh.quad_points(i);
            let wts = mesh.quad_weights(i);
            let graded = rule_on(mesh, i, &near.touching);
            let fine = rule_on(mesh, i, &near.near);
            let inv_area = 1.0 / mesh.areas()[i];
            let mut row: Vec<f64> = (0..n)
                .map(|j| {
                    let tj = mesh.triangle(j);
                    let s: f64 = match tier(mesh, i, j) {
                        Tier::SelfPanel => return 0.0,
                        Tier::Touching => graded.iter().map(|(x, w)| w * analytic::solid_angle(*x, &tj)).sum(),
                        Tier::Near => fine.iter().map(|(x, w)| w * analytic::solid_angle(*x, &tj)).sum(),
                        Tier::Mid | Tier::Far => pts
                            .iter()
                            .zip(wts)
                            .map(|(x, w)| w * analytic::solid_angle(*x, &tj))
                            .sum(),
                    };
                    -s * INV_4PI * inv_area
                })
                .collect();
            let off: f64 = row.iter().sum();
            row[i] = -0.5 - off;
            row
        })
        .collect();
    Mat::from_fn(n, n, |i, j| rows[i][j])
}

/// `K₀*` from `K₀` by area-weighted transposition.
pub fn kstar_from_k(mesh: &SurfaceMesh, k: &Mat<f64>) -> Mat<f64> {
    let a = mesh.areas();
    let n = mesh.len();
    Mat::from_fn(n, n, |i, j| a[j] * k[(j, i)] / a[i])
}

/// Product-rule Galerkin matrix of a bounded kernel `f(x, ν_x, y, ν_y)`.
pub(crate) fn product_matrix<F>(mesh: &SurfaceMesh, f: F) -> Mat<C64>
where
    F: Fn(Vec3, Vec3, Vec3, Vec3) -> C64 + Sync,
{
    let n = mesh.len();
    let rules = PanelRules::new(mesh);
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ni = mesh.normals()[i];
            let inv_area = 1.0 / mesh.areas()[i];
            (0..n)
                .map(|j| {
                    let t = tier(mesh, i, j);
                    let (xi, wi) = rules.rule(i, t);
                    let (yj, wj) = rules.rule(j, t);
                    let nj = mesh.normals()[j];
                    let mut s = C64::new(0.0, 0.0);
                    for (x, wx) in xi.iter().zip(wi) {
                        for (y, wy) in yj.iter().zip(wj) {
                            s += f(*x, ni, *y, nj) * (wx * wy);
                        }
                    }
                    s * inv_area
                })
                .collect()
        })
        .collect();
    Mat::from_fn(n, n, |i, j| rows[i][j])
}

pub(crate) fn to_complex(m: &Mat<f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

/// Static (`z = 0`) matrices of a mesh, reused across wavenumbers.
#[derive(Debug, Clone)]
pub struct StaticOperators {
    mesh_id: u64,
    pub s0: Mat<f64>,
    pub k0: Mat<f64>,
    pub k0star: Mat<f64>,
}

impl StaticOperators {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        let s0 = assemble_s0_real(mesh);
        let k0 = assemble_k0_real(mesh);
        let k0star = kstar_from_k(mesh, &k0);
        Self {
            mesh_id: mesh.id(),
            s0,
            k0,
            k0star,
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    fn check(&self, mesh: &SurfaceMesh) -> Result<()> {
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch {
                expected: self.mesh_id,
                actual: mesh.id(),
            });
        }
        Ok(())
    }

    /// `S_z` from the cached static part.
    pub fn s(&self, mesh: &SurfaceMesh, z: C64) -> Result<BoundaryOperator> {
        self.check(mesh)?;
        let mut matrix = to_complex(&self.s0);
        if z != C64::new(0.0, 0.0) {
            matrix += &product_matrix(mesh, |x, _, y, _| kernels::sl_remainder(z, vec3::dist(x, y)));
        }
        Ok(BoundaryOperator {
            matrix,
            kind: KernelKind::S,
            z,
            mesh_id: mesh.id(),
        })
    }

    /// `K_z` from the cached static part.
    pub fn k(&self, mesh: &SurfaceMesh, z: C64) -> Result<BoundaryOperator> {
        self.check(mesh)?;
        let mut matrix = to_complex(&self.k0);
        if z != C64::new(0.0, 0.0) {
            matrix += &k_remainder(mesh, z);
        }
        Ok(BoundaryOperator {
            matrix,
            kind: KernelKind::K,
            z,
            mesh_id: mesh.id(),
        })
    }

    /// `K*_z` from the cached static part.
    pub fn kstar(&self, mesh: &SurfaceMesh, z: C64) -> Result<BoundaryOperator> {
        self.check(mesh)?;
        let mut matrix = to_complex(&self.k0star);
        if z != C64::new(0.0, 0.0) {
            let r = k_remainder(mesh, z);
            let a = mesh.areas();
            let n = mesh.len();
            matrix += &Mat::from_fn(n, n, |i, j| r[(j, i)] * (a[j] / a[i]));
        }
        Ok(BoundaryOperator {
            matrix,
            kind: KernelKind::Kstar,
            z,
            mesh_id: mesh.id(),
        })
    }
}

/// Single-layer operator `S_z`.
pub fn assemble_s(mesh: &SurfaceMesh, z: C64) -> BoundaryOperator {
    let s0 = assemble_s0_real(mesh);
    let mut matrix = to_complex(&s0);
    if z != C64::new(0.0, 0.0) {
        matrix += &product_matrix(mesh, |x, _, y, _| kernels::sl_remainder(z, vec3::dist(x, y)));
    }
    BoundaryOperator {
        matrix,
        kind: KernelKind::S,
        z,
        mesh_id: mesh.id(),
    }
}

/// Double-layer operator `K_z` (normal derivative in the integration variable).
pub fn assemble_k(mesh: &SurfaceMesh, z: C64) -> BoundaryOperator {
    let mut matrix = to_complex(&assemble_k0_real(mesh));
    if z != C64::new(0.0, 0.0) {
        matrix += &k_remainder(mesh, z);
    }
    BoundaryOperator {
        matrix,
        kind: KernelKind::K,
        z,
        mesh_id: mesh.id(),
    }
}

/// Neumann–Poincaré operator `K*_z` (normal derivative in the target variable).
pub fn assemble_kstar(mesh: &SurfaceMesh, z: C64) -> BoundaryOperator {
    let k0 = assemble_k0_real(mesh);
    let mut matrix = to_complex(&kstar_from_k(mesh, &k0));
    if z != C64::new(0.0, 0.0) {
        let r = k_remainder(mesh, z);
        let a = mesh.areas();
        let n = mesh.len();
        matrix += &Mat::from_fn(n, n, |i, j| r[(j, i)] * (a[j] / a[i]));
    }
    BoundaryOperator {
        matrix,
        kind: KernelKind::Kstar,
        z,
        mesh_id: mesh.id(),
    }
}

/// `K_z − K₀`, bounded kernel `−ν_y·(x−y) g(izr)/(4πr³)`.
fn k_remainder(mesh: &SurfaceMesh, z: C64) -> Mat<C64> {
    product_matrix(mesh, |x, _, y, ny| {
        let d = vec3::sub(x, y);
        let r = vec3::norm(d);
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        -kernels::remainder_factor(z, r) * vec3::dot(ny, d)
    })
}

/// Kernel families with Taylor coefficients in the wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    S,
    K,
    Kstar,
    N,
    SL,
}

/// Dense matrix of the `j`-th Taylor coefficient in `z` of an operator.
///
/// `N` needs a volume quadrature; `SL` maps panel densities to values at
/// the volume nodes and needs both.
pub fn operator_series_term(
    kind: SeriesKind,
    j: usize,
    mesh: &SurfaceMesh,
    volume: Option<&VolumeQuadrature>,
) -> Result<Mat<C64>> {
    if j < 1 {
        return Err(Error::Usage("series order must be at least 1".into()));
    }
    let ij = C64::i().powi(j as i32);
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    match kind {
        SeriesKind::S => {
            let c = ij * (INV_4PI / fact);
            Ok(product_matrix(mesh, move |x, _, y, _| {
                c * vec3::dist(x, y).powi(j as i32 - 1)
            }))
        }
        SeriesKind::K | SeriesKind::Kstar => {
            let c = ij * ((j as f64 - 1.0) * INV_4PI / fact);
            let k = product_matrix(mesh, move |x, _, y, ny| {
                let d = vec3::sub(x, y);
                let r = vec3::norm(d);
                if r == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                -c * r.powi(j as i32 - 3) * vec3::dot(ny, d)
            });
            if kind == SeriesKind::K {
                Ok(k)
            } else {
                let a = mesh.areas();
                let n = mesh.len();
                Ok(Mat::from_fn(n, n, |p, q| k[(q, p)] * (a[q] / a[p])))
            }
        }
        SeriesKind::N => {
            let vq = volume.ok_or_else(|| Error::Usage("N series needs a volume quadrature".into()))?;
            Ok(volume::newtonian_series_term(vq, j))
        }
        SeriesKind::SL => {
            let vq = volume.ok_or_else(|| Error::Usage("SL series needs a volume quadrature".into()))?;
            Ok(volume::single_layer_series_term(mesh, vq, j))
        }
    }
}

/// `K*_κ` for many wavenumbers, from the static part plus a precomputed
/// Taylor expansion of the remainder.
#[derive(Debug, Clone)]
pub struct KstarSeries {
    mesh_id: u64,
    k0star: Mat<f64>,
    /// Real matrices `R_j` with `K*^(j) = i^j R_j`.
    terms: Vec<Mat<f64>>,
    diameter: f64,
}

impl KstarSeries {
    /// Precomputes terms `j = 2..=max_order` (the `j = 1` term vanishes).
    pub fn new(mesh: &SurfaceMesh, max_order: usize) -> Self {
        let k0 = assemble_k0_real(mesh);
        let k0star = kstar_from_k(mesh, &k0);
        let n = mesh.len();
        let orders = max_order.max(2);
        let rules = PanelRules::new(mesh);
        // One pass over the geometry accumulates every order at once.
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let inv_area = 1.0 / mesh.areas()[i];
                let mut out = vec![0.0; n * (orders - 1)];
                let mut acc = vec![0.0; orders - 1];
                for q in 0..n {
                    let t = tier(mesh, i, q);
                    // Transposed role: K*_iq uses the K kernel of (q, i) scaled by a_q/a_i.
                    let (xq, wq) = rules.rule(q, t);
                    let (yi, wi) = rules.rule(i, t);
                    let ni = mesh.normals()[i];
                    acc.iter_mut().for_each(|v| *v = 0.0);
                    for (x, wx) in xq.iter().zip(wq) {
                        for (y, wy) in yi.iter().zip(wi) {
                            let d = vec3::sub(*x, *y);
                            let r = vec3::norm(d);
                            if r == 0.0 {
                                continue;
                            }
                            // −ν_y·(x−y) with y on panel i, times r^{j−3}.
                            let base = -vec3::dot(ni, d) * wx * wy / (r * r * r);
                            let mut rp = r * r;
                            for v in acc.iter_mut() {
                                *v += base * rp;
                                rp *= r;
                            }
                        }
                    }
                    for (k, v) in acc.iter().enumerate() {
                        let j = k + 2;
                        let fact: f64 = (1..=j).map(|m| m as f64).product();
                        out[k * n + q] = v * ((j as f64 - 1.0) * INV_4PI / fact) * inv_area;
                    }
                }
                out
            })
            .collect();
        let terms = (0..orders - 1)
            .map(|k| Mat::from_fn(n, n, |i, q| rows[i][k * n + q]))
            .collect();
        let diameter = mesh
            .vertices()
            .iter()
            .flat_map(|a| mesh.vertices().iter().map(move |b| vec3::dist(*a, *b)))
            .fold(0.0, f64::max);
        Self {
            mesh_id: mesh.id(),
            k0star,
            terms,
            diameter,
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    /// Static part `K₀*`.
    pub fn k0star(&self) -> &Mat<f64> {
        &self.k0star
    }

    /// Bound on the first omitted term relative to the leading one.
    pub fn truncation_bound(&self, kappa: C64) -> f64 {
        let x = kappa.norm() * self.diameter;
        let j = self.terms.len() + 2;
        let fact: f64 = (1..=j).map(|m| m as f64).product();
        x.powi(j as i32) / fact
    }

    /// `Σ_j (iκ)^j R_j`, the remainder `K*_κ − K₀*`.
    pub fn remainder(&self, kappa: C64) -> Mat<C64> {
        let n = self.k0star.nrows();
        let mut m = Mat::<C64>::zeros(n, n);
        let mut c = (C64::i() * kappa).powi(2);
        for t in &self.terms {
            for col in 0..n {
                let src = t.col(col);
                let mut dst = m.col_mut(col);
                for row in 0..n {
                    dst[row] += c * src[row];
                }
            }
            c *= C64::i() * kappa;
        }
        m
    }

    /// Full `K*_κ`.
    pub fn evaluate(&self, kappa: C64) -> Mat<C64> {
        let mut m = self.remainder(kappa);
        let n = m.nrows();
        for col in 0..n {
            for row in 0..n {
                m[(row, col)] += self.k0star[(row, col)];
            }
        }
        m
    }
}

/// Values of the single-layer potential `∫_Γ G_z(x, y) φ(y) dσ(y)` at
/// points at least one minimal panel diameter away from the surface.
pub fn eval_sl(mesh: &SurfaceMesh, density: &Density, z: C64, points: &[Vec3]) -> Result<Vec<C64>> {
    if density.mesh_id != mesh.id() {
        return Err(Error::MeshMismatch {
            expected: mesh.id(),
            actual: density.mesh_id,
        });
    }
    let h = mesh.h_min();
    for p in points {
        let d = mesh.distance_to_centroids(*p);
        if d <= h {
            return Err(Error::NearSingularEvaluation {
                distance: d,
                minimum: h,
            });
        }
    }
    Ok(single_layer_values(mesh, &density.coefficients, z, points))
}

/// Single-layer potential without the distance guard; near panels use the
/// analytic static potential, so the values stay accurate close to Γ.
pub(crate) fn single_layer_values(mesh: &SurfaceMesh, phi: &[C64], z: C64, points: &[Vec3]) -> Vec<C64> {
    points
        .par_iter()
        .map(|x| {
            let mut row = vec![C64::new(0.0, 0.0); mesh.len()];
            single_layer_row(mesh, *x, z, &mut row);
            row.iter().zip(phi).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// `out[j] = ∫_{T_j} G_z(x, y) dσ(y)`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn single_layer_row(mesh: &SurfaceMesh, x: Vec3, z: C64, out: &mut [C64]) {
    let zero = z == C64::new(0.0, 0.0);
    for j in 0..mesh.len() {
        let c = mesh.centroids()[j];
        let near = vec3::dist(x, c) < NEAR_RATIO * mesh.diameters()[j];
        let pts = mesh.quad_points(j);
        let wts = mesh.quad_weights(j);
        let mut v = if near {
            C64::new(analytic::triangle_potential(x, &mesh.triangle(j)) * INV_4PI, 0.0)
        } else {
            let s: f64 = pts
                .iter()
                .zip(wts)
                .map(|(y, w)| w / vec3::dist(x, *y))
                .sum();
            C64::new(s * INV_4PI, 0.0)
        };
        if !zero {
            for (y, w) in pts.iter().zip(wts) {
                v += kernels::sl_remainder(z, vec3::dist(x, *y)) * *w;
            }
        }
        out[j] = v;
    }
}
