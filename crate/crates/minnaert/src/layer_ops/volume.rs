//! Volume potentials on cone-rule quadratures and their traces on Γ.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::kernels::{ball_radius, ball_self_term, green, remainder_factor, sl_remainder};
use super::{single_layer_row, Density, TraceSpace, VolumeField};
use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, VolumeQuadrature};
use crate::vec3::{self, Vec3};

type C64 = Complex64;

const INV_4PI: f64 = 0.25 / PI;

/// Newtonian operator `(N_z f)(y_n) = Σ_m w_m G_z(y_n, y_m) f_m`; the
/// self term integrates the kernel over the node's volume-equivalent ball.
pub fn assemble_n(vq: &VolumeQuadrature, z: C64) -> Mat<C64> {
    let nodes = vq.nodes();
    let w = vq.weights();
    let m = nodes.len();
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|n| {
            (0..m)
                .map(|k| {
                    if k == n {
                        ball_self_term(z, ball_radius(w[k]))
                    } else {
                        green(z, vec3::dist(nodes[n], nodes[k])) * w[k]
                    }
                })
                .collect()
        })
        .collect();
    Mat::from_fn(m, m, |i, j| rows[i][j])
}

/// Newtonian potential of a nodal field at arbitrary points off the node set.
pub fn eval_n(vq: &VolumeQuadrature, field: &VolumeField, z: C64, points: &[Vec3]) -> Result<Vec<C64>> {
    if field.quadrature_id != vq.id() {
        return Err(Error::MeshMismatch {
            expected: vq.id(),
            actual: field.quadrature_id,
        });
    }
    Ok(newtonian_values(vq, &field.values, z, points))
}

pub(crate) fn newtonian_values(vq: &VolumeQuadrature, f: &[C64], z: C64, points: &[Vec3]) -> Vec<C64> {
    points
        .par_iter()
        .map(|x| {
            vq.nodes()
                .iter()
                .zip(vq.weights())
                .zip(f)
                .map(|((y, w), v)| {
                    let r = vec3::dist(*x, *y);
                    if r == 0.0 {
                        ball_self_term(z, ball_radius(*w)) * v
                    } else {
                        green(z, r) * (w * v)
                    }
                })
                .sum()
        })
        .collect()
}

/// Single-layer potential matrix from panel densities to target values,
/// `A_kj = ∫_{T_j} G_z(x_k, y) dσ(y)`.
pub fn single_layer_matrix(mesh: &SurfaceMesh, z: C64, targets: &[Vec3]) -> Mat<C64> {
    let n = mesh.len();
    let rows: Vec<Vec<C64>> = targets
        .par_iter()
        .map(|x| {
            let mut row = vec![C64::new(0.0, 0.0); n];
            single_layer_row(mesh, *x, z, &mut row);
            row
        })
        .collect();
    Mat::from_fn(targets.len(), n, |i, j| rows[i][j])
}

/// Static part of [`single_layer_matrix`], `∫_{T_j} dσ(y)/(4π|x_k − y|)`.
pub fn single_layer_static_matrix(mesh: &SurfaceMesh, targets: &[Vec3]) -> Mat<f64> {
    let n = mesh.len();
    let rows: Vec<Vec<f64>> = targets
        .par_iter()
        .map(|x| {
            let mut row = vec![C64::new(0.0, 0.0); n];
            single_layer_row(mesh, *x, C64::new(0.0, 0.0), &mut row);
            row.iter().map(|v| v.re).collect()
        })
        .collect();
    Mat::from_fn(targets.len(), n, |i, j| rows[i][j])
}

/// `z`-dependent part of [`single_layer_matrix`] with the bounded kernel
/// `(e^{izr} − 1)/(4πr)`.
pub fn single_layer_remainder_matrix(mesh: &SurfaceMesh, z: C64, targets: &[Vec3]) -> Mat<C64> {
    let n = mesh.len();
    let rows: Vec<Vec<C64>> = targets
        .par_iter()
        .map(|x| {
            (0..n)
                .map(|j| {
                    mesh.quad_points(j)
                        .iter()
                        .zip(mesh.quad_weights(j))
                        .map(|(y, w)| sl_remainder(z, vec3::dist(*x, *y)) * *w)
                        .sum()
                })
                .collect()
        })
        .collect();
    Mat::from_fn(targets.len(), n, |i, j| rows[i][j])
}

fn nodes_per_panel(mesh: &SurfaceMesh, vq: &VolumeQuadrature) -> Result<usize> {
    if vq.mesh_id() != mesh.id() || !vq.len().is_multiple_of(mesh.len()) {
        return Err(Error::MeshMismatch {
            expected: mesh.id(),
            actual: vq.mesh_id(),
        });
    }
    Ok(vq.len() / mesh.len())
}

/// Panel-averaged normal derivative on Γ of the Newtonian potential,
/// `B_im = (1/a_i) ∫_{T_i} w_m ∂_{ν_x} G_z(x, y_m) dσ(x)`.
///
/// The node closest to panel `i` makes the kernel nearly singular on that
/// panel, so the static part is corrected by subtracting the potential of a
/// constant field, whose normal derivative is the surface integral
/// `−∫_Γ G₀(x, y) ν_x·ν_y dσ(y)`. `s0` is the static single-layer matrix.
pub fn normal_derivative_n_matrix(
    mesh: &SurfaceMesh,
    vq: &VolumeQuadrature,
    z: C64,
    s0: &Mat<f64>,
) -> Result<Mat<C64>> {
    let per = nodes_per_panel(mesh, vq)?;
    if s0.nrows() != mesh.len() || s0.ncols() != mesh.len() {
        return Err(Error::Usage("static single-layer matrix has the wrong size".into()));
    }
    let nodes = vq.nodes();
    let w = vq.weights();
    let m = nodes.len();
    let n = mesh.len();
    let normals = mesh.normals();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nu = normals[i];
            let pts = mesh.quad_points(i);
            let wts = mesh.quad_weights(i);
            let inv_area = 1.0 / mesh.areas()[i];
            let mut row = vec![C64::new(0.0, 0.0); m];
            let mut static_sum = 0.0;
            for k in 0..m {
                let mut full = C64::new(0.0, 0.0);
                let mut stat = 0.0;
                for (x, wx) in pts.iter().zip(wts) {
                    let d = vec3::sub(*x, nodes[k]);
                    let r = vec3::norm(d);
                    let nd = vec3::dot(nu, d);
                    stat -= wx * nd * INV_4PI / (r * r * r);
                    full += remainder_factor(z, r) * (wx * nd);
                }
                let stat = stat * inv_area * w[k];
                static_sum += stat;
                row[k] = full * (inv_area * w[k]) + stat;
            }
            // Outermost node on the ray through the centroid of panel i.
            let anchor = i * per + per - 1;
            let exact: f64 = -(0..n)
                .map(|j| s0[(i, j)] * vec3::dot(nu, normals[j]))
                .sum::<f64>();
            row[anchor] += exact - static_sum;
            row
        })
        .collect();
    Ok(Mat::from_fn(n, m, |i, k| rows[i][k]))
}

/// `∂_ν N_z f` on Γ as a panel density.
pub fn normal_derivative_of_n(
    mesh: &SurfaceMesh,
    vq: &VolumeQuadrature,
    field: &VolumeField,
    z: C64,
) -> Result<Density> {
    if field.quadrature_id != vq.id() {
        return Err(Error::MeshMismatch {
            expected: vq.id(),
            actual: field.quadrature_id,
        });
    }
    let s0 = super::assemble_s0_real(mesh);
    let b = normal_derivative_n_matrix(mesh, vq, z, &s0)?;
    Ok(Density {
        coefficients: super::matvec(&b, &field.values),
        mesh_id: mesh.id(),
        trace_space: TraceSpace::SurfaceDensity,
    })
}

pub(crate) fn newtonian_series_term(vq: &VolumeQuadrature, j: usize) -> Mat<C64> {
    let ij = C64::i().powi(j as i32);
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    let nodes = vq.nodes();
    let w = vq.weights();
    let m = nodes.len();
    Mat::from_fn(m, m, |a, b| {
        if a == b {
            let r = ball_radius(w[b]);
            ij * (r.powi(j as i32 + 2) / ((j + 2) as f64 * fact))
        } else {
            ij * (w[b] * vec3::dist(nodes[a], nodes[b]).powi(j as i32 - 1) * INV_4PI / fact)
        }
    })
}

pub(crate) fn single_layer_series_term(mesh: &SurfaceMesh, vq: &VolumeQuadrature, j: usize) -> Mat<C64> {
    let ij = C64::i().powi(j as i32);
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    let nodes = vq.nodes();
    Mat::from_fn(nodes.len(), mesh.len(), |a, b| {
        let s: f64 = mesh
            .quad_points(b)
            .iter()
            .zip(mesh.quad_weights(b))
            .map(|(y, w)| w * vec3::dist(nodes[a], *y).powi(j as i32 - 1))
            .sum();
        ij * (s * INV_4PI / fact)
    })
}
