//! Flat binary operator files: `u32` kind, `u64` size, `z` as two `f64`,
//! then the row-major entries as `(re, im)` pairs, all little-endian.

use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;

use super::{BoundaryOperator, KernelKind};
use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;

/// Writes an operator to `path`.
pub fn save_operator(op: &BoundaryOperator, path: &Path) -> Result<()> {
    let n = op.matrix.nrows();
    let mut buf = Vec::with_capacity(28 + 16 * n * n);
    buf.extend_from_slice(&op.kind.code().to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&op.z.re.to_le_bytes());
    buf.extend_from_slice(&op.z.im.to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            let v = op.matrix[(i, j)];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

/// Reads an operator written by [`save_operator`] and attaches it to `mesh`.
pub fn load_operator(path: &Path, mesh: &SurfaceMesh) -> Result<BoundaryOperator> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 28 {
        return Err(Error::Config("operator file is truncated".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let kind = KernelKind::from_code(u32_at(0))
        .ok_or_else(|| Error::Config(format!("unknown operator kind {}", u32_at(0))))?;
    let n = u64_at(4) as usize;
    let z = Complex64::new(f64_at(12), f64_at(20));
    if n != mesh.len() {
        return Err(Error::Usage(format!(
            "operator has size {n} but the mesh has {} panels",
            mesh.len()
        )));
    }
    if bytes.len() != 28 + 16 * n * n {
        return Err(Error::Config("operator file has the wrong length".into()));
    }
    let matrix = Mat::from_fn(n, n, |i, j| {
        let o = 28 + 16 * (i * n + j);
        Complex64::new(f64_at(o), f64_at(o + 8))
    });
    Ok(BoundaryOperator {
        matrix,
        kind,
        z,
        mesh_id: mesh.id(),
    })
}
