#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use minnaert::scattering::{BubbleSystem, Medium};
use minnaert::spectral::{build_frame, SpectralFrame};
use minnaert::{make_sphere, SurfaceMesh, C64};

pub const ORIGIN: [f64; 3] = [0.0; 3];

type Cached = (Arc<SurfaceMesh>, Arc<SpectralFrame>);

fn cache() -> &'static Mutex<HashMap<u32, Cached>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Cached>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Unit sphere mesh and its spectral frame, built once per level.
pub fn unit_sphere(level: u32) -> Cached {
    let mut map = cache().lock().unwrap();
    map.entry(level)
        .or_insert_with(|| {
            let mesh = make_sphere(ORIGIN, 1.0, level).unwrap();
            let frame = build_frame(&mesh).unwrap();
            (Arc::new(mesh), Arc::new(frame))
        })
        .clone()
}

/// Canonical bubble system on the unit sphere.
pub fn canonical_system(level: u32, epsilon: f64) -> BubbleSystem {
    medium_system(level, Medium::canonical(epsilon))
}

pub fn medium_system(level: u32, medium: Medium) -> BubbleSystem {
    let (mesh, frame) = unit_sphere(level);
    BubbleSystem::with_frame(mesh, frame, medium, 2).unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Points on a sphere of radius `r` about the origin, spread by a golden spiral.
pub fn spiral_points(n: usize, r: f64) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let y = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let rho = (1.0 - y * y).sqrt();
            let t = golden * k as f64;
            [r * rho * t.cos(), r * y, r * rho * t.sin()]
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
