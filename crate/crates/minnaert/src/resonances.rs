//! Minnaert resonances: complex frequencies where the scaled bubble operator
//! loses injectivity, and the truncated cubic characteristic equation.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{resonance_first_order, AsymptoticConfig};
use crate::error::{Error, Result};
use crate::scattering::{characteristic_matrix, BubbleSystem};

type C64 = Complex64;

/// Newton iteration cap.
pub const MAX_ITERATIONS: usize = 100;

/// Points per side of the landscape grid used to count minima.
pub const GRID_POINTS: usize = 40;

/// Located resonance pair with residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ResonancePair {
    pub z_plus: C64,
    pub z_minus: C64,
    pub epsilon: f64,
    /// Smallest singular value of the characteristic operator at `z_plus`.
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Largest singular value at `z_plus`.
    pub operator_norm: f64,
    /// Newton iterations summed over both roots.
    pub iterations: usize,
    pub converged: bool,
    /// Local minima of `σ_min` found in the two search disks.
    pub minima: usize,
}

/// Extreme singular values of the characteristic operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaBounds {
    pub min: f64,
    pub max: f64,
}

/// `σ_min` sampled on a square grid.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaLandscape {
    pub center: C64,
    pub half_width: f64,
    pub points: usize,
    /// Row-major over (imaginary, real) offsets.
    pub sigma: Vec<f64>,
    /// Largest `σ_max` over the grid.
    pub operator_norm: f64,
}

impl SigmaLandscape {
    pub fn point(&self, row: usize, col: usize) -> C64 {
        let step = 2.0 * self.half_width / (self.points - 1) as f64;
        self.center
            + C64::new(
                -self.half_width + col as f64 * step,
                -self.half_width + row as f64 * step,
            )
    }

    /// Strict interior local minima (against all eight neighbours) lying
    /// within `radius` of the centre.
    pub fn local_minima(&self, radius: f64) -> Vec<(C64, f64)> {
        let n = self.points;
        let at = |r: usize, c: usize| self.sigma[r * n + c];
        let mut out = Vec::new();
        for r in 1..n - 1 {
            for c in 1..n - 1 {
                let s = at(r, c);
                let lower = (-1i64..=1)
                    .flat_map(|dr| (-1i64..=1).map(move |dc| (dr, dc)))
                    .filter(|&d| d != (0, 0))
                    .all(|(dr, dc)| s < at((r as i64 + dr) as usize, (c as i64 + dc) as usize));
                let z = self.point(r, c);
                if lower && (z - self.center).norm() <= radius {
                    out.push((z, s));
                }
            }
        }
        out
    }
}

fn check_z(z: C64) -> Result<()> {
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("characteristic operator needs finite z ≠ 0, got {z}")));
    }
    Ok(())
}

fn bounds(a: &Mat<C64>) -> Result<SigmaBounds> {
    // The adjoint has the same singular values; its iteration can converge
    // where the direct one stalls on a numerically singular matrix.
    let s = a
        .singular_values()
        .or_else(|_| a.adjoint().to_owned().singular_values())
        .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SigmaBounds { min, max })
}

/// Smallest and largest singular values of the characteristic operator at
/// `z`, at the system's `ε`.
pub fn characteristic_bounds(system: &BubbleSystem, z: C64) -> Result<SigmaBounds> {
    check_z(z)?;
    bounds(&characteristic_matrix(system, z)?)
}

/// Smallest singular value of the characteristic operator at `z`.
pub fn characteristic_sigma(system: &BubbleSystem, z: C64) -> Result<f64> {
    Ok(characteristic_bounds(system, z)?.min)
}

/// `σ_min` on a `points × points` grid over the square of half-width
/// `half_width` about `center`.
pub fn sigma_landscape(
    system: &BubbleSystem,
    center: C64,
    half_width: f64,
    points: usize,
) -> Result<SigmaLandscape> {
    if points < 3 || !(half_width > 0.0) {
        return Err(Error::Config("landscape needs at least 3 points and a positive width".into()));
    }
    let mut land = SigmaLandscape {
        center,
        half_width,
        points,
        sigma: Vec::with_capacity(points * points),
        operator_norm: 0.0,
    };
    for r in 0..points {
        for c in 0..points {
            let z = land.point(r, c);
            let b = if z.norm() == 0.0 {
                SigmaBounds { min: f64::INFINITY, max: 0.0 }
            } else {
                characteristic_bounds(system, z)?
            };
            land.sigma.push(b.min);
            land.operator_norm = land.operator_norm.max(b.max);
        }
    }
    Ok(land)
}

/// Probe and test vectors aligned with the Minnaert mode: `S₀⁻¹1` on the
/// panels and 1 on the volume nodes.
fn mode_vectors(system: &BubbleSystem, n: usize) -> (Mat<C64>, Mat<C64>) {
    let e = &system.frame().eigen_density().coefficients;
    let areas = system.mesh().areas();
    let m = n - e.len();
    let v = Mat::from_fn(n, 1, |i, _| if i < m { C64::new(1.0, 0.0) } else { e[i - m] });
    let u = Mat::from_fn(n, 1, |i, _| if i < m { v[(i, 0)] } else { v[(i, 0)] * areas[i - m] });
    (u, v)
}

/// `1/(uᴴ A(z)⁻¹ v)`: analytic near a simple resonance, vanishing at it.
fn reciprocal_response(system: &BubbleSystem, z: C64) -> Result<C64> {
    let a = characteristic_matrix(system, z)?;
    let n = a.nrows();
    let (u, v) = mode_vectors(system, n);
    let x = a.partial_piv_lu().solve(&v);
    let s: C64 = (0..n).map(|i| u[(i, 0)].conj() * x[(i, 0)]).sum();
    if !(s.re.is_finite() && s.im.is_finite()) || s.norm() == 0.0 {
        return Err(Error::Numerical(format!("characteristic response undefined at z = {z}")));
    }
    Ok(1.0 / s)
}

/// Complex Newton from `seed` with central-difference derivatives; steps
/// are capped at a quarter of `|seed|`.
fn newton(system: &BubbleSystem, seed: C64) -> Result<(C64, usize, bool)> {
    let h = 1e-6 * seed.norm();
    let cap = 0.25 * seed.norm();
    let mut z = seed;
    for it in 1..=MAX_ITERATIONS {
        let g = reciprocal_response(system, z)?;
        let d = (reciprocal_response(system, z + h)? - reciprocal_response(system, z - h)?) / (2.0 * h);
        let mut dz = g / d;
        if !(dz.re.is_finite() && dz.im.is_finite()) {
            return Err(Error::NonConvergence {
                iterations: it,
                detail: format!("Newton step undefined at z = {z}"),
            });
        }
        if dz.norm() > cap {
            dz *= cap / dz.norm();
        }
        z -= dz;
        if dz.norm() <= 1e-12 * z.norm().max(1.0) {
            return Ok((z, it, true));
        }
    }
    Ok((z, MAX_ITERATIONS, false))
}

fn describe(land: &SigmaLandscape) -> String {
    let n = land.points;
    let (mut best, mut at) = (f64::INFINITY, land.center);
    for r in 0..n {
        for c in 0..n {
            if land.sigma[r * n + c] < best {
                best = land.sigma[r * n + c];
                at = land.point(r, c);
            }
        }
    }
    format!(
        "sigma landscape about {}: grid minimum {best:.3e} at {at}, operator norm {:.3e}",
        land.center, land.operator_norm
    )
}

/// Locates `z±(ε)` by Newton from the first-order seeds and confirms that
/// the disks of radius `search_radius` about `±ω_M` hold exactly two
/// `σ_min` minima between them.
pub fn find_resonances(system: &BubbleSystem, search_radius: f64) -> Result<ResonancePair> {
    find_resonances_with_landscape(system, system, search_radius)
}

/// As [`find_resonances`], counting minima on the landscape of a second
/// (typically coarser) discretisation of the same bubble.
pub fn find_resonances_with_landscape(
    system: &BubbleSystem,
    landscape: &BubbleSystem,
    search_radius: f64,
) -> Result<ResonancePair> {
    if !(search_radius > 0.0) {
        return Err(Error::Config("search radius must be positive".into()));
    }
    if landscape.medium() != system.medium() {
        return Err(Error::Usage("landscape system uses a different medium".into()));
    }
    let medium = *system.medium();
    let config = AsymptoticConfig::from_frame(system.frame(), medium)?;
    let eps = medium.epsilon;
    let wm = config.omega_m();
    let (seed_plus, seed_minus) = resonance_first_order(&config, eps);
    let (z_plus, it_plus, ok_plus) = newton(system, seed_plus)?;
    let (z_minus, it_minus, ok_minus) = newton(system, seed_minus)?;
    let plus = characteristic_bounds(system, z_plus)?;
    let minus = characteristic_bounds(system, z_minus)?;
    let tol = 1e-8 * plus.max;
    let converged = (ok_plus || plus.min <= tol) && (ok_minus || minus.min <= tol);
    let land_plus = sigma_landscape(landscape, C64::new(wm, 0.0), search_radius, GRID_POINTS)?;
    let land_minus = sigma_landscape(landscape, C64::new(-wm, 0.0), search_radius, GRID_POINTS)?;
    if !converged {
        return Err(Error::NonConvergence {
            iterations: it_plus + it_minus,
            detail: format!(
                "sigma_min {:.3e} at {z_plus}, {:.3e} at {z_minus}; {}; {}",
                plus.min,
                minus.min,
                describe(&land_plus),
                describe(&land_minus)
            ),
        });
    }
    let found = land_plus.local_minima(search_radius).len() + land_minus.local_minima(search_radius).len();
    if found != 2 {
        return Err(Error::MultiplicityAnomaly { found, expected: 2 });
    }
    Ok(ResonancePair {
        z_plus,
        z_minus,
        epsilon: eps,
        sigma_plus: plus.min,
        sigma_minus: minus.min,
        operator_norm: plus.max,
        iterations: it_plus + it_minus,
        converged,
        minima: found,
    })
}

/// Roots of `ε² − w²/ω_M² − i w³ C/(4πc₀ω_M²) = 0` in the scaled variable
/// `w = εz`.
#[derive(Debug, Clone, Serialize)]
pub struct CubicRoots {
    pub epsilon: f64,
    /// All three roots in `w`.
    pub roots: [C64; 3],
    /// The two roots of smallest modulus, positive real part first.
    pub physical: [C64; 2],
    /// The remaining root near `i4πc₀/C`.
    pub spurious: C64,
}

impl CubicRoots {
    /// Physical pair as frequencies `z = w/ε`; `None` at `ε = 0`.
    pub fn physical_z(&self) -> Option<[C64; 2]> {
        (self.epsilon > 0.0).then(|| [self.physical[0] / self.epsilon, self.physical[1] / self.epsilon])
    }
}

/// Solves the truncated characteristic cubic.
pub fn cubic_characteristic_roots(config: &AsymptoticConfig, epsilon: f64) -> Result<CubicRoots> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let wm = config.omega_m();
    // a w³ + w² − ε²ω_M² = 0.
    let a = C64::new(0.0, config.capacitance / (4.0 * PI * config.medium.c0()));
    let c0 = C64::new(-epsilon * epsilon * wm * wm, 0.0);
    let spurious_guess = -1.0 / a;
    let mut roots = if epsilon == 0.0 {
        [C64::new(0.0, 0.0), C64::new(0.0, 0.0), spurious_guess]
    } else {
        let p = |w: C64| ((a * w + 1.0) * w) * w + c0;
        let dp = |w: C64| (a * 3.0 * w + 2.0) * w;
        let mut r = [
            C64::new(epsilon * wm, -0.1 * epsilon),
            C64::new(-epsilon * wm, -0.1 * epsilon),
            spurious_guess,
        ];
        // Weierstrass iteration on the monic polynomial.
        for _ in 0..500 {
            let mut delta = 0.0f64;
            for i in 0..3 {
                let mut den = a;
                for j in 0..3 {
                    if i != j {
                        den *= r[i] - r[j];
                    }
                }
                let step = p(r[i]) / den;
                r[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta <= 1e-16 {
                break;
            }
        }
        for w in r.iter_mut() {
            for _ in 0..3 {
                let d = dp(*w);
                if d.norm() > 0.0 {
                    *w -= p(*w) / d;
                }
            }
        }
        r
    };
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let mut physical = [roots[0], roots[1]];
    if physical[0].re < physical[1].re {
        physical.swap(0, 1);
    }
    Ok(CubicRoots {
        epsilon,
        roots,
        physical,
        spurious: roots[2],
    })
}
