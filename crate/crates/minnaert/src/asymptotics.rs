//! Closed-form small-bubble asymptotics: Minnaert frequency, point-scatterer
//! field, resonant denominator, free and point-perturbed resolvents and the
//! first-order resonances.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;
use crate::scattering::Medium;
use crate::spectral::SpectralFrame;
use crate::vec3::{self, Vec3};

type C64 = Complex64;

/// Capacitance and volume of the reference domain with the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConfig {
    pub capacitance: f64,
    pub volume: f64,
    pub medium: Medium,
    omega_m: f64,
}

impl AsymptoticConfig {
    pub fn new(capacitance: f64, volume: f64, medium: Medium) -> Result<Self> {
        medium.validate()?;
        if !(capacitance > 0.0 && capacitance.is_finite()) {
            return Err(Error::Config(format!("capacitance must be positive, got {capacitance}")));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::Config(format!("volume must be positive, got {volume}")));
        }
        let omega_m = (capacitance * medium.k1 / (volume * medium.rho0)).sqrt();
        Ok(Self {
            capacitance,
            volume,
            medium,
            omega_m,
        })
    }

    /// Constants of a discretised reference domain.
    pub fn from_frame(frame: &SpectralFrame, medium: Medium) -> Result<Self> {
        Self::new(frame.capacitance(), frame.volume(), medium)
    }

    /// Exact constants of a sphere of radius `radius`: `C = 4πR`, `|Ω| = 4πR³/3`.
    pub fn sphere(radius: f64, medium: Medium) -> Result<Self> {
        Self::new(4.0 * PI * radius, 4.0 * PI * radius.powi(3) / 3.0, medium)
    }

    /// Stored `ω_M`.
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    /// `C_Ω / (4π c₀)`.
    fn radiation(&self) -> f64 {
        self.capacitance / (4.0 * PI * self.medium.c0())
    }
}

/// `ω_M = √(C_Ω k₁ / (|Ω| ρ₀))`.
pub fn minnaert_frequency(config: &AsymptoticConfig) -> f64 {
    (config.capacitance * config.medium.k1 / (config.volume * config.medium.rho0)).sqrt()
}

/// `ω_M² − z² − iε z³ C_Ω/(4πc₀)`.
pub fn denominator(config: &AsymptoticConfig, z: C64, epsilon: f64) -> C64 {
    let wm = config.omega_m;
    C64::new(wm * wm, 0.0) - z * z - C64::i() * z * z * z * (epsilon * config.radiation())
}

/// One sample of the denominator lower-bound check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSample {
    pub z: C64,
    pub modulus: f64,
    pub pass: bool,
}

/// Result of checking `|C₁ − z² − iεz³C₂| ≥ (√2/4) C₁ ε` on a sample set.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound: f64,
    pub epsilon: f64,
    pub samples: Vec<BoundSample>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }
}

/// Samples the lower bound of the resonant denominator with `C₁ = ω_M²`
/// and `C₂ = C_Ω/(4πc₀)`. Requires `ε < min(1/(2 d_max C₂), 1/d_min)`.
pub fn denominator_lower_bound_check(
    config: &AsymptoticConfig,
    samples: &[C64],
    epsilon: f64,
) -> Result<BoundReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("empty sample set".into()));
    }
    if let Some(z) = samples.iter().find(|z| z.im < 0.0 || z.norm() == 0.0) {
        return Err(Error::Domain(format!(
            "sample {z} is outside the closed upper half-plane without 0"
        )));
    }
    let c1 = config.omega_m * config.omega_m;
    let c2 = config.radiation();
    let d_max = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d_min = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let window = (1.0 / (2.0 * d_max * c2)).min(1.0 / d_min);
    if !(epsilon > 0.0 && epsilon < window) {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} outside the admissible window (0, {window})"
        )));
    }
    let bound = 2f64.sqrt() / 4.0 * c1 * epsilon;
    let samples = samples
        .iter()
        .map(|z| {
            let modulus = denominator(config, *z, epsilon).norm();
            BoundSample {
                z: *z,
                modulus,
                pass: modulus >= bound,
            }
        })
        .collect();
    Ok(BoundReport {
        bound,
        epsilon,
        samples,
    })
}

/// Outgoing monopole `e^{iz|x−y₀|/c₀}/(4π|x−y₀|)`.
fn monopole(config: &AsymptoticConfig, z: C64, x: Vec3) -> Result<C64> {
    let r = vec3::dist(x, config.medium.center);
    if !(r > 0.0) {
        return Err(Error::Domain("evaluation point coincides with the bubble center".into()));
    }
    Ok((C64::i() * z * (r / config.medium.c0())).exp() / (4.0 * PI * r))
}

/// Leading scattered field of a small bubble,
/// `[ε ω² C_Ω / denominator] u^in(y₀) e^{iω|x−y₀|/c₀}/(4π|x−y₀|)`.
pub fn point_scatterer_field(
    config: &AsymptoticConfig,
    omega: f64,
    epsilon: f64,
    u_in_at_center: C64,
    points: &[Vec3],
) -> Result<Vec<C64>> {
    let z = C64::new(omega, 0.0);
    let coef = z * z * (epsilon * config.capacitance) / denominator(config, z, epsilon) * u_in_at_center;
    points.iter().map(|x| Ok(coef * monopole(config, z, *x)?)).collect()
}

/// Truncated Gaussian bump `amplitude · e^{−|x−c|²/(2σ²)}` supported in the
/// ball of radius `support_radius` about `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceBump {
    pub center: Vec3,
    pub sigma: f64,
    pub amplitude: C64,
    pub support_radius: f64,
}

/// Support radius in units of σ.
pub const SUPPORT_SIGMAS: f64 = 6.0;

impl SourceBump {
    pub fn gaussian(center: Vec3, sigma: f64, amplitude: C64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            center,
            sigma,
            amplitude,
            support_radius: SUPPORT_SIGMAS * sigma,
        })
    }

    /// Gaussian with total mass `mass`.
    pub fn normalized(center: Vec3, sigma: f64, mass: f64) -> Result<Self> {
        let a = mass / ((2.0 * PI).powf(1.5) * sigma.powi(3));
        Self::gaussian(center, sigma, C64::new(a, 0.0))
    }

    pub fn value(&self, x: Vec3) -> C64 {
        let r2 = vec3::dot(vec3::sub(x, self.center), vec3::sub(x, self.center));
        if r2 > self.support_radius * self.support_radius {
            return C64::new(0.0, 0.0);
        }
        self.amplitude * (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Complex-conjugate source.
    pub fn conj(&self) -> Self {
        Self {
            amplitude: self.amplitude.conj(),
            ..*self
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == C64::new(0.0, 0.0)
    }
}

/// Spherical product rule used for source convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceQuadrature {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for SourceQuadrature {
    fn default() -> Self {
        Self {
            radial: 32,
            polar: 20,
            azimuthal: 40,
        }
    }
}

/// `(R_z f)(x)` and `∇_x (R_z f)(x)` by a spherical rule. The rule is
/// centred at `x` when `x` lies in the support, so the kernel singularity
/// is absorbed by the Jacobian.
pub(crate) fn convolve(
    z: C64,
    source: &SourceBump,
    rule: &SourceQuadrature,
    x: Vec3,
    gradient: bool,
) -> (C64, [C64; 3]) {
    let zero = C64::new(0.0, 0.0);
    if source.is_zero() {
        return (zero, [zero; 3]);
    }
    let dc = vec3::dist(x, source.center);
    let (origin, radius) = if dc < source.support_radius {
        (x, dc + source.support_radius)
    } else {
        (source.center, source.support_radius)
    };
    let (tr, wr) = gauss_legendre_unit(rule.radial);
    let (tp, wp) = gauss_legendre_unit(rule.polar);
    let dphi = 2.0 * PI / rule.azimuthal as f64;
    let mut value = zero;
    let mut grad = [zero; 3];
    for (a, wa) in tp.iter().zip(&wp) {
        let ct = 2.0 * a - 1.0;
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for k in 0..rule.azimuthal {
            let phi = (k as f64 + 0.5) * dphi;
            let s = [st * phi.cos(), st * phi.sin(), ct];
            let wang = 2.0 * wa * dphi;
            for (b, wb) in tr.iter().zip(&wr) {
                let r = radius * b;
                let y = vec3::add(origin, vec3::scale(s, r));
                let f = source.value(y);
                if f == zero {
                    continue;
                }
                let w = wang * wb * radius * r * r;
                let d = vec3::sub(x, y);
                let rho = vec3::norm(d);
                let e = (C64::i() * z * rho).exp() / (4.0 * PI);
                value += e / rho * f * w;
                if gradient {
                    let g = e * (C64::i() * z * rho - 1.0) / (rho * rho * rho) * f * w;
                    for c in 0..3 {
                        grad[c] += g * d[c];
                    }
                }
            }
        }
    }
    (value, grad)
}

/// `(R_z f)(x) = ∫ e^{iz|x−y|}/(4π|x−y|) f(y) dy` at each point.
pub fn free_resolvent(
    z: C64,
    source: &SourceBump,
    rule: &SourceQuadrature,
    points: &[Vec3],
) -> Vec<C64> {
    points
        .par_iter()
        .map(|x| convolve(z, source, rule, *x, false).0)
        .collect()
}

/// Free Hamiltonian resolvent `R^H₀(z) f = c₀⁻² R_{z/c₀} f`, the outgoing
/// solution of `k₀∇·ρ₀⁻¹∇v + z²v = −f`.
pub fn hamiltonian_free_resolvent(
    z: C64,
    c0: f64,
    source: &SourceBump,
    rule: &SourceQuadrature,
    points: &[Vec3],
) -> Result<Vec<C64>> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("the Hamiltonian resolvent needs z ≠ 0".into()));
    }
    Ok(free_resolvent(z / c0, source, rule, points)
        .into_iter()
        .map(|v| v / (c0 * c0))
        .collect())
}

/// Point-perturbed resolvent at the bubble center,
/// `c₀⁻² R_{z/c₀}ψ(x) + (i/(c₀z)) e^{iz|x−y₀|/c₀}/|x−y₀| · (R_{z/c₀}ψ)(y₀)`.
pub fn point_perturbation_resolvent(
    config: &AsymptoticConfig,
    z: C64,
    source: &SourceBump,
    rule: &SourceQuadrature,
    points: &[Vec3],
) -> Result<Vec<C64>> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("the point-perturbed resolvent needs z ≠ 0".into()));
    }
    let c0 = config.medium.c0();
    let at_center = free_resolvent(z / c0, source, rule, &[config.medium.center])[0];
    let free = free_resolvent(z / c0, source, rule, points);
    let coef = C64::i() / (z * c0) * at_center * (4.0 * PI);
    points
        .iter()
        .zip(free)
        .map(|(x, v)| Ok(v / (c0 * c0) + coef * monopole(config, z, *x)?))
        .collect()
}

/// Which leading-order resolvent expansion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeadingForm {
    /// Monopole driven by `(R^H₀h)(y₀)`.
    Hamiltonian,
    /// Adds the monopole driven by `h(y₀)` for sources that do not vanish there.
    HamiltonianWithSource,
    /// Propagator resolvent: `k₀` times the `Hamiltonian` form.
    Propagator,
}

/// Leading terms of the bubble resolvent,
/// `R^H₀h(x) + [εz²C/denominator] (R^H₀h)(y₀) G(x) (+ [εC/denominator] h(y₀) G(x))`,
/// with `free[k] = (R^H₀h)(points[k])` and `G(x) = e^{iz|x−y₀|/c₀}/(4π|x−y₀|)`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_leading(
    config: &AsymptoticConfig,
    z: C64,
    epsilon: f64,
    h_at_center: C64,
    rh_at_center: C64,
    free: &[C64],
    points: &[Vec3],
    form: LeadingForm,
) -> Result<Vec<C64>> {
    if free.len() != points.len() {
        return Err(Error::Usage("free-resolvent values and points differ in length".into()));
    }
    let d = denominator(config, z, epsilon);
    let cap = config.capacitance;
    let mut amp = z * z * (epsilon * cap) / d * rh_at_center;
    if form == LeadingForm::HamiltonianWithSource {
        amp += h_at_center * (epsilon * cap) / d;
    }
    let scale = if form == LeadingForm::Propagator { config.medium.k0 } else { 1.0 };
    points
        .iter()
        .zip(free)
        .map(|(x, v)| Ok((v + amp * monopole(config, z, *x)?) * scale))
        .collect()
}

/// `z± = ±ω_M − i ε ω_M² C_Ω/(8π c₀)`.
pub fn resonance_first_order(config: &AsymptoticConfig, epsilon: f64) -> (C64, C64) {
    let wm = config.omega_m;
    let im = -epsilon * wm * wm * config.capacitance / (8.0 * PI * config.medium.c0());
    (C64::new(wm, im), C64::new(-wm, im))
}
