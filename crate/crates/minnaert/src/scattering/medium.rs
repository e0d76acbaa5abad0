//! Material parameters and incident fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

type C64 = Complex64;

/// Background and bubble parameters. Inside the bubble the density and bulk
/// modulus are `ρ₁ε²` and `k₁ε²`, so the speed of sound `c₁` is unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub rho0: f64,
    pub k0: f64,
    pub rho1: f64,
    pub k1: f64,
    pub epsilon: f64,
    pub center: Vec3,
}

impl Medium {
    pub fn new(rho0: f64, k0: f64, rho1: f64, k1: f64, epsilon: f64, center: Vec3) -> Result<Self> {
        let m = Self {
            rho0,
            k0,
            rho1,
            k1,
            epsilon,
            center,
        };
        m.validate()?;
        Ok(m)
    }

    /// Unit background and bubble parameters (`c₀ = c₁ = 1`, `ω_M = √3` on the unit sphere).
    pub fn canonical(epsilon: f64) -> Self {
        Self {
            rho0: 1.0,
            k0: 1.0,
            rho1: 1.0,
            k1: 1.0,
            epsilon,
            center: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho0", self.rho0),
            ("k0", self.k0),
            ("rho1", self.rho1),
            ("k1", self.k1),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("center must be finite".into()));
        }
        Ok(())
    }

    /// Copy with a different bubble size.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// Background speed of sound `√(k₀/ρ₀)`.
    pub fn c0(&self) -> f64 {
        (self.k0 / self.rho0).sqrt()
    }

    /// Bubble speed of sound `√(k₁/ρ₁)`.
    pub fn c1(&self) -> f64 {
        (self.k1 / self.rho1).sqrt()
    }

    /// Whether the two speeds agree, in which case the volume coupling vanishes.
    pub fn matched_speeds(&self) -> bool {
        (self.c0() - self.c1()).abs() <= 1e-14 * self.c0()
    }
}

/// Kind of incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IncidentKind {
    /// `e^{iω d·x/c₀}` with unit direction `d`.
    PlaneWave { direction: Vec3 },
    /// `e^{iω|x−s|/c₀}/(4π|x−s|)`.
    PointSource { location: Vec3 },
}

/// Time-harmonic incident field of the background medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentField {
    pub kind: IncidentKind,
    pub omega: f64,
    pub c0: f64,
    /// Multiplies the whole field; zero gives the trivial incident field.
    pub amplitude: C64,
}

impl IncidentField {
    pub fn plane_wave(direction: Vec3, omega: f64, c0: f64) -> Result<Self> {
        let n = vec3::norm(direction);
        if !(n > 0.0) {
            return Err(Error::Config("plane-wave direction must be nonzero".into()));
        }
        Self::checked(IncidentKind::PlaneWave {
            direction: vec3::scale(direction, 1.0 / n),
        }, omega, c0)
    }

    pub fn point_source(location: Vec3, omega: f64, c0: f64) -> Result<Self> {
        Self::checked(IncidentKind::PointSource { location }, omega, c0)
    }

    fn checked(kind: IncidentKind, omega: f64, c0: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if !(c0 > 0.0) {
            return Err(Error::Config("c0 must be positive".into()));
        }
        Ok(Self {
            kind,
            omega,
            c0,
            amplitude: C64::new(1.0, 0.0),
        })
    }

    /// Same wave scaled by `amplitude`.
    pub fn scaled(mut self, amplitude: C64) -> Self {
        self.amplitude *= amplitude;
        self
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega / self.c0
    }

    pub fn value(&self, x: Vec3) -> C64 {
        let k = self.wavenumber();
        self.amplitude
            * match self.kind {
                IncidentKind::PlaneWave { direction } => (C64::i() * k * vec3::dot(direction, x)).exp(),
                IncidentKind::PointSource { location } => {
                    let r = vec3::dist(x, location);
                    (C64::i() * k * r).exp() / (4.0 * PI * r)
                }
            }
    }

    pub fn gradient(&self, x: Vec3) -> [C64; 3] {
        let k = self.wavenumber();
        match self.kind {
            IncidentKind::PlaneWave { direction } => {
                let u = self.value(x) * C64::i() * k;
                [u * direction[0], u * direction[1], u * direction[2]]
            }
            IncidentKind::PointSource { location } => {
                let d = vec3::sub(x, location);
                let r = vec3::norm(d);
                let w = C64::i() * k * r;
                let f = self.amplitude * w.exp() * (w - 1.0) / (4.0 * PI * r * r * r);
                [f * d[0], f * d[1], f * d[2]]
            }
        }
    }

    /// Whether the field is identically zero.
    pub fn is_zero(&self) -> bool {
        self.amplitude == C64::new(0.0, 0.0)
    }
}
