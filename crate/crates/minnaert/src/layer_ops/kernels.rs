//! Pointwise Helmholtz kernels and their bounded remainders.

use std::f64::consts::PI;

use num_complex::Complex64;



type C64 = Complex64;

const INV_4PI: f64 = 0.25 / PI;
const SERIES_RADIUS: f64 = 0.5;

/// `e^w − 1`, accurate for small `|w|`.
fn exp_m1(w: C64) -> C64 {
    if w.norm() < SERIES_RADIUS {
        let mut term = w;
        let mut sum = w;
        for n in 2..40 {
            term *= w / n as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        w.exp() - 1.0
    }
}

/// `e^w (w − 1) + 1 = Σ_{n≥2} (n−1) wⁿ / n!`.
fn dipole_remainder(w: C64) -> C64 {
    if w.norm() < SERIES_RADIUS {
        let mut power = w;
        let mut fact = 1.0;
        let mut sum = C64::new(0.0, 0.0);
        for n in 2..40 {
            power *= w;
            fact *= n as f64;
            let term = power * ((n - 1) as f64 / fact);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        w.exp() * (w - 1.0) + 1.0
    }
}

/// `(e^{izr} − 1)/(4πr)`, with the limit `iz/(4π)` at `r = 0`.
pub fn sl_remainder(z: C64, r: f64) -> C64 {
    if r == 0.0 {
        return C64::i() * z * INV_4PI;
    }
    exp_m1(C64::i() * z * r) * (INV_4PI / r)
}

/// `[e^{izr}(izr − 1) + 1]/(4πr³)`; multiplied by `ν·(x−y)` this is the
/// smooth part of a normal derivative of the kernel.
pub fn remainder_factor(z: C64, r: f64) -> C64 {
    dipole_remainder(C64::i() * z * r) * (INV_4PI / (r * r * r))
}

/// Full kernel `e^{izr}/(4πr)`.
pub(crate) fn green(z: C64, r: f64) -> C64 {
    (C64::i() * z * r).exp() * (INV_4PI / r)
}

/// `∫_0^a r e^{izr} dr`, the kernel integrated over a ball of radius `a`
/// about its own centre.
pub(crate) fn ball_self_term(z: C64, a: f64) -> C64 {
    let w = C64::i() * z * a;
    if w.norm() < SERIES_RADIUS {
        let mut sum = C64::new(0.0, 0.0);
        let mut power = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..40 {
            if n > 0 {
                power *= w;
                fact *= n as f64;
            }
            let term = power * (a * a / (fact * (n + 2) as f64));
            sum += term;
            if n > 2 && term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (w.exp() * (1.0 - w) - 1.0) / (z * z)
    }
}

/// Radius of the ball with volume `w`.
pub(crate) fn ball_radius(w: f64) -> f64 {
    (3.0 * w / (4.0 * PI)).cbrt()
}
