//! Spherical Bessel and Hankel functions of complex argument.

use num_complex::Complex64;

type C64 = Complex64;

/// `j_l(z)` for `l = 0..=lmax`, by downward (Miller) recurrence normalised
/// against the closed forms of `j_0` or `j_1`.
pub fn spherical_j(lmax: usize, z: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); lmax + 1];
    if z.norm() < 1e-300 {
        out[0] = C64::new(1.0, 0.0);
        return out;
    }
    if z.norm() < 1e-3 {
        // Two-term power series: j_l(z) ≈ z^l/(2l+1)!! (1 − z²/(2(2l+3))).
        let mut dfact = 1.0;
        for (l, o) in out.iter_mut().enumerate() {
            dfact *= (2 * l + 1) as f64;
            *o = z.powi(l as i32) / dfact * (1.0 - z * z / (2.0 * (2 * l + 3) as f64));
        }
        return out;
    }
    let start = lmax + 20 + z.norm().ceil() as usize + 10;
    let mut next = C64::new(0.0, 0.0);
    let mut cur = C64::new(1e-30, 0.0);
    let mut tail = vec![C64::new(0.0, 0.0); start + 1];
    tail[start] = cur;
    for l in (1..=start).rev() {
        let prev = cur * ((2 * l + 1) as f64) / z - next;
        next = cur;
        cur = prev;
        tail[l - 1] = cur;
        // Rescale to avoid overflow in the upward-growing direction.
        if cur.norm() > 1e250 {
            let s = 1.0 / cur.norm();
            for t in tail[l - 1..].iter_mut() {
                *t *= s;
            }
            cur *= s;
            next *= s;
        }
    }
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    let scale = if j0.norm() >= j1.norm() { j0 / tail[0] } else { j1 / tail[1] };
    for (o, t) in out.iter_mut().zip(&tail) {
        *o = t * scale;
    }
    out
}

/// `y_l(z)` for `l = 0..=lmax`, by upward recurrence.
pub fn spherical_y(lmax: usize, z: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); lmax + 1];
    out[0] = -z.cos() / z;
    if lmax >= 1 {
        out[1] = -z.cos() / (z * z) - z.sin() / z;
    }
    for l in 1..lmax {
        out[l + 1] = out[l] * ((2 * l + 1) as f64) / z - out[l - 1];
    }
    out
}

/// `h_l^{(1)}(z) = j_l(z) + i y_l(z)`.
pub fn spherical_h1(lmax: usize, z: C64) -> Vec<C64> {
    let j = spherical_j(lmax, z);
    let y = spherical_y(lmax, z);
    j.iter().zip(&y).map(|(a, b)| a + C64::i() * b).collect()
}

/// Derivatives from `f'_l = f_{l−1} − (l+1) f_l / z`, `f'_0 = −f_1`.
/// `f` must hold one more order than the derivatives requested.
pub fn derivatives(f: &[C64], z: C64) -> Vec<C64> {
    (0..f.len() - 1)
        .map(|l| {
            if l == 0 {
                -f[1]
            } else {
                f[l - 1] - f[l] * ((l + 1) as f64) / z
            }
        })
        .collect()
}
