//! High-order reference quadrature for single operator entries.
//!
//! Everything here is written independently of the assembly code: its own
//! Gauss–Legendre nodes, its own triangle parametrisation and its own kernels.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::SurfaceMesh;
use crate::layer_ops::KernelKind;

type C64 = Complex64;
type P = [f64; 3];

fn gl(n: usize) -> Vec<(f64, f64)> {
    // Golub–Welsch would need an eigen-solver; Newton on P_n is enough here.
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..200 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 + x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn lerp3(a: P, b: P, c: P, s: f64, t: f64) -> P {
    // Point a + s (b − a) + t (c − a).
    [
        a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
        a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
        a[2] + s * (b[2] - a[2]) + t * (c[2] - a[2]),
    ]
}

fn area(a: P, b: P, c: P) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let w = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * dot(w, w).sqrt()
}

/// Duffy rule on the triangle `(apex, b, c)`, collapsed at `apex`.
fn duffy(apex: P, b: P, c: P, rule: &[(f64, f64)], out: &mut Vec<(P, f64)>) {
    let a2 = 2.0 * area(apex, b, c);
    if a2 <= 0.0 {
        return;
    }
    for (u, wu) in rule {
        for (v, wv) in rule {
            let p = lerp3(apex, b, c, u * (1.0 - v), u * v);
            out.push((p, wu * wv * u * a2));
        }
    }
}

/// Closest point of the triangle to `x`.
fn closest_point(x: P, t: &[P; 3]) -> P {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(x, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(x, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return lerp3(a, b, c, v, 0.0);
    }
    let cp = sub(x, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return lerp3(a, b, c, 0.0, w);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [b[0] + w * (c[0] - b[0]), b[1] + w * (c[1] - b[1]), b[2] + w * (c[2] - b[2])];
    }
    let denom = 1.0 / (va + vb + vc);
    lerp3(a, b, c, vb * denom, vc * denom)
}

/// Subintervals of `[0, 1]` graded geometrically away from `f`, the smallest
/// of width `w`.
fn graded_intervals(f: f64, w: f64) -> Vec<(f64, f64)> {
    let w = w.max(1e-12);
    let mut out = Vec::new();
    let mut step = w;
    let mut a = f;
    while a < 1.0 {
        let b = (a + step).min(1.0);
        out.push((a, b));
        a = b;
        step *= 2.0;
    }
    let mut step = w;
    let mut b = f;
    while b > 0.0 {
        let a = (b - step).max(0.0);
        out.push((a, b));
        b = a;
        step *= 2.0;
    }
    out
}

/// Quadrature on `t` resolving a point singularity at `p ∈ t` seen from a
/// point at distance `gap` from `p`. Each sub-triangle `(p, b, c)` uses a
/// Duffy map; the radial direction is split geometrically down to the
/// scale of `gap`, the angular one towards the foot of `p` on `bc`.
fn singular_rule(p: P, t: &[P; 3], gap: f64, rule: &[(f64, f64)], angular_rule: &[(f64, f64)]) -> Vec<(P, f64)> {
    let diam = dist(t[0], t[1]).max(dist(t[1], t[2])).max(dist(t[2], t[0]));
    let levels = if gap > 0.0 { ((diam / gap).log2().ceil().max(0.0) as usize + 1).min(40) } else { 1 };
    let mut out = Vec::new();
    for k in 0..3 {
        let (b, c) = (t[k], t[(k + 1) % 3]);
        let a2 = 2.0 * area(p, b, c);
        if a2 <= 0.0 {
            continue;
        }
        let bc = sub(c, b);
        let len2 = dot(bc, bc);
        let foot = (dot(sub(p, b), bc) / len2).clamp(0.0, 1.0);
        let height = a2 / len2.sqrt();
        let angular = graded_intervals(foot, height / len2.sqrt());
        for level in 0..levels {
            let hi = 0.5f64.powi(level as i32);
            let lo = if level + 1 == levels { 0.0 } else { 0.5 * hi };
            for (s, ws) in rule {
                let u = lo + (hi - lo) * s;
                for (va, vb) in &angular {
                    for (v, wv) in angular_rule {
                        let v = va + (vb - va) * v;
                        let q = lerp3(p, b, c, u * (1.0 - v), u * v);
                        out.push((q, ws * (hi - lo) * wv * (vb - va) * u * a2));
                    }
                }
            }
        }
    }
    out
}

fn dist(a: P, b: P) -> f64 {
    let d = sub(a, b);
    dot(d, d).sqrt()
}

/// Quadrature on `t`, subdividing towards `other` wherever a subtriangle
/// lies within one of its own diameters of it, down to `depth` levels.
fn adaptive_rule(t: &[P; 3], other: &[P; 3], depth: u32, rule: &[(f64, f64)], out: &mut Vec<(P, f64)>) {
    let diam = dist(t[0], t[1]).max(dist(t[1], t[2])).max(dist(t[2], t[0]));
    let c = [
        (t[0][0] + t[1][0] + t[2][0]) / 3.0,
        (t[0][1] + t[1][1] + t[2][1]) / 3.0,
        (t[0][2] + t[1][2] + t[2][2]) / 3.0,
    ];
    let gap = t
        .iter()
        .chain(std::iter::once(&c))
        .map(|v| dist(*v, closest_point(*v, other)))
        .fold(f64::INFINITY, f64::min);
    if depth == 0 || gap > diam {
        let [a, b, c] = *t;
        duffy(a, b, c, rule, out);
        return;
    }
    let [a, b, c] = *t;
    let m = |p: P, q: P| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])];
    let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
    for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
        adaptive_rule(&child, other, depth - 1, rule, out);
    }
}

/// Quadrature on `t` graded geometrically towards its edges, where the
/// self-panel potential has a logarithmic gradient singularity.
fn edge_graded(t: &[P; 3], levels: usize, rule: &[(f64, f64)], out: &mut Vec<(P, f64)>) {
    let c = [
        (t[0][0] + t[1][0] + t[2][0]) / 3.0,
        (t[0][1] + t[1][1] + t[2][1]) / 3.0,
        (t[0][2] + t[1][2] + t[2][2]) / 3.0,
    ];
    for k in 0..3 {
        let (b, d) = (t[k], t[(k + 1) % 3]);
        let a2 = 2.0 * area(c, b, d);
        for level in 0..levels {
            // u runs from the centroid (0) to the edge (1).
            let lo = 1.0 - 0.5f64.powi(level as i32);
            let hi = if level + 1 == levels { 1.0 } else { 1.0 - 0.5f64.powi(level as i32 + 1) };
            for (s, ws) in rule {
                let u = lo + (hi - lo) * s;
                for (v, wv) in rule {
                    let q = lerp3(c, b, d, u * (1.0 - v), u * v);
                    out.push((q, ws * (hi - lo) * wv * u * a2));
                }
            }
        }
    }
}

fn kernel(kind: KernelKind, z: C64, x: P, nx: P, y: P, ny: P) -> C64 {
    let d = sub(x, y);
    let r = dot(d, d).sqrt();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let e = (C64::i() * z * r).exp();
    match kind {
        KernelKind::S => e / (4.0 * PI * r),
        // ∂/∂r of e^{izr}/(4πr) is e^{izr}(izr − 1)/(4πr²).
        KernelKind::Kstar => e * (C64::i() * z * r - 1.0) / (4.0 * PI * r * r) * (dot(nx, d) / r),
        KernelKind::K => e * (C64::i() * z * r - 1.0) / (4.0 * PI * r * r) * (-dot(ny, d) / r),
    }
}

fn normal(t: &[P; 3]) -> P {
    let u = sub(t[1], t[0]);
    let v = sub(t[2], t[0]);
    let w = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let n = dot(w, w).sqrt();
    [w[0] / n, w[1] / n, w[2] / n]
}

/// Reference value of the Galerkin entry `(1/a_i) ∫_{T_i} ∫_{T_j} k(x, y)`,
/// the normalisation used by the assembled operators.
///
/// The outer panel is refined adaptively towards the inner one with an
/// order-`order` Duffy rule on each piece; for every outer point the inner
/// panel is split at its closest point and integrated with Duffy rules
/// collapsed there.
pub fn brute_force_entry(mesh: &SurfaceMesh, kind: KernelKind, z: C64, i: usize, j: usize, order: usize) -> C64 {
    let rule = gl(order);
    // The outer panel is subdivided, so a lower order suffices there.
    let coarse = gl(order.div_ceil(2).max(4));
    let ti = mesh.triangle(i);
    let tj = mesh.triangle(j);
    let (ni, nj) = (normal(&ti), normal(&tj));
    let mut outer = Vec::new();
    if i == j {
        edge_graded(&ti, 16, &coarse, &mut outer);
    } else {
        adaptive_rule(&ti, &tj, 5, &coarse, &mut outer);
    }
    let diam_j = dist(tj[0], tj[1]).max(dist(tj[1], tj[2])).max(dist(tj[2], tj[0]));
    let mut total = C64::new(0.0, 0.0);
    for (x, wx) in &outer {
        let p = closest_point(*x, &tj);
        let gap = dist(*x, p);
        let inner = if gap > diam_j {
            let mut v = Vec::with_capacity(rule.len() * rule.len());
            duffy(tj[0], tj[1], tj[2], &rule, &mut v);
            v
        } else {
            singular_rule(p, &tj, gap, &rule, &coarse)
        };
        let mut s = C64::new(0.0, 0.0);
        for (y, wy) in &inner {
            s += kernel(kind, z, *x, ni, *y, nj) * *wy;
        }
        total += s * *wx;
    }
    total / area(ti[0], ti[1], ti[2])
}

/// Exact capacitance of a sphere of radius `r`.
pub fn sphere_capacitance(r: f64) -> f64 {
    4.0 * PI * r
}

/// Exact volume of a sphere of radius `r`.
pub fn sphere_volume(r: f64) -> f64 {
    4.0 * PI * r * r * r / 3.0
}

/// Surface area of the ellipsoid with two equal semi-axes `a` and polar
/// semi-axis `c`.
pub fn spheroid_area(a: f64, c: f64) -> f64 {
    if (a - c).abs() < 1e-14 * a {
        return 4.0 * PI * a * a;
    }
    if c > a {
        let e = (1.0 - a * a / (c * c)).sqrt();
        2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin())
    } else {
        let e = (1.0 - c * c / (a * a)).sqrt();
        2.0 * PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let r = gl(8);
        let s: f64 = r.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn static_entries_are_real() {
        let m = make_sphere([0.0; 3], 1.0, 1).unwrap();
        let v = brute_force_entry(&m, KernelKind::S, C64::new(0.0, 0.0), 3, 17, 8);
        assert_eq!(v.im, 0.0);
        assert!(v.re > 0.0);
    }

    #[test]
    fn prolate_area() {
        assert!((spheroid_area(1.0, 2.0) - 21.4784).abs() < 1e-3);
        assert!((spheroid_area(2.0, 1.0) - 34.6875).abs() < 1e-3);
    }
}
