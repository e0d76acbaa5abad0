//! Closed-form integrals of the static kernel over flat triangles.

use crate::vec3::{self, Vec3};

/// ∫_T 1/|x − y| dσ(y) for a flat triangle `t` and any point `x`.
pub fn triangle_potential(x: Vec3, t: &[Vec3; 3]) -> f64 {
    let e1 = vec3::sub(t[1], t[0]);
    let e2 = vec3::sub(t[2], t[0]);
    let n = vec3::normalize(vec3::cross(e1, e2));
    let d = vec3::dot(vec3::sub(x, t[0]), n);
    let ad = d.abs();
    let rho = vec3::sub(x, vec3::scale(n, d));
    let scale = vec3::norm(e1).max(vec3::norm(e2));
    let tiny = 1e-13 * scale;
    let mut total = 0.0;
    for k in 0..3 {
        let a = t[k];
        let b = t[(k + 1) % 3];
        let l = vec3::sub(b, a);
        let s = vec3::normalize(l);
        let m = vec3::cross(s, n);
        let h = vec3::dot(vec3::sub(a, rho), m);
        let s_minus = vec3::dot(vec3::sub(a, rho), s);
        let s_plus = vec3::dot(vec3::sub(b, rho), s);
        let r_minus = vec3::dist(x, a);
        let r_plus = vec3::dist(x, b);
        if h.abs() > tiny {
            // s + R, rewritten as R0²/(R − s) for s < 0 to avoid cancellation.
            let r0 = h * h + d * d;
            let f = |s: f64, r: f64| if s >= 0.0 { s + r } else { r0 / (r - s) };
            total += h * (f(s_plus, r_plus) / f(s_minus, r_minus)).ln();
        }
        if ad > tiny {
            let r0 = h * h + d * d;
            total -= ad
                * ((h * s_plus).atan2(r0 + ad * r_plus) - (h * s_minus).atan2(r0 + ad * r_minus));
        }
    }
    total
}

/// Signed solid angle subtended by the triangle at `x`; positive when `x`
/// lies on the side opposite to the counter-clockwise normal.
pub fn solid_angle(x: Vec3, t: &[Vec3; 3]) -> f64 {
    let a = vec3::sub(t[0], x);
    let b = vec3::sub(t[1], x);
    let c = vec3::sub(t[2], x);
    let (la, lb, lc) = (vec3::norm(a), vec3::norm(b), vec3::norm(c));
    let num = vec3::dot(a, vec3::cross(b, c));
    let den = la * lb * lc + vec3::dot(a, b) * lc + vec3::dot(a, c) * lb + vec3::dot(b, c) * la;
    2.0 * num.atan2(den)
}

/// ∫_T ∫_T 1/|x − y| dσ(x) dσ(y) for a flat triangle.
pub fn self_double_integral(t: &[Vec3; 3]) -> f64 {
    let a = vec3::dist(t[1], t[2]);
    let b = vec3::dist(t[2], t[0]);
    let c = vec3::dist(t[0], t[1]);
    let area = 0.5 * vec3::norm(vec3::cross(vec3::sub(t[1], t[0]), vec3::sub(t[2], t[0])));
    let f = |a: f64, b: f64, c: f64| (((a + b) * (a + b) - c * c) / (b * b - (c - a) * (c - a))).ln() / a;
    4.0 * area * area / 3.0 * (f(a, b, c) + f(b, c, a) + f(c, a, b))
}
