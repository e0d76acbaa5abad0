//! Gauss–Legendre and triangle quadrature rules.
//!
//! Triangle rules are stored in barycentric coordinates with weights that sum
//! to one, so a rule integrates over a physical triangle after multiplying the
//! weights by its area.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Symmetric polynomial grading `v(t) = I_t(p, p)` (regularised incomplete
/// beta function) with derivative `t^{p−1}(1−t)^{p−1}/B(p, p)`.
fn beta_grading(t: f64, p: i32) -> (f64, f64) {
    let n = 2 * p - 1;
    let binom = |n: i32, k: i32| -> f64 { (1..=k).map(|i| (n - k + i) as f64 / i as f64).product() };
    let v = (p..=n)
        .map(|k| binom(n, k) * t.powi(k) * (1.0 - t).powi(n - k))
        .sum();
    // 1/B(p, p) = p · C(2p−1, p).
    let dv = p as f64 * binom(n, p) * (t * (1.0 - t)).powi(p - 1);
    (v, dv)
}

/// Quadrature rule on a triangle in barycentric coordinates.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Centroid rule, degree 1.
    pub fn centroid() -> Self {
        Self {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        }
    }

    /// Three interior points, degree 2.
    pub fn three_point() -> Self {
        let a = 2.0 / 3.0;
        let b = 1.0 / 6.0;
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Six-point symmetric rule, degree 4.
    pub fn six_point() -> Self {
        let a = 0.445_948_490_915_965;
        let b = 0.091_576_213_509_771;
        let wa = 0.223_381_589_678_011;
        let wb = 0.109_951_743_655_322;
        let (ca, cb) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
        Self {
            points: vec![
                [a, a, ca],
                [a, ca, a],
                [ca, a, a],
                [b, b, cb],
                [b, cb, b],
                [cb, b, b],
            ],
            weights: vec![wa, wa, wa, wb, wb, wb],
        }
    }

    /// Symmetric rule with `k` points; supported values are 1, 3 and 6.
    pub fn with_points(k: usize) -> Option<Self> {
        match k {
            1 => Some(Self::centroid()),
            3 => Some(Self::three_point()),
            6 => Some(Self::six_point()),
            _ => None,
        }
    }

    /// Collapsed (Stroud conical) Gauss product rule with `n` points per
    /// direction; the collapse vertex is barycentric index 2.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (s, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in s.iter().zip(&w) {
            for (v, wv) in s.iter().zip(&w) {
                // u runs from the collapse vertex (u=0) to the opposite edge.
                let l0 = u * (1.0 - v);
                let l1 = u * v;
                points.push([l0, l1, 1.0 - l0 - l1]);
                weights.push(2.0 * u * wu * wv);
            }
        }
        Self { points, weights }
    }

    /// Rule resolving endpoint singularities on all three edges and vertices.
    ///
    /// The triangle is split at its centroid into three subtriangles, each
    /// collapsed onto the centroid; the radial direction is graded towards the
    /// edge and the tangential direction towards both vertices with a
    /// polynomial substitution of degree `grade`.
    pub fn edge_graded(n: usize, grade: i32) -> Self {
        let (s, w) = gauss_legendre_unit(n);
        let p = grade as f64;
        let c = [1.0 / 3.0; 3];
        let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut points = Vec::with_capacity(3 * n * n);
        let mut weights = Vec::with_capacity(3 * n * n);
        for k in 0..3 {
            let a = corners[k];
            let b = corners[(k + 1) % 3];
            for (si, wu) in s.iter().zip(&w) {
                let u = 1.0 - (1.0 - si).powi(grade);
                let du = p * (1.0 - si).powi(grade - 1);
                for (ti, wv) in s.iter().zip(&w) {
                    let (v, dv) = beta_grading(*ti, grade);
                    let mut l = [0.0; 3];
                    for m in 0..3 {
                        l[m] = c[m] + u * ((1.0 - v) * a[m] + v * b[m] - c[m]);
                    }
                    points.push(l);
                    // Each subtriangle has one third of the area.
                    weights.push(wu * wv * du * dv * u * 2.0 / 3.0);
                }
            }
        }
        Self { points, weights }
    }

    /// Applies this rule on each of the `4^levels` congruent subtriangles.
    pub fn subdivided(&self, levels: u32) -> Self {
        let mut tris: Vec<[[f64; 3]; 3]> =
            vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(tris.len() * 4);
            for t in &tris {
                let m = |a: [f64; 3], b: [f64; 3]| {
                    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
                };
                let (m01, m12, m20) = (m(t[0], t[1]), m(t[1], t[2]), m(t[2], t[0]));
                next.push([t[0], m01, m20]);
                next.push([m01, t[1], m12]);
                next.push([m20, m12, t[2]]);
                next.push([m01, m12, m20]);
            }
            tris = next;
        }
        let scale = 1.0 / tris.len() as f64;
        let mut points = Vec::with_capacity(tris.len() * self.len());
        let mut weights = Vec::with_capacity(tris.len() * self.len());
        for t in &tris {
            for (p, w) in self.points.iter().zip(&self.weights) {
                let mut l = [0.0; 3];
                for m in 0..3 {
                    l[m] = p[0] * t[0][m] + p[1] * t[1][m] + p[2] * t[2][m];
                }
                points.push(l);
                weights.push(w * scale);
            }
        }
        Self { points, weights }
    }
}
