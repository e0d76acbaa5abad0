//! Flat-panel surface meshes, cone-rule volume quadratures and similarity maps.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_unit, TriangleRule};
use crate::vec3::{self, Vec3};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Default number of quadrature points per panel.
pub const PANEL_RULE_POINTS: usize = 6;

/// Closed triangulated surface with per-panel geometry and quadrature.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    id: u64,
    vertices: Vec<Vec3>,
    panels: Vec<[usize; 3]>,
    centroids: Vec<Vec3>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    diameters: Vec<f64>,
    quad_points: Vec<Vec3>,
    quad_weights: Vec<f64>,
    rule_len: usize,
}

impl SurfaceMesh {
    /// Builds a mesh from vertices and counter-clockwise (outward) panels.
    pub fn from_parts(vertices: Vec<Vec3>, panels: Vec<[usize; 3]>) -> Result<Self> {
        if panels.is_empty() {
            return Err(Error::Config("mesh has no panels".into()));
        }
        let rule = TriangleRule::six_point();
        let n = panels.len();
        let mut centroids = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut diameters = Vec::with_capacity(n);
        let mut quad_points = Vec::with_capacity(n * rule.len());
        let mut quad_weights = Vec::with_capacity(n * rule.len());
        for (k, p) in panels.iter().enumerate() {
            if p.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Config(format!("panel {k} references a missing vertex")));
            }
            let v = [vertices[p[0]], vertices[p[1]], vertices[p[2]]];
            let c = vec3::cross(vec3::sub(v[1], v[0]), vec3::sub(v[2], v[0]));
            let twice_area = vec3::norm(c);
            if !(twice_area > 0.0) {
                return Err(Error::Config(format!("panel {k} is degenerate")));
            }
            let area = 0.5 * twice_area;
            centroids.push(vec3::barycentric(&v, [1.0 / 3.0; 3]));
            normals.push(vec3::scale(c, 1.0 / twice_area));
            areas.push(area);
            diameters.push(
                vec3::dist(v[0], v[1])
                    .max(vec3::dist(v[1], v[2]))
                    .max(vec3::dist(v[2], v[0])),
            );
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                quad_points.push(vec3::barycentric(&v, *l));
                quad_weights.push(w * area);
            }
        }
        Ok(Self {
            id: fresh_id(),
            vertices,
            panels,
            centroids,
            normals,
            areas,
            diameters,
            quad_points,
            quad_weights,
            rule_len: rule.len(),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Number of panels.
    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn panels(&self) -> &[[usize; 3]] {
        &self.panels
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Longest edge of each panel.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    /// Vertex positions of panel `i`.
    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let p = self.panels[i];
        [self.vertices[p[0]], self.vertices[p[1]], self.vertices[p[2]]]
    }

    /// Quadrature points of panel `i`.
    pub fn quad_points(&self, i: usize) -> &[Vec3] {
        &self.quad_points[i * self.rule_len..(i + 1) * self.rule_len]
    }

    /// Quadrature weights of panel `i` (they sum to the panel area).
    pub fn quad_weights(&self, i: usize) -> &[f64] {
        &self.quad_weights[i * self.rule_len..(i + 1) * self.rule_len]
    }

    /// Smallest panel diameter.
    pub fn h_min(&self) -> f64 {
        self.diameters.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest panel diameter.
    pub fn h_max(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Enclosed volume from the discrete Gauss identity Σ a (ν·c)/3.
    pub fn enclosed_volume(&self) -> f64 {
        (0..self.len())
            .map(|i| self.areas[i] * vec3::dot(self.normals[i], self.centroids[i]))
            .sum::<f64>()
            / 3.0
    }

    /// Area-weighted mean of the panel centroids.
    pub fn barycenter(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for i in 0..self.len() {
            c = vec3::add(c, vec3::scale(self.centroids[i], self.areas[i]));
        }
        vec3::scale(c, 1.0 / self.total_area())
    }

    /// Distance from `x` to the nearest panel centroid.
    pub fn distance_to_centroids(&self, x: Vec3) -> f64 {
        self.centroids
            .iter()
            .map(|c| vec3::dist(*c, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when panels `i` and `j` share at least one vertex.
    pub fn touching(&self, i: usize, j: usize) -> bool {
        let a = self.panels[i];
        let b = self.panels[j];
        a.iter().any(|v| b.contains(v))
    }

    /// Writes the mesh in ASCII OFF format.
    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), self.panels.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
        }
        for p in &self.panels {
            let _ = writeln!(s, "3 {} {} {}", p[0], p[1], p[2]);
        }
        s
    }

    /// Parses an ASCII OFF mesh with triangular faces.
    pub fn from_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        match lines.next() {
            Some("OFF") => {}
            _ => return Err(Error::Config("OFF: missing header".into())),
        }
        let counts: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Config("OFF: missing counts line".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Config(format!("OFF: bad count '{t}'"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(Error::Config("OFF: counts line needs vertex and face counts".into()));
        }
        let mut vertices = Vec::with_capacity(counts[0]);
        for k in 0..counts[0] {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config(format!("OFF: missing vertex {k}")))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .take(3)
                .map(|t| t.parse().map_err(|_| Error::Config(format!("OFF: bad coordinate '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != 3 {
                return Err(Error::Config(format!("OFF: vertex {k} needs 3 coordinates")));
            }
            vertices.push([v[0], v[1], v[2]]);
        }
        let mut panels = Vec::with_capacity(counts[1]);
        for k in 0..counts[1] {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config(format!("OFF: missing face {k}")))?;
            let f: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Config(format!("OFF: bad index '{t}'"))))
                .collect::<Result<_>>()?;
            if f.len() != 4 || f[0] != 3 {
                return Err(Error::Config(format!("OFF: face {k} is not a triangle")));
            }
            panels.push([f[1], f[2], f[3]]);
        }
        Self::from_parts(vertices, panels)
    }
}

/// Icosphere: subdivided icosahedron with vertices projected to the sphere.
pub fn make_sphere(center: Vec3, radius: f64, refinement: u32) -> Result<SurfaceMesh> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("sphere radius must be positive, got {radius}")));
    }
    if refinement > 7 {
        return Err(Error::Config(format!("refinement must be in 0..=7, got {refinement}")));
    }
    let (unit, panels) = unit_icosphere(refinement);
    let vertices = unit
        .iter()
        .map(|v| vec3::add(center, vec3::scale(*v, radius)))
        .collect();
    SurfaceMesh::from_parts(vertices, panels)
}

/// Ellipsoid obtained by stretching the icosphere by diag(a, b, c).
pub fn make_ellipsoid(center: Vec3, semi_axes: [f64; 3], refinement: u32) -> Result<SurfaceMesh> {
    if semi_axes.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::Config(format!("semi-axes must be positive, got {semi_axes:?}")));
    }
    if refinement > 7 {
        return Err(Error::Config(format!("refinement must be in 0..=7, got {refinement}")));
    }
    let (unit, panels) = unit_icosphere(refinement);
    let vertices = unit
        .iter()
        .map(|v| {
            vec3::add(
                center,
                [v[0] * semi_axes[0], v[1] * semi_axes[1], v[2] * semi_axes[2]],
            )
        })
        .collect();
    SurfaceMesh::from_parts(vertices, panels)
}

fn unit_icosphere(refinement: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| vec3::normalize(*v))
    .collect();
    let mut panels: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..refinement {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(panels.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                vertices.push(vec3::normalize(vec3::add(vertices[a], vertices[b])));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &panels {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        panels = next;
    }
    (vertices, panels)
}

/// Similarity map y ↦ center + factor·(y − center).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMap {
    pub center: Vec3,
    pub factor: f64,
}

impl ScalingMap {
    pub fn new(center: Vec3, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Config(format!("scaling factor must be positive, got {factor}")));
        }
        Ok(Self { center, factor })
    }

    pub fn apply(&self, y: Vec3) -> Vec3 {
        vec3::add(self.center, vec3::scale(vec3::sub(y, self.center), self.factor))
    }

    pub fn inverse(&self) -> Self {
        Self {
            center: self.center,
            factor: 1.0 / self.factor,
        }
    }
}

/// Maps every vertex of `mesh` through `map`; the identity map returns a copy.
pub fn scale_mesh(mesh: &SurfaceMesh, map: ScalingMap) -> Result<SurfaceMesh> {
    if !(map.factor > 0.0) {
        return Err(Error::Config(format!("scaling factor must be positive, got {}", map.factor)));
    }
    if map.factor == 1.0 {
        return Ok(mesh.clone());
    }
    let vertices = mesh.vertices.iter().map(|v| map.apply(*v)).collect();
    SurfaceMesh::from_parts(vertices, mesh.panels.clone())
}

/// Volume quadrature of a star-shaped domain.
#[derive(Debug, Clone)]
pub struct VolumeQuadrature {
    id: u64,
    mesh_id: u64,
    center: Vec3,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    total_volume: f64,
}

impl VolumeQuadrature {
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Id of the surface mesh the cones were built on.
    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of sampled nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Cone rule: each panel is joined to `center`, and the cone is integrated
/// with `radial_order` Gauss–Legendre nodes along the ray through the panel
/// centroid.
pub fn make_volume_quadrature(
    mesh: &SurfaceMesh,
    center: Vec3,
    radial_order: usize,
) -> Result<VolumeQuadrature> {
    if radial_order < 2 {
        return Err(Error::Config("radial order must be at least 2".into()));
    }
    let (t, g) = gauss_legendre_unit(radial_order);
    let mut nodes = Vec::with_capacity(mesh.len() * radial_order);
    let mut weights = Vec::with_capacity(mesh.len() * radial_order);
    for i in 0..mesh.len() {
        let c = mesh.centroids()[i];
        let height = vec3::dot(mesh.normals()[i], vec3::sub(c, center));
        if !(height > 0.0) {
            return Err(Error::Config(format!(
                "center {center:?} is outside the domain or the domain is not star-shaped about it (panel {i})"
            )));
        }
        let cone = mesh.areas()[i] * height;
        for (tk, gk) in t.iter().zip(&g) {
            nodes.push(vec3::add(center, vec3::scale(vec3::sub(c, center), *tk)));
            weights.push(cone * tk * tk * gk);
        }
    }
    let total_volume = weights.iter().sum();
    Ok(VolumeQuadrature {
        id: fresh_id(),
        mesh_id: mesh.id(),
        center,
        nodes,
        weights,
        total_volume,
    })
}
