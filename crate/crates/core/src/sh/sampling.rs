use nalgebra::Vector3;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Finite set of unit directions with solid-angle quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationSampling {
    pub directions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

/// Triangulated unit sphere.
#[derive(Debug, Clone)]
pub struct SphereMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

/// Icosahedron with a vertex at `e_z`, subdivided `refinement` times.
/// Vertex counts: 12, 42, 162, 642, ...
pub fn icosahedral_mesh(refinement: usize) -> SphereMesh {
    let c = 1.0 / 5f64.sqrt();
    let s = 2.0 / 5f64.sqrt();
    let mut vertices = vec![Vector3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        vertices.push(Vector3::new(s * a.cos(), s * a.sin(), c));
    }
    for k in 0..5 {
        let a = 2.0 * PI * (k as f64 + 0.5) / 5.0;
        vertices.push(Vector3::new(s * a.cos(), s * a.sin(), -c));
    }
    vertices.push(Vector3::new(0.0, 0.0, -1.0));
    let mut faces = Vec::with_capacity(20);
    for k in 0..5 {
        let u0 = 1 + k;
        let u1 = 1 + (k + 1) % 5;
        let d0 = 6 + k;
        let d1 = 6 + (k + 1) % 5;
        faces.push([0, u0, u1]);
        faces.push([u0, d0, u1]);
        faces.push([u1, d0, d1]);
        faces.push([11, d1, d0]);
    }
    let mut mesh = SphereMesh { vertices, faces };
    for _ in 0..refinement {
        mesh = subdivide(&mesh);
    }
    mesh
}

fn subdivide(mesh: &SphereMesh) -> SphereMesh {
    let mut vertices = mesh.vertices.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vs: &mut Vec<Vector3<f64>>| -> usize {
        let key = (a.min(b), a.max(b));
        *mids.entry(key).or_insert_with(|| {
            vs.push((vs[a] + vs[b]).normalize());
            vs.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(mesh.faces.len() * 4);
    for &[a, b, c] in &mesh.faces {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        faces.push([a, ab, ca]);
        faces.push([b, bc, ab]);
        faces.push([c, ca, bc]);
        faces.push([ab, bc, ca]);
    }
    SphereMesh { vertices, faces }
}

/// Area of the spherical triangle with unit-vector corners.
pub(crate) fn spherical_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

impl SphereMesh {
    /// Spherical Voronoi cell areas. Each face is split at its circumcenter
    /// and edge midpoints; valid for acute triangulations such as these.
    pub fn voronoi_weights(&self) -> Vec<f64> {
        let v = &self.vertices;
        let mut w = vec![0.0; v.len()];
        for &[a, b, c] in &self.faces {
            let (pa, pb, pc) = (v[a], v[b], v[c]);
            let mut cc = (pb - pa).cross(&(pc - pa)).normalize();
            if cc.dot(&(pa + pb + pc)) < 0.0 {
                cc = -cc;
            }
            let mab = (pa + pb).normalize();
            let mbc = (pb + pc).normalize();
            let mca = (pc + pa).normalize();
            w[a] +=
                spherical_triangle_area(&pa, &mab, &cc) + spherical_triangle_area(&pa, &cc, &mca);
            w[b] +=
                spherical_triangle_area(&pb, &mbc, &cc) + spherical_triangle_area(&pb, &cc, &mab);
            w[c] +=
                spherical_triangle_area(&pc, &mca, &cc) + spherical_triangle_area(&pc, &cc, &mbc);
        }
        w
    }
}

impl OrientationSampling {
    pub fn new(directions: Vec<Vector3<f64>>, weights: Vec<f64>) -> Result<Self> {
        if directions.len() != weights.len() || directions.is_empty() {
            return Err(Error::Shape(format!(
                "{} directions with {} weights",
                directions.len(),
                weights.len()
            )));
        }
        if let Some((i, d)) = directions
            .iter()
            .enumerate()
            .find(|(_, d)| (d.norm() - 1.0).abs() > 1e-12)
        {
            return Err(Error::Domain(format!(
                "direction {i} has norm {}",
                d.norm()
            )));
        }
        Ok(Self {
            directions,
            weights,
        })
    }

    /// Vertices of the refined icosahedron with Voronoi weights summing to 4π.
    pub fn icosahedral(refinement: usize) -> Self {
        let mesh = icosahedral_mesh(refinement);
        let weights = mesh.voronoi_weights();
        Self {
            directions: mesh.vertices,
            weights,
        }
    }

    /// 642 directions (three refinements).
    pub fn default_642() -> Self {
        Self::icosahedral(3)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of the closest direction.
    pub fn nearest(&self, n: &Vector3<f64>) -> usize {
        let mut best = 0;
        let mut bd = f64::NEG_INFINITY;
        for (i, d) in self.directions.iter().enumerate() {
            let p = d.dot(n);
            if p > bd {
                bd = p;
                best = i;
            }
        }
        best
    }

    /// Index of a direction equal to `n` within `tol`, if any.
    pub fn find(&self, n: &Vector3<f64>, tol: f64) -> Option<usize> {
        let i = self.nearest(n);
        ((self.directions[i] - n).norm() <= tol).then_some(i)
    }

    /// Same directions and weights up to `tol`.
    pub fn matches(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .directions
                .iter()
                .zip(&other.directions)
                .all(|(a, b)| (a - b).norm() <= tol)
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts_and_weights() {
        for (r, n) in [(0, 12), (1, 42), (2, 162), (3, 642)] {
            let s = OrientationSampling::icosahedral(r);
            assert_eq!(s.len(), n);
            let total: f64 = s.weights.iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-9, "r={r} total={total}");
            assert!(s.directions.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
            assert!(s.weights.iter().all(|&w| w > 0.0));
        }
        let ico = OrientationSampling::icosahedral(0);
        for w in &ico.weights {
            assert!((w - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_vertices_present() {
        let s = OrientationSampling::default_642();
        assert_eq!(s.directions[0], Vector3::new(0.0, 0.0, 1.0));
        assert!(s.find(&Vector3::new(0.0, 0.0, -1.0), 1e-12).is_some());
    }

    #[test]
    fn faces_oriented_outward() {
        let m = icosahedral_mesh(2);
        for &[a, b, c] in &m.faces {
            let n = (m.vertices[b] - m.vertices[a]).cross(&(m.vertices[c] - m.vertices[a]));
            assert!(n.dot(&m.vertices[a]) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_directions() {
        assert!(OrientationSampling::new(vec![Vector3::new(1.0, 1.0, 0.0)], vec![1.0]).is_err());
        assert!(OrientationSampling::new(vec![Vector3::z()], vec![]).is_err());
    }
}
