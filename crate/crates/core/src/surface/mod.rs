//! Discrete hypersurfaces: simplicial closed manifolds with per-element
//! normals and measures, plus the elementary geometry used everywhere else.

mod primitives;

pub use primitives::{make_primitive, Primitive};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{self, Vec3};

/// How the simplicial complex sits in ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// Closed polygon in the plane `z = 0` (d = 1, N = 2).
    PlaneCurve,
    /// Closed triangle mesh in 3-space (d = 2, N = 3).
    Surface,
    /// Closed polygon in 3-space (d = 1, N = 3); no element normals.
    SpaceCurve,
}

impl Embedding {
    pub fn dim(self) -> usize {
        match self {
            Embedding::Surface => 2,
            _ => 1,
        }
    }

    pub fn ambient(self) -> usize {
        match self {
            Embedding::PlaneCurve => 2,
            _ => 3,
        }
    }

    pub fn is_hypersurface(self) -> bool {
        !matches!(self, Embedding::SpaceCurve)
    }

    fn arity(self) -> usize {
        self.dim() + 1
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteHypersurface {
    embedding: Embedding,
    closed: bool,
    vertices: Vec<Vec3>,
    // Segments use the first two slots.
    elements: Vec<[usize; 3]>,
    element_normals: Vec<Vec3>,
    element_tangents: Vec<Vec3>,
    element_measures: Vec<f64>,
    vertex_measures: Vec<f64>,
    vertex_normals: Vec<Vec3>,
    vertex_star: Vec<Vec<usize>>,
    vertex_ring: Vec<Vec<usize>>,
    diameter: f64,
}

impl DiscreteHypersurface {
    /// Closed triangle mesh. Winding is made outward by a global flip if needed.
    pub fn from_triangles(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(Embedding::Surface, vertices, triangles, true)
    }

    /// Closed polygon; `embedding` must be a curve kind.
    pub fn from_segments(
        embedding: Embedding,
        vertices: Vec<Vec3>,
        segments: Vec<[usize; 2]>,
    ) -> Result<Self> {
        if embedding == Embedding::Surface {
            return Err(invalid("segments need a curve embedding"));
        }
        let elems = segments.into_iter().map(|[a, b]| [a, b, usize::MAX]).collect();
        Self::build(embedding, vertices, elems, true)
    }

    /// Triangle patch with boundary; used for flat test fixtures.
    pub fn open_triangles(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(Embedding::Surface, vertices, triangles, false)
    }

    /// Open polyline; used for flat test fixtures.
    pub fn open_segments(
        embedding: Embedding,
        vertices: Vec<Vec3>,
        segments: Vec<[usize; 2]>,
    ) -> Result<Self> {
        if embedding == Embedding::Surface {
            return Err(invalid("segments need a curve embedding"));
        }
        let elems = segments.into_iter().map(|[a, b]| [a, b, usize::MAX]).collect();
        Self::build(embedding, vertices, elems, false)
    }

    fn build(
        embedding: Embedding,
        vertices: Vec<Vec3>,
        mut elements: Vec<[usize; 3]>,
        closed: bool,
    ) -> Result<Self> {
        let nv = vertices.len();
        let arity = embedding.arity();
        if elements.is_empty() {
            return Err(invalid("mesh has no elements"));
        }
        if vertices.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(invalid("non-finite vertex coordinate"));
        }
        if embedding == Embedding::PlaneCurve && vertices.iter().any(|v| v[2] != 0.0) {
            return Err(invalid("plane curve vertices must have z = 0"));
        }
        for (e, el) in elements.iter().enumerate() {
            for i in 0..arity {
                if el[i] >= nv {
                    return Err(invalid(format!("element {e} references vertex {}", el[i])));
                }
                for j in 0..i {
                    if el[i] == el[j] {
                        return Err(Error::DegenerateGeometry(format!(
                            "element {e} repeats vertex {}",
                            el[i]
                        )));
                    }
                }
            }
        }
        check_manifold(embedding, nv, &elements, closed)?;
        if closed && embedding.is_hypersurface() {
            if signed_volume_of(embedding, &vertices, &elements) < 0.0 {
                for el in elements.iter_mut() {
                    el.swap(0, 1);
                }
            }
        }

        let mut vertex_star = vec![Vec::new(); nv];
        let mut vertex_ring: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (e, el) in elements.iter().enumerate() {
            for i in 0..arity {
                vertex_star[el[i]].push(e);
                for j in 0..arity {
                    if i != j && !vertex_ring[el[i]].contains(&el[j]) {
                        vertex_ring[el[i]].push(el[j]);
                    }
                }
            }
        }
        for ring in vertex_ring.iter_mut() {
            ring.sort_unstable();
        }

        let mut mesh = DiscreteHypersurface {
            embedding,
            closed,
            vertices,
            elements,
            element_normals: Vec::new(),
            element_tangents: Vec::new(),
            element_measures: Vec::new(),
            vertex_measures: Vec::new(),
            vertex_normals: Vec::new(),
            vertex_star,
            vertex_ring,
            diameter: 0.0,
        };
        mesh.recompute_geometry()?;
        Ok(mesh)
    }

    fn recompute_geometry(&mut self) -> Result<()> {
        let m = self.elements.len();
        let dim = self.dim();
        let mut normals = Vec::with_capacity(if self.embedding.is_hypersurface() { m } else { 0 });
        let mut tangents = Vec::with_capacity(if dim == 1 { m } else { 0 });
        let mut measures = Vec::with_capacity(m);
        for (e, el) in self.elements.iter().enumerate() {
            let a = self.vertices[el[0]];
            let b = self.vertices[el[1]];
            if dim == 1 {
                let t = math::sub(b, a);
                let len = math::norm(t);
                if !(len > 0.0) {
                    return Err(Error::DegenerateGeometry(format!("segment {e} has zero length")));
                }
                let t = math::scale(t, 1.0 / len);
                tangents.push(t);
                if self.embedding == Embedding::PlaneCurve {
                    normals.push([t[1], -t[0], 0.0]);
                }
                measures.push(len);
            } else {
                let c = self.vertices[el[2]];
                let n = math::cross(math::sub(b, a), math::sub(c, a));
                let twice = math::norm(n);
                if !(twice > 0.0) {
                    return Err(Error::DegenerateGeometry(format!("triangle {e} has zero area")));
                }
                normals.push(math::scale(n, 1.0 / twice));
                measures.push(0.5 * twice);
            }
        }
        let share = 1.0 / (dim + 1) as f64;
        let mut vertex_measures = vec![0.0; self.vertices.len()];
        for (el, &mu) in self.elements.iter().zip(&measures) {
            for &v in &el[..dim + 1] {
                vertex_measures[v] += mu * share;
            }
        }
        let mut vertex_normals = Vec::new();
        if self.embedding.is_hypersurface() {
            vertex_normals.reserve(self.vertices.len());
            for (v, star) in self.vertex_star.iter().enumerate() {
                let mut acc = [0.0; 3];
                for &e in star {
                    acc = math::add(acc, math::scale(normals[e], measures[e]));
                }
                let n = math::normalize(acc).ok_or_else(|| {
                    Error::DegenerateGeometry(format!("vertex {v} has no defined normal"))
                })?;
                vertex_normals.push(n);
            }
        }
        self.element_normals = normals;
        self.element_tangents = tangents;
        self.element_measures = measures;
        self.vertex_measures = vertex_measures;
        self.vertex_normals = vertex_normals;
        self.diameter = diameter_of(&self.vertices);
        Ok(())
    }

    /// Same connectivity, new vertex positions.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(invalid("vertex count mismatch"));
        }
        let mut mesh = self.clone();
        mesh.vertices = vertices;
        mesh.recompute_geometry()?;
        Ok(mesh)
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }
    pub fn dim(&self) -> usize {
        self.embedding.dim()
    }
    pub fn ambient_dim(&self) -> usize {
        self.embedding.ambient()
    }
    pub fn is_closed(&self) -> bool {
        self.closed
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }
    pub fn vertex(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }
    /// Vertex indices of element `e` (2 for segments, 3 for triangles).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim() + 1]
    }
    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let k = self.dim() + 1;
        self.elements.iter().map(move |el| &el[..k])
    }
    /// Unit outward normals; empty for space curves.
    pub fn element_normals(&self) -> &[Vec3] {
        &self.element_normals
    }
    /// Unit tangents of segments; empty for surfaces.
    pub fn element_tangents(&self) -> &[Vec3] {
        &self.element_tangents
    }
    pub fn element_measures(&self) -> &[f64] {
        &self.element_measures
    }
    pub fn vertex_measures(&self) -> &[f64] {
        &self.vertex_measures
    }
    /// Measure-weighted average of adjacent element normals, renormalized.
    pub fn vertex_normals(&self) -> &[Vec3] {
        &self.vertex_normals
    }
    /// Elements incident to `v`.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.vertex_star[v]
    }
    /// Vertices sharing an element with `v`, sorted.
    pub fn vertex_ring(&self, v: usize) -> &[usize] {
        &self.vertex_ring[v]
    }
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn element_centroid(&self, e: usize) -> Vec3 {
        let el = self.element(e);
        let mut c = [0.0; 3];
        for &v in el {
            c = math::add(c, self.vertices[v]);
        }
        math::scale(c, 1.0 / el.len() as f64)
    }

    /// Total d-dimensional measure.
    pub fn area(&self) -> f64 {
        crate::exec::pairwise_sum(&self.element_measures)
    }

    /// Enclosed (signed) volume or area; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        signed_volume_of(self.embedding, &self.vertices, &self.elements)
    }

    /// Measure-weighted vertex centroid.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = [0.0; 3];
        let mut wsum = 0.0;
        for (x, &w) in self.vertices.iter().zip(&self.vertex_measures) {
            acc = math::add(acc, math::scale(*x, w));
            wsum += w;
        }
        math::scale(acc, 1.0 / wsum)
    }

    /// Scale about the origin by `lambda`; normals are unchanged and measures
    /// scale by `lambda^d`.
    pub fn rescale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("rescale factor {lambda} must be positive")));
        }
        let mut mesh = self.clone();
        if lambda == 1.0 {
            return Ok(mesh);
        }
        let ld = math::powf(lambda, self.dim() as f64);
        for x in mesh.vertices.iter_mut() {
            *x = math::scale(*x, lambda);
        }
        for m in mesh.element_measures.iter_mut() {
            *m *= ld;
        }
        for m in mesh.vertex_measures.iter_mut() {
            *m *= ld;
        }
        mesh.diameter *= lambda;
        Ok(mesh)
    }

    pub fn translate(&self, offset: Vec3) -> Self {
        let mut mesh = self.clone();
        for x in mesh.vertices.iter_mut() {
            *x = math::add(*x, offset);
        }
        mesh
    }

    /// Vertex/element half-space test for convexity.
    pub fn convexity_check(&self) -> Result<ConvexityReport> {
        if !self.embedding.is_hypersurface() {
            return Err(Error::UnsupportedMode(
                "convexity is undefined for space curves".into(),
            ));
        }
        let tol = 1e-9 * self.diameter;
        let mut max_violation: f64 = 0.0;
        for e in 0..self.num_elements() {
            let y = self.element_centroid(e);
            let n = self.element_normals[e];
            for x in &self.vertices {
                let v = math::dot(math::sub(*x, y), n);
                if v > max_violation {
                    max_violation = v;
                }
            }
        }
        Ok(ConvexityReport {
            is_convex: max_violation <= tol,
            max_violation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub is_convex: bool,
    pub max_violation: f64,
}

fn signed_volume_of(embedding: Embedding, vertices: &[Vec3], elements: &[[usize; 3]]) -> f64 {
    match embedding {
        Embedding::Surface => {
            elements
                .iter()
                .map(|el| {
                    let (a, b, c) = (vertices[el[0]], vertices[el[1]], vertices[el[2]]);
                    math::dot(a, math::cross(b, c))
                })
                .sum::<f64>()
                / 6.0
        }
        Embedding::PlaneCurve => {
            elements
                .iter()
                .map(|el| {
                    let (a, b) = (vertices[el[0]], vertices[el[1]]);
                    a[0] * b[1] - a[1] * b[0]
                })
                .sum::<f64>()
                / 2.0
        }
        Embedding::SpaceCurve => 0.0,
    }
}

fn check_manifold(
    embedding: Embedding,
    nv: usize,
    elements: &[[usize; 3]],
    closed: bool,
) -> Result<()> {
    if embedding.dim() == 1 {
        // Each vertex must start one segment and end one (or be an end of an open chain).
        let mut starts = vec![0usize; nv];
        let mut ends = vec![0usize; nv];
        for el in elements {
            starts[el[0]] += 1;
            ends[el[1]] += 1;
        }
        for v in 0..nv {
            let deg = starts[v] + ends[v];
            if deg == 0 {
                continue;
            }
            if deg > 2 || (closed && deg != 2) {
                return Err(Error::NonManifold(format!("vertex {v} lies on {deg} segments")));
            }
            if deg == 2 && starts[v] != 1 {
                return Err(Error::Orientation(format!(
                    "segments meeting at vertex {v} have opposite directions"
                )));
            }
        }
        return Ok(());
    }
    // Directed edge occurrences keyed by the undirected edge.
    let mut edges: BTreeMap<(usize, usize), (usize, i32)> = BTreeMap::new();
    for el in elements {
        for k in 0..3 {
            let (a, b) = (el[k], el[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let dir = if a < b { 1 } else { -1 };
            let entry = edges.entry(key).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += dir;
        }
    }
    let mut inconsistent = None;
    for (&(a, b), &(count, dir_sum)) in &edges {
        if count > 2 || (closed && count != 2) {
            return Err(Error::NonManifold(format!(
                "edge ({a}, {b}) is shared by {count} triangles"
            )));
        }
        if count == 2 && dir_sum != 0 && inconsistent.is_none() {
            inconsistent = Some((a, b));
        }
    }
    if let Some((a, b)) = inconsistent {
        return Err(Error::Orientation(format!(
            "triangles sharing edge ({a}, {b}) induce the same direction on it"
        )));
    }
    Ok(())
}

fn diameter_of(vertices: &[Vec3]) -> f64 {
    let mut best = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            let d = math::norm2(math::sub(*a, *b));
            if d > best {
                best = d;
            }
        }
    }
    math::sqrt(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
    }

    #[test]
    fn tetrahedron_is_outward() {
        let (v, t) = tetra();
        let m = DiscreteHypersurface::from_triangles(v, t).unwrap();
        assert!(m.signed_volume() > 0.0);
        assert!((m.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        let total_v: f64 = m.vertex_measures().iter().sum();
        assert!((total_v - m.area()).abs() < 1e-12 * m.area());
    }

    #[test]
    fn inward_tetrahedron_is_flipped() {
        let (v, t) = tetra();
        let flipped: Vec<_> = t.iter().map(|&[a, b, c]| [b, a, c]).collect();
        let m = DiscreteHypersurface::from_triangles(v, flipped).unwrap();
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn missing_face_is_non_manifold() {
        let (v, mut t) = tetra();
        t.pop();
        let err = DiscreteHypersurface::from_triangles(v, t).unwrap_err();
        assert_eq!(err.kind(), "NonManifoldError");
    }

    #[test]
    fn single_flipped_face_is_orientation_error() {
        let (v, mut t) = tetra();
        t[0].swap(0, 1);
        let err = DiscreteHypersurface::from_triangles(v, t).unwrap_err();
        assert_eq!(err.kind(), "OrientationError");
    }

    #[test]
    fn clockwise_square_is_flipped() {
        let v = vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        let m = DiscreteHypersurface::from_segments(
            Embedding::PlaneCurve,
            v,
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        )
        .unwrap();
        assert!((m.signed_volume() - 1.0).abs() < 1e-15);
        // Outward normal on the bottom edge points down.
        let bottom = (0..4)
            .find(|&e| {
                let c = m.element_centroid(e);
                c[1] == 0.0
            })
            .unwrap();
        assert_eq!(m.element_normals()[bottom], [0.0, -1.0, 0.0]);
    }

    #[test]
    fn rescale_rejects_nonpositive() {
        let (v, t) = tetra();
        let m = DiscreteHypersurface::from_triangles(v, t).unwrap();
        assert!(m.rescale(0.0).is_err());
        assert!(m.rescale(-2.0).is_err());
    }
}
