//! Sample points and weights for the double integrals, with the near-diagonal
//! exclusion rules.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{self, Vec3};
use crate::surface::DiscreteHypersurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureOrder {
    /// One point per element.
    Centroid,
    /// Edge midpoints on triangles (degree 2); 3-point Gauss-Legendre on segments.
    #[default]
    Gauss3,
    /// 7-point degree-5 rule on triangles; 7-point Gauss-Legendre on segments.
    Gauss7,
}

/// Which elements are dropped from the inner sum around an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Drop the elements whose closure contains the evaluation point. On flat
    /// elements their contribution is exactly zero.
    SkipSameElement,
    /// Additionally drop every element sharing a vertex with those.
    #[default]
    SkipVertexStar,
}

/// What replaces the contribution of the excluded elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NearField {
    /// Nothing; the excluded region contributes zero.
    Omit,
    /// Integrate the kernel of the local osculating quadric over the excluded
    /// region (see [`crate::curvature`]).
    #[default]
    OsculatingQuadric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub point: Vec3,
    pub weight: f64,
    pub element: usize,
    /// Barycentric coordinates in element vertex order (unused slots are 0).
    pub bary: [f64; 3],
}

/// Evaluation location for pointwise curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoint {
    Vertex(usize),
    Sample(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub order: QuadratureOrder,
    pub diagonal_policy: DiagonalPolicy,
    pub near_field: NearField,
    pub samples: usize,
}

/// Scheme settings without the mesh, for rebuilding schemes on moved meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub order: QuadratureOrder,
    pub diagonal_policy: DiagonalPolicy,
    pub near_field: NearField,
}

impl SchemeOptions {
    pub fn build(&self, mesh: &DiscreteHypersurface) -> QuadratureScheme {
        QuadratureScheme::build(mesh, self.order, self.diagonal_policy).with_near_field(self.near_field)
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    order: QuadratureOrder,
    policy: DiagonalPolicy,
    near_field: NearField,
    samples: Vec<Sample>,
    offsets: Vec<usize>,
}

const TRI_GAUSS7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

fn segment_rule(order: QuadratureOrder) -> Vec<([f64; 3], f64)> {
    match order {
        QuadratureOrder::Centroid => alloc::vec![([0.5, 0.5, 0.0], 1.0)],
        QuadratureOrder::Gauss3 | QuadratureOrder::Gauss7 => {
            let n = if order == QuadratureOrder::Gauss3 { 3 } else { 7 };
            let (x, w) = math::gauss_legendre(n);
            x.iter()
                .zip(&w)
                .map(|(&x, &w)| {
                    let t = 0.5 * (x + 1.0);
                    ([1.0 - t, t, 0.0], 0.5 * w)
                })
                .collect()
        }
    }
}

fn triangle_rule(order: QuadratureOrder) -> Vec<([f64; 3], f64)> {
    match order {
        QuadratureOrder::Centroid => alloc::vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)],
        QuadratureOrder::Gauss3 => alloc::vec![
            ([0.5, 0.5, 0.0], 1.0 / 3.0),
            ([0.0, 0.5, 0.5], 1.0 / 3.0),
            ([0.5, 0.0, 0.5], 1.0 / 3.0),
        ],
        QuadratureOrder::Gauss7 => TRI_GAUSS7.to_vec(),
    }
}

impl QuadratureScheme {
    pub fn build(mesh: &DiscreteHypersurface, order: QuadratureOrder, policy: DiagonalPolicy) -> Self {
        let rule = if mesh.dim() == 1 {
            segment_rule(order)
        } else {
            triangle_rule(order)
        };
        let m = mesh.num_elements();
        let mut samples = Vec::with_capacity(m * rule.len());
        let mut offsets = Vec::with_capacity(m + 1);
        for e in 0..m {
            offsets.push(samples.len());
            let el = mesh.element(e);
            let mu = mesh.element_measures()[e];
            for &(bary, w) in &rule {
                let mut p = [0.0; 3];
                for (k, &v) in el.iter().enumerate() {
                    p = math::add(p, math::scale(mesh.vertex(v), bary[k]));
                }
                samples.push(Sample {
                    point: p,
                    weight: w * mu,
                    element: e,
                    bary,
                });
            }
        }
        offsets.push(samples.len());
        QuadratureScheme {
            order,
            policy,
            near_field: NearField::default(),
            samples,
            offsets,
        }
    }

    pub fn with_near_field(mut self, near_field: NearField) -> Self {
        self.near_field = near_field;
        self
    }

    pub fn order(&self) -> QuadratureOrder {
        self.order
    }
    pub fn policy(&self) -> DiagonalPolicy {
        self.policy
    }
    pub fn near_field(&self) -> NearField {
        self.near_field
    }
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
    pub fn element_samples(&self, e: usize) -> &[Sample] {
        &self.samples[self.offsets[e]..self.offsets[e + 1]]
    }
    pub fn num_elements(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            order: self.order,
            diagonal_policy: self.policy,
            near_field: self.near_field,
            samples: self.samples.len(),
        }
    }

    /// Elements whose closure contains the evaluation point, sorted.
    pub fn home_elements(&self, mesh: &DiscreteHypersurface, at: EvalPoint) -> Vec<usize> {
        match at {
            EvalPoint::Vertex(v) => sorted(mesh.vertex_star(v).to_vec()),
            EvalPoint::Sample(i) => {
                let s = &self.samples[i];
                let el = mesh.element(s.element);
                let support: Vec<usize> = el
                    .iter()
                    .zip(s.bary)
                    .filter(|(_, b)| *b > 0.0)
                    .map(|(&v, _)| v)
                    .collect();
                if support.len() == el.len() {
                    return alloc::vec![s.element];
                }
                let mut home: Vec<usize> = mesh
                    .vertex_star(support[0])
                    .iter()
                    .copied()
                    .filter(|&e| support.iter().all(|v| mesh.element(e).contains(v)))
                    .collect();
                home.sort_unstable();
                home
            }
        }
    }

    /// Elements skipped in the inner sum at `at` under this scheme's policy.
    pub fn excluded_elements(&self, mesh: &DiscreteHypersurface, home: &[usize]) -> Vec<usize> {
        match self.policy {
            DiagonalPolicy::SkipSameElement => home.to_vec(),
            DiagonalPolicy::SkipVertexStar => {
                let mut out = Vec::new();
                for &e in home {
                    for &v in mesh.element(e) {
                        out.extend_from_slice(mesh.vertex_star(v));
                    }
                }
                sorted(out)
            }
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_primitive, Primitive};

    fn ico(sub: usize) -> DiscreteHypersurface {
        make_primitive(&Primitive::SphereIcosub {
            radius: 1.0,
            subdivisions: sub,
        })
        .unwrap()
    }

    #[test]
    fn centroid_on_icosahedron() {
        let m = ico(0);
        let q = QuadratureScheme::build(&m, QuadratureOrder::Centroid, DiagonalPolicy::SkipSameElement);
        assert_eq!(q.samples().len(), 20);
        for (s, mu) in q.samples().iter().zip(m.element_measures()) {
            assert_eq!(s.weight, *mu);
        }
    }

    #[test]
    fn weights_partition_area() {
        for order in [QuadratureOrder::Centroid, QuadratureOrder::Gauss3, QuadratureOrder::Gauss7] {
            let m = ico(2);
            let q = QuadratureScheme::build(&m, order, DiagonalPolicy::SkipVertexStar);
            let total: f64 = q.samples().iter().map(|s| s.weight).sum();
            assert!((total - m.area()).abs() <= 1e-12 * m.area());
            for e in 0..m.num_elements() {
                let we: f64 = q.element_samples(e).iter().map(|s| s.weight).sum();
                assert!((we - m.element_measures()[e]).abs() <= 1e-12 * we);
            }
        }
    }

    #[test]
    fn gauss3_is_exact_for_quadratics_on_a_triangle() {
        let v = alloc::vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.5, 1.5, 0.0]];
        let m = DiscreteHypersurface::open_triangles(v, alloc::vec![[0, 1, 2]]).unwrap();
        let q = QuadratureScheme::build(&m, QuadratureOrder::Gauss3, DiagonalPolicy::SkipSameElement);
        let a = m.area();
        for s in q.samples() {
            assert!((s.weight - a / 3.0).abs() < 1e-15);
        }
        // Linear: exact centroid value times area.
        let lin = |p: Vec3| 1.0 + 2.0 * p[0] - 3.0 * p[1];
        let got: f64 = q.samples().iter().map(|s| s.weight * lin(s.point)).sum();
        let c = m.element_centroid(0);
        assert!((got - a * lin(c)).abs() <= 1e-13 * (a * lin(c)).abs());
        // x^2 against the 7-point rule.
        let q7 = QuadratureScheme::build(&m, QuadratureOrder::Gauss7, DiagonalPolicy::SkipSameElement);
        let f = |p: Vec3| p[0] * p[0];
        let i3: f64 = q.samples().iter().map(|s| s.weight * f(s.point)).sum();
        let i7: f64 = q7.samples().iter().map(|s| s.weight * f(s.point)).sum();
        assert!((i3 - i7).abs() < 1e-12);
    }

    #[test]
    fn home_elements_of_edge_midpoint() {
        let m = ico(1);
        let q = QuadratureScheme::build(&m, QuadratureOrder::Gauss3, DiagonalPolicy::SkipSameElement);
        let home = q.home_elements(&m, EvalPoint::Sample(0));
        assert_eq!(home.len(), 2);
        assert!(home.contains(&0));
        let star = q.home_elements(&m, EvalPoint::Vertex(0));
        assert_eq!(star.len(), 5);
        let q2 = QuadratureScheme::build(&m, QuadratureOrder::Gauss3, DiagonalPolicy::SkipVertexStar);
        assert!(q2.excluded_elements(&m, &star).len() > 5);
    }

    #[test]
    fn samples_inside_elements() {
        let m = ico(1);
        for order in [QuadratureOrder::Centroid, QuadratureOrder::Gauss3, QuadratureOrder::Gauss7] {
            let q = QuadratureScheme::build(&m, order, DiagonalPolicy::SkipVertexStar);
            for s in q.samples() {
                assert!(s.bary.iter().all(|&b| (0.0..=1.0).contains(&b)));
                assert!((s.bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
