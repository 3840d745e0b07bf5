use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, Workers};
use crate::math::{self, Vec3};
use crate::seminorms::{sobolev_seminorm, DistanceMode, ScalarField};
use crate::surface::DiscreteHypersurface;

const SPHERE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub center: Vec3,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub u_seminorm: f64,
    pub hausdorff: f64,
    pub starshaped: bool,
}

fn point_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    // closest point by region tests on the barycentric plane
    let ab = math::sub(b, a);
    let ac = math::sub(c, a);
    let ap = math::sub(p, a);
    let d1 = math::dot(ab, ap);
    let d2 = math::dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return math::norm(ap);
    }
    let bp = math::sub(p, b);
    let d3 = math::dot(ab, bp);
    let d4 = math::dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return math::norm(bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return math::dist(p, math::add(a, math::scale(ab, v)));
    }
    let cp = math::sub(p, c);
    let d5 = math::dot(ab, cp);
    let d6 = math::dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return math::norm(cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return math::dist(p, math::add(a, math::scale(ac, w)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return math::dist(p, math::add(b, math::scale(math::sub(c, b), w)));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    math::dist(p, math::add(a, math::add(math::scale(ab, v), math::scale(ac, w))))
}

fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = math::sub(b, a);
    let t = (math::dot(math::sub(p, a), d) / math::norm2(d)).clamp(0.0, 1.0);
    math::dist(p, math::add(a, math::scale(d, t)))
}

/// Distance from `p` to the nearest point of the mesh.
pub(crate) fn distance_to_mesh(mesh: &DiscreteHypersurface, p: Vec3) -> f64 {
    let mut best = f64::INFINITY;
    for e in mesh.elements() {
        let d = if e.len() == 2 {
            point_segment_distance(p, mesh.vertex(e[0]), mesh.vertex(e[1]))
        } else {
            point_triangle_distance(p, mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2]))
        };
        best = best.min(d);
    }
    best
}

/// Evenly spread unit directions (Fibonacci lattice; a circle for curves).
pub(crate) fn sphere_directions(dim: usize) -> Vec<Vec3> {
    let n = SPHERE_SAMPLES;
    if dim == 1 {
        return (0..n)
            .map(|i| {
                let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
                [math::cos(t), math::sin(t), 0.0]
            })
            .collect();
    }
    let golden = core::f64::consts::PI * (3.0 - math::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = math::sqrt(1.0 - z * z);
            let t = golden * i as f64;
            [r * math::cos(t), r * math::sin(t), z]
        })
        .collect()
}

/// Support function of the mesh about its centroid, its mean radius, its
/// fractional Sobolev seminorm and the Hausdorff distance to the mean sphere.
///
/// The sphere-to-mesh half of the Hausdorff distance uses the nearest point on
/// the mesh (not the nearest vertex) at a fixed set of sphere samples.
pub fn stability_probe(
    mesh: &DiscreteHypersurface,
    alpha: f64,
    q: f64,
    workers: Workers,
) -> Result<StabilityReport> {
    if !mesh.embedding().is_hypersurface() {
        return Err(Error::UnsupportedMode("stability needs a hypersurface".into()));
    }
    let center = mesh.centroid();
    let w = mesh.vertex_measures();
    let u: Vec<f64> = mesh
        .vertices()
        .iter()
        .zip(mesh.vertex_normals())
        .map(|(&x, &n)| math::dot(math::sub(x, center), n))
        .collect();
    let total = pairwise_sum(w);
    let r0 = pairwise_sum(&u.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>()) / total;
    if !(r0.is_finite()) || !(total > 0.0) {
        return Err(Error::DegenerateGeometry("mesh has no measure".into()));
    }
    let starshaped = u.iter().all(|&v| v > 0.0);
    let field = ScalarField::new(mesh, u)?;
    let u_seminorm = sobolev_seminorm(&field, alpha, q, DistanceMode::Extrinsic, workers)?;
    let radial = mesh
        .vertices()
        .iter()
        .map(|&x| math::abs(math::dist(x, center) - r0))
        .fold(0.0, f64::max);
    let dirs = sphere_directions(mesh.dim());
    let sphere_side = map_indexed(dirs.len(), workers, |i| {
        distance_to_mesh(mesh, math::add(center, math::scale(dirs[i], r0.abs())))
    })
    .into_iter()
    .fold(0.0, f64::max);
    Ok(StabilityReport {
        center,
        r0,
        u_seminorm,
        hausdorff: radial.max(sphere_side),
        starshaped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_distance_regions() {
        let (a, b, c) = ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let cases = [
            ([0.2, 0.2, 0.5], 0.5),
            ([-1.0, -1.0, 0.0], 2f64.sqrt()),
            ([2.0, 0.0, 0.0], 1.0),
            ([0.5, -1.0, 0.0], 1.0),
            ([1.0, 1.0, 0.0], 0.5f64.sqrt()),
            ([-2.0, 0.5, 0.0], 2.0),
        ];
        for (p, d) in cases {
            assert!((point_triangle_distance(p, a, b, c) - d).abs() < 1e-14, "{p:?}");
        }
    }
}
