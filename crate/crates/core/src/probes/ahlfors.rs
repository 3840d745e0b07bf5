use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{self, Vec3};
use crate::surface::DiscreteHypersurface;

const MAX_DEPTH: u32 = 24;

fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * math::norm(math::cross(math::sub(b, a), math::sub(c, a)))
}

/// Area of triangle `abc` inside the ball; straddling pieces are split into
/// four until their diameter drops below `leaf`, then counted by centroid.
fn clipped_triangle(x: Vec3, r: f64, a: Vec3, b: Vec3, c: Vec3, leaf: f64, depth: u32) -> f64 {
    let (da, db, dc) = (math::dist(x, a), math::dist(x, b), math::dist(x, c));
    if da <= r && db <= r && dc <= r {
        return triangle_area(a, b, c);
    }
    let g = math::scale(math::add(math::add(a, b), c), 1.0 / 3.0);
    let spread = math::dist(g, a).max(math::dist(g, b)).max(math::dist(g, c));
    if math::dist(x, g) - spread > r {
        return 0.0;
    }
    if spread < leaf || depth >= MAX_DEPTH {
        return if math::dist(x, g) <= r { triangle_area(a, b, c) } else { 0.0 };
    }
    let mid = |p: Vec3, q: Vec3| math::scale(math::add(p, q), 0.5);
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    clipped_triangle(x, r, a, ab, ca, leaf, depth + 1)
        + clipped_triangle(x, r, ab, b, bc, leaf, depth + 1)
        + clipped_triangle(x, r, ca, bc, c, leaf, depth + 1)
        + clipped_triangle(x, r, ab, bc, ca, leaf, depth + 1)
}

/// Length of segment `ab` inside the ball, exactly.
fn clipped_segment(x: Vec3, r: f64, a: Vec3, b: Vec3) -> f64 {
    let d = math::sub(b, a);
    let f = math::sub(a, x);
    let (qa, qb, qc) = (math::dot(d, d), 2.0 * math::dot(f, d), math::dot(f, f) - r * r);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 || qa == 0.0 {
        return 0.0;
    }
    let sq = math::sqrt(disc);
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (t1 - t0).max(0.0) * math::sqrt(qa)
}

/// Measure of the mesh inside the closed ball `B(x, r)`.
pub fn ball_area(mesh: &DiscreteHypersurface, x: Vec3, r: f64) -> f64 {
    // about 2 pi / 1e-4 boundary leaves, each misjudged by at most half its area
    let leaf = 1e-4 * r;
    let mut parts = Vec::with_capacity(mesh.num_elements());
    for e in mesh.elements() {
        let v = |k: usize| mesh.vertex(e[k]);
        parts.push(if e.len() == 2 {
            clipped_segment(x, r, v(0), v(1))
        } else {
            clipped_triangle(x, r, v(0), v(1), v(2), leaf, 0)
        });
    }
    crate::exec::pairwise_sum(&parts)
}

/// `(r, |mesh ∩ B(x_v, r)| / r^d)` for each radius.
pub fn ahlfors_ratio(mesh: &DiscreteHypersurface, vertex: usize, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if vertex >= mesh.num_vertices() {
        return Err(invalid(format!("vertex {vertex} out of range")));
    }
    let x = mesh.vertex(vertex);
    let diam = mesh.diameter();
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r <= diam * (1.0 + 1e-12)) {
                return Err(invalid(format!("radius {r} must lie in (0, diameter = {diam}]")));
            }
            Ok((r, ball_area(mesh, x, r) / math::powf(r, mesh.dim() as f64)))
        })
        .collect()
}
