//! Discrete fractional Sobolev, Hölder and Lebesgue (semi)norms of vertex
//! fields, the graph-linearization double integral on a Monge patch and a
//! Morrey-type comparison built on it.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, try_map_indexed, Workers};
use crate::geodesic::SurfaceGraph;
use crate::math;
use crate::probes::PatchChart;
use crate::surface::DiscreteHypersurface;

/// Per-vertex values on a mesh.
#[derive(Debug, Clone)]
pub struct ScalarField<'a> {
    mesh: &'a DiscreteHypersurface,
    values: Vec<f64>,
}

impl<'a> ScalarField<'a> {
    pub fn new(mesh: &'a DiscreteHypersurface, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(invalid(format!(
                "field has {} values for {} vertices",
                values.len(),
                mesh.num_vertices()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("field value {i} is not finite")));
        }
        Ok(ScalarField { mesh, values })
    }

    pub fn from_fn(mesh: &'a DiscreteHypersurface, f: impl Fn(math::Vec3) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.vertices().iter().map(|&x| f(x)).collect())
    }

    pub fn mesh(&self) -> &'a DiscreteHypersurface {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    #[default]
    Extrinsic,
    /// Shortest paths on the refined edge graph.
    Intrinsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormKind {
    Sobolev,
    Holder,
    Lq,
    GraphLinearization,
    MorreyCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub kind: SeminormKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub value: f64,
    pub distance_mode: DistanceMode,
}

/// Row `i` of the pairwise distance matrix.
struct Distances<'a> {
    mesh: &'a DiscreteHypersurface,
    graph: Option<SurfaceGraph>,
}

impl<'a> Distances<'a> {
    fn new(mesh: &'a DiscreteHypersurface, mode: DistanceMode) -> Result<Self> {
        let graph = match mode {
            DistanceMode::Extrinsic => None,
            DistanceMode::Intrinsic => {
                let g = SurfaceGraph::build(mesh);
                if !g.is_connected() {
                    return Err(Error::DisconnectedMesh);
                }
                Some(g)
            }
        };
        Ok(Distances { mesh, graph })
    }

    fn row(&self, i: usize) -> Vec<f64> {
        match &self.graph {
            Some(g) => g.distances_from(i),
            None => {
                let x = self.mesh.vertex(i);
                self.mesh.vertices().iter().map(|&y| math::dist(x, y)).collect()
            }
        }
    }
}

/// `( sum_{i != j} |f_i - f_j|^q / dist_ij^(d + alpha q) w_i w_j )^(1/q)`.
pub fn sobolev_seminorm(
    field: &ScalarField<'_>,
    alpha: f64,
    q: f64,
    mode: DistanceMode,
    workers: Workers,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(invalid(format!("q must exceed 1, got {q}")));
    }
    let mesh = field.mesh;
    let f = &field.values;
    let w = mesh.vertex_measures();
    let expo = mesh.dim() as f64 + alpha * q;
    let dist = Distances::new(mesh, mode)?;
    let rows = try_map_indexed(f.len(), workers, |i| -> Result<f64> {
        let d = dist.row(i);
        let mut terms = Vec::with_capacity(f.len());
        for j in 0..f.len() {
            if j == i {
                continue;
            }
            if !(d[j] > 0.0) {
                return Err(Error::DegenerateGeometry(format!("vertices {i} and {j} coincide")));
            }
            terms.push(math::powf(math::abs(f[i] - f[j]), q) / math::powf(d[j], expo) * w[j]);
        }
        Ok(pairwise_sum(&terms) * w[i])
    })?;
    Ok(math::powf(pairwise_sum(&rows), 1.0 / q))
}

/// `( sum_i |f_i|^q w_i )^(1/q)`; `q = inf` gives the maximum.
pub fn lq_norm(field: &ScalarField<'_>, q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        return Ok(field.values.iter().fold(0.0, |m, v| m.max(math::abs(*v))));
    }
    if !(q >= 1.0) {
        return Err(invalid(format!("q must be at least 1, got {q}")));
    }
    let terms: Vec<f64> = field
        .values
        .iter()
        .zip(field.mesh.vertex_measures())
        .map(|(v, w)| math::powf(math::abs(*v), q) * w)
        .collect();
    Ok(math::powf(pairwise_sum(&terms), 1.0 / q))
}

/// `max_{i != j} |f_i - f_j| / dist_ij^beta`.
pub fn holder_seminorm(
    field: &ScalarField<'_>,
    beta: f64,
    mode: DistanceMode,
    workers: Workers,
) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1], got {beta}")));
    }
    let f = &field.values;
    let dist = Distances::new(field.mesh, mode)?;
    let rows = try_map_indexed(f.len(), workers, |i| -> Result<f64> {
        let d = dist.row(i);
        let mut best = 0.0f64;
        for j in 0..f.len() {
            if j == i {
                continue;
            }
            if !(d[j] > 0.0) {
                return Err(Error::DegenerateGeometry(format!("vertices {i} and {j} coincide")));
            }
            best = best.max(math::abs(f[i] - f[j]) / math::powf(d[j], beta));
        }
        Ok(best)
    })?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Discrete `int_x ( int_y |f(x) - f(y) - Df(y)(x - y)| / |x - y|^(d+1+s) dy )^p dx`
/// over the patch grid, skipping the diagonal.
pub fn graph_linearization_functional(
    patch: &PatchChart,
    s: f64,
    p: f64,
    workers: Workers,
) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) || !(p > 0.0) {
        return Err(invalid(format!("need s in (0, 1) and p > 0, got s = {s}, p = {p}")));
    }
    let nodes = patch.nodes();
    if nodes.len() < 10 {
        return Err(Error::DegeneratePatch(format!(
            "patch has {} grid nodes, at least 10 are needed",
            nodes.len()
        )));
    }
    let d = patch.dim() as f64;
    let cell = math::powf(patch.spacing(), d);
    let expo = -0.5 * (d + 1.0 + s);
    let outer = try_map_indexed(nodes.len(), workers, |i| -> Result<f64> {
        let xi = &nodes[i];
        let mut terms = Vec::with_capacity(nodes.len());
        for (j, yj) in nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let dx = [xi.x[0] - yj.x[0], xi.x[1] - yj.x[1]];
            let r2 = dx[0] * dx[0] + dx[1] * dx[1];
            let resid = xi.f - yj.f - (yj.df[0] * dx[0] + yj.df[1] * dx[1]);
            terms.push(math::abs(resid) * math::powf(r2, expo));
        }
        Ok(math::powf(pairwise_sum(&terms) * cell, p) * cell)
    })?;
    Ok(pairwise_sum(&outer))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorreyCheck {
    /// Hölder seminorm of `Df` with exponent `s - d/p` on the inner disc.
    pub lhs: f64,
    /// `graph_linearization_functional^(1/p)`.
    pub rhs: f64,
    pub exponent: f64,
}

pub fn morrey_check(patch: &PatchChart, s: f64, p: f64, workers: Workers) -> Result<MorreyCheck> {
    let d = patch.dim() as f64;
    let sigma = s - d / p;
    if !(sigma > 0.0) {
        return Err(invalid(format!("need s > d/p, got s = {s}, d/p = {}", d / p)));
    }
    let rhs = math::powf(graph_linearization_functional(patch, s, p, workers)?, 1.0 / p);
    let inner = 0.75 * patch.radius();
    let nodes: Vec<_> = patch
        .nodes()
        .iter()
        .filter(|n| math::sqrt(n.x[0] * n.x[0] + n.x[1] * n.x[1]) <= inner + 1e-12)
        .collect();
    let rows = try_map_indexed(nodes.len(), workers, |i| -> Result<f64> {
        let a = nodes[i];
        let mut best = 0.0f64;
        for b in &nodes[i + 1..] {
            let dx = [a.x[0] - b.x[0], a.x[1] - b.x[1]];
            let dg = [a.df[0] - b.df[0], a.df[1] - b.df[1]];
            let r = math::sqrt(dx[0] * dx[0] + dx[1] * dx[1]);
            let g = math::sqrt(dg[0] * dg[0] + dg[1] * dg[1]);
            best = best.max(g / math::powf(r, sigma));
        }
        Ok(best)
    })?;
    Ok(MorreyCheck {
        lhs: rows.into_iter().fold(0.0, f64::max),
        rhs,
        exponent: sigma,
    })
}
