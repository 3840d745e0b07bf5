use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{self, Vec3};
use crate::surface::{DiscreteHypersurface, Embedding};

/// One grid node of a Monge patch: planar position, height and gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchNode {
    pub x: [f64; 2],
    pub f: f64,
    pub df: [f64; 2],
}

/// A surface piece written as a graph over its tangent plane at a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchChart {
    pub base_vertex: Option<usize>,
    /// Rows are the local axes; the last row is the vertex normal.
    pub rotation: [[f64; 3]; 3],
    pub radius: f64,
    pub spacing: f64,
    pub dim: usize,
    pub nodes: Vec<PatchNode>,
    pub grad_sup: f64,
    pub grad_holder: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    pub grad_bound: f64,
    /// Grid spacing and radius increment; `None` means `diameter / 200`.
    pub grid_step: Option<f64>,
    /// Exponent for `grad_holder`; skipped when `None`.
    pub holder_exponent: Option<f64>,
    pub max_radius: Option<f64>,
}

impl Default for PatchOptions {
    fn default() -> Self {
        PatchOptions {
            grad_bound: 0.5,
            grid_step: None,
            holder_exponent: None,
            max_radius: None,
        }
    }
}

fn grid_points(dim: usize, radius: f64, h: f64) -> Vec<[f64; 2]> {
    let k = math::floor(radius / h + 1e-9) as i64;
    let lim = radius * radius * (1.0 + 1e-12);
    let mut out = Vec::new();
    let js = if dim == 1 { 0..=0 } else { -k..=k };
    for j in js {
        for i in -k..=k {
            let x = [i as f64 * h, j as f64 * h];
            if x[0] * x[0] + x[1] * x[1] <= lim {
                out.push(x);
            }
        }
    }
    out
}

fn holder(nodes: &[PatchNode], sigma: f64) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let r = math::norm([a.x[0] - b.x[0], a.x[1] - b.x[1], 0.0]);
            let g = math::norm([a.df[0] - b.df[0], a.df[1] - b.df[1], 0.0]);
            best = best.max(g / math::powf(r, sigma));
        }
    }
    best
}

impl PatchChart {
    /// Patch of an explicit graph `f` with gradient `df` over the disc of
    /// `radius`, sampled on a square grid of `spacing` (`dim` 1 or 2).
    pub fn from_graph(
        dim: usize,
        radius: f64,
        spacing: f64,
        f: impl Fn([f64; 2]) -> f64,
        df: impl Fn([f64; 2]) -> [f64; 2],
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) || !(radius > 0.0) || !(spacing > 0.0) {
            return Err(invalid("patch needs dim 1 or 2 and positive radius and spacing"));
        }
        let nodes: Vec<PatchNode> = grid_points(dim, radius, spacing)
            .into_iter()
            .map(|x| PatchNode { x, f: f(x), df: df(x) })
            .collect();
        let grad_sup = nodes
            .iter()
            .map(|n| math::sqrt(n.df[0] * n.df[0] + n.df[1] * n.df[1]))
            .fold(0.0, f64::max);
        Ok(PatchChart {
            base_vertex: None,
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            radius,
            spacing,
            dim,
            nodes,
            grad_sup,
            grad_holder: None,
        })
    }

    pub fn nodes(&self) -> &[PatchNode] {
        &self.nodes
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// The chart of the dilated surface: `x -> l x`, `f -> l f(x / l)`.
    pub fn dilated(&self, l: f64) -> Self {
        let mut out = self.clone();
        out.radius *= l;
        out.spacing *= l;
        for n in &mut out.nodes {
            n.x = [n.x[0] * l, n.x[1] * l];
            n.f *= l;
        }
        out.grad_holder = None;
        out
    }

    pub fn with_holder_exponent(mut self, sigma: f64) -> Self {
        self.grad_holder = Some(holder(&self.nodes, sigma));
        self
    }
}

/// Vertical-ray intersections with the mesh in a local frame.
struct Caster {
    dim: usize,
    local: Vec<Vec3>,
    normals: Vec<Vec3>,
    elements: Vec<[usize; 3]>,
    origin: f64,
    cell: f64,
    side: usize,
    buckets: Vec<Vec<usize>>,
    merge_tol: f64,
}

struct Hit {
    t: f64,
    grad: [f64; 2],
}

impl Caster {
    fn new(mesh: &DiscreteHypersurface, rot: &[[f64; 3]; 3], x0: Vec3, reach: f64) -> Self {
        let to_local = |p: Vec3| [math::dot(rot[0], p), math::dot(rot[1], p), math::dot(rot[2], p)];
        let local: Vec<Vec3> = mesh.vertices().iter().map(|&p| to_local(math::sub(p, x0))).collect();
        let normals: Vec<Vec3> = mesh.vertex_normals().iter().map(|&n| to_local(n)).collect();
        let dim = mesh.dim();
        let elements: Vec<[usize; 3]> = mesh
            .elements()
            .map(|e| if e.len() == 3 { [e[0], e[1], e[2]] } else { [e[0], e[1], usize::MAX] })
            .collect();
        let mean_edge = {
            let mut acc = 0.0;
            for e in &elements {
                acc += math::dist(local[e[0]], local[e[1]]);
            }
            acc / elements.len().max(1) as f64
        };
        let side = (math::ceil(2.0 * reach / mean_edge.max(1e-300)) as usize).clamp(1, 512);
        let cell = 2.0 * reach / side as f64;
        let origin = -reach;
        let rows = if dim == 1 { 1 } else { side };
        let mut buckets = vec![Vec::new(); side * rows];
        let idx = |v: f64| math::floor((v - origin) / cell);
        for (k, e) in elements.iter().enumerate() {
            let n = if dim == 1 { 2 } else { 3 };
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in &e[..n] {
                for a in 0..2 {
                    lo[a] = lo[a].min(local[v][a]);
                    hi[a] = hi[a].max(local[v][a]);
                }
            }
            if hi[0] < origin || lo[0] > reach || (dim == 2 && (hi[1] < origin || lo[1] > reach)) {
                continue;
            }
            let clampi = |v: f64| (v.max(0.0) as usize).min(side - 1);
            let (i0, i1) = (clampi(idx(lo[0])), clampi(idx(hi[0])));
            let (j0, j1) = if dim == 1 { (0, 0) } else { (clampi(idx(lo[1])), clampi(idx(hi[1]))) };
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * side + i].push(k);
                }
            }
        }
        Caster {
            dim,
            local,
            normals,
            elements,
            origin,
            cell,
            side,
            buckets,
            merge_tol: 1e-9 * mesh.diameter(),
        }
    }

    fn bucket(&self, x: [f64; 2]) -> Option<&[usize]> {
        let i = math::floor((x[0] - self.origin) / self.cell);
        let j = if self.dim == 1 { 0.0 } else { math::floor((x[1] - self.origin) / self.cell) };
        let s = self.side as f64;
        if i < 0.0 || j < 0.0 || i >= s || j >= s {
            return None;
        }
        Some(&self.buckets[j as usize * self.side + i as usize])
    }

    /// Hits sorted by `|t|`, duplicates on shared edges merged.
    fn cast(&self, x: [f64; 2]) -> Vec<Hit> {
        let mut hits: Vec<Hit> = Vec::new();
        let Some(cands) = self.bucket(x) else {
            return hits;
        };
        for &k in cands {
            let e = self.elements[k];
            let bary: Option<([f64; 3], usize)> = if self.dim == 1 {
                let (a, b) = (self.local[e[0]][0], self.local[e[1]][0]);
                let den = b - a;
                if math::abs(den) < 1e-300 {
                    None
                } else {
                    let l = (x[0] - a) / den;
                    (l >= -1e-12 && l <= 1.0 + 1e-12).then_some(([1.0 - l, l, 0.0], 2))
                }
            } else {
                let (p, q, r) = (self.local[e[0]], self.local[e[1]], self.local[e[2]]);
                let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
                if math::abs(det) < 1e-300 {
                    None
                } else {
                    let l1 = ((x[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (x[1] - p[1])) / det;
                    let l2 = ((q[0] - p[0]) * (x[1] - p[1]) - (x[0] - p[0]) * (q[1] - p[1])) / det;
                    let l0 = 1.0 - l1 - l2;
                    (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12).then_some(([l0, l1, l2], 3))
                }
            };
            let Some((l, n)) = bary else {
                continue;
            };
            let mut t = 0.0;
            let mut nrm = [0.0; 3];
            for c in 0..n {
                t += l[c] * self.local[e[c]][2];
                nrm = math::add(nrm, math::scale(self.normals[e[c]], l[c]));
            }
            let grad = if nrm[2] > 1e-12 {
                [-nrm[0] / nrm[2], -nrm[1] / nrm[2]]
            } else {
                [f64::INFINITY, f64::INFINITY]
            };
            if hits.iter().any(|h| math::abs(h.t - t) <= self.merge_tol) {
                continue;
            }
            hits.push(Hit { t, grad });
        }
        hits.sort_by(|a, b| math::abs(a.t).total_cmp(&math::abs(b.t)));
        hits
    }
}

/// Grow a graph chart around `vertex` until the surface over the disc stops
/// being a single sheet or the gradient exceeds `grad_bound`.
///
/// A node is single-sheeted at radius `rho` when exactly one vertical-ray hit
/// lies within height `rho` of the tangent plane. Heights come from the mesh,
/// gradients from barycentrically interpolated vertex normals.
pub fn extract_patch(
    mesh: &DiscreteHypersurface,
    vertex: usize,
    opts: &PatchOptions,
) -> Result<PatchChart> {
    if mesh.embedding() == Embedding::SpaceCurve {
        return Err(Error::UnsupportedMode("patches need a hypersurface".into()));
    }
    if vertex >= mesh.num_vertices() {
        return Err(invalid(format!("vertex {vertex} out of range")));
    }
    if !(opts.grad_bound > 0.0) {
        return Err(invalid("grad_bound must be positive"));
    }
    let h = opts.grid_step.unwrap_or(mesh.diameter() / 200.0);
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("grid_step must be positive"));
    }
    let n = mesh.vertex_normals()[vertex];
    if !(math::norm(n) > 0.5) {
        return Err(Error::DegenerateGeometry(format!("vertex {vertex} has no normal")));
    }
    let e1 = if mesh.dim() == 1 { [-n[1], n[0], 0.0] } else { math::any_orthogonal(n) };
    let e2 = math::cross(n, e1);
    let rot = [e1, e2, n];
    let reach = opts.max_radius.unwrap_or(mesh.diameter()).min(mesh.diameter());
    let caster = Caster::new(mesh, &rot, mesh.vertex(vertex), reach);

    let dim = mesh.dim();
    let mut nodes: Vec<PatchNode> = Vec::new();
    let mut near_max = 0.0f64; // largest |t| of the nearest hit
    let mut far_min = f64::INFINITY; // smallest |t| of a second hit
    let mut grad_max = 0.0f64;
    let mut radius = 0.0;
    let mut accepted = 0;
    let mut k = 1;
    loop {
        let rho = k as f64 * h;
        if rho > reach * (1.0 + 1e-12) {
            break;
        }
        let mut fresh = Vec::new();
        let (mut nm, mut fm, mut gm) = (near_max, far_min, grad_max);
        let r_in = (k - 1) as f64 * h;
        let lim_in = r_in * r_in * (1.0 + 1e-12);
        for x in grid_points(dim, rho, h) {
            if k > 1 && x[0] * x[0] + x[1] * x[1] <= lim_in {
                continue;
            }
            let hits = caster.cast(x);
            let Some(first) = hits.first() else {
                nm = f64::INFINITY;
                break;
            };
            nm = nm.max(math::abs(first.t));
            if let Some(second) = hits.get(1) {
                fm = fm.min(math::abs(second.t));
            }
            gm = gm.max(math::norm([first.grad[0], first.grad[1], 0.0]));
            fresh.push(PatchNode { x, f: first.t, df: first.grad });
        }
        let sheet_ok = nm <= rho && fm > rho;
        if !sheet_ok {
            if k == 1 {
                return Err(Error::NonGraphical(format!(
                    "more than one sheet within {rho} of vertex {vertex}"
                )));
            }
            break;
        }
        if !(gm <= opts.grad_bound) {
            break;
        }
        if k == 1 {
            nodes.push(PatchNode { x: [0.0; 2], f: 0.0, df: [0.0; 2] });
        }
        nodes.extend(fresh.into_iter().filter(|p| p.x != [0.0, 0.0]));
        near_max = nm;
        far_min = fm;
        grad_max = gm;
        radius = rho;
        accepted = k;
        k += 1;
    }
    if accepted == 0 {
        nodes.push(PatchNode { x: [0.0; 2], f: 0.0, df: [0.0; 2] });
    }
    // the base vertex sits at the origin with the vertical normal
    if let Some(c) = nodes.iter_mut().find(|p| p.x == [0.0, 0.0]) {
        c.f = 0.0;
        c.df = [0.0, 0.0];
    }
    let grad_holder = opts.holder_exponent.map(|s| holder(&nodes, s));
    Ok(PatchChart {
        base_vertex: Some(vertex),
        rotation: rot,
        radius,
        spacing: h,
        dim,
        nodes,
        grad_sup: grad_max,
        grad_holder,
    })
}
