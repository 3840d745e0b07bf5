//! Area-constrained descent on the nonlocal bending energy.
//!
//! Gradients are central finite differences of the full discrete energy. Each
//! trial step is followed by a dilation about the centroid back to unit area
//! and accepted only if the energy went down.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, try_map_indexed, Workers};
use crate::functionals::{bending_energy, KernelSums};
use crate::math::{self, Vec3};
use crate::params::EnergyParameters;
use crate::probes::distance_to_mesh;
use crate::quadrature::{DiagonalPolicy, EvalPoint, NearField, QuadratureOrder, SchemeOptions};
use crate::surface::DiscreteHypersurface;

fn mean_ring_length(mesh: &DiscreteHypersurface, v: usize) -> f64 {
    let ring = mesh.vertex_ring(v);
    let x = mesh.vertex(v);
    ring.iter().map(|&j| math::dist(x, mesh.vertex(j))).sum::<f64>() / ring.len().max(1) as f64
}

/// Bending energy of the mesh with one vertex displaced, updating only what
/// the displacement can change.
///
/// Outer samples on elements touching the closed one-ring of `v`, and samples
/// whose excluded region meets the star of `v`, are recomputed from scratch
/// (their position, weight, local shape or near-field geometry may change).
/// Every other outer sample keeps its inner sum with the old contributions of
/// the star of `v` swapped for the new ones.
struct Perturber<'a> {
    mesh: &'a DiscreteHypersurface,
    scheme: &'a SchemeOptions,
    params: &'a EnergyParameters,
    base: KernelSums<'a>,
    base_abs: Vec<f64>,
    /// Excluded elements per outer sample (sorted); depends on topology only.
    excluded: Vec<Vec<usize>>,
    samples: &'a [crate::quadrature::Sample],
}

impl<'a> Perturber<'a> {
    fn energy(&self, v: usize, offset: Vec3) -> Result<f64> {
        let mesh = self.mesh;
        let mut pos = mesh.vertices().to_vec();
        pos[v] = math::add(pos[v], offset);
        let moved = mesh.with_positions(pos)?;
        let q = self.scheme.build(&moved);
        let ks = KernelSums::new(&moved, &q, self.params.s, self.params.codim_mode)?;
        let mut touched = vec![false; mesh.num_elements()];
        for u in core::iter::once(v).chain(mesh.vertex_ring(v).iter().copied()) {
            for &e in mesh.vertex_star(u) {
                touched[e] = true;
            }
        }
        let star = mesh.vertex_star(v);
        let c = self.params.c_s();
        let p = self.params.p;
        let mut terms = Vec::with_capacity(self.samples.len());
        for (i, smp) in self.samples.iter().enumerate() {
            let near = touched[smp.element]
                || star.iter().any(|e| self.excluded[i].binary_search(e).is_ok());
            let (abs, w) = if near {
                let new = &q.samples()[i];
                (ks.at(EvalPoint::Sample(i))?.absolute, new.weight)
            } else {
                let mut acc = self.base_abs[i];
                for &e in star {
                    acc -= self.base.element_term(smp.point, e)?.1;
                    acc += ks.element_term(smp.point, e)?.1;
                }
                (acc, smp.weight)
            };
            terms.push(math::powf(math::abs(c * abs), p) * w);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Central differences of the bending energy along `(vertex, unit direction)`
/// pairs, with step `h` times the mean incident edge length.
fn directional_derivatives(
    mesh: &DiscreteHypersurface,
    scheme: &SchemeOptions,
    params: &EnergyParameters,
    h: f64,
    dirs: &[(usize, Vec3)],
    workers: Workers,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("finite-difference step must be positive, got {h}")));
    }
    params.validate()?;
    let q = scheme.build(mesh);
    let base = KernelSums::new(mesh, &q, params.s, params.codim_mode)?;
    let base_abs: Vec<f64> = try_map_indexed(q.samples().len(), workers, |i| {
        base.at(EvalPoint::Sample(i)).map(|r| r.absolute)
    })?;
    let excluded = (0..q.samples().len())
        .map(|i| base.excluded(EvalPoint::Sample(i)))
        .collect();
    let pert = Perturber {
        mesh,
        scheme,
        params,
        base,
        base_abs,
        excluded,
        samples: q.samples(),
    };
    try_map_indexed(dirs.len(), workers, |k| -> Result<f64> {
        let (v, dir) = dirs[k];
        let delta = h * mean_ring_length(mesh, v);
        let plus = pert.energy(v, math::scale(dir, delta))?;
        let minus = pert.energy(v, math::scale(dir, -delta))?;
        Ok((plus - minus) / (2.0 * delta))
    })
}

/// Central-difference gradient of the bending energy, one ambient vector per
/// vertex; each coordinate is perturbed by `h` times the mean length of the
/// vertex's incident edges.
pub fn energy_gradient(
    mesh: &DiscreteHypersurface,
    scheme: &SchemeOptions,
    params: &EnergyParameters,
    h: f64,
    workers: Workers,
) -> Result<Vec<Vec3>> {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let planar = mesh.embedding() == crate::surface::Embedding::PlaneCurve;
    let dirs: Vec<(usize, Vec3)> = (0..mesh.num_vertices())
        .flat_map(|v| axes[..if planar { 2 } else { 3 }].iter().map(move |&a| (v, a)))
        .collect();
    let parts = directional_derivatives(mesh, scheme, params, h, &dirs, workers)?;
    let per = if planar { 2 } else { 3 };
    Ok(parts
        .chunks(per)
        .map(|g| [g[0], g[1], if planar { 0.0 } else { g[2] }])
        .collect())
}

/// Derivative of the bending energy along each vertex normal.
pub fn normal_derivatives(
    mesh: &DiscreteHypersurface,
    scheme: &SchemeOptions,
    params: &EnergyParameters,
    h: f64,
    workers: Workers,
) -> Result<Vec<f64>> {
    let dirs: Vec<(usize, Vec3)> = mesh.vertex_normals().iter().copied().enumerate().collect();
    directional_derivatives(mesh, scheme, params, h, &dirs, workers)
}

/// Relative defect of the dilation identity `sum_v <g_v, x_v> = (d - s p) E`.
///
/// The defect is measured against the larger of `|(d - s p) E|` and
/// `sum_v |<g_v, x_v>|`, so it stays meaningful when `d = s p`.
pub fn euler_identity_defect(
    mesh: &DiscreteHypersurface,
    gradient: &[Vec3],
    energy: f64,
    params: &EnergyParameters,
) -> f64 {
    let terms: Vec<f64> = gradient
        .iter()
        .zip(mesh.vertices())
        .map(|(g, x)| math::dot(*g, *x))
        .collect();
    let lhs = pairwise_sum(&terms);
    let rhs = params.scaling_exponent(mesh.dim()) * energy;
    let scale = math::abs(rhs).max(terms.iter().map(|t| math::abs(*t)).sum());
    if scale == 0.0 {
        return 0.0;
    }
    math::abs(lhs - rhs) / scale
}

/// Dilate about the centroid to unit area.
pub fn project_area(mesh: &DiscreteHypersurface) -> Result<DiscreteHypersurface> {
    let area = mesh.area();
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::DegenerateGeometry(format!("area {area} cannot be normalized")));
    }
    let lambda = math::powf(area, -1.0 / mesh.dim() as f64);
    if lambda == 1.0 {
        return Ok(mesh.clone());
    }
    let c = mesh.centroid();
    let pos = mesh
        .vertices()
        .iter()
        .map(|&x| math::add(c, math::scale(math::sub(x, c), lambda)))
        .collect();
    mesh.with_positions(pos)
}

/// Algebraic least-squares sphere (circle for curves) through the vertices.
pub fn fit_sphere(mesh: &DiscreteHypersurface) -> Option<(Vec3, f64)> {
    // |x|^2 = 2 <c, x> + k with k = r^2 - |c|^2
    let planar = mesh.dim() == 1;
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for &x in mesh.vertices() {
        let row = [2.0 * x[0], 2.0 * x[1], if planar { 0.0 } else { 2.0 * x[2] }, 1.0];
        let rhs = math::norm2(x);
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    if planar {
        ata[2][2] = 1.0;
    }
    let sol = math::solve_dense(ata, atb)?;
    let c = [sol[0], sol[1], sol[2]];
    let r2 = sol[3] + math::norm2(c);
    (r2 > 0.0).then(|| (c, math::sqrt(r2)))
}

/// Hausdorff distance between the mesh and its fitted sphere, with the
/// sphere side sampled at fixed directions.
pub fn hausdorff_to_best_sphere(mesh: &DiscreteHypersurface) -> Result<f64> {
    let (c, r) = fit_sphere(mesh)
        .ok_or_else(|| Error::DegenerateGeometry("no sphere fits the vertices".into()))?;
    let radial = mesh
        .vertices()
        .iter()
        .map(|&x| math::abs(math::dist(x, c) - r))
        .fold(0.0, f64::max);
    let sphere_side = crate::probes::sphere_directions(mesh.dim())
        .into_iter()
        .map(|d| distance_to_mesh(mesh, math::add(c, math::scale(d, r))))
        .fold(0.0, f64::max);
    Ok(radial.max(sphere_side))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub energy: f64,
    pub area: f64,
    pub grad_norm: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// First trial step as a multiple of `mean edge / max |grad|`.
    pub step0: f64,
    pub shrink: f64,
    /// Step growth after an accepted step.
    pub grow: f64,
    /// Smallest step, same units as `step0`, before giving up.
    pub min_step: f64,
    /// Stop when `max |grad| * mean edge / E` falls below this.
    pub grad_tol: f64,
    pub fd_step: f64,
    /// Tangential Laplacian smoothing after each accepted step.
    pub smoothing: bool,
    /// Move vertices only along their normals, using the normal component of
    /// the gradient. Tangential gradient components only reshuffle vertices
    /// within the surface and otherwise dominate on coarse meshes.
    pub normal_motion: bool,
    /// Descent direction `(I + tau L)^-1 grad` with the graph Laplacian `L`;
    /// `0` uses the raw gradient. Damps the mesh-scale modes that the
    /// discrete energy rewards.
    pub precondition: f64,
    /// Defaults to the flat near field. The curved near-field model lowers
    /// the energy of single-vertex spikes on coarse meshes.
    pub scheme: SchemeOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 100,
            step0: 0.2,
            shrink: 0.5,
            grow: 1.25,
            min_step: 1e-10,
            grad_tol: 1e-6,
            fd_step: 1e-4,
            smoothing: false,
            normal_motion: true,
            precondition: 5.0,
            scheme: SchemeOptions {
                order: QuadratureOrder::Gauss3,
                diagonal_policy: DiagonalPolicy::SkipSameElement,
                near_field: NearField::Omit,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradTol,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub mesh: DiscreteHypersurface,
    pub iteration: usize,
    pub energy: f64,
    pub area: f64,
    pub grad_norm: f64,
    /// Last trial step in units of `mean edge / max |grad|`.
    pub step: f64,
    pub trajectory: Vec<TrajectoryRow>,
    pub stop_reason: StopReason,
    pub warnings: Vec<String>,
}

fn mean_edge(mesh: &DiscreteHypersurface) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for v in 0..mesh.num_vertices() {
        let x = mesh.vertex(v);
        for &j in mesh.vertex_ring(v) {
            total += math::dist(x, mesh.vertex(j));
            count += 1;
        }
    }
    total / count.max(1) as f64
}

fn min_measure(mesh: &DiscreteHypersurface) -> f64 {
    mesh.element_measures().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Solve `(I + tau L) u = g` by Jacobi sweeps, `L` the uniform graph
/// Laplacian (diagonally dominant, so the sweeps contract).
fn smooth_field(mesh: &DiscreteHypersurface, g: &[Vec3], tau: f64) -> Vec<Vec3> {
    let mut u = g.to_vec();
    for _ in 0..200 {
        let mut change = 0.0f64;
        let next: Vec<Vec3> = (0..u.len())
            .map(|v| {
                let ring = mesh.vertex_ring(v);
                let mut acc = g[v];
                for &j in ring {
                    acc = math::add(acc, math::scale(u[j], tau));
                }
                let nv = math::scale(acc, 1.0 / (1.0 + tau * ring.len() as f64));
                change = change.max(math::norm(math::sub(nv, u[v])));
                nv
            })
            .collect();
        u = next;
        let scale = u.iter().map(|x| math::norm(*x)).fold(0.0, f64::max);
        if change <= 1e-12 * scale {
            break;
        }
    }
    u
}

/// Gradient of the total measure with respect to each vertex.
pub fn area_gradient(mesh: &DiscreteHypersurface) -> Vec<Vec3> {
    let mut g = vec![[0.0; 3]; mesh.num_vertices()];
    for el in mesh.elements() {
        if let [a, b] = *el {
            if let Some(t) = math::normalize(math::sub(mesh.vertex(b), mesh.vertex(a))) {
                g[b] = math::add(g[b], t);
                g[a] = math::sub(g[a], t);
            }
        } else {
            let x = [mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2])];
            let Some(n) = math::normalize(math::cross(math::sub(x[1], x[0]), math::sub(x[2], x[0]))) else {
                continue;
            };
            for i in 0..3 {
                let opp = math::sub(x[(i + 2) % 3], x[(i + 1) % 3]);
                g[el[i]] = math::add(g[el[i]], math::scale(math::cross(n, opp), 0.5));
            }
        }
    }
    g
}

/// Solve `(I + tau L) u = g` for a scalar field.
fn smooth_scalar(mesh: &DiscreteHypersurface, g: &[f64], tau: f64) -> Vec<f64> {
    let lifted: Vec<Vec3> = g.iter().map(|&x| [x, 0.0, 0.0]).collect();
    smooth_field(mesh, &lifted, tau).iter().map(|v| v[0]).collect()
}

/// Move each vertex halfway to its ring average within its tangent plane.
fn smooth_tangential(mesh: &DiscreteHypersurface) -> Result<DiscreteHypersurface> {
    let pos = (0..mesh.num_vertices())
        .map(|v| {
            let x = mesh.vertex(v);
            let ring = mesh.vertex_ring(v);
            let mut avg = [0.0; 3];
            for &j in ring {
                avg = math::add(avg, mesh.vertex(j));
            }
            let d = math::sub(math::scale(avg, 1.0 / ring.len().max(1) as f64), x);
            let n = mesh.vertex_normals()[v];
            let t = math::sub(d, math::scale(n, math::dot(d, n)));
            math::add(x, math::scale(t, 0.5))
        })
        .collect();
    mesh.with_positions(pos)
}

/// Backtracking descent on the bending energy at unit area.
///
/// `observer` sees every recorded trajectory row with the current mesh.
pub fn minimize(
    mesh: &DiscreteHypersurface,
    params: &EnergyParameters,
    opts: &MinimizeOptions,
    workers: Workers,
    mut observer: impl FnMut(&TrajectoryRow, &DiscreteHypersurface),
) -> Result<FlowState> {
    params.validate()?;
    if !(opts.shrink > 0.0 && opts.shrink < 1.0) || !(opts.step0 > 0.0) || !(opts.grow >= 1.0) {
        return Err(invalid("need step0 > 0, shrink in (0, 1) and grow >= 1"));
    }
    let mut warnings = Vec::new();
    if !params.is_subcritical(mesh.dim()) {
        warnings.push(format!(
            "p = {} is not above d/s = {}; the energy is not subcritical",
            params.p,
            mesh.dim() as f64 / params.s
        ));
    }
    if opts.smoothing {
        warnings.push("tangential smoothing is on; vertices also move within the surface".into());
    }
    let eval = |m: &DiscreteHypersurface| -> Result<f64> {
        let q = opts.scheme.build(m);
        Ok(bending_energy(m, &q, params, workers)?.energy)
    };
    let mut cur = project_area(mesh)?;
    let floor = 1e-10 * min_measure(&cur);
    let mut energy = eval(&cur)?;
    let mut step = opts.step0;
    let mut trajectory = Vec::new();
    let mut iteration = 0;
    let normal_motion = opts.normal_motion && mesh.embedding().is_hypersurface();
    // Area projection turns E into F = E A^(-k) with k = (d - s p) / d; descend on F.
    let k = (mesh.dim() as f64 - params.s * params.p) / mesh.dim() as f64;
    let descent = |m: &DiscreteHypersurface, e: f64| -> Result<Vec<Vec3>> {
        let area = m.area();
        let ga = area_gradient(m);
        let c = k * e / area;
        if normal_motion {
            let dn = normal_derivatives(m, &opts.scheme, params, opts.fd_step, workers)?;
            let normals = m.vertex_normals();
            let mut df: Vec<f64> = dn.iter().zip(&ga).zip(normals).map(|((&g, &a), &n)| g - c * math::dot(a, n)).collect();
            if opts.precondition > 0.0 {
                df = smooth_scalar(m, &df, opts.precondition);
            }
            Ok(df.iter().zip(normals).map(|(&g, &n)| math::scale(n, g)).collect())
        } else {
            let g = energy_gradient(m, &opts.scheme, params, opts.fd_step, workers)?;
            let gf: Vec<Vec3> = g.iter().zip(&ga).map(|(&g, &a)| math::sub(g, math::scale(a, c))).collect();
            Ok(if opts.precondition > 0.0 { smooth_field(m, &gf, opts.precondition) } else { gf })
        }
    };
    let mut grad = descent(&cur, energy)?;
    let gmax = |g: &[Vec3]| g.iter().map(|v| math::norm(*v)).fold(0.0, f64::max);
    let mut grad_norm = gmax(&grad);
    let row = TrajectoryRow {
        iteration,
        energy,
        area: cur.area(),
        grad_norm,
        hausdorff: hausdorff_to_best_sphere(&cur)?,
    };
    observer(&row, &cur);
    trajectory.push(row);
    let stop_reason = loop {
        let edge = mean_edge(&cur);
        if energy == 0.0 || grad_norm * edge <= opts.grad_tol * energy {
            break StopReason::GradTol;
        }
        if iteration >= opts.max_iter {
            break StopReason::MaxIter;
        }
        let unit = edge / grad_norm;
        let accepted = loop {
            if step < opts.min_step {
                return Err(Error::Stall { iteration, step });
            }
            let pos: Vec<Vec3> = cur
                .vertices()
                .iter()
                .zip(&grad)
                .map(|(&x, &g)| math::sub(x, math::scale(g, step * unit)))
                .collect();
            let trial = cur.with_positions(pos).and_then(|m| project_area(&m));
            if let Ok(trial) = trial {
                let e = eval(&trial)?;
                if e < energy {
                    break (trial, e);
                }
            }
            step *= opts.shrink;
        };
        let (mut next, mut e) = accepted;
        if opts.smoothing {
            let smoothed = project_area(&smooth_tangential(&next)?)?;
            let es = eval(&smoothed)?;
            // keep the smoothing only when it does not undo the descent
            if es < energy {
                next = smoothed;
                e = es;
            }
        }
        iteration += 1;
        let mm = min_measure(&next);
        if mm < floor {
            return Err(Error::MeshDegeneration { iteration, min_measure: mm });
        }
        cur = next;
        energy = e;
        step *= opts.grow;
        grad = descent(&cur, energy)?;
        grad_norm = gmax(&grad);
        let row = TrajectoryRow {
            iteration,
            energy,
            area: cur.area(),
            grad_norm,
            hausdorff: hausdorff_to_best_sphere(&cur)?,
        };
        observer(&row, &cur);
        trajectory.push(row);
    };
    Ok(FlowState {
        area: cur.area(),
        mesh: cur,
        iteration,
        energy,
        grad_norm,
        step,
        trajectory,
        stop_reason,
        warnings,
    })
}
