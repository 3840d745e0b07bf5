//! Pointwise nonlocal curvatures and the energies built from them.
//!
//! All inner integrals are sums over quadrature samples with the kernel
//! `|x - y|^-(d+1+s)`, skipping the elements excluded by the scheme's diagonal
//! policy and (by default) adding the osculating-quadric near-field term for
//! them. Outer loops run per evaluation point and are reduced with
//! [`pairwise_sum`], so results do not depend on the worker count.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curvature;
use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, try_map_indexed, Workers};
use crate::math::{self, Sym3, Vec3};
use crate::params::{CodimMode, EnergyParameters};
use crate::quadrature::{EvalPoint, NearField, QuadratureScheme, SchemeDescriptor};
use crate::surface::DiscreteHypersurface;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshDescriptor {
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "M")]
    pub elements: usize,
    pub area: f64,
    pub diameter: f64,
}

impl MeshDescriptor {
    pub fn of(mesh: &DiscreteHypersurface) -> Self {
        MeshDescriptor {
            vertices: mesh.num_vertices(),
            elements: mesh.num_elements(),
            area: mesh.area(),
            diameter: mesh.diameter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCurvature {
    pub vertex_index: usize,
    pub value: f64,
    pub params: EnergyParameters,
    pub scheme: SchemeDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Willmore,
    Bending,
    TangentPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kind: EnergyKind,
    pub energy: f64,
    #[serde(flatten)]
    pub params: EnergyParameters,
    #[serde(flatten)]
    pub mesh: MeshDescriptor,
    #[serde(rename = "scheme")]
    pub order: crate::quadrature::QuadratureOrder,
    pub diagonal_policy: crate::quadrature::DiagonalPolicy,
    pub near_field: NearField,
    /// Filled in by callers that have a clock.
    pub wall_time_s: Option<f64>,
}

/// Precomputed state for repeated kernel sums on one mesh and scheme.
pub struct KernelSums<'a> {
    mesh: &'a DiscreteHypersurface,
    scheme: &'a QuadratureScheme,
    shapes: Vec<Sym3>,
    cutoff2: f64,
    s: f64,
    expo: f64,
    use_normals: bool,
}

/// Inner sums at one evaluation point, without the `c_s` prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSums {
    /// Sum of `<x - y, n(y)>` kernels; `NaN` in projection mode.
    pub signed: f64,
    /// Sum of the absolute (or normal-projection) kernels.
    pub absolute: f64,
}

impl<'a> KernelSums<'a> {
    pub fn new(
        mesh: &'a DiscreteHypersurface,
        scheme: &'a QuadratureScheme,
        s: f64,
        mode: CodimMode,
    ) -> Result<Self> {
        let use_normals = mode == CodimMode::Hypersurface || mesh.dim() == 2;
        if use_normals && !mesh.embedding().is_hypersurface() {
            return Err(Error::UnsupportedMode(
                "space curves need projection mode".into(),
            ));
        }
        let shapes = match scheme.near_field() {
            NearField::OsculatingQuadric => curvature::vertex_shape_operators(mesh),
            NearField::Omit => Vec::new(),
        };
        let cut = 1e-14 * mesh.diameter();
        Ok(KernelSums {
            mesh,
            scheme,
            shapes,
            cutoff2: cut * cut,
            s,
            expo: -0.5 * (mesh.dim() as f64 + 1.0 + s),
            use_normals,
        })
    }

    pub fn position(&self, at: EvalPoint) -> Vec3 {
        match at {
            EvalPoint::Vertex(v) => self.mesh.vertex(v),
            EvalPoint::Sample(i) => self.scheme.samples()[i].point,
        }
    }

    /// Elements left out of the far-field sum at `at`.
    pub fn excluded(&self, at: EvalPoint) -> Vec<usize> {
        let home = self.scheme.home_elements(self.mesh, at);
        self.scheme.excluded_elements(self.mesh, &home)
    }

    /// Far-field contribution of element `e` at `x`, as `(signed, absolute)`.
    pub fn element_term(&self, x: Vec3, e: usize) -> Result<(f64, f64)> {
        let mut signed = 0.0;
        let mut absolute = 0.0;
        for smp in self.scheme.element_samples(e) {
            let d = math::sub(x, smp.point);
            let r2 = math::norm2(d);
            if r2 < self.cutoff2 {
                return Err(Error::DegenerateGeometry(format!(
                    "sample of element {e} coincides with the evaluation point"
                )));
            }
            let k = smp.weight * math::powf(r2, self.expo);
            if self.use_normals {
                let t = math::dot(d, self.mesh.element_normals()[e]) * k;
                signed += t;
                absolute += math::abs(t);
            } else {
                let tan = self.mesh.element_tangents()[e];
                let perp = math::sub(d, math::scale(tan, math::dot(d, tan)));
                absolute += math::norm(perp) * k;
            }
        }
        Ok((signed, absolute))
    }

    /// Far-field sum plus the near-field term at `at`.
    pub fn at(&self, at: EvalPoint) -> Result<InnerSums> {
        let mesh = self.mesh;
        let x = self.position(at);
        let home = self.scheme.home_elements(mesh, at);
        let excluded = self.scheme.excluded_elements(mesh, &home);
        let mut signed = 0.0;
        let mut absolute = 0.0;
        let mut skip = excluded.iter().peekable();
        for e in 0..mesh.num_elements() {
            if skip.peek() == Some(&&e) {
                skip.next();
                continue;
            }
            let (sg, ab) = self.element_term(x, e)?;
            signed += sg;
            absolute += ab;
        }
        if self.scheme.near_field() == NearField::OsculatingQuadric {
            let shape = curvature::shape_at(mesh, self.scheme, &self.shapes, at);
            let (sg, ab) = curvature::near_field(mesh, x, &shape, &home, &excluded, self.s);
            signed += sg;
            absolute += ab;
        }
        if !self.use_normals {
            signed = f64::NAN;
        }
        Ok(InnerSums { signed, absolute })
    }
}

fn require_hypersurface(mesh: &DiscreteHypersurface, params: &EnergyParameters) -> Result<()> {
    if !mesh.embedding().is_hypersurface() || params.codim_mode != CodimMode::Hypersurface {
        return Err(Error::UnsupportedMode(
            "signed fractional mean curvature needs a hypersurface in hypersurface mode".into(),
        ));
    }
    Ok(())
}

/// `H_s` at a mesh vertex.
pub fn fractional_mean_curvature(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    vertex: usize,
    params: &EnergyParameters,
) -> Result<f64> {
    params.validate()?;
    require_hypersurface(mesh, params)?;
    check_vertex(mesh, vertex)?;
    let sums = KernelSums::new(mesh, scheme, params.s, params.codim_mode)?.at(EvalPoint::Vertex(vertex))?;
    Ok(params.c_s() * sums.signed)
}

/// `|A|_s` at a mesh vertex (hypersurface or projection kernel).
pub fn nonlocal_second_fundamental(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    vertex: usize,
    params: &EnergyParameters,
) -> Result<f64> {
    params.validate()?;
    check_vertex(mesh, vertex)?;
    let sums = KernelSums::new(mesh, scheme, params.s, params.codim_mode)?.at(EvalPoint::Vertex(vertex))?;
    Ok(params.c_s() * sums.absolute)
}

fn check_vertex(mesh: &DiscreteHypersurface, v: usize) -> Result<()> {
    if v >= mesh.num_vertices() {
        return Err(invalid(format!("vertex {v} out of range")));
    }
    Ok(())
}

/// `(H_s, |A|_s)` at every vertex. `H_s` is `NaN` in projection mode.
pub fn vertex_curvatures(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let ks = KernelSums::new(mesh, scheme, params.s, params.codim_mode)?;
    let c = params.c_s();
    try_map_indexed(mesh.num_vertices(), workers, |v| {
        ks.at(EvalPoint::Vertex(v))
            .map(|r| (c * r.signed, c * r.absolute))
    })
}

/// `(H_s, |A|_s)` at every quadrature sample.
pub fn sample_curvatures(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let ks = KernelSums::new(mesh, scheme, params.s, params.codim_mode)?;
    let c = params.c_s();
    try_map_indexed(scheme.samples().len(), workers, |i| {
        ks.at(EvalPoint::Sample(i))
            .map(|r| (c * r.signed, c * r.absolute))
    })
}

fn report(
    kind: EnergyKind,
    energy: f64,
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
) -> EnergyReport {
    EnergyReport {
        kind,
        energy,
        params: *params,
        mesh: MeshDescriptor::of(mesh),
        order: scheme.order(),
        diagonal_policy: scheme.policy(),
        near_field: scheme.near_field(),
        wall_time_s: None,
    }
}

fn integrate_power(values: &[f64], scheme: &QuadratureScheme, p: f64) -> f64 {
    let terms: Vec<f64> = values
        .iter()
        .zip(scheme.samples())
        .map(|(v, s)| math::powf(math::abs(*v), p) * s.weight)
        .collect();
    pairwise_sum(&terms)
}

/// Fractional Willmore energy `W_{s,p} = int |H_s|^p`.
pub fn willmore_energy(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<EnergyReport> {
    params.validate()?;
    require_hypersurface(mesh, params)?;
    let vals: Vec<f64> = sample_curvatures(mesh, scheme, params, workers)?
        .into_iter()
        .map(|(h, _)| h)
        .collect();
    let e = integrate_power(&vals, scheme, params.p);
    Ok(report(EnergyKind::Willmore, e, mesh, scheme, params))
}

/// Nonlocal bending energy `B_{s,p} = int |A|_s^p`.
pub fn bending_energy(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<EnergyReport> {
    params.validate()?;
    let vals: Vec<f64> = sample_curvatures(mesh, scheme, params, workers)?
        .into_iter()
        .map(|(_, a)| a)
        .collect();
    let e = integrate_power(&vals, scheme, params.p);
    Ok(report(EnergyKind::Bending, e, mesh, scheme, params))
}

/// Both energies from one pass: `(W_{s,p}, B_{s,p})`.
pub fn willmore_and_bending(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<(EnergyReport, EnergyReport)> {
    params.validate()?;
    require_hypersurface(mesh, params)?;
    let vals = sample_curvatures(mesh, scheme, params, workers)?;
    let h: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let a: Vec<f64> = vals.iter().map(|v| v.1).collect();
    Ok((
        report(EnergyKind::Willmore, integrate_power(&h, scheme, params.p), mesh, scheme, params),
        report(EnergyKind::Bending, integrate_power(&a, scheme, params.p), mesh, scheme, params),
    ))
}

/// Radius of the smallest sphere tangent to `y + T_y` through `x`.
pub fn tangent_point_radius(x: Vec3, y: Vec3, n_y: Vec3) -> Result<f64> {
    let d = math::sub(x, y);
    let r2 = math::norm2(d);
    if r2 == 0.0 {
        return Err(invalid("tangent-point radius needs x != y"));
    }
    let den = math::abs(math::dot(n_y, d));
    if den < 1e-14 * r2 {
        return Ok(f64::INFINITY);
    }
    Ok(r2 / den)
}

/// Tangent-point energy `|c_s|^p int int |<x-y, n(y)>|^p / |x-y|^(q-p)`.
///
/// The near-field model is not applied; the excluded elements contribute zero.
pub fn tangent_point_energy(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    params: &EnergyParameters,
    workers: Workers,
) -> Result<EnergyReport> {
    params.validate()?;
    let (p, q) = (params.p, params.q);
    if !(q > p) {
        return Err(invalid(format!("tangent-point energy needs q > p (q = {q}, p = {p})")));
    }
    let use_normals = params.codim_mode == CodimMode::Hypersurface || mesh.dim() == 2;
    if use_normals && !mesh.embedding().is_hypersurface() {
        return Err(Error::UnsupportedMode("space curves need projection mode".into()));
    }
    let samples = scheme.samples();
    let cut = 1e-14 * mesh.diameter();
    let expo = -0.5 * (q - p);
    let normals = mesh.element_normals();
    let tangents = mesh.element_tangents();
    let outer = try_map_indexed(samples.len(), workers, |i| -> Result<f64> {
        let x = samples[i].point;
        let home = scheme.home_elements(mesh, EvalPoint::Sample(i));
        let excluded = scheme.excluded_elements(mesh, &home);
        let mut skip = excluded.iter().peekable();
        let mut acc = 0.0;
        for e in 0..mesh.num_elements() {
            if skip.peek() == Some(&&e) {
                skip.next();
                continue;
            }
            for smp in scheme.element_samples(e) {
                let d = math::sub(x, smp.point);
                let r2 = math::norm2(d);
                if r2 < cut * cut {
                    return Err(Error::DegenerateGeometry(format!(
                        "sample of element {e} coincides with an outer point"
                    )));
                }
                let pair = if use_normals {
                    math::abs(math::dot(d, normals[e]))
                } else {
                    let t = tangents[e];
                    math::norm(math::sub(d, math::scale(t, math::dot(d, t))))
                };
                acc += math::powf(pair, p) * math::powf(r2, expo) * smp.weight;
            }
        }
        Ok(acc * samples[i].weight)
    })?;
    let e = params.c_sp() * pairwise_sum(&outer);
    Ok(report(EnergyKind::TangentPoint, e, mesh, scheme, params))
}
