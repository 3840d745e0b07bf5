//! Deterministic test shapes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DiscreteHypersurface, Embedding};
use crate::error::{invalid, Result};
use crate::math::{self, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    /// Regular N-gon inscribed in the circle of the given radius.
    Circle { radius: f64, segments: usize },
    /// The same polygon as a curve in 3-space (codimension two).
    SpaceCircle { radius: f64, segments: usize },
    /// Subdivided icosahedron with vertices projected to the sphere.
    SphereIcosub { radius: f64, subdivisions: usize },
    Ellipsoid { axes: [f64; 3], subdivisions: usize },
    Torus {
        major: f64,
        minor: f64,
        major_segments: usize,
        minor_segments: usize,
    },
    /// Icosphere displaced radially by `amplitude * noise(seed)`, where the
    /// noise is a seeded combination of degree 2 and 3 spherical harmonics.
    PerturbedSphere {
        radius: f64,
        subdivisions: usize,
        amplitude: f64,
        seed: u64,
    },
    /// Union of two unit spheres overlapping so that they meet along a waist
    /// circle of radius `neck_radius`.
    Dumbbell {
        neck_radius: f64,
        rings: usize,
        segments: usize,
    },
    /// Open triangulated disc in the plane `z = 0` (test fixture with boundary).
    FlatDisc { radius: f64, rings: usize },
    /// Open straight polyline along the x axis (test fixture with boundary).
    FlatStrip { length: f64, segments: usize },
}

pub fn make_primitive(kind: &Primitive) -> Result<DiscreteHypersurface> {
    match *kind {
        Primitive::Circle { radius, segments } => {
            check_radius(radius)?;
            let (v, s) = polygon(radius, segments)?;
            DiscreteHypersurface::from_segments(Embedding::PlaneCurve, v, s)
        }
        Primitive::SpaceCircle { radius, segments } => {
            check_radius(radius)?;
            let (v, s) = polygon(radius, segments)?;
            DiscreteHypersurface::from_segments(Embedding::SpaceCurve, v, s)
        }
        Primitive::SphereIcosub {
            radius,
            subdivisions,
        } => {
            check_radius(radius)?;
            let (dirs, tris) = icosphere(subdivisions)?;
            let v = dirs.into_iter().map(|d| math::scale(d, radius)).collect();
            DiscreteHypersurface::from_triangles(v, tris)
        }
        Primitive::Ellipsoid { axes, subdivisions } => {
            for &a in &axes {
                check_radius(a)?;
            }
            let (dirs, tris) = icosphere(subdivisions)?;
            let v = dirs
                .into_iter()
                .map(|d| [d[0] * axes[0], d[1] * axes[1], d[2] * axes[2]])
                .collect();
            DiscreteHypersurface::from_triangles(v, tris)
        }
        Primitive::Torus {
            major,
            minor,
            major_segments,
            minor_segments,
        } => torus(major, minor, major_segments, minor_segments),
        Primitive::PerturbedSphere {
            radius,
            subdivisions,
            amplitude,
            seed,
        } => {
            check_radius(radius)?;
            if !(amplitude >= 0.0 && amplitude < 0.5) {
                return Err(invalid("perturbation amplitude must lie in [0, 0.5)"));
            }
            let (dirs, tris) = icosphere(subdivisions)?;
            let coeffs = harmonic_coefficients(seed);
            let v = dirs
                .into_iter()
                .map(|d| {
                    let r = radius * (1.0 + amplitude * harmonic_noise(&coeffs, d));
                    math::scale(d, r)
                })
                .collect();
            DiscreteHypersurface::from_triangles(v, tris)
        }
        Primitive::Dumbbell {
            neck_radius,
            rings,
            segments,
        } => dumbbell(neck_radius, rings, segments),
        Primitive::FlatDisc { radius, rings } => flat_disc(radius, rings),
        Primitive::FlatStrip { length, segments } => {
            check_radius(length)?;
            if segments < 1 {
                return Err(invalid("strip needs at least one segment"));
            }
            let v = (0..=segments)
                .map(|i| [length * (i as f64 / segments as f64 - 0.5), 0.0, 0.0])
                .collect();
            let s = (0..segments).map(|i| [i, i + 1]).collect();
            DiscreteHypersurface::open_segments(Embedding::PlaneCurve, v, s)
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(alloc::format!("radius {r} must be positive")))
    }
}

fn polygon(radius: f64, n: usize) -> Result<(Vec<Vec3>, Vec<[usize; 2]>)> {
    if n < 8 {
        return Err(invalid("circle needs at least 8 segments"));
    }
    let v = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [radius * math::cos(t), radius * math::sin(t), 0.0]
        })
        .collect();
    let s = (0..n).map(|k| [k, (k + 1) % n]).collect();
    Ok((v, s))
}

/// Unit icosphere: vertex directions and outward triangles.
pub(crate) fn icosphere(subdivisions: usize) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    if subdivisions > 7 {
        return Err(invalid("icosphere subdivision level above 7 is not supported"));
    }
    let t = (1.0 + math::sqrt(5.0)) / 2.0;
    let raw = [
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
    ];
    let mut verts: Vec<Vec3> = raw.iter().map(|&p| math::normalize(p).unwrap()).collect();
    let mut tris: Vec<[usize; 3]> = alloc::vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = math::add(verts[a], verts[b]);
                verts.push(math::normalize(m).unwrap());
                verts.len() - 1
            })
        };
        for &[a, b, c] in &tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    Ok((verts, tris))
}

fn harmonic_coefficients(seed: u64) -> [f64; 12] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = [0.0; 12];
    for ci in c.iter_mut() {
        *ci = rng.random_range(-1.0..1.0);
    }
    let n = math::sqrt(c.iter().map(|x| x * x).sum());
    for ci in c.iter_mut() {
        *ci /= n;
    }
    c
}

/// Degree 2 and 3 real harmonic polynomials evaluated on the unit sphere.
fn harmonic_noise(c: &[f64; 12], u: Vec3) -> f64 {
    let [x, y, z] = u;
    let basis = [
        x * y,
        y * z,
        x * z,
        x * x - y * y,
        3.0 * z * z - 1.0,
        y * (3.0 * x * x - y * y),
        x * y * z,
        y * (5.0 * z * z - 1.0),
        z * (5.0 * z * z - 3.0),
        x * (5.0 * z * z - 1.0),
        z * (x * x - y * y),
        x * (x * x - 3.0 * y * y),
    ];
    c.iter().zip(basis).map(|(a, b)| a * b).sum()
}

fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<DiscreteHypersurface> {
    check_radius(major)?;
    check_radius(minor)?;
    if minor >= major {
        return Err(invalid("torus minor radius must be below the major radius"));
    }
    if nu < 3 || nv < 3 {
        return Err(invalid("torus needs at least 3 segments in each direction"));
    }
    let mut v = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let w = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * math::cos(w);
            v.push([r * math::cos(u), r * math::sin(u), minor * math::sin(w)]);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut t = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            t.push([a, b, c]);
            t.push([a, c, d]);
        }
    }
    DiscreteHypersurface::from_triangles(v, t)
}

fn dumbbell(neck: f64, rings: usize, segments: usize) -> Result<DiscreteHypersurface> {
    if !(neck > 0.0 && neck < 1.0) {
        return Err(invalid("dumbbell neck radius must lie in (0, 1)"));
    }
    if rings < 3 || segments < 6 {
        return Err(invalid("dumbbell needs at least 3 rings and 6 segments"));
    }
    let c = math::sqrt(1.0 - neck * neck);
    let phi_waist = PI - libm::acos(c);
    let mut v: Vec<Vec3> = Vec::new();
    v.push([0.0, 0.0, c + 1.0]);
    // Upper lobe rings k = 1..=rings (the last one is the waist), then the
    // lower lobe mirrored, then the south pole.
    let mut ring_start = Vec::new();
    let ring = |phi: f64, sign: f64, v: &mut Vec<Vec3>| {
        let (r, z) = (math::sin(phi), sign * (c + math::cos(phi)));
        for j in 0..segments {
            let th = 2.0 * PI * j as f64 / segments as f64;
            v.push([r * math::cos(th), r * math::sin(th), z]);
        }
    };
    for k in 1..=rings {
        ring_start.push(v.len());
        let phi = if k == rings {
            phi_waist
        } else {
            phi_waist * k as f64 / rings as f64
        };
        ring(phi, 1.0, &mut v);
    }
    for k in (1..rings).rev() {
        ring_start.push(v.len());
        ring(phi_waist * k as f64 / rings as f64, -1.0, &mut v);
    }
    let south = v.len();
    v.push([0.0, 0.0, -(c + 1.0)]);
    // Waist ring is exactly at z = 0 by construction.
    let w = ring_start[rings - 1];
    for j in 0..segments {
        v[w + j][2] = 0.0;
    }

    let mut t = Vec::new();
    let n = segments;
    let first = ring_start[0];
    for j in 0..n {
        t.push([0, first + j, first + (j + 1) % n]);
    }
    for r in 0..ring_start.len() - 1 {
        let (a0, b0) = (ring_start[r], ring_start[r + 1]);
        for j in 0..n {
            let j1 = (j + 1) % n;
            t.push([a0 + j, b0 + j, b0 + j1]);
            t.push([a0 + j, b0 + j1, a0 + j1]);
        }
    }
    let last = *ring_start.last().unwrap();
    for j in 0..n {
        t.push([south, last + (j + 1) % n, last + j]);
    }
    DiscreteHypersurface::from_triangles(v, t)
}

fn flat_disc(radius: f64, rings: usize) -> Result<DiscreteHypersurface> {
    check_radius(radius)?;
    if rings < 1 {
        return Err(invalid("disc needs at least one ring"));
    }
    let mut v: Vec<Vec3> = alloc::vec![[0.0, 0.0, 0.0]];
    let mut starts = alloc::vec![0usize];
    let mut counts = alloc::vec![1usize];
    for k in 1..=rings {
        let n = 6 * k;
        starts.push(v.len());
        counts.push(n);
        let r = radius * k as f64 / rings as f64;
        for j in 0..n {
            let a = 2.0 * PI * j as f64 / n as f64;
            v.push([r * math::cos(a), r * math::sin(a), 0.0]);
        }
    }
    let mut t = Vec::new();
    for k in 1..=rings {
        let (ni, no) = (counts[k - 1], counts[k]);
        let (si, so) = (starts[k - 1], starts[k]);
        if ni == 1 {
            for j in 0..no {
                t.push([si, so + j, so + (j + 1) % no]);
            }
            continue;
        }
        let (mut i, mut j) = (0usize, 0usize);
        while i < ni || j < no {
            let next_in = (i + 1) as f64 / ni as f64;
            let next_out = (j + 1) as f64 / no as f64;
            if i < ni && (j == no || next_in < next_out) {
                t.push([si + i % ni, so + j % no, si + (i + 1) % ni]);
                i += 1;
            } else {
                t.push([si + i % ni, so + j % no, so + (j + 1) % no]);
                j += 1;
            }
        }
    }
    DiscreteHypersurface::open_triangles(v, t)
}
