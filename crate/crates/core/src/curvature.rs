//! Local second-order surface model and the near-field replacement term.
//!
//! Around an evaluation point `x` the surface is approximated by its
//! osculating quadric, for which `<x - y, n(y)> ~ -q(y - x) / 2` with `q` the
//! second fundamental form extended to ambient vectors. The inner integral over
//! the excluded elements is replaced by the integral of
//! `-q(v) / 2 / |v|^(d+1+s)` over the same elements. The integrand behaves like
//! `r^(1-d-s)`, so in polar coordinates around `x` the radial integral is
//! `R^(1-s) / (1-s)` in closed form and only the angular direction needs
//! quadrature.
//!
//! Per-vertex forms come from a least-squares quadric fit of the one-ring
//! heights over the tangent plane (curves use the three-point circle). The fit
//! vanishes identically on flat pieces and is exact for circles.

use alloc::vec::Vec;

use crate::math::{self, Sym3, Vec3, ZERO3};
use crate::quadrature::{EvalPoint, QuadratureScheme};
use crate::surface::{DiscreteHypersurface, Embedding};

// Gauss-Legendre rules on [-1, 1]: 16 nodes in angle, 8 along segments.
const GL16_X: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.755404408355003,
    -0.6178762444026438,
    -0.45801677765722737,
    -0.2816035507792589,
    -0.09501250983763745,
    0.09501250983763745,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 16] = [
    0.027152459411754037,
    0.062253523938647706,
    0.09515851168249259,
    0.12462897125553403,
    0.14959598881657676,
    0.16915651939500262,
    0.1826034150449236,
    0.18945061045506859,
    0.18945061045506859,
    0.1826034150449236,
    0.16915651939500262,
    0.14959598881657676,
    0.12462897125553403,
    0.09515851168249259,
    0.062253523938647706,
    0.027152459411754037,
];
const GL8_X: [f64; 8] = [
    -0.9602898564975362,
    -0.7966664774136267,
    -0.525532409916329,
    -0.18343464249564978,
    0.18343464249564978,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975362,
];
const GL8_W: [f64; 8] = [
    0.10122853629037669,
    0.22238103445337434,
    0.31370664587788705,
    0.36268378337836177,
    0.36268378337836177,
    0.31370664587788705,
    0.22238103445337434,
    0.10122853629037669,
];

/// Second fundamental form of every vertex as an ambient symmetric matrix.
pub fn vertex_shape_operators(mesh: &DiscreteHypersurface) -> Vec<Sym3> {
    (0..mesh.num_vertices())
        .map(|v| vertex_shape_operator(mesh, v))
        .collect()
}

fn vertex_shape_operator(mesh: &DiscreteHypersurface, v: usize) -> Sym3 {
    let x = mesh.vertex(v);
    let ring = mesh.vertex_ring(v);
    match mesh.embedding() {
        Embedding::SpaceCurve => {
            if ring.len() != 2 {
                return ZERO3;
            }
            let (p, n) = (mesh.vertex(ring[0]), mesh.vertex(ring[1]));
            let a = math::sub(x, p);
            let b = math::sub(n, x);
            let c = math::sub(n, p);
            let denom = math::norm(a) * math::norm(b) * math::norm(c);
            let kappa = 2.0 * math::norm(math::cross(a, b)) / denom;
            let t = math::normalize(c).unwrap_or([1.0, 0.0, 0.0]);
            let mut s = math::outer_sym(t, t);
            s.iter_mut().flatten().for_each(|e| *e *= kappa);
            s
        }
        Embedding::PlaneCurve => {
            let nrm = mesh.vertex_normals()[v];
            let t = [-nrm[1], nrm[0], 0.0];
            let ks: Vec<f64> = ring.iter().map(|&j| normal_curvature(x, mesh.vertex(j), nrm)).collect();
            if ks.is_empty() {
                return ZERO3;
            }
            let kappa = ks.iter().sum::<f64>() / ks.len() as f64;
            let mut s = math::outer_sym(t, t);
            s.iter_mut().flatten().for_each(|e| *e *= kappa);
            s
        }
        Embedding::Surface => {
            let nrm = mesh.vertex_normals()[v];
            let e1 = math::any_orthogonal(nrm);
            let e2 = math::cross(nrm, e1);
            // Height over the tangent plane, h = -|d|^2 k(dir) / 2 + g1 u + g2 w with
            // k(dir) = a u'^2 + 2 b u' w' + c w'^2 in unit tangent directions. This is
            // exact on round spheres; the linear part absorbs a tilted vertex normal.
            let mut ata = [[0.0; 5]; 5];
            let mut atb = [0.0; 5];
            let mut mean = 0.0;
            for &j in ring {
                let d = math::sub(mesh.vertex(j), x);
                let (u, w, h) = (math::dot(d, e1), math::dot(d, e2), math::dot(d, nrm));
                let r2 = u * u + w * w;
                if r2 == 0.0 {
                    continue;
                }
                let d2 = math::norm2(d);
                let (du, dw) = (u / math::sqrt(r2), w / math::sqrt(r2));
                // Rows scaled by 1/|d|^2 so every neighbour counts equally.
                let row = [-0.5 * du * du, -du * dw, -0.5 * dw * dw, u / d2, w / d2];
                let rhs = h / d2;
                for i in 0..5 {
                    for l in 0..5 {
                        ata[i][l] += row[i] * row[l];
                    }
                    atb[i] += row[i] * rhs;
                }
                mean += normal_curvature(x, mesh.vertex(j), nrm);
            }
            let (a, b, c) = match math::solve_dense(ata, atb) {
                Some([a, b, c, _, _]) => (a, b, c),
                None => {
                    let k = if ring.is_empty() { 0.0 } else { mean / ring.len() as f64 };
                    (k, 0.0, k)
                }
            };
            let mut s = ZERO3;
            math::sym_axpy(&mut s, a, &math::outer_sym(e1, e1));
            math::sym_axpy(&mut s, 2.0 * b, &math::outer_sym(e1, e2));
            math::sym_axpy(&mut s, c, &math::outer_sym(e2, e2));
            s
        }
    }
}

fn normal_curvature(x: Vec3, y: Vec3, n: Vec3) -> f64 {
    let d = math::sub(y, x);
    -2.0 * math::dot(d, n) / math::norm2(d)
}

/// Shape operator at an evaluation point: the vertex value, or the
/// barycentric blend of the element's vertex values.
pub fn shape_at(
    mesh: &DiscreteHypersurface,
    scheme: &QuadratureScheme,
    ops: &[Sym3],
    at: EvalPoint,
) -> Sym3 {
    match at {
        EvalPoint::Vertex(v) => ops[v],
        EvalPoint::Sample(i) => {
            let s = &scheme.samples()[i];
            let mut acc = ZERO3;
            for (k, &v) in mesh.element(s.element).iter().enumerate() {
                math::sym_axpy(&mut acc, s.bary[k], &ops[v]);
            }
            acc
        }
    }
}

/// Model-kernel integral over the excluded elements, as `(signed, absolute)`
/// sums without the `c_s` prefactor.
pub fn near_field(
    mesh: &DiscreteHypersurface,
    x: Vec3,
    shape: &Sym3,
    home: &[usize],
    excluded: &[usize],
    s: f64,
) -> (f64, f64) {
    let d = mesh.dim();
    let radial = 1.0 - s;
    let mut signed = 0.0;
    let mut absolute = 0.0;
    for &e in excluded {
        let el = mesh.element(e);
        if home.binary_search(&e).is_ok() {
            if d == 1 {
                for &a in el {
                    let u = math::sub(mesh.vertex(a), x);
                    let len = math::norm(u);
                    if len <= 0.0 {
                        continue;
                    }
                    let q = math::quad_form(shape, math::scale(u, 1.0 / len));
                    let r = math::powf(len, radial) / radial;
                    signed += -0.5 * q * r;
                    absolute += 0.5 * math::abs(q) * r;
                }
            } else {
                for k in 0..3 {
                    let a = mesh.vertex(el[k]);
                    let b = mesh.vertex(el[(k + 1) % 3]);
                    let (sg, ab) = polar_subtriangle(x, a, b, shape, radial, &GL16_X, &GL16_W);
                    signed += sg;
                    absolute += ab;
                }
            }
        } else {
            let (sg, ab) = element_quadrature(mesh, e, x, shape, d, s);
            signed += sg;
            absolute += ab;
        }
    }
    (signed, absolute)
}

fn polar_subtriangle(
    x: Vec3,
    a: Vec3,
    b: Vec3,
    shape: &Sym3,
    radial: f64,
    gl_x: &[f64],
    gl_w: &[f64],
) -> (f64, f64) {
    let u = math::sub(a, x);
    let w = math::sub(b, x);
    let (lu, lw) = (math::norm(u), math::norm(w));
    if lu <= 0.0 || lw <= 0.0 {
        return (0.0, 0.0);
    }
    let area2 = math::norm(math::cross(u, w));
    if area2 <= 1e-14 * lu * lw {
        return (0.0, 0.0);
    }
    let uh = math::scale(u, 1.0 / lu);
    let Some(ph) = math::normalize(math::sub(w, math::scale(uh, math::dot(w, uh)))) else {
        return (0.0, 0.0);
    };
    let alpha = math::atan2(math::dot(w, ph), math::dot(w, uh));
    let edge = math::sub(b, a);
    let eh = math::scale(edge, 1.0 / math::norm(edge));
    let foot = math::sub(u, math::scale(eh, math::dot(u, eh)));
    let hperp = math::norm(foot);
    let nu = math::scale(foot, 1.0 / hperp);
    let mut signed = 0.0;
    let mut absolute = 0.0;
    for (&t, &wt) in gl_x.iter().zip(gl_w) {
        let psi = 0.5 * alpha * (t + 1.0);
        let dir = math::add(math::scale(uh, math::cos(psi)), math::scale(ph, math::sin(psi)));
        let reach = hperp / math::dot(dir, nu);
        let q = math::quad_form(shape, dir);
        let r = math::powf(reach, radial) / radial * 0.5 * alpha * wt;
        signed += -0.5 * q * r;
        absolute += 0.5 * math::abs(q) * r;
    }
    (signed, absolute)
}

fn element_quadrature(
    mesh: &DiscreteHypersurface,
    e: usize,
    x: Vec3,
    shape: &Sym3,
    d: usize,
    s: f64,
) -> (f64, f64) {
    let expo = -0.5 * (d as f64 + 1.0 + s);
    let el = mesh.element(e);
    let mut signed = 0.0;
    let mut absolute = 0.0;
    let mut eval = |y: Vec3, w: f64| {
        let v = math::sub(y, x);
        let r2 = math::norm2(v);
        if r2 <= 0.0 {
            return;
        }
        let k = w * math::powf(r2, expo);
        let q = math::quad_form(shape, v);
        signed += -0.5 * q * k;
        absolute += 0.5 * math::abs(q) * k;
    };
    if d == 1 {
        let (a, b) = (mesh.vertex(el[0]), mesh.vertex(el[1]));
        let len = mesh.element_measures()[e];
        for (&t, &w) in GL8_X.iter().zip(&GL8_W) {
            let t = 0.5 * (t + 1.0);
            let y = math::add(math::scale(a, 1.0 - t), math::scale(b, t));
            eval(y, 0.5 * w * len);
        }
    } else {
        // Split into four congruent triangles, 7-point rule on each.
        let p = [mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2])];
        let mid = |i: usize, j: usize| math::scale(math::add(p[i], p[j]), 0.5);
        let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
        let subs = [
            [p[0], m01, m20],
            [m01, p[1], m12],
            [m20, m12, p[2]],
            [m01, m12, m20],
        ];
        let quarter = 0.25 * mesh.element_measures()[e];
        for tri in &subs {
            for &(bary, w) in GAUSS7_RULE.iter() {
                let mut y = [0.0; 3];
                for k in 0..3 {
                    y = math::add(y, math::scale(tri[k], bary[k]));
                }
                eval(y, w * quarter);
            }
        }
    }
    (signed, absolute)
}

const GAUSS7_RULE: [([f64; 3], f64); 7] = {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_match_generated_rules() {
        for (n, tx, tw) in [(16, &GL16_X[..], &GL16_W[..]), (8, &GL8_X[..], &GL8_W[..])] {
            let (x, w) = math::gauss_legendre(n);
            for i in 0..n {
                assert!((x[i] - tx[i]).abs() < 1e-14 && (w[i] - tw[i]).abs() < 1e-14);
            }
        }
    }
    use crate::surface::{make_primitive, Primitive};

    #[test]
    fn sphere_shape_operator_is_isotropic_inverse_radius() {
        let r = 2.5;
        let m = make_primitive(&Primitive::SphereIcosub {
            radius: r,
            subdivisions: 3,
        })
        .unwrap();
        let ops = vertex_shape_operators(&m);
        for (v, op) in ops.iter().enumerate() {
            let n = m.vertex_normals()[v];
            let t1 = math::any_orthogonal(n);
            let t2 = math::cross(n, t1);
            for t in [t1, t2, math::normalize(math::add(t1, t2)).unwrap()] {
                let k = math::quad_form(op, t);
                assert!((k - 1.0 / r).abs() < 1e-3 / r, "k = {k}");
            }
        }
    }

    #[test]
    fn circle_curvature_is_exact() {
        let m = make_primitive(&Primitive::Circle {
            radius: 3.0,
            segments: 64,
        })
        .unwrap();
        let ops = vertex_shape_operators(&m);
        let t = [0.0, 1.0, 0.0]; // tangent at vertex 0 = (3, 0)
        assert!((math::quad_form(&ops[0], t) - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn flat_pieces_have_zero_form() {
        let m = make_primitive(&Primitive::FlatDisc {
            radius: 1.0,
            rings: 4,
        })
        .unwrap();
        for op in vertex_shape_operators(&m) {
            assert_eq!(op, ZERO3);
        }
    }

    #[test]
    fn polar_subtriangle_matches_brute_force() {
        // Isotropic q = |v|^2 gives integrand -|v|^(-1-s)/2 over the triangle.
        let x = [0.0, 0.0, 0.0];
        let (a, b) = ([1.0, 0.0, 0.0], [0.3, 0.8, 0.0]);
        let mut shape = ZERO3;
        for i in 0..3 {
            shape[i][i] = 1.0;
        }
        let s = 0.4;
        let (gx, gw) = math::gauss_legendre(16);
        let (got, abs_got) = polar_subtriangle(x, a, b, &shape, 1.0 - s, &gx, &gw);
        assert_eq!(got, -abs_got);
        // Duffy map y = u((1-t)a + tb): the radial factor integrates to
        // 1/(1-s), leaving a smooth 1-D integral in t (composite Simpson).
        let area2 = math::norm(math::cross(a, b));
        let n = 2000;
        let f = |t: f64| {
            let y = math::add(math::scale(a, 1.0 - t), math::scale(b, t));
            math::powf(math::norm(y), -1.0 - s)
        };
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let brute = -0.5 * area2 / (1.0 - s) * acc * h / 3.0;
        assert!((got - brute).abs() < 1e-10 * brute.abs(), "{got} vs {brute}");
    }
}
