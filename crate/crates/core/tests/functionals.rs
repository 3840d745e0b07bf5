use nlcurv_core::functionals::*;
use nlcurv_core::oracles;
use nlcurv_core::surface::{make_primitive, Primitive};
use nlcurv_core::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn convex_family() -> Vec<DiscreteHypersurface> {
    vec![
        make_primitive(&Primitive::SphereIcosub { radius: 1.0, subdivisions: 2 }).unwrap(),
        make_primitive(&Primitive::Ellipsoid { axes: [1.0, 1.0, 2.0], subdivisions: 2 }).unwrap(),
        make_primitive(&Primitive::SphereIcosub { radius: 1.0, subdivisions: 0 }).unwrap(),
    ]
}

#[test]
fn flat_fixtures_vanish() {
    let prm = EnergyParameters::new(0.5, 4.0).unwrap();
    let disc = make_primitive(&Primitive::FlatDisc { radius: 1.0, rings: 6 }).unwrap();
    let strip = make_primitive(&Primitive::FlatStrip { length: 2.0, segments: 40 }).unwrap();
    for m in [&disc, &strip] {
        for order in [QuadratureOrder::Centroid, QuadratureOrder::Gauss7] {
            let q = QuadratureScheme::build(m, order, DiagonalPolicy::SkipSameElement);
            for v in 0..m.num_vertices() {
                assert_eq!(fractional_mean_curvature(m, &q, v, &prm).unwrap(), 0.0);
                assert_eq!(nonlocal_second_fundamental(m, &q, v, &prm).unwrap(), 0.0);
            }
            let (w, b) = willmore_and_bending(m, &q, &prm, Workers::single()).unwrap();
            assert_eq!((w.energy, b.energy), (0.0, 0.0));
            assert_eq!(tangent_point_energy(m, &q, &prm, Workers::single()).unwrap().energy, 0.0);
        }
    }
}

#[test]
fn convex_meshes_have_a_equal_minus_h() {
    let prm = EnergyParameters::new(0.3, 3.0).unwrap();
    for m in convex_family() {
        for opts in [
            SchemeOptions::default(),
            SchemeOptions { order: QuadratureOrder::Gauss7, diagonal_policy: DiagonalPolicy::SkipSameElement, near_field: NearField::Omit },
        ] {
            let q = opts.build(&m);
            for (h, a) in vertex_curvatures(&m, &q, &prm, Workers::single()).unwrap() {
                assert!(h <= 0.0);
                assert!((a + h).abs() <= 1e-12 * a);
            }
            let (w, b) = willmore_and_bending(&m, &q, &prm, Workers::single()).unwrap();
            assert!(rel(w.energy, b.energy) <= 1e-12);
        }
    }
}

#[test]
fn torus_bending_dominates_willmore() {
    let prm = EnergyParameters::new(0.5, 2.0).unwrap();
    let m = make_primitive(&Primitive::Torus { major: 2.0, minor: 0.5, major_segments: 24, minor_segments: 12 }).unwrap();
    let q = SchemeOptions::default().build(&m);
    let (w, b) = willmore_and_bending(&m, &q, &prm, Workers::new(4)).unwrap();
    assert!(b.energy > w.energy);
    for (h, a) in sample_curvatures(&m, &q, &prm, Workers::new(4)).unwrap() {
        assert!(a >= h.abs() - 1e-12 * a);
    }
}

#[test]
fn energies_scale_exactly() {
    let prm = EnergyParameters::new(0.5, 4.0).unwrap().with_q(6.0);
    let meshes = [
        make_primitive(&Primitive::Circle { radius: 1.0, segments: 128 }).unwrap(),
        make_primitive(&Primitive::PerturbedSphere { radius: 1.0, subdivisions: 1, amplitude: 0.1, seed: 2 }).unwrap(),
    ];
    for m in &meshes {
        let d = m.dim() as f64;
        let opts = SchemeOptions::default();
        let q0 = opts.build(m);
        let (w0, b0) = willmore_and_bending(m, &q0, &prm, Workers::single()).unwrap();
        let t0 = tangent_point_energy(m, &q0, &prm, Workers::single()).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let r = m.rescale(lambda).unwrap();
            let q = opts.build(&r);
            let (w, b) = willmore_and_bending(&r, &q, &prm, Workers::single()).unwrap();
            let t = tangent_point_energy(&r, &q, &prm, Workers::single()).unwrap();
            let e = lambda.powf(d - prm.s * prm.p);
            assert!(rel(w.energy / w0.energy, e) <= 1e-12);
            assert!(rel(b.energy / b0.energy, e) <= 1e-12);
            let et = lambda.powf(2.0 * d + 2.0 * prm.p - prm.q);
            assert!(rel(t.energy / t0.energy, et) <= 1e-12);
        }
    }
}

#[test]
fn circle_matches_closed_form() {
    let prm = EnergyParameters::new(0.5, 4.0).unwrap();
    let m = make_primitive(&Primitive::Circle { radius: 1.0, segments: 4096 }).unwrap();
    let q = QuadratureScheme::build(&m, QuadratureOrder::Centroid, DiagonalPolicy::SkipVertexStar);
    let h = fractional_mean_curvature(&m, &q, 17, &prm).unwrap();
    let want = oracles::circle_fmc(1.0, 0.5).unwrap();
    assert!((want + 3.70815).abs() < 1e-5);
    assert!(rel(h, want) < 1e-3);

    // constant integrand: W = |H|^p * length
    let w = willmore_energy(&m, &q, &prm, Workers::single()).unwrap().energy;
    assert!(rel(w, want.powi(4) * 2.0 * std::f64::consts::PI) < 5e-3);
}

#[test]
fn plane_curve_projection_matches_hypersurface() {
    let prm = EnergyParameters::new(0.5, 4.0).unwrap();
    let plane = make_primitive(&Primitive::Circle { radius: 1.0, segments: 256 }).unwrap();
    let space = make_primitive(&Primitive::SpaceCircle { radius: 1.0, segments: 256 }).unwrap();
    let qp = SchemeOptions::default().build(&plane);
    let qs = SchemeOptions::default().build(&space);
    let proj = prm.with_codim_mode(CodimMode::Projection);
    for v in [0, 31, 200] {
        let a0 = nonlocal_second_fundamental(&plane, &qp, v, &prm).unwrap();
        let a1 = nonlocal_second_fundamental(&space, &qs, v, &proj).unwrap();
        assert!(rel(a1, a0) <= 1e-10, "{a1} vs {a0}");
    }
    let b0 = bending_energy(&plane, &qp, &prm, Workers::single()).unwrap().energy;
    let b1 = bending_energy(&space, &qs, &proj, Workers::single()).unwrap().energy;
    assert!(rel(b1, b0) <= 1e-10);
    assert!(fractional_mean_curvature(&space, &qs, 0, &proj).is_err());
}

#[test]
fn tangent_radius_on_a_circle() {
    let r = 1.7;
    for (a, b) in [(0.1, 2.0), (0.0, 3.0), (1.0, 1.2)] {
        let x = [r * f64::cos(a), r * f64::sin(a), 0.0];
        let y = [r * f64::cos(b), r * f64::sin(b), 0.0];
        let n = [f64::cos(b), f64::sin(b), 0.0];
        assert!(rel(tangent_point_radius(x, y, n).unwrap(), 2.0 * r) < 1e-12);
    }
    assert_eq!(tangent_point_radius([1.0, 0.0, 0.0], [0.0; 3], [0.0, 1.0, 0.0]).unwrap(), f64::INFINITY);
    assert!((tangent_point_radius([0.0, 0.0, 0.3], [0.0; 3], [0.0, 0.0, 1.0]).unwrap() - 0.3).abs() < 1e-15);
    assert!(tangent_point_radius([0.0; 3], [0.0; 3], [0.0, 0.0, 1.0]).is_err());
}

#[test]
fn circle_tangent_point_energy_converges() {
    let prm = EnergyParameters::new(0.5, 2.0).unwrap().with_q(6.0);
    let want = oracles::circle_tangent_point_energy_closed(1.0, 2.0, 6.0).unwrap();
    assert!(rel(want, std::f64::consts::PI.powi(2)) < 1e-12);
    let mut errs = Vec::new();
    for n in [256, 1024] {
        let m = make_primitive(&Primitive::Circle { radius: 1.0, segments: n }).unwrap();
        let q = QuadratureScheme::build(&m, QuadratureOrder::Gauss3, DiagonalPolicy::SkipSameElement);
        errs.push(rel(tangent_point_energy(&m, &q, &prm, Workers::new(4)).unwrap().energy, want));
    }
    assert!(errs[1] < errs[0]);
    assert!(errs[1] < 1e-2, "{errs:?}");
}

#[test]
fn doubling_distances_scales_tangent_terms() {
    let prm = EnergyParameters::new(0.5, 3.0).unwrap().with_q(5.0);
    let m = make_primitive(&Primitive::Torus { major: 2.0, minor: 0.7, major_segments: 12, minor_segments: 8 }).unwrap();
    let q = SchemeOptions::default().build(&m);
    let t = tangent_point_energy(&m, &q, &prm, Workers::single()).unwrap().energy;
    let m2 = m.rescale(2.0).unwrap();
    let q2 = SchemeOptions::default().build(&m2);
    let t2 = tangent_point_energy(&m2, &q2, &prm, Workers::single()).unwrap().energy;
    // the pairing doubles with the distance: each term picks up 2^(p - (q - p)),
    // the two measures 2^(2d)
    let factor = 2f64.powf(prm.p - (prm.q - prm.p)) * 2f64.powf(4.0);
    assert!(rel(t2 / t, factor) < 1e-12);
}

#[test]
fn coincident_samples_are_rejected() {
    let prm = EnergyParameters::new(0.5, 4.0).unwrap();
    let mut v: Vec<[f64; 3]> = make_primitive(&Primitive::Circle { radius: 1.0, segments: 16 }).unwrap().vertices().to_vec();
    // move vertex 8 onto the centroid of segment 0
    v[8] = [0.5 * (v[0][0] + v[1][0]), 0.5 * (v[0][1] + v[1][1]), 0.0];
    let segs: Vec<[usize; 2]> = (0..16).map(|i| [i, (i + 1) % 16]).collect();
    let m = DiscreteHypersurface::from_segments(Embedding::PlaneCurve, v, segs).unwrap();
    let q = QuadratureScheme::build(&m, QuadratureOrder::Centroid, DiagonalPolicy::SkipSameElement);
    assert!(matches!(fractional_mean_curvature(&m, &q, 8, &prm), Err(Error::DegenerateGeometry(_))));
}

proptest::proptest! {
    #[test]
    fn scaling_holds_for_any_factor(lambda in 0.05f64..20.0, s in 0.1f64..0.9) {
        let prm = EnergyParameters::new(s, 3.0).unwrap();
        let m = make_primitive(&Primitive::Circle { radius: 1.0, segments: 40 }).unwrap();
        let r = m.rescale(lambda).unwrap();
        let opts = SchemeOptions::default();
        let b0 = bending_energy(&m, &opts.build(&m), &prm, Workers::single()).unwrap().energy;
        let b = bending_energy(&r, &opts.build(&r), &prm, Workers::single()).unwrap().energy;
        proptest::prop_assert!(rel(b / b0, lambda.powf(1.0 - s * 3.0)) <= 1e-12);
    }
}
