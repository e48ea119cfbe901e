use std::sync::Arc;

use higgs_geom::connection::{
    assemble_connection, develop, real_structure, ConnectionField, DevelopingMapSample,
};
use higgs_geom::domain::{make_chart, ChartKind, ComplexField, DomainChart};
use higgs_geom::higgs::{
    build_cyclic, build_sl2r, symmetric_power, tensor_product, HiggsBundleSpec, PairingData,
};
use higgs_geom::scalar::cplx;
use higgs_geom::solver::{solve_hitchin, BoundaryProfile, HarmonicMetric, SolverConfig};
use higgs_geom::transversality::{
    ads_containment, ads_volume, build_section, check_construction, domination,
    hyperbolic_cross_check, pairing_constraint, transversality_margin, Construction,
    ConstructionKind, Directions, ProjectiveField, SectionFrameField,
};
use higgs_geom::Error;

fn torus(n: usize) -> Arc<DomainChart<f64>> {
    make_chart(
        ChartKind::Torus {
            modulus: cplx(0.0, 1.0),
        },
        (n, n),
    )
    .unwrap()
}

fn disc(n1: usize, n2: usize) -> Arc<DomainChart<f64>> {
    make_chart(ChartKind::Disc { radius: 0.9 }, (n1, n2)).unwrap()
}

fn konst(c: &Arc<DomainChart<f64>>, re: f64, im: f64) -> ComplexField<f64> {
    ComplexField::constant(c, cplx(re, im), 2)
}

fn poincare() -> BoundaryProfile {
    BoundaryProfile::Poincare {
        scale: 1.0,
        power: 1.0,
    }
}

fn fuchsian(c: &Arc<DomainChart<f64>>) -> (HiggsBundleSpec<f64>, HarmonicMetric<f64>) {
    let spec = build_sl2r(konst(c, 0.0, 0.0), konst(c, 1.0, 0.0), 1, 2).unwrap();
    let m = solve_hitchin(&spec, c, &SolverConfig::dirichlet(vec![poincare()])).unwrap();
    (spec, m)
}

#[test]
fn hyperbolic_margin_is_one_without_quadratic_differential() {
    let d = disc(16, 32);
    let (spec, m) = fuchsian(&d);
    let mf = check_construction(&spec, &m, &Construction::Hyperbolic, 1).unwrap();
    assert!(mf.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(mf.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn hyperbolic_zero_set_matches_closed_form() {
    // |q| / h^2 crosses 1 inside the disc
    let d = disc(32, 64);
    let q = ComplexField::from_fn(&d, 4, |z| z * z * 2.5);
    let spec = build_sl2r(q, konst(&d, 1.0, 0.0), 1, 2).unwrap();
    let m = solve_hitchin(
        &spec,
        &d,
        &SolverConfig::dirichlet(vec![BoundaryProfile::Constant(1.2)]),
    )
    .unwrap();
    let mf = check_construction(&spec, &m, &Construction::Hyperbolic, 1).unwrap();
    let cc = hyperbolic_cross_check(&spec, &m, &mf).unwrap();
    assert_eq!(cc.zero_set_disagreements, 0);
    assert!(cc.max_deviation < 1e-10, "{}", cc.max_deviation);
    assert!(mf.min < 1e-2 && mf.node_min.iter().any(|v| *v > 0.5));

    // torus constant case: |q| / h^2 = 1 everywhere
    let c = torus(16);
    let spec = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let m = solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap();
    let mf = check_construction(&spec, &m, &Construction::Hyperbolic, 1).unwrap();
    assert!(mf.node_min.iter().all(|v| *v < 1e-6), "{}", mf.min);
    assert_eq!(
        hyperbolic_cross_check(&spec, &m, &mf)
            .unwrap()
            .zero_set_disagreements,
        0
    );
}

#[test]
fn almost_fuchsian_margin_depends_on_beta_modulus() {
    let d = disc(16, 32);
    let (spec, m) = fuchsian(&d);
    let af = |b: (f64, f64)| {
        check_construction(
            &spec,
            &m,
            &Construction::AlmostFuchsian(konst(&d, b.0, b.1).with_weight(0)),
            1,
        )
        .unwrap()
    };
    let half = af((0.5, 0.0));
    // |beta| = 1/2: sqrt(1 - sqrt(1 - rho^2)) with rho = 3/5
    assert!(half
        .values
        .iter()
        .all(|v| (v - 0.2f64.sqrt()).abs() < 1e-12));
    let rotated = af((0.5 * 0.7f64.cos(), 0.5 * 0.7f64.sin()));
    let diff = half
        .values
        .iter()
        .zip(&rotated.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8);
    assert!(af((0.0, 1.0)).min < 1e-8);
    assert!(af((0.6, 0.8)).values.iter().all(|v| *v < 1e-8));
}

#[test]
fn parallel_section_is_not_transverse() {
    let c = torus(8);
    let conn = ConnectionField::zero(&c, 2);
    let s = SectionFrameField::from_vectors(
        &c,
        vec![vec![cplx(1.0, 0.0), cplx(0.3, 0.0)]; c.len()],
        ProjectiveField::Complex,
    );
    let mf = transversality_margin(&conn, &s, Directions::SurfaceZZbar).unwrap();
    assert_eq!(mf.min, 0.0);
    assert!(matches!(
        transversality_margin(&conn, &s, Directions::SurfacePlusFiber),
        Err(Error::FrameDegenerate(_))
    ));
}

#[test]
fn margin_ignores_rescaling_of_the_section() {
    let d = disc(16, 32);
    let (spec, m) = fuchsian(&d);
    let conn = assemble_connection(&spec, &m).unwrap();
    let s = build_section(&spec, &m, ConstructionKind::Hyperbolic, 1).unwrap();
    let f = ComplexField::from_fn(&d, 0, |z| (z * cplx(0.5, 0.2)).exp() * 3.0 + z.conj() * 0.4);
    let a = transversality_margin(&conn, &s, Directions::SurfaceZZbar).unwrap();
    let b = transversality_margin(&conn, &s.rescaled(&f), Directions::SurfaceZZbar).unwrap();
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn constant_torus_margins_are_translation_invariant() {
    let c = torus(8);
    let s = build_cyclic(4, vec![konst(&c, 0.0, 0.0), konst(&c, 0.3, 0.1)]).unwrap();
    let cfg = SolverConfig {
        initial_guess: higgs_geom::solver::InitialGuess::Zero,
        ..SolverConfig::default()
    };
    let m = solve_hitchin(&s, &c, &cfg).unwrap();
    for con in [Construction::Rp3M, Construction::Rp3Mprime] {
        let mf = check_construction(&s, &m, &con, 16).unwrap();
        for k in 0..mf.samples {
            let row: Vec<f64> = (0..c.len()).map(|n| mf.value(k, n)).collect();
            let spread = row.iter().cloned().fold(f64::MIN, f64::max)
                - row.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-8, "{spread}");
        }
    }
}

#[test]
fn real_constructions_sample_the_real_locus() {
    let d = disc(12, 24);
    let z = konst(&d, 0.0, 0.0);
    let check = |spec: &HiggsBundleSpec<f64>, m: &HarmonicMetric<f64>, kind: ConstructionKind| {
        let s = build_section(spec, m, kind, 8).unwrap();
        assert!(s.constraint_residual < 1e-10);
        let tau = real_structure(spec, m).unwrap();
        for k in 0..s.samples.len() {
            for node in [0, 37, d.len() - 1] {
                let v = s.vector(node, k);
                let tv = tau.apply(node, &v);
                let dev = v
                    .iter()
                    .zip(&tv)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-12, "{kind:?} {dev}");
            }
        }
    };
    let s3 = build_cyclic(3, vec![z.clone().with_weight(6)]).unwrap();
    let m3 = solve_hitchin(
        &s3,
        &d,
        &SolverConfig::dirichlet(vec![BoundaryProfile::Poincare {
            scale: 2.0,
            power: 2.0,
        }]),
    )
    .unwrap();
    check(&s3, &m3, ConstructionKind::ConvexRp2);
    let s4 = build_cyclic(4, vec![z.clone().with_weight(6), z.with_weight(8)]).unwrap();
    let cfg = SolverConfig::dirichlet(vec![
        BoundaryProfile::Poincare {
            scale: 6.0,
            power: 3.0,
        },
        BoundaryProfile::Poincare {
            scale: 2.0,
            power: 1.0,
        },
    ]);
    let m4 = solve_hitchin(&s4, &d, &cfg).unwrap();
    check(&s4, &m4, ConstructionKind::Rp3M);
    check(&s4, &m4, ConstructionKind::Rp3Mprime);
    let (f, _) = fuchsian(&d);
    let s5 = symmetric_power(&f, 5).unwrap();
    let m5 = solve_hitchin(&s5, &d, &SolverConfig::dirichlet(vec![poincare()])).unwrap();
    check(&s5, &m5, ConstructionKind::ProjectiveUr);
    let uc = build_section(&s5, &m5, ConstructionKind::ProjectiveUc, 8).unwrap();
    assert!(uc
        .samples
        .iter()
        .all(|s| pairing_constraint(&s.t).norm() < 1e-10));
    assert!(uc.constraint_residual < 1e-10);
    let t = tensor_product(&f, &f).unwrap();
    let mt = solve_hitchin(
        &t,
        &d,
        &SolverConfig::dirichlet(vec![poincare(), poincare()]),
    )
    .unwrap();
    check(&t, &mt, ConstructionKind::AdsM);
}

#[test]
fn incompatible_constructions_are_rejected() {
    let d = disc(8, 16);
    let (spec, m) = fuchsian(&d);
    for kind in [
        ConstructionKind::ConvexRp2,
        ConstructionKind::AdsM,
        ConstructionKind::ProjectiveUc,
    ] {
        assert!(matches!(
            build_section(&spec, &m, kind, 8),
            Err(Error::IncompatibleConstruction { .. })
        ));
    }
    let s3 = symmetric_power(&spec, 3).unwrap();
    let m3 = solve_hitchin(&s3, &d, &SolverConfig::dirichlet(vec![poincare()])).unwrap();
    assert!(build_section(&s3, &m3, ConstructionKind::ProjectiveUc, 8).is_ok());
    assert!(matches!(
        build_section(&s3, &m3, ConstructionKind::ProjectiveUr, 8),
        Err(Error::IncompatibleConstruction { .. })
    ));
}

#[test]
fn circle_bundle_constructions_are_transverse_on_fuchsian_data() {
    let d = disc(12, 24);
    let (f, _) = fuchsian(&d);
    let s3 = symmetric_power(&f, 3).unwrap();
    let m3 = solve_hitchin(&s3, &d, &SolverConfig::dirichlet(vec![poincare()])).unwrap();
    let mf = check_construction(&s3, &m3, &Construction::ProjectiveUc, 16).unwrap();
    assert!(mf.min > 0.05, "{}", mf.min);
    let z = konst(&d, 0.0, 0.0);
    let s4 = build_cyclic(4, vec![z.clone().with_weight(6), z.with_weight(8)]).unwrap();
    let cfg = SolverConfig::dirichlet(vec![
        BoundaryProfile::Poincare {
            scale: 6.0,
            power: 3.0,
        },
        BoundaryProfile::Poincare {
            scale: 2.0,
            power: 1.0,
        },
    ]);
    let m4 = solve_hitchin(&s4, &d, &cfg).unwrap();
    for c in [Construction::Rp3M, Construction::Rp3Mprime] {
        assert!(check_construction(&s4, &m4, &c, 16).unwrap().min > 0.1);
    }
}

#[test]
fn domination_basic_cases() {
    let d = disc(16, 32);
    let (f, mf) = fuchsian(&d);
    let same = domination(&f, &mf, &f, &mf).unwrap();
    assert!(!same.dominated && same.worst_value.abs() < 1e-12);
    let zero = build_sl2r(konst(&d, 0.0, 0.0), konst(&d, 0.0, 0.0), 0, 2).unwrap();
    let m0 =
        HarmonicMetric::from_entries(&zero, vec![vec![1.0; d.len()], vec![1.0; d.len()]]).unwrap();
    let r = domination(&f, &mf, &zero, &m0).unwrap();
    assert!(r.dominated && r.worst_value > 3.9);
    let other = disc(8, 16);
    let (g, mg) = fuchsian(&other);
    assert!(matches!(
        domination(&f, &mf, &g, &mg),
        Err(Error::ChartMismatch)
    ));
}

#[test]
fn ads_transversality_follows_domination() {
    let d = disc(12, 24);
    let (f, mf) = fuchsian(&d);
    let zero = build_sl2r(konst(&d, 0.0, 0.0), konst(&d, 0.0, 0.0), 0, 2).unwrap();
    for (s2, dominated) in [(zero, true), (f.clone(), false)] {
        let t = tensor_product(&f, &s2).unwrap();
        let prof = if dominated {
            BoundaryProfile::Constant(1.0)
        } else {
            poincare()
        };
        let mt = solve_hitchin(&t, &d, &SolverConfig::dirichlet(vec![poincare(), prof])).unwrap();
        let m2 = &mt.factors()[1];
        assert_eq!(domination(&f, &mf, &s2, m2).unwrap().dominated, dominated);
        let margin = check_construction(&t, &mt, &Construction::AdsM, 16).unwrap();
        assert_eq!(margin.min > 1e-6, dominated, "{}", margin.min);
    }
}

#[test]
fn volume_formula() {
    assert!((ads_volume::<f64>(1, 1) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-15);
    assert_eq!(ads_volume::<f64>(1, -1), 0.0);
    assert!((ads_volume::<f64>(3, 2) - 5.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
}

fn single_vector_development(v: Vec<higgs_geom::C<f64>>) -> DevelopingMapSample<f64> {
    let c = disc(8, 16);
    let conn = ConnectionField::zero(&c, 4);
    let s = SectionFrameField::from_vectors(&c, vec![v; c.len()], ProjectiveField::Real);
    develop(&conn, &s, 0).unwrap()
}

#[test]
fn ads_containment_of_explicit_vectors() {
    let p = PairingData::tensor(&PairingData::sl2r(), &PairingData::sl2r());
    let r = 0.5f64.sqrt();
    let (o, l) = (cplx(0.0, 0.0), cplx(r, 0.0));
    // Q(v, v) = v0 v3 - v1 v2 for -omega (x) omega
    let q = ads_containment(&single_vector_development(vec![l, o, o, l]), &p).unwrap();
    assert!((q - 0.5).abs() < 1e-15);
    let q = ads_containment(
        &single_vector_development(vec![l * cplx(0.0, 1.0), o, o, -l * cplx(0.0, 1.0)]),
        &p,
    )
    .unwrap();
    assert!((q - 0.5).abs() < 1e-15);
    let h = cplx(0.5, 0.0);
    assert!(
        ads_containment(&single_vector_development(vec![h, h, h, h]), &p)
            .unwrap()
            .abs()
            < 1e-15
    );
    let e0 = vec![cplx(1.0, 0.0), o, o, o];
    assert!(matches!(
        ads_containment(&single_vector_development(e0), &p),
        Err(Error::NonRealRepresentative(_))
    ));
}

#[test]
fn immersion_matches_margin() {
    let d = disc(16, 32);
    let (f, m) = fuchsian(&d);
    let conn = assemble_connection(&f, &m).unwrap();
    let s = build_section(&f, &m, ConstructionKind::Hyperbolic, 1).unwrap();
    let mf = transversality_margin(&conn, &s, Directions::SurfaceZZbar).unwrap();
    let dev = develop(&conn, &s, 0).unwrap();
    for node in 0..d.len() {
        assert!(mf.node_min[node] <= 1e-3 || dev.rank_at(0, node) == 2);
    }

    let c = torus(16);
    let spec = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let m = solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap();
    let conn = assemble_connection(&spec, &m).unwrap();
    let s = build_section(&spec, &m, ConstructionKind::Hyperbolic, 1).unwrap();
    let mf = transversality_margin(&conn, &s, Directions::SurfaceZZbar).unwrap();
    let dev = develop(&conn, &s, c.index(8, 8)).unwrap();
    for node in 0..c.len() {
        assert!(
            mf.node_min[node] >= 1e-9 || dev.rank_at(0, node) < 2,
            "{node}"
        );
    }
}
