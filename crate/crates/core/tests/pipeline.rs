use higgs_geom::connection::curvature_residual;
use higgs_geom::constructions::{
    report_topology, run_pipeline, ChartConfig, ChartShape, PipelineConfig, PipelineInputs,
    Sl2rInputs, Verdict,
};
use higgs_geom::domain::FieldSpec;
use higgs_geom::scalar::cplx;
use higgs_geom::solver::{hitchin_residual, BoundaryProfile};
use higgs_geom::transversality::{build_section, transversality_margin, ConstructionKind as K};
use higgs_geom::Error;

fn disc(n1: usize, n2: usize) -> ChartConfig {
    ChartConfig {
        shape: ChartShape::Disc { radius: 0.9 },
        resolution: (n1, n2),
    }
}

fn check(report: &higgs_geom::constructions::StructureReport, name: &str) -> f64 {
    report
        .geometry
        .iter()
        .find(|c| c.name == name)
        .and_then(|c| c.value)
        .unwrap_or_else(|| panic!("missing check {name}"))
}

#[test]
fn fuchsian_disc_is_certified() {
    let out = run_pipeline::<f64>(
        K::Hyperbolic,
        &PipelineInputs::default(),
        &disc(64, 64),
        &PipelineConfig::default(),
    )
    .unwrap();
    let r = &out.report;
    assert_eq!(r.verdict, Verdict::Certified, "{:#?}", r.stages);
    assert_eq!(check(r, "hitchin_bound"), 0.0);
    assert!(check(r, "real_locus_distance") > 0.1);
    assert!(check(r, "pullback_curvature_deviation") < 0.02);
    assert!(check(r, "developed_curvature_deviation") < 0.02);
    assert!((r.margin.as_ref().unwrap().global_min - 1.0).abs() < 1e-12);
    assert_eq!(r.resolutions, vec![(64, 64), (32, 32)]);
    assert!(r.topology.is_none());
}

#[test]
fn equal_ads_factors_fail_domination() {
    let inputs = PipelineInputs {
        bundle2: Some(Sl2rInputs::default()),
        ..Default::default()
    };
    let out =
        run_pipeline::<f64>(K::AdsM, &inputs, &disc(32, 64), &PipelineConfig::default()).unwrap();
    assert_eq!(out.report.verdict, Verdict::Failed("domination".into()));
    assert!(!out.report.domination.as_ref().unwrap().dominated);
}

#[test]
fn dominated_ads_pair_is_certified() {
    let inputs = PipelineInputs {
        bundle2: Some(Sl2rInputs {
            boundary: Some(BoundaryProfile::Constant(1.0)),
            ..Default::default()
        }),
        ..Default::default()
    };
    let out =
        run_pipeline::<f64>(K::AdsM, &inputs, &disc(32, 64), &PipelineConfig::default()).unwrap();
    let r = &out.report;
    assert_eq!(r.verdict, Verdict::Certified, "{:#?}", r.stages);
    assert!(check(r, "ads_containment") > 1e-6);
    let vol = r.ads_volume.unwrap();
    assert!((vol - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
}

#[test]
fn rp3_mprime_with_small_quartic_is_certified() {
    let inputs = PipelineInputs {
        q4: Some(FieldSpec::real(0.05)),
        ..Default::default()
    };
    let out = run_pipeline::<f64>(
        K::Rp3Mprime,
        &inputs,
        &disc(32, 64),
        &PipelineConfig::default(),
    )
    .unwrap();
    let r = &out.report;
    assert_eq!(r.verdict, Verdict::Certified, "{:#?}", r.stages);
    let t = r.topology.as_ref().unwrap();
    assert_eq!(t.euler_class, 6);
    assert_eq!(t.status, "reported, not computed");
    assert!(check(r, "reality_deviation") < 1e-6);
}

#[test]
fn almost_fuchsian_boundary_case_fails_transversality() {
    let run = |beta: FieldSpec| {
        let inputs = PipelineInputs {
            beta: Some(beta),
            ..Default::default()
        };
        run_pipeline::<f64>(
            K::AlmostFuchsian,
            &inputs,
            &disc(32, 64),
            &PipelineConfig::default(),
        )
        .unwrap()
        .report
    };
    let r = run(FieldSpec::constant(cplx(0.0, 1.0)));
    assert_eq!(r.verdict, Verdict::Failed("transversality".into()));
    assert_eq!(r.flatness.as_ref().unwrap().gated_on, "background");
    assert!(r.flatness.as_ref().unwrap().deformed_max_residual.is_some());
    let r = run(FieldSpec::real(0.5));
    assert_eq!(r.verdict, Verdict::Certified, "{:#?}", r.stages);
    assert!(r.margin.unwrap().global_min > 1e-2);
}

#[test]
fn missing_second_bundle_is_a_schema_error() {
    let err = run_pipeline::<f64>(
        K::AdsM,
        &PipelineInputs::default(),
        &disc(16, 32),
        &PipelineConfig::default(),
    )
    .unwrap_err();
    assert_eq!(
        err,
        Error::SchemaViolation {
            path: "/inputs/bundle2".into(),
            message: "required".into()
        }
    );
}

#[test]
fn topology_metadata() {
    assert_eq!(report_topology(K::Rp3M, 2, 4).unwrap().euler_class, 2);
    assert_eq!(report_topology(K::Rp3Mprime, 2, 4).unwrap().euler_class, 6);
    let ur = report_topology(K::ProjectiveUr, 2, 6).unwrap();
    assert_eq!(ur.euler_class, 2);
    assert_eq!(ur.fiber, "T^1 RP^5");
    assert_eq!(
        report_topology(K::ProjectiveUc, 3, 4).unwrap().euler_class,
        4
    );
    assert!(matches!(
        report_topology(K::Hyperbolic, 2, 2),
        Err(Error::UnsupportedConstruction(_))
    ));
}

#[test]
fn reports_are_self_certifying() {
    let inputs = PipelineInputs {
        q3: Some(FieldSpec::monomial(cplx(0.2, 0.0), 1)),
        ..Default::default()
    };
    let out = run_pipeline::<f64>(
        K::ConvexRp2,
        &inputs,
        &disc(16, 32),
        &PipelineConfig::default(),
    )
    .unwrap();
    let r = &out.report;
    let (spec, metric) = (out.spec.as_ref().unwrap(), out.metric.as_ref().unwrap());
    let res = hitchin_residual(spec, metric)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
    assert!((res - r.solver.as_ref().unwrap().residual).abs() < 1e-10);
    let flat = curvature_residual(out.connection.as_ref().unwrap())
        .into_iter()
        .fold(0.0, f64::max);
    assert!((flat - r.flatness.as_ref().unwrap().max_residual).abs() < 1e-10);
    let section = build_section(spec, metric, K::ConvexRp2, 64).unwrap();
    let mf = transversality_margin(
        out.connection.as_ref().unwrap(),
        &section,
        K::ConvexRp2.directions(),
    )
    .unwrap();
    assert!((mf.min - r.margin.as_ref().unwrap().global_min).abs() < 1e-10);
}

#[test]
fn margin_is_continuous_along_a_quadratic_ramp() {
    let cfg = PipelineConfig {
        refinement: false,
        ..Default::default()
    };
    let margins: Vec<f64> = (0..=8)
        .map(|k| {
            let t = 0.5 * k as f64;
            let inputs = PipelineInputs {
                q2: Some(FieldSpec::monomial(cplx(t, 0.0), 2)),
                ..Default::default()
            };
            run_pipeline::<f64>(K::Hyperbolic, &inputs, &disc(16, 32), &cfg)
                .unwrap()
                .report
                .margin
                .unwrap()
                .global_min
        })
        .collect();
    assert!((margins[0] - 1.0).abs() < 1e-12);
    for w in margins.windows(2) {
        let (a, b) = (w[0].max(1e-300), w[1].max(1e-300));
        assert!(a / b < 10.0 && b / a < 10.0, "{margins:?}");
    }
    assert!(
        margins.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        "{margins:?}"
    );
}

#[test]
fn identical_runs_give_identical_reports() {
    let inputs = PipelineInputs {
        q3: Some(FieldSpec::real(0.1)),
        ..Default::default()
    };
    let run = || {
        run_pipeline::<f64>(K::Rp3M, &inputs, &disc(16, 32), &PipelineConfig::default())
            .unwrap()
            .report
    };
    assert_eq!(run().to_json(), run().to_json());
}

#[test]
fn torus_flatness_meets_absolute_bound() {
    let chart = ChartConfig {
        shape: ChartShape::Torus {
            modulus: (0.0, 1.0),
        },
        resolution: (16, 16),
    };
    let inputs = PipelineInputs {
        q2: Some(FieldSpec::real(0.5)),
        ..Default::default()
    };
    let r = run_pipeline::<f64>(K::Hyperbolic, &inputs, &chart, &PipelineConfig::default())
        .unwrap()
        .report;
    assert!(r.flatness.as_ref().unwrap().max_residual < 1e-8);
    assert!(
        r.stages
            .iter()
            .find(|s| s.name == "flatness")
            .unwrap()
            .passed
    );
}
