use std::sync::Arc;
use std::time::Instant;

use higgs_geom::domain::{make_chart, ChartKind, ComplexField, DomainChart};
use higgs_geom::higgs::{build_cyclic, build_sl2r, symmetric_power, tensor_product};
use higgs_geom::scalar::cplx;
use higgs_geom::solver::{
    hitchin_bound, hitchin_residual, solve_hitchin, BoundaryProfile, HarmonicMetric, SolverConfig,
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

fn poincare(scale: f64, power: f64) -> BoundaryProfile {
    BoundaryProfile::Poincare { scale, power }
}

/// Max relative error against a radial closed form.
fn max_err(chart: &DomainChart<f64>, got: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    chart
        .nodes()
        .iter()
        .zip(got)
        .map(|(z, h)| {
            let e = exact(z.norm_sqr());
            (h - e).abs() / e
        })
        .fold(0.0, f64::max)
}

#[test]
fn torus_constant_balance() {
    let c = torus(64);
    let spec = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let m = solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap();
    assert!(m.converged && m.iterations <= 15);
    assert!(m.h().iter().all(|h| (h - 2f64.sqrt()).abs() < 1e-10));
    assert!(m.residual < 1e-10);
    assert!(m.det_defect() < 1e-10);
}

#[test]
fn torus_newton_from_zero_guess() {
    let c = torus(32);
    let spec = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let cfg = SolverConfig {
        initial_guess: higgs_geom::solver::InitialGuess::Zero,
        ..SolverConfig::default()
    };
    let m = solve_hitchin(&spec, &c, &cfg).unwrap();
    assert!(m.iterations >= 1 && m.iterations <= 15);
    assert!(m.h().iter().all(|h| (h - 2f64.sqrt()).abs() < 1e-10));
}

#[test]
fn nonconstant_data_converges_and_certifies() {
    let c = disc(32, 64);
    let a = ComplexField::from_fn(&c, 2, |z| z * 0.4 + 1.5);
    let spec = build_sl2r(a, konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let cfg = SolverConfig::dirichlet(vec![BoundaryProfile::Constant(1.2)]);
    let m = solve_hitchin(&spec, &c, &cfg).unwrap();
    let r = hitchin_residual(&spec, &m).unwrap();
    let rmax = r.iter().cloned().fold(0.0, f64::max);
    assert!(
        m.iterations >= 1 && rmax < 1e-8,
        "{rmax} vs {}",
        m.solver_residual
    );
}

#[test]
fn nonconstant_fourier_data_is_not_holomorphic_on_torus() {
    let c = torus(16);
    let a = higgs_geom::domain::sample_field(
        &c,
        &higgs_geom::domain::FieldSpec::fourier(&[(0, 0, 2.0.into()), (1, 0, 0.5.into())]),
        2,
    )
    .unwrap();
    assert!(matches!(
        build_sl2r(a, konst(&c, 1.0, 0.0), 0, 2),
        Err(Error::NonHolomorphicEntry { .. })
    ));
}

#[test]
fn zero_higgs_field_gives_flat_metric() {
    let c = torus(16);
    let spec = build_sl2r(konst(&c, 0.0, 0.0), konst(&c, 0.0, 0.0), 0, 2).unwrap();
    let m = solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap();
    assert!(m.entries().iter().all(|e| e.iter().all(|&h| h == 1.0)));
    assert!(hitchin_residual(&spec, &m)
        .unwrap()
        .iter()
        .all(|&r| r == 0.0));
}

#[test]
fn torus_without_solution_reports_nonconvergence() {
    let c = torus(16);
    let spec = build_sl2r(konst(&c, 0.0, 0.0), konst(&c, 1.0, 0.0), 1, 2).unwrap();
    let cfg = SolverConfig {
        max_iterations: 20,
        ..SolverConfig::default()
    };
    assert!(matches!(
        solve_hitchin(&spec, &c, &cfg),
        Err(Error::NonConvergence { .. })
    ));
}

#[test]
fn unstable_input_is_rejected() {
    let c = torus(16);
    let spec = build_sl2r(konst(&c, 1.0, 0.0), konst(&c, 0.0, 0.0), 1, 2).unwrap();
    assert!(matches!(
        solve_hitchin(&spec, &c, &SolverConfig::default()),
        Err(Error::UnstableInput(_))
    ));
}

#[test]
fn disc_requires_boundary_data() {
    let c = disc(16, 16);
    let spec = build_sl2r(konst(&c, 0.0, 0.0), konst(&c, 1.0, 0.0), 1, 2).unwrap();
    assert_eq!(
        solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap_err(),
        Error::MissingBoundaryData {
            expected: 1,
            found: 0
        }
    );
}

#[test]
fn fuchsian_disc_matches_poincare_metric() {
    let c = disc(64, 128);
    let spec = build_sl2r(konst(&c, 0.0, 0.0), konst(&c, 1.0, 0.0), 1, 2).unwrap();
    let t = Instant::now();
    let m = solve_hitchin(
        &spec,
        &c,
        &SolverConfig::dirichlet(vec![poincare(1.0, 1.0)]),
    )
    .unwrap();
    let err = max_err(&c, m.h(), |r2| 1.0 / (1.0 - r2));
    eprintln!(
        "fuchsian 64x128: err {err:e} iters {} res {:e} in {:?}",
        m.iterations,
        m.residual,
        t.elapsed()
    );
    assert!(err < 1e-4);
}

#[test]
fn fuchsian_error_decreases_under_refinement() {
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let c = disc(n, 2 * n);
        let spec = build_sl2r(konst(&c, 0.0, 0.0), konst(&c, 1.0, 0.0), 1, 2).unwrap();
        let m = solve_hitchin(
            &spec,
            &c,
            &SolverConfig::dirichlet(vec![poincare(1.0, 1.0)]),
        )
        .unwrap();
        errs.push(max_err(&c, m.h(), |r2| 1.0 / (1.0 - r2)));
    }
    eprintln!("refinement errors {errs:?}");
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.8, "{errs:?}");
    }
}

#[test]
fn cyclic_exact_solutions_on_disc() {
    let c = disc(48, 96);
    let q = konst(&c, 0.0, 0.0).with_weight(6);
    let s3 = build_cyclic(3, vec![q.clone()]).unwrap();
    let m3 = solve_hitchin(&s3, &c, &SolverConfig::dirichlet(vec![poincare(2.0, 2.0)])).unwrap();
    let e3 = max_err(&c, m3.entry(2), |r2| 2.0 / (1.0 - r2).powi(2));
    assert!(e3 < 1e-4, "{e3:e}");
    assert!(m3.entry(1).iter().all(|&x| (x - 1.0).abs() < 1e-14));

    let s4 = build_cyclic(4, vec![q.clone(), q.with_weight(8)]).unwrap();
    let cfg = SolverConfig::dirichlet(vec![poincare(6.0, 3.0), poincare(2.0, 1.0)]);
    let m4 = solve_hitchin(&s4, &c, &cfg).unwrap();
    assert!(max_err(&c, m4.entry(3), |r2| 6.0 / (1.0 - r2).powi(3)) < 5e-4);
    assert!(max_err(&c, m4.entry(2), |r2| 2.0 / (1.0 - r2)) < 1e-4);
    assert!(m4.det_defect() < 1e-10);
}

#[test]
fn cyclic3_torus_balance() {
    let c = torus(16);
    let s = build_cyclic(3, vec![konst(&c, 8.0, 0.0)]).unwrap();
    let m = solve_hitchin(&s, &c, &SolverConfig::default()).unwrap();
    assert!(m.entry(2).iter().all(|h| (h - 4.0).abs() < 1e-10));
}

#[test]
fn cyclic4_torus_with_small_q4() {
    let c = torus(16);
    let s = build_cyclic(4, vec![konst(&c, 0.0, 0.0), konst(&c, 0.3, 0.1)]).unwrap();
    let cfg = SolverConfig {
        initial_guess: higgs_geom::solver::InitialGuess::Zero,
        ..SolverConfig::default()
    };
    // constant data: a homogeneous solution exists iff the algebraic balance does
    let m = solve_hitchin(&s, &c, &cfg).unwrap();
    assert!(m.residual < 1e-9 && m.det_defect() < 1e-10);
}

#[test]
fn tensor_and_symmetric_power_assemble_from_factors() {
    let c = torus(16);
    let s1 = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let s2 = build_sl2r(konst(&c, 0.5, 0.5), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let t = tensor_product(&s1, &s2).unwrap();
    let mt = solve_hitchin(&t, &c, &SolverConfig::default()).unwrap();
    assert!(mt.residual < 1e-9 && mt.det_defect() < 1e-12);
    let h1 = 2f64.sqrt();
    let h2 = 0.5f64.sqrt().sqrt();
    assert!((mt.entry(3)[0] - h1 * h2).abs() < 1e-10);
    assert!((mt.entry(1)[5] - h2 / h1).abs() < 1e-10);

    let p = symmetric_power(&s1, 3).unwrap();
    let mp = solve_hitchin(&p, &c, &SolverConfig::default()).unwrap();
    assert!(mp.residual < 1e-9, "{}", mp.residual);
    assert!(mp.det_defect() < 1e-12);
}

#[test]
fn hitchin_bound_cases() {
    let c = torus(16);
    let q = konst(&c, 0.7, 0.2);
    let spec = build_sl2r(q.clone(), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let m = solve_hitchin(&spec, &c, &SolverConfig::default()).unwrap();
    assert!((hitchin_bound(&m, &q) - 1.0).abs() < 1e-8);

    let d = disc(32, 64);
    let q2 = ComplexField::from_fn(&d, 4, |z| z * z * 0.1);
    let spec = build_sl2r(q2.clone(), konst(&d, 1.0, 0.0), 1, 2).unwrap();
    let m = solve_hitchin(
        &spec,
        &d,
        &SolverConfig::dirichlet(vec![poincare(1.0, 1.0)]),
    )
    .unwrap();
    assert!(hitchin_bound(&m, &q2) < 1.0);
    assert_eq!(hitchin_bound(&m, &konst(&d, 0.0, 0.0)), 0.0);
}

#[test]
fn perturbed_solution_has_large_residual() {
    let c = torus(16);
    let spec = build_sl2r(konst(&c, 2.0, 0.0), konst(&c, 1.0, 0.0), 0, 2).unwrap();
    let h = 2f64.sqrt() * 0.1f64.exp();
    let m = HarmonicMetric::from_entries(&spec, vec![vec![1.0 / h; 256], vec![h; 256]]).unwrap();
    assert!(m.residual > 0.1);
}

#[test]
fn gauge_covariance_of_constant_case() {
    let c = torus(16);
    let lam = 1.7;
    let s = build_sl2r(konst(&c, 2.0 * lam, 0.0), konst(&c, 1.0 / lam, 0.0), 0, 2).unwrap();
    let cfg = SolverConfig {
        initial_guess: higgs_geom::solver::InitialGuess::Zero,
        ..SolverConfig::default()
    };
    let m = solve_hitchin(&s, &c, &cfg).unwrap();
    assert!(m.h().iter().all(|h| (h - lam * 2f64.sqrt()).abs() < 1e-8));
}
