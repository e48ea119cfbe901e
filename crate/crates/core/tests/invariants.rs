use std::sync::Arc;

use proptest::prelude::*;

use higgs_geom::domain::{d_z, d_zbar, make_chart, ChartKind, ComplexField, DomainChart};
use higgs_geom::higgs::{build_sl2r, sympow_matrix, tensor_product};
use higgs_geom::linalg::CMat;
use higgs_geom::scalar::{cplx, C};
use higgs_geom::solver::{solve_hitchin, BoundaryProfile, InitialGuess, SolverConfig};
use higgs_geom::transversality::{ads_volume, check_construction, Construction};

fn rect(n1: usize, n2: usize) -> Arc<DomainChart<f64>> {
    make_chart(
        ChartKind::Rectangle {
            width: 2.0,
            height: 1.5,
        },
        (n1, n2),
    )
    .unwrap()
}

fn mat(e: [f64; 4]) -> CMat<f64> {
    CMat::from_rows(&[
        vec![cplx(e[0], 0.0), cplx(e[1], 0.0)],
        vec![cplx(e[2], 0.0), cplx(e[3], 0.0)],
    ])
}

fn unimodular() -> impl Strategy<Value = CMat<f64>> {
    (0.5f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(a, b, c)| mat([a, b, c, (1.0 + b * c) / a]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chart_index_round_trips(h1 in 4usize..20, h2 in 4usize..20, torus in any::<bool>()) {
        let (n1, n2) = (2 * h1, 2 * h2);
        let kind = if torus {
            ChartKind::Torus { modulus: cplx(0.3, 1.1) }
        } else {
            ChartKind::Disc { radius: 0.8 }
        };
        let c = make_chart(kind, (n1, n2)).unwrap();
        prop_assert_eq!(c.len(), n1 * n2);
        for idx in 0..c.len() {
            let (i, j) = c.coords(idx);
            prop_assert_eq!(c.index(i, j), idx);
        }
    }

    #[test]
    fn derivatives_are_linear(s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let c = rect(12, 10);
        let f = ComplexField::from_fn(&c, 0, |z| z * z * z);
        let g = ComplexField::from_fn(&c, 0, |z| z.conj() * z);
        let sum = ComplexField::from_fn(&c, 0, |z| z * z * z * s + z.conj() * z * t);
        let (df, dg, ds) = (d_zbar(&f), d_zbar(&g), d_zbar(&sum));
        for i in 0..c.len() {
            let lin = df.values()[i] * s + dg.values()[i] * t;
            prop_assert!((ds.values()[i] - lin).norm() < 1e-9);
        }
    }

    #[test]
    fn quadratics_differentiate_exactly(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        // |z|^2 + a z^2 + b: d_z = zbar + 2 a z, d_zbar = z
        let c = rect(16, 12);
        let f = ComplexField::from_fn(&c, 0, |z| z * z.conj() + z * z * a + b);
        let (fz, fzb) = (d_z(&f), d_zbar(&f));
        for (i, z) in c.nodes().iter().enumerate() {
            prop_assert!((fz.values()[i] - (z.conj() + z * 2.0 * a)).norm() < 1e-9);
            prop_assert!((fzb.values()[i] - z).norm() < 1e-9);
        }
    }

    #[test]
    fn sympow_is_a_homomorphism(a in unimodular(), b in unimodular(), m in prop::sample::select(vec![1usize, 3, 5])) {
        let lhs = sympow_matrix(&(&a * &b), m);
        let rhs = &sympow_matrix(&a, m) * &sympow_matrix(&b, m);
        let scale = lhs.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12 * scale);
        prop_assert!((sympow_matrix(&a, m).det() - C::new(1.0, 0.0)).norm() < 1e-8 * scale);
    }

    #[test]
    fn ads_volume_is_symmetric_and_nonnegative(d1 in -20i64..20, d2 in -20i64..20) {
        let v = ads_volume::<f64>(d1, d2);
        prop_assert!(v >= 0.0);
        prop_assert_eq!(v, ads_volume::<f64>(d2, d1));
        prop_assert_eq!(v, ads_volume::<f64>(-d1, -d2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn torus_balance_scales_with_the_gauge(lam in 0.3f64..3.0, a in 0.2f64..4.0) {
        // (a, b) -> (lam a, b / lam) rescales h by lam
        let c = make_chart(ChartKind::Torus { modulus: cplx(0.0, 1.0) }, (8, 8)).unwrap();
        let k = |x: f64| ComplexField::constant(&c, cplx(x, 0.0), 2);
        let base = solve_hitchin(&build_sl2r(k(a), k(1.0), 0, 2).unwrap(), &c, &SolverConfig::default()).unwrap();
        let scaled = solve_hitchin(&build_sl2r(k(a * lam), k(1.0 / lam), 0, 2).unwrap(), &c, &SolverConfig::default()).unwrap();
        for (h0, h1) in base.h().iter().zip(scaled.h()) {
            prop_assert!((h1 - lam * h0).abs() < 1e-8 * h1);
            prop_assert!((h0 - a.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn tensor_metric_is_the_product(a1 in 0.2f64..3.0, a2 in 0.2f64..3.0) {
        let c = make_chart(ChartKind::Torus { modulus: cplx(0.0, 1.0) }, (8, 8)).unwrap();
        let k = |x: f64| ComplexField::constant(&c, cplx(x, 0.0), 2);
        let s1 = build_sl2r(k(a1), k(1.0), 0, 2).unwrap();
        let s2 = build_sl2r(k(a2), k(1.0), 0, 2).unwrap();
        let m = solve_hitchin(&tensor_product(&s1, &s2).unwrap(), &c, &SolverConfig::default()).unwrap();
        let (h1, h2) = (a1.sqrt(), a2.sqrt());
        prop_assert!((m.entry(3)[0] - h1 * h2).abs() < 1e-9 * h1 * h2);
        prop_assert!(m.det_defect() < 1e-10);
    }

    #[test]
    fn almost_fuchsian_margin_depends_only_on_modulus(r in 0.0f64..0.95, arg in 0.0..std::f64::consts::TAU) {
        let d = make_chart(ChartKind::Disc { radius: 0.9 }, (8, 16)).unwrap();
        let k = |x: f64| ComplexField::constant(&d, cplx(x, 0.0), 2);
        let spec = build_sl2r(k(0.0), k(1.0), 1, 2).unwrap();
        let cfg = SolverConfig::dirichlet(vec![BoundaryProfile::Poincare { scale: 1.0, power: 1.0 }]);
        let m = solve_hitchin(&spec, &d, &cfg).unwrap();
        let af = |b: C<f64>| {
            let beta = ComplexField::constant(&d, b, 0);
            check_construction(&spec, &m, &Construction::AlmostFuchsian(beta), 1).unwrap()
        };
        let rotated = af(C::from_polar(r, arg));
        let real = af(cplx(r, 0.0));
        // closed form: sqrt(1 - sqrt(1 - rho^2)), rho = (1 - r^2) / (1 + r^2)
        let rho = (1.0 - r * r) / (1.0 + r * r);
        let exact = (1.0 - (1.0 - rho * rho).sqrt()).sqrt();
        for (x, y) in rotated.values.iter().zip(&real.values) {
            prop_assert!((x - y).abs() < 1e-8);
            prop_assert!((x - exact).abs() < 1e-8, "{x} vs {exact}");
        }
    }
}

#[test]
fn single_precision_core_solves_the_torus_balance() {
    let c = make_chart::<f32>(
        ChartKind::Torus {
            modulus: C::new(0.0, 1.0),
        },
        (16, 16),
    )
    .unwrap();
    let k = |x: f32| ComplexField::constant(&c, C::new(x, 0.0), 2);
    let spec = build_sl2r(k(2.0), k(1.0), 0, 2).unwrap();
    let cfg = SolverConfig {
        residual_tolerance: 1e-5,
        initial_guess: InitialGuess::Zero,
        ..SolverConfig::default()
    };
    let m = solve_hitchin(&spec, &c, &cfg).unwrap();
    assert!(m.converged);
    assert!(m.h().iter().all(|h| (h - 2f32.sqrt()).abs() < 1e-5));
}
