use std::f64::consts::TAU;

use proptest::prelude::*;

use qcx_core::area::{
    complement_area_curve_oracle, complement_area_series, dirichlet_integral, dirichlet_quadrature_oracle,
};
use qcx_core::certify::{check_first_coefficient, check_sufficient_membership, Certificate};
use qcx_core::extension::{build_extension, dilatation_analytic, dilatation_fd_oracle, ExtensionMap};
use qcx_core::schwarzian::{schwarzian_at, schwarzian_fd};
use qcx_core::{Complex64, PolarizedMeromorphic, PrincipalPart, TruncatedSeries};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (0.05f64..1.0, 0.0f64..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recentred_principal_part_matches_direct_evaluation(
        p in 0.0f64..0.8,
        principal in prop::collection::vec(complex(), 1..4),
        t in 0.0f64..TAU,
        s in 0.2f64..0.95,
    ) {
        let part = PrincipalPart::new(p, principal).unwrap();
        let f = PolarizedMeromorphic::new(part.clone(), TruncatedSeries::from_real(&[0.0]).unwrap());
        let r = p + s * (1.0 - p);
        let z = Complex64::from_polar(r, t);
        // the default order targets r = 1; closer to p the series needs more terms
        let tail = f.laurent_recentre(800).unwrap();
        let direct = part.evaluate(z).unwrap();
        prop_assert!((tail.evaluate(z).unwrap() - direct).norm() <= 1e-8 * (1.0 + direct.norm()));
    }

    #[test]
    fn dirichlet_series_matches_quadrature(coefficients in prop::collection::vec(complex(), 2..6), r in 0.3f64..1.0) {
        let s = TruncatedSeries::unit(coefficients).unwrap();
        let f = PolarizedMeromorphic::new(PrincipalPart::monomial(0.0, 1, c(1.0, 0.0)).unwrap(), s.clone());
        let series = dirichlet_integral(&f, r).unwrap();
        let quadrature = dirichlet_quadrature_oracle(&s, r, 512).unwrap();
        prop_assert!((series - quadrature).abs() <= 1e-3 * series.max(1e-12));
    }

    #[test]
    fn membership_implies_first_coefficient_bound(
        p in 0.0f64..0.9,
        k in 0.05f64..0.95,
        weights in prop::collection::vec(complex(), 2..8),
        fill in 0.0f64..1.0,
    ) {
        let budget = k / (1.0 + p).powi(2);
        let total: f64 = weights.iter().enumerate().map(|(n, a)| n as f64 * a.norm()).sum();
        prop_assume!(total > 0.0);
        let taylor: Vec<Complex64> = weights.iter().map(|a| a * (fill * budget / total)).collect();
        let f = PolarizedMeromorphic::new(
            PrincipalPart::monomial(p, 1, c(1.0, 0.0)).unwrap(),
            TruncatedSeries::unit(taylor).unwrap(),
        );
        prop_assert!(check_sufficient_membership(&f, k).unwrap().passed());
        prop_assert!(check_first_coefficient(&f, k).unwrap().passed());
    }

    #[test]
    fn reflection_dilatation_matches_finite_differences(
        a1 in -0.3f64..0.3,
        a2 in -0.1f64..0.1,
        r in 1.01f64..6.0,
        t in 0.0f64..TAU,
    ) {
        let omega = TruncatedSeries::from_real(&[0.0, a1, a2]).unwrap();
        let f = PolarizedMeromorphic::new(PrincipalPart::monomial(0.0, 1, c(1.0, 0.0)).unwrap(), omega.clone());
        let map = build_extension(&f, &omega, 0.6).unwrap();
        let z = Complex64::from_polar(r, t);
        let exact = dilatation_analytic(&map, z).unwrap();
        prop_assert!((exact - dilatation_fd_oracle(&map, z, 1e-4).unwrap()).norm() <= 1e-6);
        prop_assert!(exact.norm() <= map.kappa.unwrap() + 1e-9);
    }

    #[test]
    fn schwarzian_of_meromorphic_matches_finite_differences(
        p in 0.0f64..0.6,
        a1 in -0.3f64..0.3,
        r in 0.0f64..0.9,
        t in 0.0f64..TAU,
    ) {
        let f = PolarizedMeromorphic::new(
            PrincipalPart::monomial(p, 1, c(1.0, 0.0)).unwrap(),
            TruncatedSeries::from_real(&[0.0, a1]).unwrap(),
        );
        let z = Complex64::from_polar(r, t);
        prop_assume!((z - p).norm() > 0.2);
        let exact = schwarzian_at(&f, z).unwrap();
        prop_assert!((exact - schwarzian_fd(&f, z, 1e-4).unwrap()).norm() <= 1e-5 * (1.0 + exact.norm()));
    }
}

#[test]
fn shoelace_area_agrees_with_series_for_extremal_members() {
    for (p, k, r) in [(0.0, 0.4, 0.9), (0.3, 0.5, 0.8), (0.5, 0.2, 0.75)] {
        let f = PolarizedMeromorphic::extremal(
            PrincipalPart::monomial(p, 1, c(1.0, 0.0)).unwrap(),
            c(0.0, 0.0),
            c(k, 0.0),
            300,
        )
        .unwrap();
        let series = complement_area_series(&f, r).unwrap().complement_area;
        let curve = complement_area_curve_oracle(&f, r, 8192).unwrap();
        assert!((series - curve).abs() <= 1e-4 * series, "p={p} k={k} r={r}");
    }
}

#[test]
fn certificates_and_extensions_round_trip_through_json() {
    let map = ExtensionMap::extremal(
        PrincipalPart::monomial(0.3, 1, c(1.0, 0.0)).unwrap(),
        c(0.1, 0.0),
        c(0.0, 0.4),
        0.4,
    )
    .unwrap();
    let text = serde_json::to_string(&map).unwrap();
    assert_eq!(serde_json::from_str::<ExtensionMap>(&text).unwrap(), map);

    let f = PolarizedMeromorphic::new(
        PrincipalPart::monomial(0.3, 1, c(1.0, 0.0)).unwrap(),
        TruncatedSeries::from_real(&[0.0, 0.2]).unwrap(),
    );
    let cert = check_first_coefficient(&f, 0.4).unwrap();
    let text = serde_json::to_string(&cert).unwrap();
    assert!(text.contains("\"verdict\":\"pass\""));
    assert_eq!(serde_json::from_str::<Certificate>(&text).unwrap(), cert);
}
