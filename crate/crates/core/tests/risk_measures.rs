use growthrisk_core::measure::{empirical_wvar, wvar, Atom, DensitySegment};
use growthrisk_core::normal;
use growthrisk_core::{QuantileCurve, WeightingMeasure};
use proptest::prelude::*;

fn mixture() -> WeightingMeasure {
    WeightingMeasure::new(
        vec![Atom { location: 0.1, mass: 0.3 }],
        vec![DensitySegment { lo: 0.2, hi: 0.6, density: 1.75 }],
    )
    .unwrap()
}

#[test]
fn es_of_normal_matches_closed_form() {
    let (m, s) = (0.13, 0.4);
    let g = QuantileCurve::new(|z| m + s * normal::quantile(z));
    for alpha in [0.01, 0.05, 0.25] {
        let es = wvar(&WeightingMeasure::expected_shortfall(alpha).unwrap(), &g).unwrap();
        let expect = -m + s * normal::pdf(normal::quantile(alpha)) / alpha;
        assert!((es - expect).abs() < 1e-8, "{alpha}: {es} vs {expect}");
        let var = wvar(&WeightingMeasure::dirac(alpha).unwrap(), &g).unwrap();
        assert!((var + m + s * normal::quantile(alpha)).abs() < 1e-14);
    }
}

#[test]
fn empirical_converges_to_exact() {
    // a deterministic "sample": the quantiles at the midpoints of n cells
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|i| normal::quantile((i as f64 + 0.5) / n as f64)).collect();
    let g = QuantileCurve::new(normal::quantile);
    for m in [WeightingMeasure::expected_shortfall(0.05).unwrap(), WeightingMeasure::dirac(0.05).unwrap(), mixture()] {
        let exact = wvar(&m, &g).unwrap();
        let emp = empirical_wvar(&m, &xs).unwrap();
        assert!((exact - emp).abs() < 1e-3, "{exact} vs {emp}");
    }
}

#[test]
fn minus_infinity_gives_infinite_risk() {
    let g = QuantileCurve::new(|z| if z < 0.03 { f64::NEG_INFINITY } else { z });
    assert_eq!(wvar(&WeightingMeasure::expected_shortfall(0.05).unwrap(), &g).unwrap(), f64::INFINITY);
    assert!(wvar(&WeightingMeasure::dirac(0.05).unwrap(), &g).unwrap().is_finite());
}

proptest! {
    #[test]
    fn translation_and_scaling(c in -5.0f64..5.0, a in 0.1f64..10.0, alpha in 0.01f64..0.9) {
        let base = QuantileCurve::new(normal::quantile);
        let moved = QuantileCurve::new(move |z| a * normal::quantile(z) + c);
        for m in [WeightingMeasure::expected_shortfall(alpha).unwrap(), WeightingMeasure::dirac(alpha).unwrap(), mixture()] {
            let r0 = wvar(&m, &base).unwrap();
            let r1 = wvar(&m, &moved).unwrap();
            prop_assert!((r1 - (a * r0 - c)).abs() < 1e-7 * (1.0 + r1.abs()));
        }
    }

    #[test]
    fn empirical_is_monotone_in_samples(xs in prop::collection::vec(-10.0f64..10.0, 1..200), bump in 0.0f64..3.0) {
        let m = mixture();
        let r0 = empirical_wvar(&m, &xs).unwrap();
        let up: Vec<f64> = xs.iter().map(|x| x + bump).collect();
        let r1 = empirical_wvar(&m, &up).unwrap();
        prop_assert!((r1 - (r0 - bump)).abs() < 1e-9);
    }
}
