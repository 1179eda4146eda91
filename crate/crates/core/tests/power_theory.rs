use onlinefwer::power::{
    cstar_threshold, expected_true_discoveries, j_function, optimal_gamma_varying, optimal_q, q_curve,
};
use onlinefwer::{Error, GaussianMixModel, Horizon, WeightSeries};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn expected_discoveries_matches_independent_normal() {
    let n = Normal::new(0.0, 1.0).unwrap();
    let s = WeightSeries::q_series(1.5).unwrap();
    let mut want = 0.0;
    for i in 1..=40u64 {
        want += 0.3 * n.cdf(n.inverse_cdf(0.1 * s.gamma(i)) + 2.5);
    }
    let got = expected_true_discoveries(Horizon::Finite(40), 0.1, &s, 0.3, 2.5).unwrap();
    // statrs' inverse cdf is good to roughly 1e-10 relative
    assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
}

#[test]
fn finite_curve_is_unimodal_in_q() {
    let qs: Vec<f64> = (0..60).map(|k| 1.02 + 0.05 * k as f64).collect();
    for n in [2, 10, 100] {
        let c = q_curve(Horizon::Finite(n), 0.2, 1.0, 4.0, &qs).unwrap();
        // no interior local minimum
        for w in c.values.windows(3) {
            assert!(!(w[1] < w[0] && w[1] < w[2]), "N={n}: {:?}", w);
        }
        assert!(c.values.iter().all(|v| *v >= 0.0 && *v <= n as f64));
    }
}

#[test]
fn optimal_q_tends_to_one() {
    let q100 = optimal_q(100, 4.0, 0.2).unwrap();
    let q10k = optimal_q(10_000, 4.0, 0.2).unwrap();
    assert!(q10k < q100);
    assert!(q10k - 1.0 < 0.5);
}

#[test]
fn log_q_finite_horizon_is_fine() {
    let s = WeightSeries::log_q_series(2.0).unwrap();
    let e = expected_true_discoveries(Horizon::Finite(1000), 0.2, &s, 0.5, 4.0).unwrap();
    assert!(e > 0.0 && e < 500.0);
}

#[test]
fn cstar_grows_with_signal_strength_and_null_mean() {
    let c = |pi, mu_a, mu_n| cstar_threshold(&GaussianMixModel::new(pi, mu_a, mu_n).unwrap()).unwrap();
    assert!(c(0.3, 3.0, -1.0) < c(0.3, 5.0, -1.0));
    assert!(c(0.3, 4.0, -2.0) < c(0.3, 4.0, -0.5));
}

#[test]
fn j_is_negative_then_positive() {
    let m = GaussianMixModel::new(0.5, 4.0, -1.0).unwrap();
    let c = cstar_threshold(&m).unwrap();
    let mut x = 1e-6;
    while x < 1.0 - 1e-6 {
        if (x - c).abs() > 1e-6 {
            assert_eq!(j_function(&m, x) > 0.0, x > c, "x={x}, c*={c}");
        }
        x += 1e-4;
    }
}

#[test]
fn infeasible_inputs_are_errors() {
    assert!(matches!(
        optimal_gamma_varying(&[0.1, 0.2], &[1.0, 2.0, 3.0], 0.2, 2),
        Err(Error::Mismatch(_))
    ));
    assert!(optimal_gamma_varying(&[0.1], &[0.0], 0.2, 2).is_err());
    assert!(optimal_gamma_varying(&[1.0], &[1.0], 0.2, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_gamma_is_invariant_to_rescaling_pi(
        pi in prop::collection::vec(0.05f64..0.9, 2..30),
        mu_seed in prop::collection::vec(0.5f64..5.0, 30),
        scale in 0.2f64..1.0,
    ) {
        let h = pi.len();
        let mu = &mu_seed[..h];
        let a = optimal_gamma_varying(&pi, mu, 0.2, h).unwrap();
        let scaled: Vec<f64> = pi.iter().map(|p| p * scale).collect();
        let b = optimal_gamma_varying(&scaled, mu, 0.2, h).unwrap();
        let s: f64 = a.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-9);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn expected_discoveries_within_bounds(q in 1.05f64..4.0, n in 1u64..300, pi in 0.0f64..1.0, mu in 0.0f64..6.0) {
        let s = WeightSeries::q_series(q).unwrap();
        let e = expected_true_discoveries(Horizon::Finite(n), 0.2, &s, pi, mu).unwrap();
        prop_assert!(e >= 0.0 && e <= pi * n as f64 + 1e-12);
    }
}
