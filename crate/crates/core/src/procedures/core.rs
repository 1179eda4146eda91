//! Level rules of Alpha-Spending, Online Sidak and Online Fallback.

use super::config::FallbackWeights;
use crate::series::WeightSeries;

/// 1 − (1 − α)^β without cancellation for tiny β.
pub fn sidak_level(alpha: f64, beta: f64) -> f64 {
    -(beta * (-alpha).ln_1p()).exp_m1()
}

/// `base + Σ_k w_{k,i} α_k` over the rejected entries `(k, α_k)` of the ledger.
pub(super) fn fallback_inflow(
    weights: &FallbackWeights,
    series: &WeightSeries,
    ledger: &[(u64, f64)],
    i: u64,
    base: f64,
) -> f64 {
    let mut acc = base;
    match weights {
        FallbackWeights::OneStep => {
            if let Some(&(k, level)) = ledger.last() {
                if k + 1 == i {
                    acc += level;
                }
            }
        }
        FallbackWeights::LaggedGamma => {
            for &(k, level) in ledger.iter().filter(|(k, _)| *k < i) {
                acc += series.gamma(i - k) * level;
            }
        }
        FallbackWeights::Explicit { rows } => {
            for &(k, level) in ledger.iter().filter(|(k, _)| *k < i) {
                let w = rows
                    .get((k - 1) as usize)
                    .and_then(|row| row.get((i - k - 1) as usize))
                    .copied()
                    .unwrap_or(0.0);
                acc += w * level;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use crate::procedures::{Decision, FallbackWeights, ProcedureConfig, ProcedureKind};
    use crate::series::SeriesSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn q2() -> SeriesSpec {
        SeriesSpec::Q { q: 2.0 }
    }

    fn levels(trace: &[Decision]) -> Vec<f64> {
        trace.iter().map(|d| d.level).collect()
    }

    fn run(cfg: &ProcedureConfig, ps: &[f64]) -> Vec<Decision> {
        cfg.build().unwrap().run(ps).unwrap()
    }

    #[test]
    fn alpha_spending_first_level() {
        let cfg = ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2).with_series(q2());
        let d = run(&cfg, &[0.05])[0];
        assert!((d.level - 0.2 * 6.0 / (PI * PI)).abs() < 1e-15);
        assert!((d.level - 0.121_585).abs() < 1e-6);
        assert!(d.rejected && d.selected && !d.candidate);
    }

    #[test]
    fn p_of_one_is_never_rejected() {
        for k in ProcedureKind::ALL {
            let cfg = ProcedureConfig::new(k, 0.2);
            assert!(run(&cfg, &[1.0; 20]).iter().all(|d| !d.rejected), "{k}");
        }
    }

    #[test]
    fn single_weight_passthrough() {
        let cfg = ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2)
            .with_series(SeriesSpec::Explicit { weights: vec![1.0] });
        let t = run(&cfg, &[0.5, 0.0]);
        assert_eq!(t[0].level, 0.2);
        assert_eq!(t[1].level, 0.0);
        assert!(t[1].rejected, "inclusive boundary at level zero");
    }

    #[test]
    fn invalid_p_is_rejected_with_index() {
        let mut s = ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2).build().unwrap();
        s.step(0.3).unwrap();
        let err = s.step(1.5).unwrap_err();
        assert_eq!(
            err,
            crate::Error::InvalidInput {
                index: 2,
                message: "p-value 1.5 is outside [0, 1]".into()
            }
        );
        assert!(s.step(f64::NAN).is_err());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn sidak_first_level() {
        let cfg = ProcedureConfig::new(ProcedureKind::OnlineSidak, 0.2).with_series(q2());
        let d = run(&cfg, &[0.5])[0];
        let want = 1.0 - 0.8f64.powf(6.0 / (PI * PI));
        assert!((d.level - want).abs() < 1e-15);
        // the quoted decimal 0.12687 is rounded loosely; the exact value is 0.1268562
        assert!((d.level - 0.12687).abs() < 2e-5);
    }

    #[test]
    fn sidak_full_weight_gives_alpha() {
        let cfg = ProcedureConfig::new(ProcedureKind::OnlineSidak, 0.2)
            .with_series(SeriesSpec::Explicit { weights: vec![1.0] });
        assert!((run(&cfg, &[0.5])[0].level - 0.2).abs() < 1e-16);
    }

    #[test]
    fn sidak_survives_tiny_weights() {
        let l = super::sidak_level(0.2, 1e-14);
        let want = -(0.8f64.ln()) * 1e-14;
        assert!(((l - want) / want).abs() < 1e-12);
    }

    #[test]
    fn fallback_one_step_recursion() {
        let cfg = ProcedureConfig::new(ProcedureKind::OnlineFallback1, 0.2).with_series(q2());
        let t = run(&cfg, &[0.0, 0.9, 0.9]);
        let a = &cfg.series.build().unwrap();
        assert_eq!(t[1].level, 0.2 * a.gamma(2) + t[0].level);
        assert_eq!(t[2].level, 0.2 * a.gamma(3));
    }

    #[test]
    fn fallback_lagged_gamma_expansion() {
        let cfg = ProcedureConfig::new(ProcedureKind::OnlineFallback, 0.2)
            .with_series(q2())
            .with_weights(FallbackWeights::LaggedGamma);
        let t = run(&cfg, &[0.0, 0.9, 0.9]);
        let s = cfg.series.build().unwrap();
        let want = 0.2 * s.gamma(3) + s.gamma(2) * t[0].level;
        assert!((t[2].level - want).abs() < 1e-16);
    }

    #[test]
    fn fallback_without_rejections_matches_spending() {
        let ps = [0.9, 0.5, 0.7, 0.3, 0.99];
        let spend = run(&ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2), &ps);
        for k in [ProcedureKind::OnlineFallback, ProcedureKind::OnlineFallback1] {
            let fb = run(&ProcedureConfig::new(k, 0.2), &ps);
            assert_eq!(levels(&fb), levels(&spend));
        }
    }

    #[test]
    fn explicit_fallback_weights() {
        let cfg = ProcedureConfig::new(ProcedureKind::OnlineFallback, 0.2)
            .with_series(q2())
            .with_weights(FallbackWeights::Explicit {
                rows: vec![vec![0.0, 0.5]],
            });
        let t = run(&cfg, &[0.0, 0.9, 0.9]);
        let s = cfg.series.build().unwrap();
        assert_eq!(t[1].level, 0.2 * s.gamma(2));
        assert_eq!(t[2].level, 0.2 * s.gamma(3) + 0.5 * t[0].level);
    }

    fn stream() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![3 => 0.0f64..=1.0, 1 => 0.0f64..0.01, 1 => Just(0.0)],
            1..120,
        )
    }

    proptest! {
        #[test]
        fn spending_budget_holds(ps in stream()) {
            let t = run(&ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2), &ps);
            let mut sum = 0.0;
            for d in &t {
                sum += d.level;
                prop_assert!(sum <= 0.2 * (1.0 + 1e-12));
                prop_assert!(!d.rejected || d.p_value <= d.level);
            }
        }

        #[test]
        fn sidak_product_bound(ps in stream()) {
            let cfg = ProcedureConfig::new(ProcedureKind::OnlineSidak, 0.2);
            let t = run(&cfg, &ps);
            let s = cfg.series.build().unwrap();
            let mut log_prod = 0.0;
            for d in &t {
                log_prod += (-d.level).ln_1p();
                let exact = s.partial_sum(d.index) * 0.8f64.ln();
                prop_assert!((log_prod - exact).abs() <= 1e-12 * exact.abs().max(1e-300) + 1e-15);
                prop_assert!(log_prod.exp() >= 0.8 * (1.0 - 1e-12));
                prop_assert!(d.level >= 0.2 * s.gamma(d.index));
            }
        }

        #[test]
        fn fallback_dominates_spending(ps in stream()) {
            let spend = run(&ProcedureConfig::new(ProcedureKind::AlphaSpending, 0.2), &ps);
            for k in [ProcedureKind::OnlineFallback, ProcedureKind::OnlineFallback1] {
                let fb = run(&ProcedureConfig::new(k, 0.2), &ps);
                for (a, b) in fb.iter().zip(&spend) {
                    prop_assert!(a.level >= b.level);
                }
            }
        }

        #[test]
        fn fallback_levels_are_monotone_in_rejections(ps in stream(), flip in 0usize..120) {
            // turning one rejection into a non-rejection never raises a later level
            let cfg = ProcedureConfig::new(ProcedureKind::OnlineFallback, 0.2);
            let base = run(&cfg, &ps);
            let k = flip % ps.len();
            if base[k].rejected {
                let mut altered = ps.clone();
                altered[k] = 1.0;
                let t = run(&cfg, &altered);
                for (a, b) in t.iter().zip(&base).skip(k + 1) {
                    prop_assert!(a.level <= b.level);
                }
            }
        }
    }
}
