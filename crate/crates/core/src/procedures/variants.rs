//! Exponent budgets of the Sidak-type hybrids.
//!
//! Discard-Fallback needs no extra rule: it runs the fallback recursion on
//! the selected subsequence (its weight index is the selected count) and
//! scales the result by τ_i.

use super::config::SidakBudget;
use super::ProcedureKind;

/// β_i for a Sidak-family procedure given γ at its weight index.
pub(super) fn sidak_beta(kind: ProcedureKind, budget: SidakBudget, tau: f64, lambda: f64, gamma: f64) -> f64 {
    match kind {
        ProcedureKind::AdaptiveSidak => (1.0 - lambda) * gamma,
        ProcedureKind::AddisSidak => match budget {
            SidakBudget::Scaled => (tau - lambda) / tau * gamma,
            SidakBudget::Printed => (1.0 - lambda) * gamma,
        },
        _ => gamma,
    }
}

#[cfg(test)]
mod tests {
    use crate::procedures::{Decision, FallbackWeights, ProcedureConfig, ProcedureKind, SidakBudget};
    use crate::series::SeriesSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn run(cfg: &ProcedureConfig, ps: &[f64]) -> Vec<Decision> {
        cfg.build().unwrap().run(ps).unwrap()
    }

    fn q2(kind: ProcedureKind) -> ProcedureConfig {
        ProcedureConfig::new(kind, 0.2).with_series(SeriesSpec::Q { q: 2.0 })
    }

    const G1: f64 = 6.0 / (PI * PI);

    #[test]
    fn discard_sidak_first_level() {
        let d = run(&q2(ProcedureKind::DiscardSidak), &[0.3])[0];
        let want = 0.5 * (1.0 - 0.8f64.powf(G1));
        assert!((d.level - want).abs() < 1e-15);
        // the quoted decimal 0.063434 is rounded loosely; the exact value is 0.0634281
        assert!((d.level - 0.063_434).abs() < 1e-5);
    }

    #[test]
    fn adaptive_sidak_first_level() {
        let d = run(&q2(ProcedureKind::AdaptiveSidak), &[0.3])[0];
        assert!((d.beta.unwrap() - 0.5 * G1).abs() < 1e-15);
        assert!((d.level - (1.0 - 0.8f64.powf(0.5 * G1))).abs() < 1e-15);
    }

    #[test]
    fn addis_sidak_printed_first_level() {
        let cfg = q2(ProcedureKind::AddisSidak).with_sidak_budget(SidakBudget::Printed);
        let d = run(&cfg, &[0.3])[0];
        assert!((d.level - 0.5 * (1.0 - 0.8f64.powf(0.75 * G1))).abs() < 1e-15);
    }

    #[test]
    fn addis_sidak_scaled_first_level() {
        let d = run(&q2(ProcedureKind::AddisSidak), &[0.3])[0];
        assert!((d.level - 0.5 * (1.0 - 0.8f64.powf(0.5 * G1))).abs() < 1e-15);
    }

    #[test]
    fn discard_sidak_needs_tau_at_least_alpha() {
        assert!(q2(ProcedureKind::DiscardSidak).with_tau(0.1).build().is_err());
        assert!(q2(ProcedureKind::AddisSidak).with_tau(0.15).with_lambda(0.1).build().is_err());
        assert!(q2(ProcedureKind::DiscardFallback).with_tau(0.1).build().is_err());
    }

    #[test]
    fn discard_fallback_recycles_to_next_selected() {
        let cfg = q2(ProcedureKind::DiscardFallback).with_weights(FallbackWeights::OneStep);
        let s = cfg.series.build().unwrap();
        // first selected index rejected, then a discarded one, then the next selected
        let t = run(&cfg, &[0.0, 0.9, 0.3, 0.3]);
        assert!(t[0].rejected && !t[1].selected);
        assert_eq!(t[1].level, 0.5 * (0.2 * s.gamma(2) + t[0].level));
        assert_eq!(t[2].level, 0.5 * (0.2 * s.gamma(2) + t[0].level));
        assert_eq!(t[3].level, 0.5 * (0.2 * s.gamma(3)));
    }

    #[test]
    fn discard_fallback_without_rejections_is_discard_spending() {
        let ps = [0.9, 0.45, 0.7, 0.3, 0.99, 0.2];
        let a = run(&q2(ProcedureKind::DiscardFallback), &ps);
        let b = run(&q2(ProcedureKind::Discard), &ps);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.level - y.level).abs() <= 1e-17);
        }
    }

    fn stream() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![3 => 0.0f64..=1.0, 1 => 0.0f64..0.02, 1 => Just(0.25), 1 => Just(0.5)],
            1..100,
        )
    }

    fn bits(t: &[Decision]) -> Vec<(u64, bool)> {
        t.iter().map(|d| (d.level.to_bits(), d.rejected)).collect()
    }

    proptest! {
        #[test]
        fn sidak_reductions(ps in stream(), tau in 0.3f64..1.0, lambda in 0.01f64..0.29) {
            let sidak = bits(&run(&q2(ProcedureKind::OnlineSidak), &ps));
            let ds1 = bits(&run(&q2(ProcedureKind::DiscardSidak).with_tau(1.0), &ps));
            let as0 = bits(&run(&q2(ProcedureKind::AdaptiveSidak).with_lambda(0.0), &ps));
            prop_assert_eq!(&ds1, &sidak);
            prop_assert_eq!(&as0, &sidak);
            for budget in [SidakBudget::Scaled, SidakBudget::Printed] {
                let addis = |l: f64, t: f64| bits(&run(&q2(ProcedureKind::AddisSidak).with_sidak_budget(budget).with_lambda(l).with_tau(t), &ps));
                prop_assert_eq!(&addis(0.0, 1.0), &sidak);
                let ds = bits(&run(&q2(ProcedureKind::DiscardSidak).with_tau(tau), &ps));
                prop_assert_eq!(&addis(0.0, tau), &ds);
                let ad = bits(&run(&q2(ProcedureKind::AdaptiveSidak).with_lambda(lambda), &ps));
                prop_assert_eq!(&addis(lambda, 1.0), &ad);
            }
            let fb = bits(&run(&q2(ProcedureKind::OnlineFallback), &ps));
            let df = bits(&run(&q2(ProcedureKind::DiscardFallback).with_tau(1.0), &ps));
            prop_assert_eq!(df, fb);
        }

        #[test]
        fn beta_budgets(ps in stream(), tau in 0.3f64..1.0, lambda in 0.0f64..0.29) {
            let t = run(&q2(ProcedureKind::DiscardSidak).with_tau(tau), &ps);
            let s: f64 = t.iter().filter(|d| d.selected).map(|d| d.beta.unwrap()).sum();
            prop_assert!(s <= 1.0 + 1e-12);
            let t = run(&q2(ProcedureKind::AdaptiveSidak).with_lambda(lambda), &ps);
            let s: f64 = t.iter().filter(|d| !d.candidate).map(|d| d.beta.unwrap() / (1.0 - d.lambda)).sum();
            prop_assert!(s <= 1.0 + 1e-12);
            for budget in [SidakBudget::Scaled, SidakBudget::Printed] {
                let t = run(&q2(ProcedureKind::AddisSidak).with_sidak_budget(budget).with_lambda(lambda).with_tau(tau), &ps);
                let s: f64 = t.iter().filter(|d| d.selected && !d.candidate).map(|d| d.beta.unwrap() / (1.0 - d.lambda)).sum();
                prop_assert!(s <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn sidak_levels_dominate_spending_levels(x in 0.0f64..=1.0, alpha in 0.001f64..0.5) {
            prop_assert!(super::super::sidak_level(alpha, x) >= alpha * x * (1.0 - 1e-15));
        }
    }
}
