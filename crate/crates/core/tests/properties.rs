use approx::assert_relative_eq;
use proptest::prelude::*;

use ese_lending::mean_variance::{mean_expansion_pair, mv_utility, profit_moments_pair, variance_expansion_pair};
use ese_lending::model::{
    binding_repayment, expected_profit_group, expected_profit_group_sum, expected_profit_pair,
    loan_ceiling_affordability, loan_ceiling_incentive, profit_distribution_group, CostModel, GroupSpec,
    MarketParams, ScoreLink,
};
use ese_lending::optimizer::{optimal_ese_group, optimal_ese_pair, SolverConfig};
use ese_lending::scoring::{
    category_weights, composite_score, metric_weights, Direction, MetricDef, MetricKind, MetricRecord,
    Normalization, Pillar, ScoringScheme,
};
use ese_lending::sim::{simulate_member_profit, simulate_member_profit_serial, SimConfig};
use ese_lending::RiskPreference;

fn market() -> impl Strategy<Value = MarketParams> {
    (0.5f64..3.0, 200.0f64..2000.0, 0.1f64..0.9, 10.0f64..300.0, 0.0f64..0.3, 0.05f64..0.99).prop_map(
        |(p, y_high, low_share, loan, epsilon, delta)| MarketParams {
            p,
            y_high,
            y_low: y_high * low_share,
            loan,
            epsilon,
            delta,
        },
    )
}

fn link() -> impl Strategy<Value = ScoreLink> {
    (0.0f64..0.9, 0.05f64..1.0).prop_map(|(b, span)| ScoreLink { k: (1.0 - b) * span / 100.0, b })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_matches_outcome_sum(
        params in market(),
        n in 1u32..=60,
        score in 0.0f64..=100.0,
        w in 1.0f64..1500.0,
        c in 0.0f64..3000.0,
    ) {
        let link = ScoreLink { k: 0.01, b: 0.0 };
        let cost = CostModel { c };
        let g = GroupSpec::new(n).unwrap();
        let closed = expected_profit_group(score, g, w, &params, &cost, &link).unwrap();
        let summed = expected_profit_group_sum(score, g, w, &params, &cost, &link).unwrap();
        let scale = closed.abs().max(summed.abs()).max(params.high_income());
        prop_assert!((closed - summed).abs() <= 1e-10 * scale, "{closed} vs {summed}");
    }

    #[test]
    fn pair_profit_is_group_profit_of_two(params in market(), score in 0.0f64..=100.0, w in 1.0f64..1500.0) {
        let link = ScoreLink { k: 0.01, b: 0.0 };
        let cost = CostModel { c: 1000.0 };
        let pair = expected_profit_pair(score, w, &params, &cost, &link).unwrap();
        let group = expected_profit_group(score, GroupSpec::pair(), w, &params, &cost, &link).unwrap();
        prop_assert!((pair - group).abs() <= 1e-9 * pair.abs().max(1.0));
    }

    #[test]
    fn incentive_ceiling_binds(params in market(), e in 0.001f64..=1.0) {
        let l1 = loan_ceiling_affordability(e, &params).unwrap();
        let l2 = loan_ceiling_incentive(e, &params).unwrap();
        prop_assert!(l1 > l2, "L1={l1} L2={l2} at e={e}");
    }

    #[test]
    fn incentive_ceiling_rises_with_success(params in market(), e in 0.001f64..0.99, de in 1e-4f64..0.01) {
        let a = loan_ceiling_incentive(e, &params).unwrap();
        let b = loan_ceiling_incentive((e + de).min(1.0), &params).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn break_even_repayment_recovers_the_loan(params in market(), n in 1u32..=40, e in 0.01f64..=1.0) {
        let g = GroupSpec::new(n).unwrap();
        let w = binding_repayment(e, g, &params).unwrap().w;
        let at_least_one = 1.0 - (1.0 - e).powi(n as i32);
        assert_relative_eq!(w * at_least_one, params.gross_loan(), max_relative = 1e-12);
        // more peers to share the risk never raises the obligation
        let bigger = binding_repayment(e, GroupSpec::new(n + 1).unwrap(), &params).unwrap().w;
        prop_assert!(bigger <= w * (1.0 + 1e-12));
    }

    #[test]
    fn profit_falls_with_repayment(
        params in market(),
        n in 1u32..=20,
        score in 1.0f64..=100.0,
        w in 1.0f64..1000.0,
        dw in 0.1f64..50.0,
    ) {
        let link = ScoreLink { k: 0.01, b: 0.0 };
        let cost = CostModel { c: 1000.0 };
        let g = GroupSpec::new(n).unwrap();
        let a = expected_profit_group(score, g, w, &params, &cost, &link).unwrap();
        let b = expected_profit_group(score, g, w + dw, &params, &cost, &link).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn outcome_masses_sum_to_one(params in market(), n in 1u32..=200, e in 0.0f64..=1.0) {
        let d = profit_distribution_group(e, GroupSpec::new(n).unwrap(), 150.0, &params).unwrap();
        let mass: f64 = d.outcomes().iter().map(|o| o.probability).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
        prop_assert!(d.variance() >= 0.0);
    }

    #[test]
    fn pair_optimum_is_group_optimum_of_two(params in market(), link in link(), c in 50.0f64..5000.0) {
        let cost = CostModel { c };
        let closed = optimal_ese_pair(&params, &cost, &link);
        let solved = optimal_ese_group(GroupSpec::pair(), &params, &cost, &link, &SolverConfig::default()).unwrap();
        prop_assert!((closed.score - solved.score).abs() <= 1e-8, "{closed:?} vs {solved:?}");
    }

    #[test]
    fn expanded_moments_match_enumeration(params in market(), e in 0.0f64..=1.0, w in 1.0f64..1500.0) {
        let m = profit_moments_pair(e, w, &params).unwrap();
        let mean = mean_expansion_pair(e, w, &params);
        let var = variance_expansion_pair(e, w, &params);
        let second = m.variance + m.mean * m.mean;
        prop_assert!((m.mean - mean).abs() <= 1e-12 * params.high_income().max(mean.abs()) * 4.0);
        prop_assert!((m.variance - var).abs() <= 1e-10 * m.variance.abs() + 64.0 * f64::EPSILON * second);
    }

    #[test]
    fn risk_aversion_never_raises_utility(
        params in market(),
        link in link(),
        score in 0.0f64..=100.0,
        gamma in 0.0f64..2.0,
        w in 1.0f64..800.0,
    ) {
        let cost = CostModel { c: 1000.0 };
        let neutral = mv_utility(score, w, &params, RiskPreference::neutral(), &cost, &link).unwrap();
        let averse = mv_utility(score, w, &params, RiskPreference { gamma }, &cost, &link).unwrap();
        prop_assert!(averse <= neutral + 1e-9 * neutral.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parallel_simulation_is_bitwise_serial(seed in any::<u64>(), e in 0.0f64..=1.0, n in 1u32..=6, trials in 1u64..200_000) {
        let params = MarketParams::default();
        let cfg = SimConfig::new(trials, seed).unwrap();
        let g = GroupSpec::new(n).unwrap();
        let a = simulate_member_profit(e, g, 150.0, &params, &cfg).unwrap();
        let b = simulate_member_profit_serial(e, g, 150.0, &params, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn scheme_and_records() -> impl Strategy<Value = (ScoringScheme, Vec<MetricRecord>)> {
    let metric = (0usize..3, any::<bool>(), any::<bool>());
    (proptest::collection::vec(metric, 1..8), 2usize..7, any::<bool>()).prop_flat_map(|(defs, farmers, zscore)| {
        let defs: Vec<MetricDef> = defs
            .into_iter()
            .enumerate()
            .map(|(i, (pillar, lower, binary))| {
                MetricDef::new(
                    format!("m{i}"),
                    Pillar::ALL[pillar],
                    if lower { Direction::LowerBetter } else { Direction::HigherBetter },
                    if binary { MetricKind::Binary } else { MetricKind::Continuous },
                )
            })
            .collect();
        let method = if zscore { Normalization::ZScoreClipped } else { Normalization::MinMax };
        let cells = defs.len() * farmers;
        let kinds: Vec<MetricKind> = defs.iter().map(|d| d.kind).collect();
        let scheme = ScoringScheme::new(defs, method).unwrap();
        proptest::collection::vec(-1e3f64..1e3, cells).prop_map(move |values| {
            let mut records = Vec::new();
            for f in 0..farmers {
                for (m, kind) in kinds.iter().enumerate() {
                    let v = values[f * kinds.len() + m];
                    let value = match kind {
                        MetricKind::Binary => f64::from(u8::from(v > 0.0)),
                        MetricKind::Continuous => v,
                    };
                    records.push(MetricRecord { farmer_id: format!("f{f:02}"), metric_id: format!("m{m}"), value });
                }
            }
            (scheme.clone(), records)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scores_are_bounded_and_weights_conserved((scheme, records) in scheme_and_records()) {
        let cw = category_weights(&scheme).unwrap();
        prop_assert!((cw.total() - 1.0).abs() <= 1e-12);
        let total: f64 = metric_weights(&scheme).unwrap().iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for s in composite_score(&records, &scheme).unwrap() {
            prop_assert!((0.0..=100.0).contains(&s.score), "{s:?}");
        }
    }

    #[test]
    fn record_order_does_not_matter((scheme, records) in scheme_and_records(), seed in any::<u64>()) {
        let mut shuffled = records.clone();
        // deterministic Fisher-Yates from the seed
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(composite_score(&records, &scheme).unwrap(), composite_score(&shuffled, &scheme).unwrap());
    }

    #[test]
    fn improving_a_metric_never_lowers_own_score((scheme, records) in scheme_and_records(), pick in any::<prop::sample::Index>()) {
        let i = pick.index(records.len());
        let def = scheme.metrics.iter().find(|m| m.id == records[i].metric_id).unwrap().clone();
        prop_assume!(def.kind == MetricKind::Continuous && scheme.normalization == Normalization::MinMax);
        let mut better = records.clone();
        better[i].value += match def.direction {
            Direction::HigherBetter => 10.0,
            Direction::LowerBetter => -10.0,
        };
        let farmer = records[i].farmer_id.clone();
        let score_of = |rs: &[MetricRecord]| {
            composite_score(rs, &scheme).unwrap().into_iter().find(|s| s.farmer_id == farmer).unwrap().score
        };
        prop_assert!(score_of(&better) >= score_of(&records) - 1e-9);
    }
}
