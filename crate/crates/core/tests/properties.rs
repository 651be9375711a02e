use early_benefit::benefit::{benefit_value, build_targets, total_benefit};
use early_benefit::eval::{accuracy_at_tolerance, pareto_indices, pareto_mask, SweepPoint};
use early_benefit::neural::attention;
use early_benefit::neural::Activation;
use early_benefit::stream::decide;
use early_benefit::training::{prefix_ticks, split_indices};
use early_benefit::{evaluate, AttentionMode, BenefitSpec, DecisionPolicy, DecisionRecord, Mode, SeriesInstance};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = BenefitSpec> {
    (2usize..=4, any::<bool>(), 0.01f64..5.0)
        .prop_flat_map(|(c, outcome, s)| {
            (
                Just(c),
                Just(outcome),
                Just(s),
                prop::collection::vec(0.0f64..40.0, c * c),
                0..c,
            )
        })
        .prop_map(|(c, outcome, s, flat, default)| {
            let cost = (0..c)
                .map(|l| (0..c).map(|k| if l == k { 0.0 } else { flat[l * c + k] }).collect())
                .collect();
            let (mode, default) = if outcome {
                (Mode::Outcome, Some(default))
            } else {
                (Mode::Type, None)
            };
            BenefitSpec::new(mode, s, cost, default).unwrap()
        })
}

fn record_strategy(classes: usize) -> impl Strategy<Value = DecisionRecord> {
    (0..classes, prop::option::of(0..classes), 1usize..40).prop_flat_map(|(truth, pred, len)| {
        (1..=len).prop_map(move |tick| DecisionRecord::new(truth, pred, tick, len))
    })
}

fn points_strategy() -> impl Strategy<Value = Vec<SweepPoint>> {
    prop::collection::vec((0u8..8, 0u8..8), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (t, a))| SweepPoint::new(format!("p{i}"), t as f64 / 8.0, a as f64 / 8.0))
            .collect()
    })
}

proptest! {
    #[test]
    fn targets_match_closed_form(spec in spec_strategy(), len in 1usize..25, truth_seed in 0usize..100) {
        let truth = truth_seed % spec.num_classes();
        let inst = SeriesInstance::new("p", truth, 1, vec![0.0; len]).unwrap();
        for model in spec.active_classes() {
            let b = build_targets(&spec, &inst, model).unwrap();
            for t in 1..=len {
                prop_assert_eq!(b.at(t), (len - t) as f64 * spec.s - spec.cost[truth][model]);
            }
        }
    }

    #[test]
    fn default_class_is_worth_nothing(len in 1usize..25, t_seed in 0usize..100, m in 0.0f64..50.0, truth in 0usize..2) {
        let spec = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, m, Some(0)).unwrap();
        let t = 1 + t_seed % len;
        prop_assert_eq!(benefit_value(&spec, truth, 0, t, len).unwrap(), 0.0);
    }

    #[test]
    fn targets_decrease_by_s_per_tick(spec in spec_strategy(), len in 2usize..25) {
        let inst = SeriesInstance::new("p", 0, 1, vec![0.0; len]).unwrap();
        for model in spec.active_classes() {
            let b = build_targets(&spec, &inst, model).unwrap();
            for w in b.values.windows(2) {
                prop_assert!((w[0] - w[1] - spec.s).abs() <= 1e-9 * (1.0 + w[0].abs()));
            }
        }
    }

    #[test]
    fn total_benefit_never_rises_with_cost(recs in prop::collection::vec(record_strategy(2), 1..30), m1 in 0.0f64..100.0, dm in 0.0f64..100.0) {
        let lo = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, m1, Some(0)).unwrap();
        let hi = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, m1 + dm, Some(0)).unwrap();
        prop_assert!(total_benefit(&hi, &recs).unwrap() <= total_benefit(&lo, &recs).unwrap());
    }

    #[test]
    fn larger_margin_never_fires_when_smaller_does_not(
        est in prop::collection::vec(-5.0f64..5.0, 2..5),
        d1 in 0.0f64..3.0,
        dd in 0.0f64..3.0,
    ) {
        let pairs: Vec<(usize, f64)> = est.iter().copied().enumerate().collect();
        let small = decide(&DecisionPolicy::typed(d1, AttentionMode::Full), &pairs);
        let large = decide(&DecisionPolicy::typed(d1 + dd, AttentionMode::Full), &pairs);
        if let Some(c) = large {
            prop_assert_eq!(small, Some(c));
        }
    }

    #[test]
    fn outcome_fires_exactly_when_some_estimate_is_positive(b in -5.0f64..5.0) {
        let fired = decide(&DecisionPolicy::outcome(AttentionMode::Full), &[(1, b)]);
        prop_assert_eq!(fired.is_some(), b > 0.0);
    }

    #[test]
    fn typed_decision_is_the_positive_argmax(est in prop::collection::vec(-5.0f64..5.0, 2..5)) {
        let pairs: Vec<(usize, f64)> = est.iter().copied().enumerate().collect();
        if let Some(c) = decide(&DecisionPolicy::typed(0.0, AttentionMode::Full), &pairs) {
            prop_assert!(est[c] > 0.0);
            prop_assert!(est.iter().enumerate().all(|(k, &v)| v < est[c] || (v == est[c] && k >= c)));
        }
    }

    #[test]
    fn pareto_front_is_exactly_the_undominated_set(points in points_strategy()) {
        let mut got = pareto_indices(&points);
        got.sort_unstable();
        let want: Vec<usize> = (0..points.len())
            .filter(|&i| {
                let p = &points[i];
                let dominated = points.iter().any(|q| {
                    q.tardiness <= p.tardiness && q.accuracy >= p.accuracy && (q.tardiness < p.tardiness || q.accuracy > p.accuracy)
                });
                let repeat = points[..i].iter().any(|q| q.tardiness == p.tardiness && q.accuracy == p.accuracy);
                !dominated && !repeat
            })
            .collect();
        prop_assert_eq!(&got, &want);
        let mask = pareto_mask(&points);
        for i in got {
            prop_assert!(mask[i]);
        }
    }

    #[test]
    fn tolerance_curve_is_monotone(points in points_strategy(), t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let a = accuracy_at_tolerance(&points, t1);
        let b = accuracy_at_tolerance(&points, t1 + dt);
        match (a, b) {
            (Some(x), Some(y)) => prop_assert!(y >= x),
            (Some(_), None) => prop_assert!(false, "a looser tolerance lost every point"),
            _ => {}
        }
    }

    #[test]
    fn evaluation_ignores_record_order(recs in prop::collection::vec(record_strategy(3), 1..30), rot in 0usize..30) {
        let spec = BenefitSpec::from_ms_ratio(Mode::Type, 3, 7.0, None).unwrap();
        let a = evaluate(&recs, &spec, 2).unwrap();
        let mut shuffled = recs.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let b = evaluate(&shuffled, &spec, 2).unwrap();
        prop_assert_eq!((a.n, a.precision, a.recall, a.accuracy, a.unclassified), (b.n, b.precision, b.recall, b.accuracy, b.unclassified));
        prop_assert!((a.tardiness - b.tardiness).abs() <= 1e-12);
        prop_assert!((a.total_benefit - b.total_benefit).abs() <= 1e-9);
    }

    #[test]
    fn f1_is_the_harmonic_mean(recs in prop::collection::vec(record_strategy(2), 1..30)) {
        let spec = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, 5.0, Some(0)).unwrap();
        let r = evaluate(&recs, &spec, 1).unwrap();
        let want = if r.precision + r.recall == 0.0 { 0.0 } else { 2.0 * r.precision * r.recall / (r.precision + r.recall) };
        prop_assert!((r.f1 - want).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&r.tardiness) && r.tardiness > 0.0);
    }

    #[test]
    fn split_partitions_and_keeps_every_class(labels in prop::collection::vec(0usize..3, 2..60), frac in 0.5f64..0.95, seed in any::<u64>()) {
        let (train, val) = split_indices(&labels, frac, seed).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        prop_assert!(!train.is_empty() && !val.is_empty());
        let enough = (0..3).all(|c| { let n = labels.iter().filter(|&&l| l == c).count(); n == 0 || n >= 2 });
        if enough {
            for c in 0..3 {
                if labels.contains(&c) {
                    prop_assert!(train.iter().any(|&i| labels[i] == c));
                }
            }
        }
        prop_assert_eq!(split_indices(&labels, frac, seed).unwrap(), (train, val));
    }

    #[test]
    fn prefix_ticks_cover_the_series(len in 1usize..200, stride in 1usize..20) {
        let ticks = prefix_ticks(len, stride);
        prop_assert_eq!(ticks.len(), len.div_ceil(stride) + usize::from((len - 1) % stride != 0));
        prop_assert_eq!(ticks[0], 1);
        prop_assert_eq!(*ticks.last().unwrap(), len);
        prop_assert!(ticks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn attention_weights_form_a_distribution(
        hd in 1usize..6,
        t in 1usize..20,
        seed in prop::collection::vec(-3.0f64..3.0, 200),
        shift in -2.0f64..2.0,
    ) {
        let hiddens: Vec<f64> = seed[..hd * t].to_vec();
        let query: Vec<f64> = seed[150..150 + hd].to_vec();
        let w = vec![0.1; 2 * hd * hd];
        let out = attention(&hiddens, hd, &query, &w, Activation::Tanh);
        let sum: f64 = out.alpha.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(out.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
        // shifting every hidden state along the query direction shifts every score equally
        let norm: f64 = query.iter().map(|q| q * q).sum();
        if norm > 1e-6 {
            let moved: Vec<f64> = hiddens.iter().enumerate().map(|(i, h)| h + shift * query[i % hd] / norm).collect();
            let out2 = attention(&moved, hd, &query, &w, Activation::Tanh);
            for (a, b) in out.alpha.iter().zip(&out2.alpha) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
