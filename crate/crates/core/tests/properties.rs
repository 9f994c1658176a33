use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;

use citation_influence::classifier::{train_classifier, ContributionClass};
use citation_influence::document::{author_overlap, parse_paper, ParseOptions, Sentiment};
use citation_influence::influence::{local_influence, propagate, propagate_sweep, InfluenceGraph, PropagationParams};
use citation_influence::ranker::{ndcg, rank_references};
use citation_influence::sentiment::train_sentiment;
use citation_influence::span::{assign_folds, extract_span_features, AnnotatedToken, SpanScores};
use citation_influence::synth;

fn names() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set("[a-e]{1,2}", 0..6)
}

fn rebuild_with(g: &InfluenceGraph, edge: usize, value: f64) -> InfluenceGraph {
    let mut out = InfluenceGraph::new();
    for id in g.paper_ids() {
        out.add_paper(id, &[]).unwrap();
    }
    for (k, e) in g.edges().iter().enumerate() {
        let v = if k == edge { value } else { e.value };
        out.add_edge(&g.paper_ids()[e.citing], &g.paper_ids()[e.cited], v).unwrap();
    }
    out
}

fn class() -> impl Strategy<Value = ContributionClass> {
    prop::sample::select(ContributionClass::ALL.to_vec())
}

fn sentiment() -> impl Strategy<Value = Sentiment> {
    prop::sample::select(Sentiment::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_symmetric_and_bounded(a in names(), b in names()) {
        let ab = author_overlap(&a, &b);
        prop_assert_eq!(ab, author_overlap(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        if !a.is_empty() {
            prop_assert_eq!(author_overlap(&a, &a), 1.0);
        }
    }

    #[test]
    fn n_cit_counts_mentions(cites in prop::collection::vec(1u32..=4, 1..12)) {
        let body: Vec<String> = cites.iter().map(|k| format!("Results follow method [{k}].")).collect();
        let json = serde_json::json!({
            "paper_id": "q", "title": "Q", "authors": ["Ann Lee"], "year": 2020,
            "sections": [{"heading": "Method", "paragraphs": [body.join(" ")]}],
            "references": (1..=4).map(|k| serde_json::json!({
                "cit_id": k, "title": format!("R{k}"), "authors": ["Bo Chen"], "year": 2000
            })).collect::<Vec<_>>()
        });
        let paper = parse_paper(&json.to_string(), ParseOptions::default()).unwrap().paper;
        for r in &paper.references {
            let expected = cites.iter().filter(|&&k| k == r.cit_id).count();
            prop_assert_eq!(r.n_cit, expected);
            prop_assert_eq!(paper.mentions_of(r.cit_id).count(), expected);
        }
    }

    #[test]
    fn ndcg_in_unit_interval(labels in prop::collection::vec(0u8..=3, 1..20), seed in any::<u64>()) {
        let mut ranking: Vec<usize> = (0..labels.len()).collect();
        ranking.shuffle(&mut synth::rng(seed));
        let v = ndcg(&ranking, &labels);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn ranking_ignores_input_order(scores in prop::collection::vec(-3i32..3, 1..15), seed in any::<u64>()) {
        let scored: Vec<(u32, f64)> = scores.iter().enumerate().map(|(k, &s)| (k as u32 + 1, s as f64)).collect();
        let mut shuffled = scored.clone();
        shuffled.shuffle(&mut synth::rng(seed));
        let a = rank_references(&scored).unwrap();
        prop_assert_eq!(&a, &rank_references(&shuffled).unwrap());
        let ranks: BTreeSet<usize> = a.iter().map(|r| r.rank).collect();
        prop_assert_eq!(ranks, (1..=scores.len()).collect::<BTreeSet<_>>());
    }

    #[test]
    fn sweep_order_does_not_matter(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = synth::rng(seed);
        let g = synth::random_dag(&mut rng, n, 0.15);
        let params = PropagationParams::default();
        let jacobi = propagate(&g, &params).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let sweep = propagate_sweep(&g, &params, &order).unwrap();
        for (a, b) in jacobi.scores.iter().zip(&sweep.scores) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn undamped_dag_matches_citation_order(seed in any::<u64>(), n in 1usize..30) {
        let g = synth::random_dag(&mut synth::rng(seed), n, 0.2);
        let params = PropagationParams { damping: 1.0, ..Default::default() };
        let got = propagate(&g, &params).unwrap();
        // Generated edges run from n{i} to n{j} with i > j, so descending
        // ids visit every citer before the papers it cites.
        let mut ids: Vec<usize> = (0..n).collect();
        ids.sort_by(|&a, &b| g.paper_ids()[b].cmp(&g.paper_ids()[a]));
        let mut af = vec![0.0; n];
        for &k in &ids {
            af[k] = 1.0 + g.edges().iter().filter(|e| e.cited == k).map(|e| af[e.citing] * e.value).sum::<f64>();
        }
        for (a, b) in got.scores.iter().zip(&af) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn raising_influence_from_a_positive_citer_raises_the_cited(seed in any::<u64>(), bump in 0.01f64..0.5) {
        let g = synth::random_dag(&mut synth::rng(seed), 25, 0.2);
        prop_assume!(!g.edges().is_empty());
        let params = PropagationParams::default();
        let before = propagate(&g, &params).unwrap();
        let k = (seed as usize) % g.edges().len();
        let e = g.edges()[k].clone();
        prop_assume!(before.scores[e.citing] > 1e-6 && e.value + bump <= 1.0);
        let after = propagate(&rebuild_with(&g, k, e.value + bump), &params).unwrap();
        prop_assert!(after.scores[e.cited] > before.scores[e.cited]);
        prop_assert_eq!(after.scores[e.citing], before.scores[e.citing]);
    }

    #[test]
    fn local_influence_falls_with_rank(c in class(), total in 1usize..30) {
        let (lo, hi) = citation_influence::influence::CLASS_BANDS[c.code() as usize];
        let values: Vec<f64> = (1..=total).map(|r| local_influence(c, r, total).unwrap()).collect();
        prop_assert_eq!(values[0], hi);
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(values.iter().all(|v| (lo..=hi).contains(v)));
        if total > 1 {
            prop_assert!((values[total - 1] - lo).abs() < 1e-12);
        }
    }

    #[test]
    fn folds_partition_sentences(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = assign_folds(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), n);
        let mut sizes = vec![0usize; k];
        for &f in &folds {
            prop_assert!(f < k);
            sizes[f] += 1;
        }
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn f1_is_harmonic_mean(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
        let s = SpanScores::from_counts(tp, fp, fn_);
        if s.precision + s.recall > 0.0 {
            let h = 2.0 * s.precision * s.recall / (s.precision + s.recall);
            prop_assert!((s.f1 - h).abs() <= 1e-12);
        } else {
            prop_assert_eq!(s.f1, 0.0);
        }
    }

    #[test]
    fn span_features_ignore_gold(seed in any::<u64>()) {
        let s = synth::span_corpus(1, 0.0, seed).remove(0);
        let relabelled: Vec<AnnotatedToken> = s
            .tokens
            .iter()
            .map(|t| AnnotatedToken { gold_in_span: t.gold_in_span.map(|g| !g), ..t.clone() })
            .collect();
        prop_assert_eq!(
            extract_span_features(&s.tokens, s.target).unwrap(),
            extract_span_features(&relabelled, s.target).unwrap()
        );
    }

    #[test]
    fn sentiment_training_ignores_order_and_duplication(
        rows in prop::collection::vec(("[a-f]{1,3}( [a-f]{1,3}){0,4}", sentiment()), 1..25),
        seed in any::<u64>(),
        probe in "[a-f]{1,3}( [a-f]{1,3}){0,3}",
    ) {
        let model = train_sentiment(&rows, 1.0).unwrap();
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut synth::rng(seed));
        prop_assert_eq!(&model, &train_sentiment(&shuffled, 1.0).unwrap());
        let doubled: Vec<_> = rows.iter().chain(&rows).cloned().collect();
        let twice = train_sentiment(&doubled, 1.0).unwrap();
        for (a, b) in model.log_posterior(&probe).iter().zip(twice.log_posterior(&probe)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        prop_assert_eq!(model.classify(&probe), twice.classify(&probe));
    }

    #[test]
    fn classifier_ignores_duplication(seed in any::<u64>(), copies in 2usize..4) {
        let data = synth::classifier_dataset(40, seed);
        let once = train_classifier(&data, 1.0).unwrap();
        let many: Vec<_> = (0..copies).flat_map(|_| data.iter().copied()).collect();
        let repeated = train_classifier(&many, 1.0).unwrap();
        for (fv, _) in &data {
            let (a, b) = (once.posterior(fv), repeated.posterior(fv));
            for c in 0..4 {
                prop_assert!((a[c] - b[c]).abs() <= 1e-9);
            }
            prop_assert_eq!(once.classify(fv), repeated.classify(fv));
        }
    }
}
