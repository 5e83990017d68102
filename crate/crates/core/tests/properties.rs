use std::collections::BTreeSet;

use aeskit_core::corpus::{self, subset_sizes, Corpus, EssayRecord, SplitSpec};
use aeskit_core::ensemble::{apply_thresholds, hard_vote, weighted_merge, MergeWeights, ThresholdSet};
use aeskit_core::metrics::{confusion, qwk};
use aeskit_core::ordinal::{decode, encode, to_distribution};
use aeskit_core::text::{fit_vectorizer, VectorizerKind};
use proptest::prelude::*;

fn labels(len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=6, len)
}

fn pairs() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1usize..80).prop_flat_map(|n| (labels(n), labels(n)))
}

fn distribution() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(0.0f64..1.0).prop_map(|mut d| {
        d[0] += 1e-3;
        let s: f64 = d.iter().sum();
        d.iter_mut().for_each(|v| *v /= s);
        d
    })
}

fn corpus_of(scores: &[u8]) -> Corpus {
    Corpus::new(
        scores
            .iter()
            .enumerate()
            .map(|(i, &s)| EssayRecord { essay_id: format!("id{i}"), text: String::new(), score: Some(s) })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn qwk_is_symmetric_and_bounded((a, b) in pairs()) {
        match (qwk(&a, &b), qwk(&b, &a)) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.to_bits(), y.to_bits());
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&x));
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome {:?}", other),
        }
    }

    #[test]
    fn qwk_ignores_pair_order((a, b) in pairs(), rot in 0usize..80) {
        let k = rot % a.len();
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.rotate_left(k);
        b2.rotate_left(k);
        prop_assert_eq!(qwk(&a, &b).ok(), qwk(&a2, &b2).ok());
        prop_assert_eq!(confusion(&a, &b).unwrap(), confusion(&a2, &b2).unwrap());
    }

    #[test]
    fn split_partitions_corpus(scores in prop::collection::vec(1u8..=6, 12..300), seed in any::<u64>(), stratified in any::<bool>()) {
        let c = corpus_of(&scores);
        let spec = SplitSpec { ratios: [0.8, 0.1, 0.1], seed, stratified };
        let s = corpus::split(&c, &spec).unwrap();
        let all: BTreeSet<&String> = s.train.iter().chain(&s.validation).chain(&s.test).collect();
        prop_assert_eq!(all.len(), scores.len());
        prop_assert_eq!((s.train.len(), s.validation.len(), s.test.len()), subset_sizes(scores.len(), &spec.ratios));
        prop_assert_eq!(corpus::split(&c, &spec).unwrap(), s);
    }

    #[test]
    fn merge_stays_on_simplex(
        rows in prop::collection::vec((distribution(), distribution(), distribution()), 1..20),
        raw in prop::array::uniform3(0.01f64..1.0),
    ) {
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let models: Vec<Vec<[f64; 6]>> = vec![
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
        ];
        let merged = weighted_merge(&models, &MergeWeights::new(w).unwrap()).unwrap();
        for d in merged {
            prop_assert!(d.iter().all(|&p| p >= 0.0));
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vote_returns_a_cast_label(models in (1usize..6, 1usize..30).prop_flat_map(|(m, n)| prop::collection::vec(labels(n), m))) {
        let voted = hard_vote(&models).unwrap();
        for (i, v) in voted.iter().enumerate() {
            prop_assert!(models.iter().any(|m| m[i] == *v));
        }
    }

    #[test]
    fn thresholds_are_monotone(mut scores in prop::collection::vec(-2.0f64..9.0, 1..50)) {
        scores.sort_by(f64::total_cmp);
        let out = apply_thresholds(&scores, &ThresholdSet::INITIAL);
        prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(out.iter().all(|l| (1..=6).contains(l)));
    }

    #[test]
    fn ordinal_distribution_is_a_distribution(p in prop::array::uniform5(0.0f64..=1.0)) {
        let d = to_distribution(&p);
        prop_assert!(d.iter().all(|&v| v >= 0.0));
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let s = decode(&p);
        prop_assert!((1..=6).contains(&s));
    }

    #[test]
    fn tfidf_rows_have_unit_norm(docs in prop::collection::vec("[a-e]{1,3}( [a-e]{1,3}){0,12}", 1..15)) {
        let model = fit_vectorizer(&docs, VectorizerKind::Tfidf, 1000, 1).unwrap();
        for d in &docs {
            let row = model.transform(d);
            let norm: f64 = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            prop_assert!(row.is_empty() || (norm - 1.0).abs() < 1e-12 || norm == 0.0);
            prop_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }
}

#[test]
fn ordinal_codes_round_trip() {
    for s in 1..=6u8 {
        let code = encode(s).unwrap();
        assert_eq!(code.iter().filter(|&&v| v == 1.0).count(), usize::from(s - 1));
        assert_eq!(decode(&code), s);
    }
    assert!(encode(0).is_err());
    assert!(encode(7).is_err());
}

#[test]
fn count_rows_hold_term_counts() {
    let model = fit_vectorizer(&["the cat sat", "the dog"], VectorizerKind::Count, 100, 1).unwrap();
    let row = model.transform("The the cat bird");
    let named: Vec<(&str, f64)> = row.iter().map(|&(c, v)| (model.vocabulary()[c as usize].as_str(), v)).collect();
    assert!(named.contains(&("the", 2.0)));
    assert!(named.contains(&("cat", 1.0)));
    assert_eq!(named.len(), 2);
}
