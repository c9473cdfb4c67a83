use std::collections::BTreeSet;

use labelbench_core::ingest::Corpus;
use labelbench_core::sentiment::{LexEntry, Lexicon};
use labelbench_core::synthetic::{generate, SyntheticConfig};
use labelbench_core::time::{Level, Period, PeriodRange};
use labelbench_core::topics::{
    fit_lda, members, prepare_documents, topic_scores, topic_sentiment, word_cloud_weights, LdaParams, TopicModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn stochastic_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(1e-3..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn random_model(rng: &mut ChaCha8Rng, d: usize, k: usize, v: usize) -> TopicModel {
    TopicModel {
        params: LdaParams::with_k(k),
        level: Level::Overall,
        window: None,
        account_ids: (0..d).map(|i| format!("a{i:04}")).collect(),
        vocabulary: (0..v).map(|i| format!("w{i:04}")).collect(),
        phi: (0..k).map(|_| stochastic_row(rng, v)).collect(),
        theta: (0..d).map(|_| stochastic_row(rng, k)).collect(),
    }
}

#[test]
fn topic_scores_match_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = random_model(&mut rng, 100, 20, 5);
    let got = topic_scores(&m);
    for k in 0..20 {
        let mut want = 0.0;
        for d in 0..100 {
            want += m.theta[d][k];
        }
        assert!((got[k] - want).abs() < 1e-12);
    }
    assert!((got.iter().sum::<f64>() - 100.0).abs() < 1e-9);
}

#[test]
fn word_cloud_weights_are_row_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_model(&mut rng, 5, 4, 300);
    let ids = BTreeSet::from([1, 3]);
    let all = word_cloud_weights(&m, &ids, 300).unwrap();
    assert_eq!(all.len(), 300);
    for (w, weight) in &all {
        let j = m.vocabulary.iter().position(|x| x == w).unwrap();
        assert!((weight - (m.phi[1][j] + m.phi[3][j])).abs() < 1e-15);
    }
    assert!((all.iter().map(|x| x.1).sum::<f64>() - 2.0).abs() < 1e-9);
    assert!(all.windows(2).all(|p| p[0].1 >= p[1].1));
    let top = word_cloud_weights(&m, &BTreeSet::from([2]), 100).unwrap();
    assert_eq!(top.len(), 100);
    let mut row: Vec<f64> = m.phi[2].clone();
    row.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_eq!(top.iter().map(|x| x.1).collect::<Vec<_>>(), row[..100].to_vec());
}

#[test]
fn sentiment_stays_in_range_over_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let v = rng.gen_range(1..60);
        let k = rng.gen_range(1..6);
        let m = random_model(&mut rng, 2, k, v);
        let mut entries = Vec::new();
        for w in &m.vocabulary {
            if rng.gen_bool(0.5) {
                entries.push((w.clone(), LexEntry { polarity: rng.gen_range(-1.0..=1.0), subjectivity: rng.gen_range(0.0..=1.0) }));
            }
        }
        let lex = Lexicon::from_entries(entries);
        for (p, s) in topic_sentiment(&m, &lex, 30) {
            assert!((-1.0..=1.0).contains(&p) && (0.0..=1.0).contains(&s));
        }
    }
}

proptest! {
    #[test]
    fn membership_is_antitone(seed in any::<u64>(), t1 in 0.001f64..0.999, t2 in 0.001f64..0.999, topics in prop::collection::btree_set(0usize..6, 1..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 30, 6, 4);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let a = members(&m, &topics, lo).unwrap();
        let b = members(&m, &topics, hi).unwrap();
        prop_assert!(b.is_subset(&a));
        let all = members(&m, &topics, 1e-12).unwrap();
        prop_assert_eq!(all.len(), 30);
        prop_assert!(members(&m, &topics, 1.0 - 1e-12).unwrap().is_empty());
    }
}

fn corpus() -> Corpus {
    generate(&SyntheticConfig { accounts: 30, tweets_per_account: (5, 25), spambot_fraction: 0.5, years: (2013, 2015), seed: 9 })
}

#[test]
fn window_matches_filter_then_prepare() {
    let c = corpus();
    let y2014: Period = "2014".parse().unwrap();
    let window = PeriodRange::single(y2014);
    let got = prepare_documents(&c, Level::Year, Some(window)).unwrap();
    let mut filtered = c.clone();
    filtered.tweets.retain(|t| y2014.contains(t.created_at));
    let want = prepare_documents(&filtered, Level::Overall, None).unwrap();
    assert_eq!(got.documents, want.documents);
    assert_eq!(got.vocabulary, want.vocabulary);
    assert!(
        got.documents.len() < c.len() || got.documents.iter().all(|(id, _)| c.tweets_of(id).iter().any(|t| y2014.contains(t.created_at)))
    );
}

#[test]
fn fitted_models_are_stochastic_and_closed_over_vocabulary() {
    let c = corpus();
    let docs = prepare_documents(&c, Level::Overall, None).unwrap();
    let sorted = docs.vocabulary.windows(2).all(|w| w[0] < w[1]);
    assert!(sorted);
    for (_, toks) in &docs.documents {
        assert!(toks.iter().all(|t| docs.vocabulary.binary_search(t).is_ok()));
    }
    for k in [1, 3, 8] {
        let p = LdaParams { k, iterations: 60, seed: k as u64, ..LdaParams::with_k(k) };
        let m = fit_lda(&docs, &p).unwrap();
        assert_eq!(m.phi.len(), k);
        assert_eq!(m.theta.len(), docs.documents.len());
        for row in m.phi.iter().chain(&m.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&x| x > 0.0));
        }
        assert_eq!(m.phi[0].len(), docs.vocabulary.len());
        assert_eq!(fit_lda(&docs, &p).unwrap(), m);
        let s = topic_scores(&m);
        assert!((s.iter().sum::<f64>() - m.theta.len() as f64).abs() < 1e-9);
    }
}
