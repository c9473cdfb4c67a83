use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{TopicError, TopicModel};
use crate::sentiment::Lexicon;

pub const SENTIMENT_TOP_N: usize = 30;
pub const WORD_CLOUD_LIMIT: usize = 100;
pub const DEFAULT_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub score: f64,
    pub polarity: f64,
    pub subjectivity: f64,
    /// Sorted by descending probability.
    pub top_words: Vec<(String, f64)>,
}

/// Topic score: the sum over documents of the topic's probability.
pub fn topic_scores(model: &TopicModel) -> Vec<f64> {
    let mut scores = vec![0.0; model.k()];
    for row in &model.theta {
        for (s, p) in scores.iter_mut().zip(row) {
            *s += p;
        }
    }
    scores
}

/// Word indices of a probability row, most probable first, ties by token.
fn ranked(vocabulary: &[String], row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| vocabulary[a].cmp(&vocabulary[b])));
    idx
}

/// Probability-weighted mean lexicon score of each topic's `top_n` most
/// probable words. Topics with no matched word score `(0, 0)`.
pub fn topic_sentiment(model: &TopicModel, lexicon: &Lexicon, top_n: usize) -> Vec<(f64, f64)> {
    model
        .phi
        .iter()
        .map(|row| {
            let (mut pol, mut subj, mut mass) = (0.0, 0.0, 0.0);
            for w in ranked(&model.vocabulary, row).into_iter().take(top_n) {
                if let Some(e) = lexicon.get_stemmed(&model.vocabulary[w]) {
                    pol += row[w] * e.polarity;
                    subj += row[w] * e.subjectivity;
                    mass += row[w];
                }
            }
            if mass > 0.0 {
                ((pol / mass).clamp(-1.0, 1.0), (subj / mass).clamp(0.0, 1.0))
            } else {
                (0.0, 0.0)
            }
        })
        .collect()
}

fn check_topics(model: &TopicModel, topic_ids: &BTreeSet<usize>) -> Result<(), TopicError> {
    match topic_ids.iter().find(|&&k| k >= model.k()) {
        Some(&k) => Err(TopicError::UnknownTopicId(k)),
        None => Ok(()),
    }
}

/// Accounts whose probability for any of `topic_ids` strictly exceeds
/// `threshold`.
pub fn members(model: &TopicModel, topic_ids: &BTreeSet<usize>, threshold: f64) -> Result<BTreeSet<String>, TopicError> {
    check_topics(model, topic_ids)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(TopicError::InvalidHyperparameter("threshold"));
    }
    Ok(model
        .theta
        .iter()
        .zip(&model.account_ids)
        .filter(|(row, _)| topic_ids.iter().any(|&k| row[k] > threshold))
        .map(|(_, id)| id.clone())
        .collect())
}

/// Summed topic-word probabilities over `topic_ids`, the `limit` heaviest
/// words first (ties by token).
pub fn word_cloud_weights(model: &TopicModel, topic_ids: &BTreeSet<usize>, limit: usize) -> Result<Vec<(String, f64)>, TopicError> {
    check_topics(model, topic_ids)?;
    if topic_ids.is_empty() {
        return Err(TopicError::EmptySelection);
    }
    let mut weights = vec![0.0; model.vocabulary.len()];
    for &k in topic_ids {
        for (w, p) in weights.iter_mut().zip(&model.phi[k]) {
            *w += p;
        }
    }
    Ok(ranked(&model.vocabulary, &weights).into_iter().take(limit).map(|w| (model.vocabulary[w].clone(), weights[w])).collect())
}

/// Score, sentiment and `top_words` most probable words of every topic.
pub fn summaries(model: &TopicModel, lexicon: &Lexicon, top_words: usize) -> Vec<TopicSummary> {
    let scores = topic_scores(model);
    let sentiment = topic_sentiment(model, lexicon, SENTIMENT_TOP_N);
    model
        .phi
        .iter()
        .enumerate()
        .map(|(k, row)| TopicSummary {
            topic_id: k,
            score: scores[k],
            polarity: sentiment[k].0,
            subjectivity: sentiment[k].1,
            top_words: ranked(&model.vocabulary, row).into_iter().take(top_words).map(|w| (model.vocabulary[w].clone(), row[w])).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::LexEntry;
    use crate::time::Level;
    use crate::topics::LdaParams;

    fn model(theta: Vec<Vec<f64>>, phi: Vec<Vec<f64>>, vocab: &[&str]) -> TopicModel {
        TopicModel {
            params: LdaParams::with_k(phi.len()),
            level: Level::Overall,
            window: None,
            account_ids: (0..theta.len()).map(|d| format!("doc{d}")).collect(),
            vocabulary: vocab.iter().map(|s| s.to_string()).collect(),
            phi,
            theta,
        }
    }

    #[test]
    fn scores_are_column_sums() {
        let m = model(vec![vec![0.7, 0.3], vec![0.2, 0.8]], vec![vec![1.0], vec![1.0]], &["w"]);
        let s = topic_scores(&m);
        assert!((s[0] - 0.9).abs() < 1e-15 && (s[1] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn membership_is_strict() {
        let m = model(vec![vec![0.7, 0.3], vec![0.2, 0.8]], vec![vec![1.0], vec![1.0]], &["w"]);
        let ids = BTreeSet::from([0]);
        assert_eq!(members(&m, &ids, 0.5).unwrap(), BTreeSet::from(["doc0".to_string()]));
        assert!(members(&m, &ids, 0.7).unwrap().is_empty());
        assert_eq!(members(&m, &BTreeSet::from([2]), 0.5), Err(TopicError::UnknownTopicId(2)));
        assert!(members(&m, &ids, 1.0).is_err());
    }

    #[test]
    fn weighted_sentiment() {
        let lex = Lexicon::from_entries([
            ("good".to_string(), LexEntry { polarity: 0.7, subjectivity: 0.6 }),
            ("bad".to_string(), LexEntry { polarity: -0.7, subjectivity: 0.6 }),
        ]);
        let m = model(vec![vec![0.5, 0.5]], vec![vec![0.4, 0.6, 0.0], vec![0.0, 0.0, 1.0]], &["bad", "good", "zzz"]);
        let s = topic_sentiment(&m, &lex, SENTIMENT_TOP_N);
        assert!((s[0].0 - 0.14).abs() < 1e-12);
        assert!((s[0].1 - 0.6).abs() < 1e-12);
        assert_eq!(s[1], (0.0, 0.0));
    }

    #[test]
    fn word_cloud_sums_rows() {
        let m = model(vec![vec![0.5, 0.5]], vec![vec![0.5, 0.25, 0.25], vec![0.1, 0.2, 0.7]], &["a", "b", "c"]);
        let w = word_cloud_weights(&m, &BTreeSet::from([0, 1]), 100).unwrap();
        assert_eq!(w[0].0, "c");
        assert!((w[0].1 - 0.95).abs() < 1e-12);
        assert_eq!(w.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["c", "a", "b"]);
        assert_eq!(word_cloud_weights(&m, &BTreeSet::from([0]), 2).unwrap(), vec![("a".to_string(), 0.5), ("b".to_string(), 0.25)]);
        assert_eq!(word_cloud_weights(&m, &BTreeSet::new(), 2), Err(TopicError::EmptySelection));
    }
}
