use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{compute_time_span, Corpus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyAccountId,
    AccountKeyMismatch,
    AccountCreatedAfterNewestTweet,
    EmptyTweetId,
    DuplicateTweetId,
    OrphanTweet,
    TweetsUnsorted,
    DuplicateEntity,
    TimeSpanMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// `account:<id>`, `tweet[<index>]` or `corpus`.
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, kind: ViolationKind, location: String, message: String) {
        self.violations.push(Violation { kind, location, message });
    }
}

/// Check every corpus invariant. One entry per offending item: each extra
/// occurrence of a duplicated id or entity, each orphan tweet, each
/// out-of-order adjacent tweet pair.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut report = ValidationReport::default();
    let newest = corpus.tweets.iter().map(|t| t.created_at).max();

    for (key, account) in &corpus.accounts {
        let loc = format!("account:{key}");
        if account.account_id.is_empty() {
            report.push(ViolationKind::EmptyAccountId, loc.clone(), "empty account_id".into());
        }
        if *key != account.account_id {
            report.push(
                ViolationKind::AccountKeyMismatch,
                loc.clone(),
                format!("keyed as {key:?} but account_id is {:?}", account.account_id),
            );
        }
        if let Some(newest) = newest {
            if account.created_at > newest {
                report.push(
                    ViolationKind::AccountCreatedAfterNewestTweet,
                    loc,
                    format!("created_at {} after newest tweet {newest}", account.created_at),
                );
            }
        }
    }

    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, t) in corpus.tweets.iter().enumerate() {
        let loc = format!("tweet[{i}]");
        if t.tweet_id.is_empty() {
            report.push(ViolationKind::EmptyTweetId, loc.clone(), "empty tweet_id".into());
        } else if let Some(first) = seen.get(t.tweet_id.as_str()) {
            report.push(ViolationKind::DuplicateTweetId, loc.clone(), format!("tweet_id {:?} already used by tweet[{first}]", t.tweet_id));
        } else {
            seen.insert(&t.tweet_id, i);
        }
        if !corpus.accounts.contains_key(&t.account_id) {
            report.push(ViolationKind::OrphanTweet, loc.clone(), format!("unknown account {:?}", t.account_id));
        }
        for (name, list) in [("hashtags", &t.hashtags), ("urls", &t.urls), ("mentions", &t.mentions)] {
            let mut uniq = HashSet::new();
            for item in list {
                if !uniq.insert(item) {
                    report.push(ViolationKind::DuplicateEntity, loc.clone(), format!("{name} repeats {item:?}"));
                }
            }
        }
    }

    for (i, w) in corpus.tweets.windows(2).enumerate() {
        if (&w[0].account_id, w[0].created_at) > (&w[1].account_id, w[1].created_at) {
            report.push(ViolationKind::TweetsUnsorted, format!("tweet[{}]", i + 1), "out of (account_id, created_at) order".into());
        }
    }

    let expected = compute_time_span(&corpus.accounts, &corpus.tweets);
    if expected != corpus.time_span {
        report.push(
            ViolationKind::TimeSpanMismatch,
            "corpus".into(),
            format!("time_span {:?} but data spans {:?}", corpus.time_span, expected),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticConfig};

    #[test]
    fn valid_corpus_has_empty_report() {
        let c = generate(&SyntheticConfig::small(3));
        assert!(validate_corpus(&c).is_valid());
    }

    #[test]
    fn duplicate_tweet_id_is_one_entry() {
        let mut c = generate(&SyntheticConfig::small(4));
        let id = c.tweets[0].tweet_id.clone();
        c.tweets[5].tweet_id = id;
        let r = validate_corpus(&c);
        assert_eq!(r.violations.len(), 1, "{r:?}");
        assert_eq!(r.violations[0].kind, ViolationKind::DuplicateTweetId);
    }
}
