//! Lexicon-based polarity and subjectivity.
//!
//! A text's score is the arithmetic mean, over tokens found in the lexicon,
//! of their polarity and subjectivity. Aggregates over several tweets pool
//! the matched tokens (token-level mean), they do not average per-tweet
//! scores.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::Tweet;
use crate::text::{stem, word_tokens};
use crate::time::{Level, Period};

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {0}")]
    FileMissing(String),
    #[error("line {line}: value out of range: {value}")]
    OutOfRangeValue { line: usize, value: f64 },
    #[error("line {line}: malformed row")]
    MalformedRow { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexEntry {
    pub polarity: f64,
    pub subjectivity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
    /// Stem of each key mapped to the mean entry of keys sharing that stem.
    stems: BTreeMap<String, LexEntry>,
}

impl Lexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, LexEntry)>) -> Lexicon {
        let entries: BTreeMap<String, LexEntry> = entries.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        let mut groups: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for (k, v) in &entries {
            let g = groups.entry(stem(k)).or_default();
            g.0 += v.polarity;
            g.1 += v.subjectivity;
            g.2 += 1;
        }
        let stems = groups.into_iter().map(|(k, (p, s, n))| (k, LexEntry { polarity: p / n as f64, subjectivity: s / n as f64 })).collect();
        Lexicon { entries, stems }
    }

    /// The small English lexicon shipped with the crate.
    pub fn bundled() -> Lexicon {
        Lexicon::parse(BUNDLED).expect("bundled lexicon is valid")
    }

    /// Parse `token<TAB>polarity<TAB>subjectivity` rows. Blank lines and
    /// lines starting with `#` are skipped; a repeated token keeps its last
    /// entry.
    pub fn parse(body: &str) -> Result<Lexicon, LexiconError> {
        let mut rows = Vec::new();
        for (i, raw) in body.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let [token, pol, subj] = fields.as_slice() else {
                return Err(LexiconError::MalformedRow { line });
            };
            let token = token.trim();
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| LexiconError::MalformedRow { line });
            let (polarity, subjectivity) = (parse(pol)?, parse(subj)?);
            if token.is_empty() {
                return Err(LexiconError::MalformedRow { line });
            }
            if !(-1.0..=1.0).contains(&polarity) {
                return Err(LexiconError::OutOfRangeValue { line, value: polarity });
            }
            if !(0.0..=1.0).contains(&subjectivity) {
                return Err(LexiconError::OutOfRangeValue { line, value: subjectivity });
            }
            rows.push((token.to_string(), LexEntry { polarity, subjectivity }));
        }
        Ok(Lexicon::from_entries(rows))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&LexEntry> {
        self.entries.get(token)
    }

    /// Lookup for already-stemmed tokens (topic vocabularies): an exact key
    /// match first, then keys whose stem equals `stemmed`.
    pub fn get_stemmed(&self, stemmed: &str) -> Option<&LexEntry> {
        self.entries.get(stemmed).or_else(|| self.stems.get(stemmed))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LexiconError> {
    if !path.exists() {
        return Err(LexiconError::FileMissing(path.display().to_string()));
    }
    Lexicon::parse(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub polarity: f64,
    pub subjectivity: f64,
    pub matched_count: u64,
}

/// Running sums of matched-token scores.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SentimentSums {
    pub polarity: f64,
    pub subjectivity: f64,
    pub matched: u64,
}

impl SentimentSums {
    pub fn add_text(&mut self, lexicon: &Lexicon, text: &str) {
        for token in word_tokens(text) {
            if let Some(e) = lexicon.get(&token) {
                self.polarity += e.polarity;
                self.subjectivity += e.subjectivity;
                self.matched += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &SentimentSums) {
        self.polarity += other.polarity;
        self.subjectivity += other.subjectivity;
        self.matched += other.matched;
    }

    pub fn score(&self) -> SentimentScore {
        if self.matched == 0 {
            return SentimentScore::default();
        }
        let n = self.matched as f64;
        SentimentScore {
            polarity: (self.polarity / n).clamp(-1.0, 1.0),
            subjectivity: (self.subjectivity / n).clamp(0.0, 1.0),
            matched_count: self.matched,
        }
    }
}

pub fn score_text(lexicon: &Lexicon, text: &str) -> SentimentScore {
    let mut sums = SentimentSums::default();
    sums.add_text(lexicon, text);
    sums.score()
}

/// Key of the whole-history entry returned by [`score_account`].
pub const OVERALL: &str = "overall";

/// Scores of one account's tweets per period of `level`, keyed by period
/// label (or [`OVERALL`]). Only periods containing tweets appear; the
/// overall entry is always present.
pub fn score_account(lexicon: &Lexicon, tweets: &[Tweet], level: Level) -> BTreeMap<String, SentimentScore> {
    let mut sums: BTreeMap<Option<Period>, SentimentSums> = BTreeMap::new();
    if level == Level::Overall {
        sums.insert(None, SentimentSums::default());
    }
    for t in tweets {
        let key = level.granularity().map(|g| Period::containing(g, t.created_at));
        sums.entry(key).or_default().add_text(lexicon, &t.text);
    }
    sums.into_iter().map(|(k, s)| (k.map_or_else(|| OVERALL.to_string(), |p| p.label()), s.score())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(rows: &[(&str, f64, f64)]) -> Lexicon {
        Lexicon::from_entries(rows.iter().map(|(k, p, s)| (k.to_string(), LexEntry { polarity: *p, subjectivity: *s })))
    }

    #[test]
    fn parse_rows() {
        assert_eq!(Lexicon::parse("good\t0.7\t0.6").unwrap().len(), 1);
        assert!(matches!(Lexicon::parse("good\t1.5\t0.6"), Err(LexiconError::OutOfRangeValue { line: 1, .. })));
        assert!(matches!(Lexicon::parse("ok\t0\t0\nbad\t-0.5"), Err(LexiconError::MalformedRow { line: 2 })));
        assert!(matches!(Lexicon::parse("x\ty\t0.1"), Err(LexiconError::MalformedRow { line: 1 })));
        let l = Lexicon::parse("Good\t0.1\t0.1\ngood\t0.7\t0.6\n").unwrap();
        assert_eq!(l.get("good").unwrap().polarity, 0.7);
    }

    #[test]
    fn bundled_lexicon_loads() {
        let l = Lexicon::bundled();
        assert!(l.len() > 100);
        for (k, e) in l.entries() {
            assert_eq!(k, k.to_lowercase());
            assert!((-1.0..=1.0).contains(&e.polarity) && (0.0..=1.0).contains(&e.subjectivity));
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_lexicon(Path::new("/nonexistent/lex.tsv")), Err(LexiconError::FileMissing(_))));
    }

    #[test]
    fn score_examples() {
        let l = lex(&[("happy", 0.8, 0.9), ("sad", -0.5, 0.7)]);
        let s = score_text(&l, "Happy happy day!");
        assert_eq!((s.polarity, s.subjectivity, s.matched_count), (0.8, 0.9, 2));
        let s = score_text(&l, "happy sad");
        assert!((s.polarity - 0.15).abs() < 1e-12 && (s.subjectivity - 0.8).abs() < 1e-12);
        assert_eq!(s.matched_count, 2);
        assert_eq!(score_text(&l, "no lexicon words here"), SentimentScore::default());
    }

    #[test]
    fn stemmed_lookup() {
        let l = lex(&[("happy", 0.8, 0.9), ("happiness", 0.6, 0.7)]);
        // "happy" and "happiness" both stem to "happi".
        let e = l.get_stemmed("happi").unwrap();
        assert!((e.polarity - 0.7).abs() < 1e-12);
        assert_eq!(l.get_stemmed("happy").unwrap().polarity, 0.8);
    }

    proptest! {
        #[test]
        fn bounds_and_order_invariance(words in proptest::collection::vec("(good|bad|great|awful|meh|happy|sad)", 0..20)) {
            let l = Lexicon::bundled();
            let text = words.join(" ");
            let s = score_text(&l, &text);
            prop_assert!((-1.0..=1.0).contains(&s.polarity));
            prop_assert!((0.0..=1.0).contains(&s.subjectivity));
            if s.matched_count == 0 {
                prop_assert_eq!((s.polarity, s.subjectivity), (0.0, 0.0));
            }
            let mut rev = words.clone();
            rev.reverse();
            let r = score_text(&l, &rev.join(" "));
            prop_assert!((r.polarity - s.polarity).abs() < 1e-12);
            prop_assert_eq!(r.matched_count, s.matched_count);
        }

        #[test]
        fn concatenation_is_weighted_mean(a in "(good |bad |meh |great )*", b in "(happy |sad |meh )*") {
            let l = Lexicon::bundled();
            let (sa, sb) = (score_text(&l, &a), score_text(&l, &b));
            let sab = score_text(&l, &format!("{a} {b}"));
            let n = (sa.matched_count + sb.matched_count) as f64;
            if n > 0.0 {
                let expect = (sa.polarity * sa.matched_count as f64 + sb.polarity * sb.matched_count as f64) / n;
                prop_assert!((sab.polarity - expect).abs() < 1e-12);
            }
        }
    }
}
