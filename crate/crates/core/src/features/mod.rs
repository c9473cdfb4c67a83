//! Per-account feature representation: a fixed 50-column catalog computed
//! over an account's whole history and over year / month / day bins.

mod catalog;
pub mod io;

pub use catalog::{catalog, FeatureCatalog, FeatureDef, FeatureKind, FEATURE_COUNT};

use std::collections::{BTreeMap, HashSet};

use chrono::{DateTime, Datelike, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::ingest::{Account, Corpus, Tweet};
use crate::sentiment::{Lexicon, SentimentSums};
use crate::text::word_tokens;
use crate::time::{Granularity, Period};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("corpus has no accounts")]
    EmptyCorpus,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
}

/// Dense `n_rows x n_cols` matrix of finite values, rows in canonical
/// account order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    account_ids: Vec<String>,
    feature_ids: Vec<String>,
    /// Row-major.
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(account_ids: Vec<String>, feature_ids: Vec<String>, values: Vec<f64>) -> Result<Self, FeatureError> {
        let (n, m) = (account_ids.len(), feature_ids.len());
        if values.len() != n * m {
            return Err(FeatureError::Shape(format!("{} values for {n}x{m}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite { row: i / m.max(1), col: i % m.max(1) });
        }
        Ok(FeatureMatrix { account_ids, feature_ids, values })
    }

    /// Build from rows, naming accounts `0..n` and columns `f0..fm`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(FeatureError::Shape("ragged rows".into()));
        }
        FeatureMatrix::new((0..rows.len()).map(|i| i.to_string()).collect(), (0..m).map(|j| format!("f{j}")).collect(), rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.account_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn account_ids(&self) -> &[String] {
        &self.account_ids
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[row * m..(row + 1) * m]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn column_index(&self, feature_id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == feature_id)
    }

    pub fn column_by_id(&self, feature_id: &str) -> Option<Vec<f64>> {
        self.column_index(feature_id).map(|c| self.column(c))
    }

    pub fn value(&self, account_id: &str, feature_id: &str) -> Option<f64> {
        let r = self.account_ids.iter().position(|a| a == account_id)?;
        Some(self.get(r, self.column_index(feature_id)?))
    }

    /// Sub-matrix with the given columns, in the given order.
    pub fn select_columns(&self, feature_ids: &[String]) -> Result<FeatureMatrix, FeatureError> {
        let cols: Vec<usize> = feature_ids
            .iter()
            .map(|f| self.column_index(f).ok_or_else(|| FeatureError::UnknownFeature(f.clone())))
            .collect::<Result<_, _>>()?;
        let values = (0..self.n_rows()).flat_map(|r| cols.iter().map(move |&c| self.get(r, c))).collect();
        Ok(FeatureMatrix { account_ids: self.account_ids.clone(), feature_ids: feature_ids.to_vec(), values })
    }

    /// Same shape and ids, new values (validated finite).
    pub fn with_values(&self, values: Vec<f64>) -> Result<FeatureMatrix, FeatureError> {
        FeatureMatrix::new(self.account_ids.clone(), self.feature_ids.clone(), values)
    }
}

/// Account x period x feature values for one granularity.
///
/// Storage is sparse over periods: a period in which an account posted
/// nothing holds 0 for every feature and is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalFeatureCube {
    pub granularity: Granularity,
    pub periods: Vec<Period>,
    pub account_ids: Vec<String>,
    pub feature_ids: Vec<String>,
    /// Per account: period index -> feature row.
    pub cells: Vec<BTreeMap<u32, Vec<f64>>>,
}

impl TemporalFeatureCube {
    pub fn get(&self, account: usize, period: usize, feature: usize) -> f64 {
        self.cells[account].get(&(period as u32)).map_or(0.0, |row| row[feature])
    }

    pub fn period_row(&self, account: usize, period: usize) -> Option<&[f64]> {
        self.cells[account].get(&(period as u32)).map(Vec::as_slice)
    }

    pub fn period_index(&self, p: &Period) -> Option<usize> {
        self.periods.binary_search(p).ok()
    }

    pub fn account_index(&self, account_id: &str) -> Option<usize> {
        self.account_ids.binary_search_by(|a| a.as_str().cmp(account_id)).ok()
    }

    pub fn feature_index(&self, feature_id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == feature_id)
    }

    /// Number of stored (non-empty) cells.
    pub fn stored_cells(&self) -> usize {
        self.cells.iter().map(BTreeMap::len).sum()
    }
}

/// Per-tweet quantities reused by several features.
struct TweetStats {
    len: f64,
    words: f64,
    sums: SentimentSums,
}

fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

fn fmax(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))).unwrap_or(0.0)
}

fn fmin(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v)))).unwrap_or(0.0)
}

/// Feature row for `tweets` (chronological) of `account`. Snapshot features
/// are filled when `with_snapshot` is set; every other feature of an empty
/// tweet set is 0.
fn compute_row(account: &Account, tweets: &[Tweet], lexicon: &Lexicon, reference_end: DateTime<Utc>, with_snapshot: bool) -> Vec<f64> {
    let n = tweets.len();
    let nf = n as f64;
    let per_tweet: Vec<TweetStats> = tweets
        .iter()
        .map(|t| {
            let mut sums = SentimentSums::default();
            sums.add_text(lexicon, &t.text);
            TweetStats { len: t.text.chars().count() as f64, words: t.text.split_whitespace().count() as f64, sums }
        })
        .collect();
    let count = |f: &dyn Fn(&Tweet) -> bool| tweets.iter().filter(|t| f(t)).count() as f64;
    let sum = |f: &dyn Fn(&Tweet) -> f64| tweets.iter().map(f).sum::<f64>();
    let per_n = |x: f64| if n == 0 { 0.0 } else { x / nf };
    let guarded = |x: f64, d: f64| x / d.max(1.0);

    let retweets = count(&|t| t.is_retweet);
    let replies = count(&|t| t.is_reply);
    let days: HashSet<_> = tweets.iter().map(|t| t.created_at.date_naive()).collect();
    let active_days = days.len() as f64;
    let hashtags = sum(&|t| t.hashtags.len() as f64);
    let urls = sum(&|t| t.urls.len() as f64);
    let mentions = sum(&|t| t.mentions.len() as f64);
    let favs = sum(&|t| t.favorite_count as f64);
    let rts = sum(&|t| t.retweet_count as f64);
    let url_tweets = count(&|t| !t.urls.is_empty());

    let lens: Vec<f64> = per_tweet.iter().map(|s| s.len).collect();
    let words: Vec<f64> = per_tweet.iter().map(|s| s.words).collect();
    let gaps: Vec<f64> = tweets.windows(2).map(|w| (w[1].created_at - w[0].created_at).num_milliseconds() as f64 / 1000.0).collect();
    let mut pooled = SentimentSums::default();
    per_tweet.iter().for_each(|s| pooled.merge(&s.sums));
    let pooled = pooled.score();
    let tweet_pol: Vec<f64> = per_tweet.iter().map(|s| s.sums.score().polarity).collect();
    let tweet_subj: Vec<f64> = per_tweet.iter().map(|s| s.sums.score().subjectivity).collect();

    let mut hours = [0u64; 24];
    let mut weekdays = [0u64; 7];
    for t in tweets {
        hours[t.created_at.hour() as usize] += 1;
        weekdays[t.created_at.weekday().num_days_from_monday() as usize] += 1;
    }
    let texts: HashSet<&str> = tweets.iter().map(|t| t.text.as_str()).collect();
    let duplicates = (n - texts.len()) as f64;
    let tags: HashSet<&str> = tweets.iter().flat_map(|t| t.hashtags.iter().map(String::as_str)).collect();
    let ments: HashSet<&str> = tweets.iter().flat_map(|t| t.mentions.iter().map(String::as_str)).collect();
    let vocab: HashSet<String> = tweets.iter().flat_map(|t| word_tokens(&t.text)).collect();

    let snap = |v: f64| if with_snapshot { v } else { 0.0 };
    let age_days = ((reference_end - account.created_at).num_seconds() as f64 / 86_400.0).max(0.0);

    let row = vec![
        nf,
        retweets,
        replies,
        count(&|t| !t.is_retweet && !t.is_reply),
        active_days,
        hashtags,
        urls,
        mentions,
        favs,
        rts,
        url_tweets,
        count(&|t| t.created_at.hour() < 6),
        count(&|t| t.created_at.weekday().num_days_from_monday() >= 5),
        snap(account.followers_count as f64),
        snap(account.following_count as f64),
        snap(guarded(account.followers_count as f64, account.following_count as f64)),
        snap(account.likes_count as f64),
        snap(account.declared_tweet_count as f64),
        snap(age_days),
        per_n(hashtags),
        per_n(urls),
        per_n(mentions),
        per_n(favs),
        per_n(rts),
        mean(&lens),
        mean(&words),
        mean(&gaps),
        pooled.polarity,
        pooled.subjectivity,
        population_std(&lens),
        population_std(&gaps),
        population_std(&tweet_pol),
        population_std(&tweet_subj),
        guarded(url_tweets, nf),
        guarded(retweets, nf),
        guarded(replies, nf),
        guarded(duplicates, nf),
        guarded(nf, active_days),
        entropy_bits(&hours),
        entropy_bits(&weekdays),
        tags.len() as f64,
        vocab.len() as f64,
        ments.len() as f64,
        fmin(lens.iter().copied()),
        median(&lens),
        fmax(lens.iter().copied()),
        median(&gaps),
        fmax(gaps.iter().copied()),
        fmax(tweets.iter().map(|t| t.favorite_count as f64)),
        fmax(tweets.iter().map(|t| t.retweet_count as f64)),
    ];
    debug_assert_eq!(row.len(), FEATURE_COUNT);
    row
}

pub fn extract_static(corpus: &Corpus, lexicon: &Lexicon) -> Result<FeatureMatrix, FeatureError> {
    extract_static_with(corpus, lexicon, Execution::default())
}

pub fn extract_static_with(corpus: &Corpus, lexicon: &Lexicon, exec: Execution) -> Result<FeatureMatrix, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let accounts: Vec<&Account> = corpus.accounts.values().collect();
    let end = corpus.time_span.end;
    let rows = exec.map_indexed(accounts.len(), |i| {
        let a = accounts[i];
        compute_row(a, corpus.tweets_of(&a.account_id), lexicon, end, true)
    });
    FeatureMatrix::new(corpus.account_ids(), catalog().ids(), rows.concat())
}

pub fn extract_temporal(corpus: &Corpus, lexicon: &Lexicon, granularity: Granularity) -> Result<TemporalFeatureCube, FeatureError> {
    extract_temporal_with(corpus, lexicon, granularity, Execution::default())
}

pub fn extract_temporal_with(
    corpus: &Corpus,
    lexicon: &Lexicon,
    granularity: Granularity,
    exec: Execution,
) -> Result<TemporalFeatureCube, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let periods = Period::span(granularity, corpus.time_span.start, corpus.time_span.end);
    let accounts: Vec<&Account> = corpus.accounts.values().collect();
    let end = corpus.time_span.end;
    let cells = exec.map_indexed(accounts.len(), |i| {
        let a = accounts[i];
        let tweets = corpus.tweets_of(&a.account_id);
        let mut out = BTreeMap::new();
        // Tweets are chronological, so each bin is a contiguous run.
        let mut lo = 0;
        while lo < tweets.len() {
            let p = Period::containing(granularity, tweets[lo].created_at);
            let hi = lo + tweets[lo..].partition_point(|t| t.created_at < p.end());
            let idx = periods.binary_search(&p).expect("period within corpus span");
            out.insert(idx as u32, compute_row(a, &tweets[lo..hi], lexicon, end, true));
            lo = hi;
        }
        out
    });
    let cube = TemporalFeatureCube { granularity, periods, account_ids: corpus.account_ids(), feature_ids: catalog().ids(), cells };
    for (a, rows) in cube.cells.iter().enumerate() {
        for row in rows.values() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(FeatureError::NonFinite { row: a, col: c });
            }
        }
    }
    Ok(cube)
}
