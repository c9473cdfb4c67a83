use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Timelike};
use labelbench_core::features::{catalog, extract_static_with, extract_temporal_with, FeatureKind, FeatureMatrix};
use labelbench_core::ingest::{Corpus, Tweet};
use labelbench_core::sentiment::{score_text, Lexicon};
use labelbench_core::synthetic::{generate, SyntheticConfig};
use labelbench_core::time::Granularity;
use labelbench_core::Execution;

fn corpus() -> Corpus {
    generate(&SyntheticConfig { accounts: 40, tweets_per_account: (0, 30), spambot_fraction: 0.4, years: (2013, 2015), seed: 21 })
}

fn avg(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn pstd(v: &[f64]) -> f64 {
    let m = avg(v);
    avg(&v.iter().map(|x| (x - m) * (x - m)).collect::<Vec<_>>()).sqrt()
}

fn med(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    match s.len() {
        0 => 0.0,
        n if n % 2 == 1 => s[n / 2],
        n => 0.5 * (s[n / 2 - 1] + s[n / 2]),
    }
}

fn entropy<K: Ord>(keys: impl Iterator<Item = K>) -> f64 {
    let mut hist: BTreeMap<K, f64> = BTreeMap::new();
    let mut n = 0.0;
    for k in keys {
        *hist.entry(k).or_default() += 1.0;
        n += 1.0;
    }
    hist.values().map(|c| -(c / n) * (c / n).log2()).sum::<f64>().max(0.0)
}

/// Independent loop-by-loop recomputation of the tweet-derived features.
fn naive(tweets: &[Tweet], lex: &Lexicon) -> BTreeMap<&'static str, f64> {
    let n = tweets.len() as f64;
    let d = n.max(1.0);
    let mut m = BTreeMap::new();
    let lens: Vec<f64> = tweets.iter().map(|t| t.text.chars().count() as f64).collect();
    let mut gaps = Vec::new();
    for i in 1..tweets.len() {
        gaps.push((tweets[i].created_at.timestamp_millis() - tweets[i - 1].created_at.timestamp_millis()) as f64 / 1000.0);
    }
    let mut days = BTreeSet::new();
    let (mut rt, mut rp, mut orig, mut tags, mut urls, mut ments, mut favs, mut rts, mut url_tw, mut night, mut wkend) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for t in tweets {
        days.insert((t.created_at.year(), t.created_at.ordinal()));
        if t.is_retweet {
            rt += 1.0
        }
        if t.is_reply {
            rp += 1.0
        }
        if !t.is_retweet && !t.is_reply {
            orig += 1.0
        }
        tags += t.hashtags.len() as f64;
        urls += t.urls.len() as f64;
        ments += t.mentions.len() as f64;
        favs += t.favorite_count as f64;
        rts += t.retweet_count as f64;
        if !t.urls.is_empty() {
            url_tw += 1.0
        }
        if t.created_at.hour() <= 5 {
            night += 1.0
        }
        if matches!(t.created_at.weekday(), chrono::Weekday::Sat | chrono::Weekday::Sun) {
            wkend += 1.0
        }
    }
    let active = days.len() as f64;
    let distinct_texts = tweets.iter().map(|t| &t.text).collect::<BTreeSet<_>>().len() as f64;
    let per = |x: f64| if n == 0.0 { 0.0 } else { x / n };
    m.insert("tweet_count", n);
    m.insert("retweet_count", rt);
    m.insert("reply_count", rp);
    m.insert("original_tweet_count", orig);
    m.insert("active_days", active);
    m.insert("hashtag_total", tags);
    m.insert("url_total", urls);
    m.insert("mention_total", ments);
    m.insert("favorites_received_total", favs);
    m.insert("retweets_received_total", rts);
    m.insert("url_tweet_count", url_tw);
    m.insert("night_tweet_count", night);
    m.insert("weekend_tweet_count", wkend);
    m.insert("avg_hashtags", per(tags));
    m.insert("avg_urls", per(urls));
    m.insert("avg_mentions", per(ments));
    m.insert("avg_favorites_received", per(favs));
    m.insert("avg_retweets_received", per(rts));
    m.insert("tweet_len_mean", avg(&lens));
    m.insert("avg_words_per_tweet", avg(&tweets.iter().map(|t| t.text.split_whitespace().count() as f64).collect::<Vec<_>>()));
    m.insert("inter_tweet_gap_mean_s", avg(&gaps));
    m.insert("tweet_len_std", pstd(&lens));
    m.insert("inter_tweet_gap_std_s", pstd(&gaps));
    let pols: Vec<f64> = tweets.iter().map(|t| score_text(lex, &t.text).polarity).collect();
    let subs: Vec<f64> = tweets.iter().map(|t| score_text(lex, &t.text).subjectivity).collect();
    m.insert("polarity_std", pstd(&pols));
    m.insert("subjectivity_std", pstd(&subs));
    m.insert("url_tweet_ratio", url_tw / d);
    m.insert("retweet_ratio", rt / d);
    m.insert("reply_ratio", rp / d);
    m.insert("duplicate_text_ratio", (n - distinct_texts) / d);
    m.insert("tweets_per_active_day", n / active.max(1.0));
    m.insert("posting_hour_entropy", entropy(tweets.iter().map(|t| t.created_at.hour())));
    m.insert("posting_weekday_entropy", entropy(tweets.iter().map(|t| t.created_at.weekday().number_from_monday())));
    m.insert("unique_hashtags", tweets.iter().flat_map(|t| &t.hashtags).collect::<BTreeSet<_>>().len() as f64);
    m.insert("unique_mentions", tweets.iter().flat_map(|t| &t.mentions).collect::<BTreeSet<_>>().len() as f64);
    let lo = |v: &[f64]| v.iter().cloned().reduce(f64::min).unwrap_or(0.0);
    let hi = |v: &[f64]| v.iter().cloned().reduce(f64::max).unwrap_or(0.0);
    m.insert("tweet_len_min", lo(&lens));
    m.insert("tweet_len_median", med(&lens));
    m.insert("tweet_len_max", hi(&lens));
    m.insert("inter_tweet_gap_median_s", med(&gaps));
    m.insert("inter_tweet_gap_max_s", hi(&gaps));
    m.insert("favorites_received_max", hi(&tweets.iter().map(|t| t.favorite_count as f64).collect::<Vec<_>>()));
    m.insert("retweets_received_max", hi(&tweets.iter().map(|t| t.retweet_count as f64).collect::<Vec<_>>()));
    m
}

fn check_row(matrix_row: &[f64], oracle: &BTreeMap<&str, f64>, ctx: &str) {
    let ids = catalog().ids();
    for (name, want) in oracle {
        let col = ids.iter().position(|i| i == name).unwrap();
        let got = matrix_row[col];
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{ctx} {name}: got {got}, want {want}");
    }
}

#[test]
fn static_features_match_naive_recomputation() {
    let c = corpus();
    let lex = Lexicon::bundled();
    let m = extract_static_with(&c, &lex, Execution::Sequential).unwrap();
    for (r, id) in m.account_ids().iter().enumerate() {
        check_row(m.row(r), &naive(c.tweets_of(id), &lex), id);
        let a = &c.accounts[id];
        assert_eq!(m.value(id, "followers_count"), Some(a.followers_count as f64));
        assert_eq!(m.value(id, "declared_tweet_count"), Some(a.declared_tweet_count as f64));
    }
}

#[test]
fn temporal_cells_match_naive_recomputation_on_filtered_tweets() {
    let c = corpus();
    let lex = Lexicon::bundled();
    let cube = extract_temporal_with(&c, &lex, Granularity::Month, Execution::Sequential).unwrap();
    for (a, id) in cube.account_ids.iter().enumerate() {
        for (p, period) in cube.periods.iter().enumerate() {
            let subset: Vec<Tweet> = c.tweets_of(id).iter().filter(|t| period.contains(t.created_at)).cloned().collect();
            match cube.period_row(a, p) {
                Some(row) => check_row(row, &naive(&subset, &lex), &format!("{id}@{period}")),
                None => assert!(subset.is_empty()),
            }
        }
    }
}

#[test]
fn count_features_are_additive_across_levels() {
    let c = corpus();
    let lex = Lexicon::bundled();
    let stat = extract_static_with(&c, &lex, Execution::Parallel).unwrap();
    let cubes: Vec<_> = Granularity::ALL.iter().map(|&g| extract_temporal_with(&c, &lex, g, Execution::Parallel).unwrap()).collect();
    let cat = catalog();
    for (f, def) in cat.entries.iter().enumerate().filter(|(_, d)| d.kind == FeatureKind::Count) {
        for (a, _) in stat.account_ids().iter().enumerate() {
            let total = stat.get(a, f);
            for cube in &cubes {
                let sum: f64 = (0..cube.periods.len()).map(|p| cube.get(a, p, f)).sum();
                assert_eq!(sum, total, "{} at {:?}", def.feature_id, cube.granularity);
            }
        }
    }
}

#[test]
fn parallel_and_sequential_extraction_agree_bitwise() {
    let c = corpus();
    let lex = Lexicon::bundled();
    let a: FeatureMatrix = extract_static_with(&c, &lex, Execution::Sequential).unwrap();
    let b = extract_static_with(&c, &lex, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let a = extract_temporal_with(&c, &lex, Granularity::Day, Execution::Sequential).unwrap();
    let b = extract_temporal_with(&c, &lex, Granularity::Day, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
