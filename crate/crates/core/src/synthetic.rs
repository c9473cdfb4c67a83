//! Deterministic synthetic corpora: a mix of genuine accounts with varied
//! vocabulary and spambot accounts that post templated, link-heavy text in
//! bursts. Used for fixtures, benchmarks and load tests.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{extract_entities, Account, Corpus, Tweet};
use crate::session::LabelClass;

const GENUINE_WORDS: &[&str] = &[
    "coffee",
    "morning",
    "weekend",
    "family",
    "friends",
    "music",
    "concert",
    "movie",
    "great",
    "happy",
    "love",
    "beautiful",
    "game",
    "team",
    "season",
    "weather",
    "rain",
    "sunny",
    "dinner",
    "lunch",
    "recipe",
    "garden",
    "travel",
    "flight",
    "airport",
    "beach",
    "mountain",
    "hiking",
    "running",
    "marathon",
    "training",
    "book",
    "reading",
    "library",
    "school",
    "teacher",
    "student",
    "exam",
    "project",
    "meeting",
    "office",
    "work",
    "holiday",
    "birthday",
    "party",
    "wedding",
    "baby",
    "puppy",
    "kitten",
    "photo",
    "camera",
    "painting",
    "museum",
    "history",
    "science",
    "news",
    "election",
    "city",
    "traffic",
    "bike",
    "train",
    "bus",
    "tired",
    "sad",
    "angry",
    "awful",
    "terrible",
    "boring",
    "nice",
    "good",
    "bad",
    "amazing",
    "funny",
    "interesting",
    "excited",
    "lovely",
    "wonderful",
    "horrible",
];

const SPAM_WORDS: &[&str] = &[
    "free",
    "win",
    "prize",
    "cash",
    "deal",
    "offer",
    "discount",
    "limited",
    "click",
    "follow",
    "followers",
    "gain",
    "instant",
    "bonus",
    "exclusive",
    "cheap",
    "sale",
    "buy",
    "best",
    "guaranteed",
    "amazing",
    "money",
    "earn",
    "crypto",
    "giveaway",
];

const SPAM_TAGS: &[&str] = &["#win", "#free", "#deal", "#followback", "#giveaway", "#promo"];

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub accounts: usize,
    /// Inclusive range of tweets per account.
    pub tweets_per_account: (usize, usize),
    pub spambot_fraction: f64,
    /// Inclusive calendar years covered by tweets.
    pub years: (i32, i32),
    pub seed: u64,
}

impl SyntheticConfig {
    /// A handful of tweets per account over 2013-2015.
    pub fn small(accounts: usize) -> Self {
        SyntheticConfig { accounts, tweets_per_account: (3, 12), spambot_fraction: 0.5, years: (2013, 2015), seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truth: BTreeMap<String, LabelClass>,
}

pub fn generate(config: &SyntheticConfig) -> Corpus {
    generate_labeled(config).corpus
}

pub fn generate_labeled(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = Utc.with_ymd_and_hms(config.years.0, 1, 1, 0, 0, 0).unwrap();
    let end = Utc.with_ymd_and_hms(config.years.1 + 1, 1, 1, 0, 0, 0).unwrap();
    let span_s = (end - start).num_seconds();
    let width = (config.accounts.max(1) as f64).log10().floor() as usize + 1;

    let mut accounts = Vec::with_capacity(config.accounts);
    let mut tweets = Vec::new();
    let mut truth = BTreeMap::new();
    let mut next_tweet = 0u64;

    for i in 0..config.accounts {
        let id = format!("acct{:0width$}", i, width = width);
        let spambot = rng.gen_bool(config.spambot_fraction.clamp(0.0, 1.0));
        truth.insert(id.clone(), if spambot { LabelClass::Spambot } else { LabelClass::Genuine });

        let created = start - Duration::days(rng.gen_range(30..2000));
        let (followers, following) =
            if spambot { (rng.gen_range(0..300), rng.gen_range(500..5000)) } else { (rng.gen_range(50..5000), rng.gen_range(50..1000)) };
        let n = rng.gen_range(config.tweets_per_account.0..=config.tweets_per_account.1);
        accounts.push(Account {
            account_id: id.clone(),
            screen_name: format!("user_{i}"),
            display_name: format!("User {i}"),
            created_at: created,
            followers_count: followers,
            following_count: following,
            likes_count: rng.gen_range(0..10_000),
            declared_tweet_count: n as u64,
            profile_image_url: (i % 3 != 0).then(|| format!("https://img.example/{i}.png")),
        });

        // Spambots post in a few tight bursts; genuine accounts spread out.
        let burst_centres: Vec<i64> = (0..3).map(|_| rng.gen_range(0..span_s)).collect();
        let mut templates: Vec<String> = Vec::new();
        for _ in 0..n {
            let offset = if spambot {
                let c = *burst_centres.choose(&mut rng).unwrap();
                (c + rng.gen_range(-86_400 * 10..86_400 * 10)).clamp(0, span_s - 1)
            } else {
                rng.gen_range(0..span_s)
            };
            let created_at = start + Duration::seconds(offset);
            let text = if spambot {
                if !templates.is_empty() && rng.gen_bool(0.4) {
                    templates.choose(&mut rng).unwrap().clone()
                } else {
                    let words: Vec<&str> = (0..rng.gen_range(4..8)).map(|_| *SPAM_WORDS.choose(&mut rng).unwrap()).collect();
                    let t = format!(
                        "{} {} https://spam.example/{}",
                        words.join(" "),
                        SPAM_TAGS.choose(&mut rng).unwrap(),
                        rng.gen_range(0..50)
                    );
                    templates.push(t.clone());
                    t
                }
            } else {
                let mut words: Vec<String> =
                    (0..rng.gen_range(5..15)).map(|_| GENUINE_WORDS.choose(&mut rng).unwrap().to_string()).collect();
                if rng.gen_bool(0.2) {
                    words.push(format!("@user_{}", rng.gen_range(0..config.accounts.max(1))));
                }
                if rng.gen_bool(0.15) {
                    words.push(format!("#{}", GENUINE_WORDS.choose(&mut rng).unwrap()));
                }
                if rng.gen_bool(0.1) {
                    words.push(format!("https://news.example/{}", rng.gen_range(0..1000)));
                }
                words.join(" ")
            };
            let e = extract_entities(&text);
            tweets.push(Tweet {
                tweet_id: format!("t{next_tweet}"),
                account_id: id.clone(),
                created_at,
                retweet_count: rng.gen_range(0..if spambot { 3 } else { 30 }),
                favorite_count: rng.gen_range(0..if spambot { 2 } else { 50 }),
                is_retweet: rng.gen_bool(if spambot { 0.5 } else { 0.2 }),
                is_reply: rng.gen_bool(if spambot { 0.05 } else { 0.3 }),
                hashtags: e.hashtags,
                urls: e.urls,
                mentions: e.mentions,
                text,
            });
            next_tweet += 1;
        }
    }
    SyntheticCorpus { corpus: Corpus::from_parts(accounts, tweets), truth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::validate_corpus;

    #[test]
    fn deterministic_and_valid() {
        let cfg = SyntheticConfig::small(20);
        let a = generate_labeled(&cfg);
        let b = generate_labeled(&cfg);
        assert_eq!(a.corpus.to_json(), b.corpus.to_json());
        assert_eq!(a.truth, b.truth);
        assert!(validate_corpus(&a.corpus).is_valid());
        assert_eq!(a.corpus.len(), 20);
    }
}
