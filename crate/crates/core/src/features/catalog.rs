use serde::{Deserialize, Serialize};

/// How a feature aggregates over a set of tweets. The kind decides how a
/// temporal bin value relates to the whole-history value: only `Count`
/// features are additive across bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Count,
    Ratio,
    Mean,
    Std,
    Entropy,
    Median,
    Max,
    Min,
    /// Number of distinct items; not additive across bins.
    Distinct,
    /// Account metadata, not derived from tweets.
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub feature_id: String,
    pub name: String,
    pub unit: String,
    pub kind: FeatureKind,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    pub entries: Vec<FeatureDef>,
}

impl FeatureCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, feature_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature_id == feature_id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.feature_id.clone()).collect()
    }
}

use FeatureKind::*;

/// `(feature_id, name, unit, kind, description)` in column order.
pub(crate) const TABLE: [(&str, &str, &str, FeatureKind, &str); 50] = [
    ("tweet_count", "Tweets", "tweets", Count, "Number of tweets posted"),
    ("retweet_count", "Retweets posted", "tweets", Count, "Number of posted tweets that are retweets"),
    ("reply_count", "Replies posted", "tweets", Count, "Number of posted tweets that are replies"),
    ("original_tweet_count", "Original tweets", "tweets", Count, "Tweets that are neither retweets nor replies"),
    ("active_days", "Active days", "days", Count, "Distinct UTC calendar days with at least one tweet"),
    ("hashtag_total", "Hashtags", "hashtags", Count, "Total hashtags over all tweets"),
    ("url_total", "Links", "urls", Count, "Total URLs over all tweets"),
    ("mention_total", "Mentions", "mentions", Count, "Total @mentions over all tweets"),
    ("favorites_received_total", "Likes received", "likes", Count, "Sum of favorite counts of the tweets"),
    ("retweets_received_total", "Retweets received", "retweets", Count, "Sum of retweet counts of the tweets"),
    ("url_tweet_count", "Tweets with links", "tweets", Count, "Tweets containing at least one URL"),
    ("night_tweet_count", "Night tweets", "tweets", Count, "Tweets posted between 00:00 and 05:59 UTC"),
    ("weekend_tweet_count", "Weekend tweets", "tweets", Count, "Tweets posted on Saturday or Sunday (UTC)"),
    ("followers_count", "Followers", "accounts", Snapshot, "Followers at collection time"),
    ("following_count", "Following", "accounts", Snapshot, "Followed accounts at collection time"),
    ("followers_following_ratio", "Followers / following", "ratio", Snapshot, "followers / max(following, 1)"),
    ("likes_count", "Likes given", "likes", Snapshot, "Tweets liked by the account"),
    ("declared_tweet_count", "Declared tweets", "tweets", Snapshot, "Tweet count reported in the profile"),
    ("account_age_days", "Account age", "days", Snapshot, "Days from creation to the newest tweet of the corpus"),
    ("avg_hashtags", "Hashtags per tweet", "hashtags", Mean, "hashtag_total / tweet_count"),
    ("avg_urls", "Links per tweet", "urls", Mean, "url_total / tweet_count"),
    ("avg_mentions", "Mentions per tweet", "mentions", Mean, "mention_total / tweet_count"),
    ("avg_favorites_received", "Likes per tweet", "likes", Mean, "Mean favorite count per tweet"),
    ("avg_retweets_received", "Retweets per tweet", "retweets", Mean, "Mean retweet count per tweet"),
    ("tweet_len_mean", "Tweet length", "chars", Mean, "Mean tweet length in characters"),
    ("avg_words_per_tweet", "Words per tweet", "words", Mean, "Mean whitespace-separated tokens per tweet"),
    ("inter_tweet_gap_mean_s", "Gap between tweets", "seconds", Mean, "Mean time between consecutive tweets"),
    ("polarity_mean", "Polarity", "score", Mean, "Lexicon polarity pooled over all matched tokens"),
    ("subjectivity_mean", "Subjectivity", "score", Mean, "Lexicon subjectivity pooled over all matched tokens"),
    ("tweet_len_std", "Tweet length std", "chars", Std, "Population std of tweet length"),
    ("inter_tweet_gap_std_s", "Gap std", "seconds", Std, "Population std of time between consecutive tweets"),
    ("polarity_std", "Polarity std", "score", Std, "Population std of per-tweet polarity"),
    ("subjectivity_std", "Subjectivity std", "score", Std, "Population std of per-tweet subjectivity"),
    ("url_tweet_ratio", "Link tweet ratio", "ratio", Ratio, "url_tweet_count / max(tweet_count, 1)"),
    ("retweet_ratio", "Retweet ratio", "ratio", Ratio, "retweet_count / max(tweet_count, 1)"),
    ("reply_ratio", "Reply ratio", "ratio", Ratio, "reply_count / max(tweet_count, 1)"),
    ("duplicate_text_ratio", "Duplicate text ratio", "ratio", Ratio, "(tweets - distinct texts) / max(tweet_count, 1)"),
    ("tweets_per_active_day", "Tweets per active day", "tweets", Ratio, "tweet_count / max(active_days, 1)"),
    ("posting_hour_entropy", "Posting hour entropy", "bits", Entropy, "Shannon entropy (base 2) of the UTC hour-of-day histogram"),
    ("posting_weekday_entropy", "Posting weekday entropy", "bits", Entropy, "Shannon entropy (base 2) of the UTC weekday histogram"),
    ("unique_hashtags", "Distinct hashtags", "hashtags", Distinct, "Distinct hashtags used"),
    ("vocab_size", "Vocabulary size", "words", Distinct, "Distinct lowercase word tokens"),
    ("unique_mentions", "Distinct mentions", "mentions", Distinct, "Distinct accounts mentioned"),
    ("tweet_len_min", "Shortest tweet", "chars", Min, "Minimum tweet length"),
    ("tweet_len_median", "Median tweet length", "chars", Median, "Median tweet length"),
    ("tweet_len_max", "Longest tweet", "chars", Max, "Maximum tweet length"),
    ("inter_tweet_gap_median_s", "Median gap", "seconds", Median, "Median time between consecutive tweets"),
    ("inter_tweet_gap_max_s", "Longest gap", "seconds", Max, "Maximum time between consecutive tweets"),
    ("favorites_received_max", "Most liked tweet", "likes", Max, "Maximum favorite count of a tweet"),
    ("retweets_received_max", "Most retweeted tweet", "retweets", Max, "Maximum retweet count of a tweet"),
];

pub const FEATURE_COUNT: usize = TABLE.len();

pub fn catalog() -> FeatureCatalog {
    FeatureCatalog {
        entries: TABLE
            .iter()
            .map(|(id, name, unit, kind, desc)| FeatureDef {
                feature_id: id.to_string(),
                name: name.to_string(),
                unit: unit.to_string(),
                kind: *kind,
                description: desc.to_string(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fifty_distinct_entries() {
        let c = catalog();
        assert_eq!(c.len(), 50);
        let ids: HashSet<_> = c.entries.iter().map(|e| &e.feature_id).collect();
        assert_eq!(ids.len(), 50);
        assert_eq!(serde_json::to_string(&c).unwrap(), serde_json::to_string(&catalog()).unwrap());
    }

    #[test]
    fn load_bearing_features_present() {
        let c = catalog();
        for id in [
            "tweet_count",
            "retweet_count",
            "reply_count",
            "original_tweet_count",
            "avg_hashtags",
            "avg_urls",
            "avg_mentions",
            "followers_count",
            "following_count",
            "followers_following_ratio",
            "avg_favorites_received",
            "avg_retweets_received",
            "tweet_len_mean",
            "tweet_len_std",
            "inter_tweet_gap_mean_s",
            "inter_tweet_gap_std_s",
            "active_days",
            "tweets_per_active_day",
            "unique_hashtags",
            "url_tweet_ratio",
            "retweet_ratio",
            "reply_ratio",
            "duplicate_text_ratio",
            "vocab_size",
            "posting_hour_entropy",
            "polarity_mean",
            "polarity_std",
            "subjectivity_mean",
            "subjectivity_std",
            "account_age_days",
        ] {
            assert!(c.index_of(id).is_some(), "{id}");
        }
    }
}
