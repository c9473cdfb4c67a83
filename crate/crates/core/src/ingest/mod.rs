//! Account/tweet corpus: data model, CSV loading and validation.
//!
//! Two CSV layouts are accepted. The canonical one:
//!
//! ```text
//! accounts: account_id,screen_name,display_name,created_at,followers_count,following_count,likes_count,tweet_count,profile_image_url
//! tweets:   tweet_id,account_id,created_at,text,retweet_count,favorite_count,is_retweet,is_reply[,hashtags,urls,mentions]
//! ```
//!
//! and the public cresci-2017 dump layout (`users.csv` / `tweets.csv`), whose
//! columns are mapped onto the canonical fields by name. Columns are matched
//! by header name, so their order does not matter.

mod entities;
mod validate;

pub use entities::{extract_entities, Entities};
pub use validate::{validate_corpus, ValidationReport, Violation, ViolationKind};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    FileMissing(PathBuf),
    #[error("{file}:{line}: malformed row: {reason}")]
    MalformedRow { file: String, line: u64, reason: String },
    #[error("tweet {0} references an unknown account")]
    OrphanTweet(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("{file}:{line}: unparseable timestamp {value:?}")]
    UnparseableTimestamp { file: String, line: u64, value: String },
    #[error("reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub account_id: String,
    pub screen_name: String,
    pub display_name: String,
    pub created_at: DateTime<Utc>,
    pub followers_count: u64,
    pub following_count: u64,
    pub likes_count: u64,
    pub declared_tweet_count: u64,
    pub profile_image_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub tweet_id: String,
    pub account_id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub retweet_count: u64,
    pub favorite_count: u64,
    pub is_retweet: bool,
    pub is_reply: bool,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

/// Immutable analysis input. Accounts are keyed (and therefore ordered)
/// lexicographically by id; that order is the row order of every matrix
/// derived from the corpus. Tweets are sorted by `(account_id, created_at,
/// tweet_id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub accounts: BTreeMap<String, Account>,
    pub tweets: Vec<Tweet>,
    pub time_span: TimeSpan,
}

impl Corpus {
    /// Assemble a corpus from unsorted parts, sorting tweets and computing
    /// the time span. Does not validate.
    pub fn from_parts(accounts: Vec<Account>, mut tweets: Vec<Tweet>) -> Corpus {
        tweets.sort_by(|a, b| (&a.account_id, a.created_at, &a.tweet_id).cmp(&(&b.account_id, b.created_at, &b.tweet_id)));
        let accounts: BTreeMap<String, Account> = accounts.into_iter().map(|a| (a.account_id.clone(), a)).collect();
        let time_span = compute_time_span(&accounts, &tweets);
        Corpus { accounts, tweets, time_span }
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    pub fn account_ids(&self) -> Vec<String> {
        self.accounts.keys().cloned().collect()
    }

    /// Tweets of one account, in chronological order.
    pub fn tweets_of(&self, account_id: &str) -> &[Tweet] {
        let lo = self.tweets.partition_point(|t| t.account_id.as_str() < account_id);
        let hi = self.tweets.partition_point(|t| t.account_id.as_str() <= account_id);
        &self.tweets[lo..hi]
    }

    /// `(account, tweets)` pairs in canonical order.
    pub fn iter_accounts(&self) -> impl Iterator<Item = (&Account, &[Tweet])> {
        self.accounts.values().map(move |a| (a, self.tweets_of(&a.account_id)))
    }

    /// Canonical row index of every account.
    pub fn row_index(&self) -> HashMap<&str, usize> {
        self.accounts.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect()
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("corpus serializes")
    }
}

pub(crate) fn compute_time_span(accounts: &BTreeMap<String, Account>, tweets: &[Tweet]) -> TimeSpan {
    let times: Box<dyn Iterator<Item = DateTime<Utc>>> =
        if tweets.is_empty() { Box::new(accounts.values().map(|a| a.created_at)) } else { Box::new(tweets.iter().map(|t| t.created_at)) };
    let (mut start, mut end) = (None::<DateTime<Utc>>, None::<DateTime<Utc>>);
    for t in times {
        start = Some(start.map_or(t, |s| s.min(t)));
        end = Some(end.map_or(t, |e| e.max(t)));
    }
    let epoch = DateTime::<Utc>::UNIX_EPOCH;
    TimeSpan { start: start.unwrap_or(epoch), end: end.unwrap_or(epoch) }
}

/// Parse ISO-8601 / RFC 3339, `YYYY-MM-DD[ HH:MM:SS]`, the Twitter API
/// format (`Tue Jun 11 10:15:35 +0000 2013`) or epoch seconds. Zone-less
/// values are taken as UTC.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(secs) = s.parse::<i64>() {
        return Utc.timestamp_opt(secs, 0).single();
    }
    if let Ok(secs) = s.parse::<f64>() {
        if secs.is_finite() {
            let whole = secs.floor();
            let nanos = ((secs - whole) * 1e9).round() as u32;
            return Utc.timestamp_opt(whole as i64, nanos.min(999_999_999)).single();
        }
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y") {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Utc.from_utc_datetime(&t));
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0)?));
    }
    None
}

/// Header lookup with per-field aliases (canonical name first).
struct Columns {
    file: String,
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(file: &str, headers: &csv::StringRecord) -> Self {
        let index = headers.iter().enumerate().map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase(), i)).collect();
        Columns { file: file.to_string(), index }
    }

    fn find(&self, aliases: &[&str]) -> Option<usize> {
        aliases.iter().find_map(|a| self.index.get(*a).copied())
    }

    fn require(&self, aliases: &[&str]) -> Result<usize, IngestError> {
        self.find(aliases).ok_or_else(|| IngestError::MalformedRow {
            file: self.file.clone(),
            line: 1,
            reason: format!("missing column {}", aliases[0]),
        })
    }
}

struct Row<'a> {
    file: &'a str,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn malformed(&self, reason: impl Into<String>) -> IngestError {
        IngestError::MalformedRow { file: self.file.to_string(), line: self.line, reason: reason.into() }
    }

    fn str(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("")
    }

    fn opt(&self, col: Option<usize>) -> Option<&str> {
        col.map(|c| self.str(c)).filter(|s| !s.trim().is_empty())
    }

    fn id(&self, col: usize, what: &str) -> Result<String, IngestError> {
        let v = self.str(col).trim();
        if v.is_empty() {
            return Err(self.malformed(format!("empty {what}")));
        }
        Ok(v.to_string())
    }

    fn count(&self, col: Option<usize>, what: &str) -> Result<u64, IngestError> {
        let Some(v) = self.opt(col) else { return Ok(0) };
        let v = v.trim();
        if let Ok(n) = v.parse::<u64>() {
            return Ok(n);
        }
        // Some dumps write integral counts as floats ("12.0").
        match v.parse::<f64>() {
            Ok(f) if f >= 0.0 && f.fract() == 0.0 && f.is_finite() => Ok(f as u64),
            _ => Err(self.malformed(format!("{what} is not a nonnegative integer: {v:?}"))),
        }
    }

    fn flag(&self, col: Option<usize>, what: &str) -> Result<bool, IngestError> {
        let Some(v) = self.opt(col) else { return Ok(false) };
        match v.trim().to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" | "t" => Ok(true),
            "false" | "0" | "no" | "f" => Ok(false),
            other => Err(self.malformed(format!("{what} is not a boolean: {other:?}"))),
        }
    }

    /// A nonempty, nonzero id column (cresci's `retweeted_status_id`).
    fn nonzero_id(&self, col: Option<usize>) -> bool {
        self.opt(col).is_some_and(|v| {
            let v = v.trim();
            v != "0" && v.parse::<f64>() != Ok(0.0)
        })
    }

    fn timestamp(&self, col: usize) -> Result<DateTime<Utc>, IngestError> {
        let v = self.str(col);
        parse_timestamp(v).ok_or_else(|| IngestError::UnparseableTimestamp {
            file: self.file.to_string(),
            line: self.line,
            value: v.to_string(),
        })
    }
}

fn open_csv(path: &Path) -> Result<(String, csv::Reader<File>), IngestError> {
    let name = path.display().to_string();
    if !path.exists() {
        return Err(IngestError::FileMissing(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|source| IngestError::Io { file: name.clone(), source })?;
    let reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(file);
    Ok((name, reader))
}

fn csv_error(file: &str, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io { file: file.to_string(), source },
        kind => IngestError::MalformedRow { file: file.to_string(), line, reason: format!("{kind:?}") },
    }
}

fn dedup(items: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

pub fn load_accounts(path: &Path) -> Result<Vec<Account>, IngestError> {
    let (file, mut rdr) = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(&file, e))?.clone();
    let cols = Columns::new(&file, &headers);
    let c_id = cols.require(&["account_id", "id"])?;
    let c_screen = cols.require(&["screen_name"])?;
    let c_display = cols.find(&["display_name", "name"]);
    let c_created = cols.require(&["created_at"])?;
    let c_followers = cols.find(&["followers_count"]);
    let c_following = cols.find(&["following_count", "friends_count"]);
    let c_likes = cols.find(&["likes_count", "favourites_count", "favorites_count"]);
    let c_tweets = cols.find(&["tweet_count", "statuses_count"]);
    let c_image = cols.find(&["profile_image_url", "profile_image_url_https"]);

    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(&file, e)),
        }
        let row = Row { file: &file, line: record.position().map_or(0, |p| p.line()), record: &record };
        out.push(Account {
            account_id: row.id(c_id, "account_id")?,
            screen_name: row.str(c_screen).trim().to_string(),
            display_name: row.opt(c_display).unwrap_or("").trim().to_string(),
            created_at: row.timestamp(c_created)?,
            followers_count: row.count(c_followers, "followers_count")?,
            following_count: row.count(c_following, "following_count")?,
            likes_count: row.count(c_likes, "likes_count")?,
            declared_tweet_count: row.count(c_tweets, "tweet_count")?,
            profile_image_url: row.opt(c_image).map(|s| s.trim().to_string()),
        });
    }
    Ok(out)
}

pub fn load_tweets(path: &Path) -> Result<Vec<Tweet>, IngestError> {
    let (file, mut rdr) = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(&file, e))?.clone();
    let cols = Columns::new(&file, &headers);
    let c_id = cols.require(&["tweet_id", "id"])?;
    let c_account = cols.require(&["account_id", "user_id"])?;
    let c_created = cols.require(&["created_at", "timestamp"])?;
    let c_text = cols.require(&["text"])?;
    let c_rt = cols.find(&["retweet_count"]);
    let c_fav = cols.find(&["favorite_count", "favourite_count"]);
    let c_is_rt = cols.find(&["is_retweet"]);
    let c_is_reply = cols.find(&["is_reply"]);
    let c_rt_status = cols.find(&["retweeted_status_id"]);
    let c_reply_status = cols.find(&["in_reply_to_status_id"]);
    let c_hashtags = cols.find(&["hashtags"]);
    let c_urls = cols.find(&["urls"]);
    let c_mentions = cols.find(&["mentions"]);

    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(&file, e)),
        }
        let row = Row { file: &file, line: record.position().map_or(0, |p| p.line()), record: &record };
        let text = row.str(c_text).to_string();
        let derived = extract_entities(&text);
        let list = |col: Option<usize>, fallback: &[String]| match col {
            Some(c) => dedup(row.str(c).split_whitespace().map(str::to_string)),
            None => fallback.to_vec(),
        };
        let is_retweet = match c_is_rt {
            Some(_) => row.flag(c_is_rt, "is_retweet")?,
            None => row.nonzero_id(c_rt_status),
        };
        let is_reply = match c_is_reply {
            Some(_) => row.flag(c_is_reply, "is_reply")?,
            None => row.nonzero_id(c_reply_status),
        };
        out.push(Tweet {
            tweet_id: row.id(c_id, "tweet_id")?,
            account_id: row.id(c_account, "account_id")?,
            created_at: row.timestamp(c_created)?,
            retweet_count: row.count(c_rt, "retweet_count")?,
            favorite_count: row.count(c_fav, "favorite_count")?,
            is_retweet,
            is_reply,
            hashtags: list(c_hashtags, &derived.hashtags),
            urls: list(c_urls, &derived.urls),
            mentions: list(c_mentions, &derived.mentions),
            text,
        });
    }
    Ok(out)
}

/// Load and validate a corpus from an accounts CSV and a tweets CSV.
pub fn load_dataset(accounts_path: &Path, tweets_path: &Path) -> Result<Corpus, IngestError> {
    let accounts = load_accounts(accounts_path)?;
    let tweets = load_tweets(tweets_path)?;

    let mut ids = HashSet::with_capacity(accounts.len());
    for a in &accounts {
        if !ids.insert(a.account_id.as_str()) {
            return Err(IngestError::DuplicateId(a.account_id.clone()));
        }
    }
    let mut tweet_ids = HashSet::with_capacity(tweets.len());
    for t in &tweets {
        if !tweet_ids.insert(t.tweet_id.as_str()) {
            return Err(IngestError::DuplicateId(t.tweet_id.clone()));
        }
        if !ids.contains(t.account_id.as_str()) {
            return Err(IngestError::OrphanTweet(t.tweet_id.clone()));
        }
    }
    if let Some(newest) = tweets.iter().map(|t| t.created_at).max() {
        if let Some(a) = accounts.iter().find(|a| a.created_at > newest) {
            return Err(IngestError::MalformedRow {
                file: accounts_path.display().to_string(),
                line: 0,
                reason: format!("account {} created after the newest tweet", a.account_id),
            });
        }
    }
    Ok(Corpus::from_parts(accounts, tweets))
}

/// Write a corpus in the canonical CSV layout, including the optional
/// entity columns so that a reload reproduces the corpus exactly.
pub fn write_dataset(corpus: &Corpus, accounts_path: &Path, tweets_path: &Path) -> std::io::Result<()> {
    let ts = |t: &DateTime<Utc>| t.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true);
    let mut w = csv::Writer::from_path(accounts_path)?;
    w.write_record([
        "account_id",
        "screen_name",
        "display_name",
        "created_at",
        "followers_count",
        "following_count",
        "likes_count",
        "tweet_count",
        "profile_image_url",
    ])?;
    for a in corpus.accounts.values() {
        w.write_record([
            a.account_id.as_str(),
            &a.screen_name,
            &a.display_name,
            &ts(&a.created_at),
            &a.followers_count.to_string(),
            &a.following_count.to_string(),
            &a.likes_count.to_string(),
            &a.declared_tweet_count.to_string(),
            a.profile_image_url.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(tweets_path)?;
    w.write_record([
        "tweet_id",
        "account_id",
        "created_at",
        "text",
        "retweet_count",
        "favorite_count",
        "is_retweet",
        "is_reply",
        "hashtags",
        "urls",
        "mentions",
    ])?;
    for t in &corpus.tweets {
        w.write_record([
            t.tweet_id.as_str(),
            &t.account_id,
            &ts(&t.created_at),
            &t.text,
            &t.retweet_count.to_string(),
            &t.favorite_count.to_string(),
            if t.is_retweet { "true" } else { "false" },
            if t.is_reply { "true" } else { "false" },
            &t.hashtags.join(" "),
            &t.urls.join(" "),
            &t.mentions.join(" "),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const ACCOUNTS: &str =
        "account_id,screen_name,display_name,created_at,followers_count,following_count,likes_count,tweet_count,profile_image_url\n";
    const TWEETS: &str = "tweet_id,account_id,created_at,text,retweet_count,favorite_count,is_retweet,is_reply\n";

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn minimal_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,2012-01-01T00:00:00Z,10,5,3,1,\n"));
        let t = write(dir.path(), "t.csv", &format!("{TWEETS}t1,u1,2014-09-01 12:00:00,\"hello, #world https://x.co\",0,2,false,false\n"));
        let c = load_dataset(&a, &t).unwrap();
        assert_eq!(c.accounts.len(), 1);
        assert_eq!(c.tweets.len(), 1);
        assert_eq!(c.tweets[0].hashtags, ["#world"]);
        assert_eq!(c.tweets[0].urls, ["https://x.co"]);
        assert_eq!(c.accounts["u1"].profile_image_url, None);
        assert_eq!(c.time_span.start, c.time_span.end);
    }

    #[test]
    fn orphan_tweet_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,2012-01-01,1,1,1,1,\n"));
        let t = write(dir.path(), "t.csv", &format!("{TWEETS}t9,x9,2014-09-01,hi,0,0,0,0\n"));
        match load_dataset(&a, &t) {
            Err(IngestError::OrphanTweet(id)) => assert_eq!(id, "t9"),
            other => panic!("expected OrphanTweet, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_locations() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,2012-01-01,1,1,1,1,\nu1,bob2,Bob,2012-01-01,1,1,1,1,\n"));
        let t = write(dir.path(), "t.csv", TWEETS);
        assert!(matches!(load_dataset(&a, &t), Err(IngestError::DuplicateId(id)) if id == "u1"));

        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,yesterday,1,1,1,1,\n"));
        assert!(matches!(load_dataset(&a, &t), Err(IngestError::UnparseableTimestamp { line: 2, .. })));

        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,2012-01-01,-4,1,1,1,\n"));
        assert!(matches!(load_dataset(&a, &t), Err(IngestError::MalformedRow { line: 2, .. })));

        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob\n"));
        assert!(matches!(load_dataset(&a, &t), Err(IngestError::MalformedRow { .. })));

        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_dataset(&missing, &t), Err(IngestError::FileMissing(_))));
    }

    #[test]
    fn entity_columns_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u1,bob,Bob,2012-01-01,1,1,1,1,\n"));
        let t = write(
            dir.path(),
            "t.csv",
            "tweet_id,account_id,created_at,text,retweet_count,favorite_count,is_retweet,is_reply,hashtags,urls,mentions\n\
             t1,u1,2014-01-01,#inline text,0,0,0,0,#a #a #b,,@c\n",
        );
        let c = load_dataset(&a, &t).unwrap();
        assert_eq!(c.tweets[0].hashtags, ["#a", "#b"]);
        assert!(c.tweets[0].urls.is_empty());
        assert_eq!(c.tweets[0].mentions, ["@c"]);
    }

    #[test]
    fn cresci_layout_is_mapped() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "users.csv",
            "id,name,screen_name,statuses_count,followers_count,friends_count,favourites_count,listed_count,created_at,profile_image_url\n\
             42,Ann,ann_b,100,7,0,12,0,Tue Jun 11 10:15:35 +0000 2013,http://img/x.png\n",
        );
        let t = write(
            dir.path(),
            "tweets.csv",
            "id,text,user_id,retweet_count,favorite_count,in_reply_to_status_id,retweeted_status_id,created_at\n\
             1,RT @x: hi,42,3,0,0,555,Fri May 01 00:18:11 +0000 2015\n\
             2,@y sure,42,0,1,777,0,Fri May 01 00:19:11 +0000 2015\n",
        );
        let c = load_dataset(&a, &t).unwrap();
        let acc = &c.accounts["42"];
        assert_eq!((acc.following_count, acc.likes_count, acc.declared_tweet_count), (0, 12, 100));
        assert!(c.tweets[0].is_retweet && !c.tweets[0].is_reply);
        assert!(!c.tweets[1].is_retweet && c.tweets[1].is_reply);
    }

    #[test]
    fn load_is_deterministic_and_order_free() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &format!("{ACCOUNTS}u2,b,B,2012-01-01,1,1,1,1,\nu1,a,A,2012-01-01,1,1,1,1,\n"));
        let rows = ["t1,u1,2014-01-01,one,0,0,0,0\n", "t2,u2,2014-01-02,two,0,0,0,0\n", "t3,u1,2013-01-01,three,0,0,0,0\n"];
        let t1 = write(dir.path(), "t1.csv", &format!("{TWEETS}{}{}{}", rows[0], rows[1], rows[2]));
        let t2 = write(dir.path(), "t2.csv", &format!("{TWEETS}{}{}{}", rows[2], rows[0], rows[1]));
        let c1 = load_dataset(&a, &t1).unwrap();
        let c2 = load_dataset(&a, &t2).unwrap();
        assert_eq!(c1.to_json(), c2.to_json());
        assert_eq!(c1.account_ids(), ["u1", "u2"]);
        assert_eq!(c1.tweets_of("u1").iter().map(|t| t.tweet_id.as_str()).collect::<Vec<_>>(), ["t3", "t1"]);
    }

    #[test]
    fn written_dataset_reloads_identically() {
        let dir = tempfile::tempdir().unwrap();
        let c = crate::synthetic::generate(&crate::synthetic::SyntheticConfig::small(12));
        let (a, t) = (dir.path().join("a.csv"), dir.path().join("t.csv"));
        write_dataset(&c, &a, &t).unwrap();
        let back = load_dataset(&a, &t).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn timestamp_formats() {
        let expect = Utc.with_ymd_and_hms(2014, 9, 1, 12, 0, 0).unwrap();
        for s in
            ["2014-09-01T12:00:00Z", "2014-09-01T14:00:00+02:00", "2014-09-01 12:00:00", "1409572800", "Mon Sep 01 12:00:00 +0000 2014"]
        {
            assert_eq!(parse_timestamp(s), Some(expect), "{s}");
        }
        assert_eq!(parse_timestamp("2014-09-01").unwrap().date_naive(), expect.date_naive());
        assert_eq!(parse_timestamp("soon"), None);
    }
}
