use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::ingest::Corpus;
use crate::text::{stem, stopwords};
use crate::time::{Level, PeriodRange};

const MIN_TOKEN_LEN: usize = 3;
const MIN_DOC_FREQ: usize = 2;

/// One document per account with at least one surviving token, in corpus
/// order. `vocabulary` is sorted and every document token belongs to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSet {
    pub level: Level,
    pub window: Option<PeriodRange>,
    pub documents: Vec<(String, Vec<String>)>,
    pub vocabulary: Vec<String>,
}

impl DocumentSet {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|(_, t)| t.len()).sum()
    }
}

fn strip_links_and_mentions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        let mut rest = word;
        let mut kept = String::new();
        while !rest.is_empty() {
            if rest.starts_with("http://") || rest.starts_with("https://") {
                rest = "";
            } else if let Some(after) = rest.strip_prefix('@') {
                let preceded_by_word = kept.chars().last().is_some_and(|c| c.is_alphanumeric() || c == '_');
                if preceded_by_word {
                    kept.push('@');
                    rest = after;
                } else {
                    let end = after.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(after.len());
                    rest = &after[end..];
                }
            } else {
                let c = rest.chars().next().expect("nonempty");
                kept.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
        out.push_str(&kept);
        out.push(' ');
    }
    out
}

/// Tokens of one text before document-frequency pruning: lowercase, URLs
/// and @mentions removed, split on non-alphanumerics, stopwords removed,
/// stemmed, short tokens removed.
pub fn topic_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let cleaned = strip_links_and_mentions(&lower);
    let stop = stopwords();
    cleaned
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stop.contains(w))
        .map(stem)
        .filter(|s| s.chars().count() >= MIN_TOKEN_LEN)
        .collect()
}

/// Build documents from the tweets inside `window` (all tweets when
/// `None`). Tokens that occur in fewer than two documents are dropped,
/// then accounts left without tokens are omitted.
pub fn prepare_documents(corpus: &Corpus, level: Level, window: Option<PeriodRange>) -> Result<DocumentSet, TopicError> {
    let mut raw: Vec<(String, Vec<String>)> = Vec::new();
    for (account, tweets) in corpus.iter_accounts() {
        let tokens: Vec<String> =
            tweets.iter().filter(|t| window.is_none_or(|w| w.contains(t.created_at))).flat_map(|t| topic_tokens(&t.text)).collect();
        if !tokens.is_empty() {
            raw.push((account.account_id.clone(), tokens));
        }
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, tokens) in &raw {
        let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let keep: BTreeSet<String> = df.into_iter().filter(|(_, n)| *n >= MIN_DOC_FREQ).map(|(t, _)| t.to_string()).collect();

    let documents: Vec<(String, Vec<String>)> = raw
        .into_iter()
        .filter_map(|(id, tokens)| {
            let kept: Vec<String> = tokens.into_iter().filter(|t| keep.contains(t)).collect();
            (!kept.is_empty()).then_some((id, kept))
        })
        .collect();
    if documents.is_empty() {
        return Err(TopicError::EmptyWindow);
    }
    Ok(DocumentSet { level, window, documents, vocabulary: keep.into_iter().collect() })
}
