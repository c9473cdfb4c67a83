//! Tokenisation helpers shared by sentiment scoring and topic modeling.

use std::collections::HashSet;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

const STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Bundled English stopword list, one token per line.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.lines().map(str::trim).filter(|l| !l.is_empty()).collect())
}

/// Porter-family (Snowball English) suffix stripping of a lowercase word.
pub fn stem(word: &str) -> String {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English)).stem(word).into_owned()
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '¡' | '¿' | '«' | '»')
}

/// Whitespace tokens with leading/trailing punctuation stripped, lowercased.
/// Empty tokens are dropped.
pub fn word_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().map(|t| t.trim_matches(is_punct).to_lowercase()).filter(|t| !t.is_empty())
}
