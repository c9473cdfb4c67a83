//! Topic modeling over per-account documents.
//!
//! A document is the concatenation of one account's tweets inside the
//! active time window, preprocessed by [`prepare_documents`]. Models are
//! fitted with collapsed Gibbs sampling and are immutable afterwards.

mod analysis;
mod lda;
mod preprocess;

pub use analysis::{
    members, summaries, topic_scores, topic_sentiment, word_cloud_weights, TopicSummary, DEFAULT_THRESHOLD, SENTIMENT_TOP_N,
    WORD_CLOUD_LIMIT,
};
pub use lda::{fit_lda, fit_lda_with, LdaParams, TopicModel};
pub use preprocess::{prepare_documents, topic_tokens, DocumentSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopicError {
    #[error("no account has tokens in the requested window")]
    EmptyWindow,
    #[error("document set is empty")]
    EmptyDocuments,
    #[error("invalid hyperparameter {0}")]
    InvalidHyperparameter(&'static str),
    #[error("unknown topic id {0}")]
    UnknownTopicId(usize),
    #[error("no topics selected")]
    EmptySelection,
    #[error("cancelled")]
    Cancelled,
}
