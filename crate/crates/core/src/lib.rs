//! Analytics engine behind the labeling workbench.
//!
//! Data flows from [`ingest`] (CSV loading into a [`ingest::Corpus`]) through
//! [`features`], [`sentiment`] and [`topics`] into the artifacts the server
//! answers view queries from. [`dimred`] and [`stats`] compute view payloads
//! on demand and [`session`] holds the mutable selection and label state.

pub mod control;
pub mod dimred;
pub mod eval;
pub mod exec;
pub mod features;
pub mod ingest;
pub mod sentiment;
pub mod session;
pub mod stats;
pub mod synthetic;
pub mod text;
pub mod time;
pub mod topics;

pub use control::JobControl;
pub use exec::Execution;
