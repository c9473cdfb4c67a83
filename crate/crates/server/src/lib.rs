//! Session server for the labeling workbench.
//!
//! A [`Session`] serves one preprocessed [`Artifacts`] directory to any
//! number of clients. Clients send [`Envelope`]s of kind `query`,
//! `job_submit`, `job_status`, `selection_update` or `label_update` and get
//! a `result` or `error` with the same id. Selection, label and job-state
//! changes are pushed to every client.

pub mod artifacts;
pub mod client;
mod jobs;
pub mod protocol;
pub mod query;
pub mod session;
pub mod transport;
pub mod visibility;

pub use artifacts::{ArtifactError, Artifacts, ProfileSpec};
pub use client::Client;
pub use protocol::{Envelope, ErrorPayload, Kind, View, ViewQuery};
pub use session::Session;
pub use transport::Server;
