//! Wire types. Every message is an [`Envelope`]; requests carry a
//! client-chosen id that the matching `result` or `error` echoes.

use std::collections::BTreeSet;

use labelbench_core::dimred::{DrSpec, Transform};
use labelbench_core::session::{LabelClass, SelectionRule, SpecialSelection};
use labelbench_core::time::{Level, PeriodRange};
use labelbench_core::topics::LdaParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Largest accepted frame body, in bytes.
pub const MAX_FRAME: usize = 64 << 20;
pub const DEFAULT_PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Query,
    Result,
    JobSubmit,
    JobStatus,
    SelectionUpdate,
    LabelUpdate,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub id: String,
    pub kind: Kind,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn new(id: impl Into<String>, kind: Kind, payload: impl Serialize) -> Envelope {
        Envelope { id: id.into(), kind, payload: serde_json::to_value(payload).expect("payload serializes") }
    }

    pub fn error(id: impl Into<String>, err: &ErrorPayload) -> Envelope {
        Envelope::new(id, Kind::Error, err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Timeline,
    Dimred,
    Details,
    Topics,
    Features,
}

fn default_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewQuery {
    pub view: View,
    #[serde(default)]
    pub level: Level,
    #[serde(default)]
    pub window: Option<PeriodRange>,
    #[serde(default)]
    pub feature_ids: Option<Vec<String>>,
    #[serde(default)]
    pub page: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default)]
    pub method_spec: Option<Value>,
    /// Details view: accounts to describe instead of the current selection.
    #[serde(default)]
    pub account_ids: Option<Vec<String>>,
    /// Topics view: topics whose word cloud and members are requested.
    #[serde(default)]
    pub topic_ids: Option<BTreeSet<usize>>,
    /// Topics view: membership threshold.
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl ViewQuery {
    pub fn new(view: View) -> ViewQuery {
        ViewQuery {
            view,
            level: Level::Overall,
            window: None,
            feature_ids: None,
            page: 0,
            page_size: DEFAULT_PAGE_SIZE,
            method_spec: None,
            account_ids: None,
            topic_ids: None,
            threshold: None,
        }
    }
}

/// `method_spec` of a dimred query: either a bare DR spec or a spec with a
/// column transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimredSpec {
    pub spec: DrSpec,
    #[serde(default = "default_transform")]
    pub transform: Transform,
}

fn default_transform() -> Transform {
    Transform::Zscore
}

impl Default for DimredSpec {
    fn default() -> Self {
        DimredSpec { spec: DrSpec::Kpca { kernel: Default::default() }, transform: default_transform() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "job", rename_all = "snake_case")]
pub enum JobSpec {
    Dimred {
        spec: DrSpec,
        #[serde(default = "default_transform")]
        transform: Transform,
        #[serde(default)]
        feature_ids: Option<Vec<String>>,
        #[serde(default)]
        window: Option<PeriodRange>,
    },
    Lda {
        #[serde(default)]
        level: Level,
        #[serde(default)]
        window: Option<PeriodRange>,
        #[serde(flatten)]
        params: LdaParamsWire,
    },
}

/// LDA hyperparameters as sent by clients; omitted fields take defaults
/// for the given `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParamsWire {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    20
}

impl LdaParamsWire {
    pub fn resolve(&self) -> LdaParams {
        let d = LdaParams::with_k(self.k);
        LdaParams {
            k: self.k,
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed,
        }
    }
}

impl From<LdaParams> for LdaParamsWire {
    fn from(p: LdaParams) -> Self {
        LdaParamsWire { k: p.k, alpha: Some(p.alpha), beta: Some(p.beta), iterations: Some(p.iterations), seed: p.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running { progress: f64 },
    Done { result_ref: String },
    Failed { message: String },
    Cancelled,
}

impl JobState {
    /// Position in the forward-only state order.
    pub fn rank(&self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Running { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.rank() == 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job_id: String,
    #[serde(flatten)]
    pub state: JobState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobPoll {
    pub job_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectionRequest {
    Rule { rule: SelectionRule, ids: BTreeSet<String> },
    Special { special: SpecialSelection },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRequest {
    pub ids: BTreeSet<String>,
    pub class: LabelClass,
}

/// Pushed to every client after a selection mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPush {
    pub seq: u64,
    pub request: SelectionRequest,
    pub selected: BTreeSet<String>,
}

/// Pushed to every client after a label mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPush {
    pub seq: u64,
    pub ids: BTreeSet<String>,
    pub class: LabelClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ErrorPayload {
    #[error("invalid query field {field}: {message}")]
    InvalidQuery { field: String, message: String },
    #[error("unknown feature {feature_id}")]
    UnknownFeature { feature_id: String },
    #[error("topics are being computed by job {job_id}")]
    JobPending { job_id: String },
    #[error("unknown job {job_id}")]
    UnknownJob { job_id: String },
    #[error("unknown account {account_id}")]
    UnknownAccountId { account_id: String },
    #[error("invalid hyperparameter {name}: {message}")]
    InvalidHyperparameter { name: String, message: String },
    #[error("bad request: {message}")]
    BadRequest { message: String },
    #[error("internal error: {message}")]
    Internal { message: String },
}

impl ErrorPayload {
    pub fn invalid(field: &str, message: impl ToString) -> ErrorPayload {
        ErrorPayload::InvalidQuery { field: field.to_string(), message: message.to_string() }
    }

    pub fn bad_request(message: impl ToString) -> ErrorPayload {
        ErrorPayload::BadRequest { message: message.to_string() }
    }
}
