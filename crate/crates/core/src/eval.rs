//! Label quality against ground truth, with spambot as the positive class.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::session::LabelClass;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{file}: {reason}")]
    Malformed { file: String, reason: String },
    #[error("{file}: line {line}: {reason}")]
    BadRow { file: String, line: u64, reason: String },
    #[error("account {0} is labeled but has no ground truth")]
    IdMismatch(String),
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    /// Accounts with a genuine or spambot label.
    pub labeled_count: u64,
    pub unlabeled_count: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Confusion counts over labeled accounts. Unlabeled entries are counted
/// separately and excluded from the metrics; truth rows without a label
/// are ignored.
pub fn evaluate(labels: &BTreeMap<String, LabelClass>, truth: &BTreeMap<String, LabelClass>) -> Result<EvalReport, EvalError> {
    let (mut tp, mut fp, mut fn_, mut tn, mut unlabeled) = (0, 0, 0, 0, 0);
    for (id, &label) in labels {
        if label == LabelClass::Unlabeled {
            unlabeled += 1;
            continue;
        }
        let actual = truth.get(id).copied().filter(|c| *c != LabelClass::Unlabeled);
        match (label, actual.ok_or_else(|| EvalError::IdMismatch(id.clone()))?) {
            (LabelClass::Spambot, LabelClass::Spambot) => tp += 1,
            (LabelClass::Spambot, _) => fp += 1,
            (_, LabelClass::Spambot) => fn_ += 1,
            _ => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(EvalReport {
        precision,
        recall,
        f1,
        accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
        tp,
        fp,
        fn_,
        tn,
        labeled_count: tp + fp + fn_ + tn,
        unlabeled_count: unlabeled,
    })
}

/// Reads `account_id,label` CSV (extra columns ignored; `class` is
/// accepted for `label`). Labels `bot`/`human` and `1`/`0` are also
/// understood.
pub fn read_label_csv(path: &Path) -> Result<BTreeMap<String, LabelClass>, EvalError> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => EvalError::Io { file: file.clone(), source },
        other => EvalError::Malformed { file: file.clone(), reason: format!("{other:?}") },
    })?;
    let headers = rdr.headers().map_err(|e| EvalError::Malformed { file: file.clone(), reason: e.to_string() })?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim().to_ascii_lowercase().as_str()));
    let id_col = col(&["account_id", "id", "user_id"])
        .ok_or_else(|| EvalError::Malformed { file: file.clone(), reason: "missing account_id column".into() })?;
    let label_col =
        col(&["label", "class"]).ok_or_else(|| EvalError::Malformed { file: file.clone(), reason: "missing label column".into() })?;

    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| EvalError::BadRow { file: file.clone(), line, reason: e.to_string() })?;
        let id = rec.get(id_col).unwrap_or("").trim();
        let raw = rec.get(label_col).unwrap_or("").trim();
        let class =
            parse_class(raw).ok_or_else(|| EvalError::BadRow { file: file.clone(), line, reason: format!("unknown label {raw:?}") })?;
        if id.is_empty() {
            return Err(EvalError::BadRow { file: file.clone(), line, reason: "empty account_id".into() });
        }
        if out.insert(id.to_string(), class).is_some() {
            return Err(EvalError::BadRow { file: file.clone(), line, reason: format!("duplicate account_id {id}") });
        }
    }
    Ok(out)
}

fn parse_class(raw: &str) -> Option<LabelClass> {
    match raw.to_ascii_lowercase().as_str() {
        "bot" | "1" => Some(LabelClass::Spambot),
        "human" | "0" => Some(LabelClass::Genuine),
        "" => Some(LabelClass::Unlabeled),
        other => LabelClass::parse(other),
    }
}
