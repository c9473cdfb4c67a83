//! Selection algebra and durable label assignments for one labeling
//! session.
//!
//! The label store is log-structured: every mutation is appended to a JSON
//! lines audit log and synced to disk before the call returns. Opening a
//! store replays the log, so the log alone is the persistent state.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("unknown account id {0:?}")]
    UnknownAccountId(String),
    #[error("label store persistence failed: {0}")]
    PersistenceFailure(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("malformed label file line {line}: {reason}")]
    Malformed { line: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Genuine,
    Spambot,
    Unlabeled,
}

impl LabelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::Genuine => "genuine",
            LabelClass::Spambot => "spambot",
            LabelClass::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Option<LabelClass> {
        match s.trim().to_ascii_lowercase().as_str() {
            "genuine" => Some(LabelClass::Genuine),
            "spambot" => Some(LabelClass::Spambot),
            "unlabeled" | "" => Some(LabelClass::Unlabeled),
            _ => None,
        }
    }
}

/// The set of valid account ids for a session.
pub type Universe = Arc<BTreeSet<String>>;

fn check_ids<'a>(ids: impl IntoIterator<Item = &'a String>, universe: &BTreeSet<String>) -> Result<(), SessionError> {
    match ids.into_iter().find(|id| !universe.contains(*id)) {
        Some(id) => Err(SessionError::UnknownAccountId(id.clone())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    New,
    Add,
    Subtract,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionState {
    pub selected: BTreeSet<String>,
}

impl SelectionState {
    pub fn new(selected: BTreeSet<String>) -> Self {
        SelectionState { selected }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.selected.contains(id)
    }
}

/// Combine the current selection with a newly gestured id set.
pub fn apply_selection(
    state: &SelectionState,
    rule: SelectionRule,
    ids: &BTreeSet<String>,
    universe: &BTreeSet<String>,
) -> Result<SelectionState, SessionError> {
    check_ids(ids, universe)?;
    let selected = match rule {
        SelectionRule::New => ids.clone(),
        SelectionRule::Add => state.selected.union(ids).cloned().collect(),
        SelectionRule::Subtract => state.selected.difference(ids).cloned().collect(),
    };
    Ok(SelectionState { selected })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "class")]
pub enum SpecialSelection {
    All,
    None,
    Inverse,
    ByClass(LabelClass),
}

pub fn select_special(state: &SelectionState, mode: SpecialSelection, universe: &BTreeSet<String>, labels: &LabelStore) -> SelectionState {
    let selected = match mode {
        SpecialSelection::All => universe.clone(),
        SpecialSelection::None => BTreeSet::new(),
        SpecialSelection::Inverse => universe.difference(&state.selected).cloned().collect(),
        SpecialSelection::ByClass(c) => universe.iter().filter(|id| labels.label(id) == c).cloned().collect(),
    };
    SelectionState { selected }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub class: LabelClass,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seq: u64,
    pub account_id: String,
    pub class: LabelClass,
    pub at: DateTime<Utc>,
}

/// Label assignments (absent key = unlabeled) plus their audit log.
#[derive(Debug)]
pub struct LabelStore {
    universe: Universe,
    assignments: BTreeMap<String, Assignment>,
    audit_log: Vec<AuditRecord>,
    log: Option<(PathBuf, File)>,
}

impl LabelStore {
    /// A store that is not persisted.
    pub fn in_memory(universe: Universe) -> Self {
        LabelStore { universe, assignments: BTreeMap::new(), audit_log: Vec::new(), log: None }
    }

    /// Open (or create) the store persisted at `path`, replaying its log.
    /// A torn final line (crash mid-append) is discarded.
    pub fn open(path: &Path, universe: Universe) -> Result<Self, SessionError> {
        let mut records = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
            let last = lines.len();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<AuditRecord>(line) {
                    Ok(r) => records.push(r),
                    Err(_) if i + 1 == last => break,
                    Err(e) => {
                        return Err(SessionError::Malformed { line: i as u64 + 1, reason: e.to_string() });
                    }
                }
            }
        }
        let mut store = LabelStore::replay(&records, universe)?;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        store.log = Some((path.to_path_buf(), file));
        Ok(store)
    }

    /// Rebuild assignments from audit records, in order.
    pub fn replay(records: &[AuditRecord], universe: Universe) -> Result<Self, SessionError> {
        let mut store = LabelStore::in_memory(universe);
        for r in records {
            check_ids([&r.account_id], &store.universe)?;
            store.apply(r.clone());
        }
        Ok(store)
    }

    fn apply(&mut self, r: AuditRecord) {
        match r.class {
            LabelClass::Unlabeled => {
                self.assignments.remove(&r.account_id);
            }
            class => {
                self.assignments.insert(r.account_id.clone(), Assignment { class, updated_at: r.at });
            }
        }
        self.audit_log.push(r);
    }

    pub fn set_labels(&mut self, ids: &BTreeSet<String>, class: LabelClass) -> Result<Vec<AuditRecord>, SessionError> {
        self.set_labels_at(ids, class, Utc::now())
    }

    /// Label every id in `ids`; the records are on disk before this returns.
    pub fn set_labels_at(
        &mut self,
        ids: &BTreeSet<String>,
        class: LabelClass,
        at: DateTime<Utc>,
    ) -> Result<Vec<AuditRecord>, SessionError> {
        check_ids(ids, &self.universe)?;
        let base = self.audit_log.len() as u64;
        let records: Vec<AuditRecord> =
            ids.iter().enumerate().map(|(i, id)| AuditRecord { seq: base + i as u64, account_id: id.clone(), class, at }).collect();
        if let Some((path, file)) = &mut self.log {
            let mut buf = Vec::new();
            for r in &records {
                serde_json::to_writer(&mut buf, r).expect("record serializes");
                buf.push(b'\n');
            }
            file.write_all(&buf)
                .and_then(|_| file.sync_data())
                .map_err(|e| SessionError::PersistenceFailure(format!("{}: {e}", path.display())))?;
        }
        for r in &records {
            self.apply(r.clone());
        }
        Ok(records)
    }

    pub fn label(&self, id: &str) -> LabelClass {
        self.assignments.get(id).map_or(LabelClass::Unlabeled, |a| a.class)
    }

    pub fn labels_for(&self, ids: &[String]) -> Vec<LabelClass> {
        ids.iter().map(|id| self.label(id)).collect()
    }

    pub fn assignments(&self) -> &BTreeMap<String, Assignment> {
        &self.assignments
    }

    pub fn audit_log(&self) -> &[AuditRecord] {
        &self.audit_log
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn count(&self, class: LabelClass) -> usize {
        match class {
            LabelClass::Unlabeled => self.universe.len() - self.assignments.len(),
            c => self.assignments.values().filter(|a| a.class == c).count(),
        }
    }
}

/// One row of an exported label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub class: LabelClass,
    pub updated_at: Option<DateTime<Utc>>,
}

/// Write `account_id,label,updated_at` for every account of the universe,
/// sorted by id. Never-labeled accounts get `unlabeled` and an empty time.
pub fn export_labels(store: &LabelStore, path: &Path) -> Result<(), SessionError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SessionError::IoFailure(e.into()))?;
    let io = |e: csv::Error| SessionError::IoFailure(e.into());
    w.write_record(["account_id", "label", "updated_at"]).map_err(io)?;
    for id in store.universe.iter() {
        let (label, at) = match store.assignments.get(id) {
            Some(a) => (a.class.as_str(), a.updated_at.to_rfc3339_opts(SecondsFormat::AutoSi, true)),
            None => ("unlabeled", String::new()),
        };
        w.write_record([id.as_str(), label, &at]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a label CSV (`account_id,label[,updated_at]`).
pub fn import_labels(path: &Path) -> Result<BTreeMap<String, LabelRow>, SessionError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path).map_err(|e| SessionError::IoFailure(e.into()))?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SessionError::Malformed { line: e.position().map_or(0, |p| p.line()), reason: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let malformed = |reason: String| SessionError::Malformed { line, reason };
        let id = rec.get(0).map(str::trim).filter(|s| !s.is_empty()).ok_or_else(|| malformed("empty id".into()))?;
        let raw = rec.get(1).unwrap_or("");
        let class = LabelClass::parse(raw).ok_or_else(|| malformed(format!("unknown label {raw:?}")))?;
        let updated_at = match rec.get(2).map(str::trim).filter(|s| !s.is_empty()) {
            Some(t) => Some(DateTime::parse_from_rfc3339(t).map_err(|e| malformed(e.to_string()))?.with_timezone(&Utc)),
            None => None,
        };
        if out.insert(id.to_string(), LabelRow { class, updated_at }).is_some() {
            return Err(malformed(format!("duplicate id {id}")));
        }
    }
    Ok(out)
}
