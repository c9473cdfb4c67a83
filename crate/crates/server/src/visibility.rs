//! Machine check of the visibility contract on serialized payloads.
//!
//! Walks the whole JSON document. Every `account_id` value counts toward
//! the page limit, every `period`/`periods` label must be covered by the
//! window, every `created_at` must fall inside it, and every
//! `feature_id`/`feature_ids` value must be a requested feature.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use labelbench_core::time::Period;
use serde_json::Value;

use crate::protocol::ViewQuery;

#[derive(Debug, Default)]
struct Seen {
    accounts: BTreeSet<String>,
    violations: Vec<String>,
}

/// `catalog` is the full feature id list, used when the query names no
/// features. Returns every violation found.
pub fn check_payload(q: &ViewQuery, payload: &Value, catalog: &[String]) -> Result<(), Vec<String>> {
    let allowed: BTreeSet<&str> = match &q.feature_ids {
        Some(ids) => ids.iter().map(String::as_str).collect(),
        None => catalog.iter().map(String::as_str).collect(),
    };
    let mut seen = Seen::default();
    walk(q, payload, &allowed, &mut seen);
    if seen.accounts.len() > q.page_size {
        seen.violations.push(format!("{} accounts referenced, page size {}", seen.accounts.len(), q.page_size));
    }
    if seen.violations.is_empty() {
        Ok(())
    } else {
        Err(seen.violations)
    }
}

fn check_period(q: &ViewQuery, v: &Value, seen: &mut Seen) {
    let Some(label) = v.as_str() else {
        seen.violations.push(format!("non-string period {v}"));
        return;
    };
    match label.parse::<Period>() {
        Ok(p) => {
            if let Some(w) = &q.window {
                if !w.covers(&p) {
                    seen.violations.push(format!("period {label} outside window {}", w.key()));
                }
            }
            if q.level.granularity().is_some_and(|g| g != p.granularity()) {
                seen.violations.push(format!("period {label} not at level {}", q.level.name()));
            }
        }
        Err(_) => seen.violations.push(format!("unparseable period {label:?}")),
    }
}

fn check_feature(v: &Value, allowed: &BTreeSet<&str>, seen: &mut Seen) {
    match v.as_str() {
        Some(f) if allowed.contains(f) => {}
        _ => seen.violations.push(format!("feature {v} not requested")),
    }
}

fn walk(q: &ViewQuery, v: &Value, allowed: &BTreeSet<&str>, seen: &mut Seen) {
    match v {
        Value::Array(items) => items.iter().for_each(|i| walk(q, i, allowed, seen)),
        Value::Object(map) => {
            for (k, v) in map {
                match k.as_str() {
                    "account_id" => match v.as_str() {
                        Some(id) => {
                            seen.accounts.insert(id.to_string());
                        }
                        None => seen.violations.push(format!("non-string account_id {v}")),
                    },
                    "period" => check_period(q, v, seen),
                    "periods" => v.as_array().into_iter().flatten().for_each(|p| check_period(q, p, seen)),
                    "feature_id" => check_feature(v, allowed, seen),
                    "feature_ids" => v.as_array().into_iter().flatten().for_each(|f| check_feature(f, allowed, seen)),
                    "created_at" => {
                        let ts = v.as_str().and_then(|s| s.parse::<DateTime<Utc>>().ok());
                        match (ts, &q.window) {
                            (None, _) => seen.violations.push(format!("unparseable created_at {v}")),
                            (Some(ts), Some(w)) if !w.contains(ts) => {
                                seen.violations.push(format!("created_at {ts} outside window {}", w.key()))
                            }
                            _ => {}
                        }
                    }
                    _ => walk(q, v, allowed, seen),
                }
            }
        }
        _ => {}
    }
}
