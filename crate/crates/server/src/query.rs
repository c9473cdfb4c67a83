//! View queries. A payload references only the accounts on the requested
//! page, the periods inside the window and the requested features.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;
use std::sync::Arc;

use labelbench_core::dimred::{reduce_with, transform, DrError, DrSpec, Embedding2D, Transform};
use labelbench_core::features::{extract_static_with, FeatureMatrix};
use labelbench_core::ingest::{Corpus, Tweet};
use labelbench_core::stats::{box_stats, feature_distributions, BoxStats, Group};
use labelbench_core::text::{stopwords, word_tokens};
use labelbench_core::time::{Level, PeriodRange};
use labelbench_core::topics::{self, TopicError, DEFAULT_THRESHOLD, WORD_CLOUD_LIMIT};
use labelbench_core::{Execution, JobControl};
use serde_json::{json, Value};

use crate::artifacts::profile_key;
use crate::protocol::{DimredSpec, ErrorPayload, JobSpec, JobState, LdaParamsWire, View, ViewQuery};
use crate::session::{lock, Session};

pub const MAX_PAGE_SIZE: usize = 10_000;
/// Words per topic in a topics payload.
pub const TOPIC_TOP_WORDS: usize = 10;
/// Entries in a details word-frequency list.
pub const WORD_COUNT_LIMIT: usize = 50;

fn invalid(field: &str, message: impl ToString) -> ErrorPayload {
    ErrorPayload::invalid(field, message)
}

pub fn handle_query(session: &Arc<Session>, q: &ViewQuery) -> Result<Value, ErrorPayload> {
    if q.page_size == 0 || q.page_size > MAX_PAGE_SIZE {
        return Err(invalid("page_size", format!("must be in 1..={MAX_PAGE_SIZE}")));
    }
    check_window(session, q.window.as_ref())?;
    let features = resolve_features(session, q.feature_ids.as_deref())?;
    match q.view {
        View::Timeline => timeline(session, q, &features),
        View::Dimred => dimred(session, q),
        View::Details => details(session, q),
        View::Topics => topics_view(session, q),
        View::Features => features_view(session, q, &features),
    }
}

/// A window must be nonempty and intersect the corpus time span.
pub(crate) fn check_window(session: &Session, window: Option<&PeriodRange>) -> Result<(), ErrorPayload> {
    let Some(w) = window else { return Ok(()) };
    if w.is_empty() {
        return Err(invalid("window", "empty range"));
    }
    let span = session.artifacts.corpus.time_span;
    if !w.overlaps(span.start, span.end) {
        return Err(invalid("window", format!("{} does not intersect the corpus span {} .. {}", w.key(), span.start, span.end)));
    }
    Ok(())
}

fn resolve_features(session: &Session, ids: Option<&[String]>) -> Result<Vec<String>, ErrorPayload> {
    let catalog = &session.artifacts.catalog;
    let Some(ids) = ids else { return Ok(catalog.ids()) };
    if ids.is_empty() {
        return Err(invalid("feature_ids", "empty list"));
    }
    let mut seen = BTreeSet::new();
    for id in ids {
        if catalog.index_of(id).is_none() {
            return Err(ErrorPayload::UnknownFeature { feature_id: id.clone() });
        }
        if !seen.insert(id) {
            return Err(invalid("feature_ids", format!("duplicate {id}")));
        }
    }
    Ok(ids.to_vec())
}

fn page_range(q: &ViewQuery, total: usize) -> Range<usize> {
    let start = q.page.saturating_mul(q.page_size).min(total);
    start..start.saturating_add(q.page_size).min(total)
}

fn paging(q: &ViewQuery, total: usize) -> Value {
    json!({"page": q.page, "page_size": q.page_size, "total": total, "total_pages": total.div_ceil(q.page_size)})
}

fn in_window(window: Option<&PeriodRange>, t: &Tweet) -> bool {
    window.is_none_or(|w| w.contains(t.created_at))
}

fn timeline(session: &Session, q: &ViewQuery, features: &[String]) -> Result<Value, ErrorPayload> {
    let g = q.level.granularity().ok_or_else(|| invalid("level", "timeline needs year, month or day"))?;
    let cube = &session.artifacts.cubes[&g];
    let visible: Vec<usize> = (0..cube.periods.len()).filter(|&i| q.window.is_none_or(|w| w.covers(&cube.periods[i]))).collect();
    let cols: Vec<usize> = features.iter().map(|f| cube.feature_index(f).expect("catalog feature in cube")).collect();
    let (selection, labels) = session.snapshot();
    let ids = &cube.account_ids;
    let bounds = visible.first().zip(visible.last()).map(|(&lo, &hi)| (lo as u32, hi as u32));

    // Accounts with a stored (non-empty) cell per visible period.
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); visible.len()];
    if let Some((lo, hi)) = bounds {
        for (a, cells) in cube.cells.iter().enumerate() {
            for &p in cells.range(lo..=hi).map(|(p, _)| p) {
                active[(p - lo) as usize].push(a);
            }
        }
    }

    let per_period = Execution::default().map_indexed(visible.len(), |off| {
        let p = visible[off];
        cols.iter()
            .zip(features)
            .filter(|_| !active[off].is_empty())
            .map(|(&c, fid)| {
                let mut groups: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
                for &a in &active[off] {
                    let v = cube.get(a, p, c);
                    groups.entry(labels[a].into()).or_default().push(v);
                    if selection.contains(&ids[a]) {
                        groups.entry(Group::Selected).or_default().push(v);
                    }
                }
                let stats: BTreeMap<Group, BoxStats> =
                    groups.into_iter().map(|(g, vals)| (g, box_stats(&vals).expect("nonempty finite group"))).collect();
                json!({"period": cube.periods[p], "feature_id": fid, "active_accounts": active[off].len(), "groups": stats})
            })
            .collect::<Vec<Value>>()
    });
    let boxes: Vec<Value> = per_period.into_iter().flatten().collect();

    let range = page_range(q, ids.len());
    let mut accounts = Vec::new();
    let mut points = Vec::new();
    for a in range {
        let id = &ids[a];
        accounts.push(json!({
            "account_id": id,
            "screen_name": session.artifacts.corpus.accounts[id].screen_name,
            "label": labels[a],
            "selected": selection.contains(id),
        }));
        if let Some((lo, hi)) = bounds {
            for (&p, row) in cube.cells[a].range(lo..=hi) {
                let values: Vec<f64> = cols.iter().map(|&c| row[c]).collect();
                points.push(json!({"account_id": id, "period": cube.periods[p as usize], "values": values}));
            }
        }
    }

    Ok(json!({
        "view": "timeline",
        "level": q.level,
        "window": q.window,
        "feature_ids": features,
        "periods": visible.iter().map(|&p| cube.periods[p]).collect::<Vec<_>>(),
        "accounts": accounts,
        "points": points,
        "boxes": boxes,
        "paging": paging(q, ids.len()),
    }))
}

/// Static features recomputed over the tweets inside `window`, for the
/// accounts that posted there. Without a window, the precomputed matrix.
fn population_matrix(session: &Session, window: Option<&PeriodRange>) -> Result<FeatureMatrix, ErrorPayload> {
    let artifacts = &session.artifacts;
    let Some(w) = window else { return Ok(artifacts.matrix.clone()) };
    let corpus = &artifacts.corpus;
    let tweets: Vec<Tweet> = corpus.tweets.iter().filter(|t| w.contains(t.created_at)).cloned().collect();
    let active: BTreeSet<&str> = tweets.iter().map(|t| t.account_id.as_str()).collect();
    let sub = Corpus { accounts: corpus.accounts.clone(), tweets: tweets.clone(), time_span: corpus.time_span };
    let full = extract_static_with(&sub, &artifacts.lexicon, Execution::default())
        .map_err(|e| ErrorPayload::Internal { message: e.to_string() })?;
    let rows: Vec<usize> = (0..full.n_rows()).filter(|&r| active.contains(full.account_ids()[r].as_str())).collect();
    let values = rows.iter().flat_map(|&r| full.row(r).iter().copied()).collect();
    let ids = rows.iter().map(|&r| full.account_ids()[r].clone()).collect();
    FeatureMatrix::new(ids, full.feature_ids().to_vec(), values).map_err(|e| ErrorPayload::Internal { message: e.to_string() })
}

fn dr_err(e: DrError) -> ErrorPayload {
    match e {
        DrError::InvalidHyperparameter(name) => {
            ErrorPayload::InvalidHyperparameter { name: name.to_string(), message: "out of range".into() }
        }
        DrError::TooFewPoints { .. } | DrError::InsufficientClasses => invalid("method_spec", e),
        other => ErrorPayload::Internal { message: other.to_string() },
    }
}

/// A resolved embedding request and its cache key.
#[derive(Debug, Clone)]
pub(crate) struct DimredPlan {
    pub key: String,
    spec: DrSpec,
    transform: Transform,
    feature_ids: Vec<String>,
    window: Option<PeriodRange>,
}

impl DimredPlan {
    pub fn new(
        session: &Session,
        spec: DrSpec,
        transform: Transform,
        feature_ids: Option<Vec<String>>,
        window: Option<PeriodRange>,
    ) -> Result<DimredPlan, ErrorPayload> {
        spec.validate().map_err(dr_err)?;
        check_window(session, window.as_ref())?;
        let feature_ids = resolve_features(session, feature_ids.as_deref())?;
        // Supervised embeddings depend on the current labels.
        let labels = matches!(spec, DrSpec::LdaSupervised).then(|| session.label_version());
        let key = json!([spec, transform, feature_ids, window.map(|w| w.key()), labels]).to_string();
        Ok(DimredPlan { key, spec, transform, feature_ids, window })
    }

    pub fn cached(&self, session: &Session) -> Option<Arc<Embedding2D>> {
        lock(&session.embeddings).get(&self.key).cloned()
    }

    pub fn compute(&self, session: &Session, control: &JobControl) -> Result<Arc<Embedding2D>, ErrorPayload> {
        let m = population_matrix(session, self.window.as_ref())?
            .select_columns(&self.feature_ids)
            .map_err(|e| ErrorPayload::Internal { message: e.to_string() })?;
        let m = transform(&m, self.transform).map_err(dr_err)?;
        let labels = matches!(self.spec, DrSpec::LdaSupervised).then(|| session.with_labels(|s| s.labels_for(m.account_ids())));
        let emb = Arc::new(reduce_with(&m, &self.spec, labels.as_deref(), Execution::default(), control).map_err(dr_err)?);
        lock(&session.embeddings).insert(self.key.clone(), emb.clone());
        Ok(emb)
    }
}

fn parse_dimred(v: &Value) -> Result<DimredSpec, ErrorPayload> {
    serde_json::from_value::<DimredSpec>(v.clone())
        .or_else(|_| serde_json::from_value::<DrSpec>(v.clone()).map(|spec| DimredSpec { spec, ..DimredSpec::default() }))
        .map_err(|e| invalid("method_spec", e))
}

fn dimred(session: &Session, q: &ViewQuery) -> Result<Value, ErrorPayload> {
    let dspec = match &q.method_spec {
        Some(v) => parse_dimred(v)?,
        None => *lock(&session.current_dimred),
    };
    let plan = DimredPlan::new(session, dspec.spec, dspec.transform, q.feature_ids.clone(), q.window)?;
    let emb = match plan.cached(session) {
        Some(e) => e,
        None => plan.compute(session, &JobControl::new())?,
    };
    let selection = session.selection();
    let corpus = &session.artifacts.corpus;

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for c in &emb.coords {
        for d in 0..2 {
            lo[d] = lo[d].min(c[d]);
            hi[d] = hi[d].max(c[d]);
        }
    }
    let points: Vec<Value> = page_range(q, emb.account_ids.len())
        .map(|i| {
            let id = &emb.account_ids[i];
            let tweet_count = corpus.tweets_of(id).iter().filter(|t| in_window(q.window.as_ref(), t)).count();
            json!({
                "account_id": id,
                "x": emb.coords[i][0],
                "y": emb.coords[i][1],
                "label": session.label_of(id),
                "selected": selection.contains(id),
                "tweet_count": tweet_count,
            })
        })
        .collect();

    Ok(json!({
        "view": "dimred",
        "method_spec": dspec,
        "result_ref": plan.key,
        "window": q.window,
        "feature_ids": plan.feature_ids,
        "extent": {"min": lo, "max": hi},
        "points": points,
        "paging": paging(q, emb.account_ids.len()),
    }))
}

fn word_counts<'a>(tweets: impl Iterator<Item = &'a Tweet>) -> Vec<(String, usize)> {
    let stop = stopwords();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in tweets {
        for w in word_tokens(&t.text) {
            if w.chars().count() >= 3 && w.chars().all(char::is_alphanumeric) && !stop.contains(w.as_str()) {
                *counts.entry(w).or_default() += 1;
            }
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(WORD_COUNT_LIMIT);
    out
}

fn details(session: &Session, q: &ViewQuery) -> Result<Value, ErrorPayload> {
    let selection = session.selection();
    let ids: Vec<String> = match &q.account_ids {
        Some(ids) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for id in ids {
                if !session.universe().contains(id) {
                    return Err(ErrorPayload::UnknownAccountId { account_id: id.clone() });
                }
                if seen.insert(id) {
                    out.push(id.clone());
                }
            }
            out
        }
        None => selection.iter().cloned().collect(),
    };
    let corpus = &session.artifacts.corpus;
    let window = q.window.as_ref();

    let cards: Vec<Value> = ids[page_range(q, ids.len())]
        .iter()
        .map(|id| {
            let a = &corpus.accounts[id];
            let tweets: Vec<&Tweet> = corpus.tweets_of(id).iter().filter(|t| in_window(window, t)).collect();
            let mut card = json!({
                "account_id": id,
                "screen_name": a.screen_name,
                "display_name": a.display_name,
                "profile_image_url": a.profile_image_url,
                "account_created_at": a.created_at,
                "followers_count": a.followers_count,
                "following_count": a.following_count,
                "likes_count": a.likes_count,
                "declared_tweet_count": a.declared_tweet_count,
                "tweet_count": tweets.len(),
                "label": session.label_of(id),
                "selected": selection.contains(id),
            });
            if selection.contains(id) {
                let words: Vec<Value> = word_counts(tweets.iter().copied()).into_iter().map(|(w, n)| json!([w, n])).collect();
                card["tweets"] = json!(tweets
                    .iter()
                    .map(|t| json!({
                        "tweet_id": t.tweet_id,
                        "created_at": t.created_at,
                        "text": t.text,
                        "retweet_count": t.retweet_count,
                        "favorite_count": t.favorite_count,
                        "is_retweet": t.is_retweet,
                        "is_reply": t.is_reply,
                    }))
                    .collect::<Vec<_>>());
                card["word_counts"] = json!(words);
            }
            card
        })
        .collect();

    Ok(json!({
        "view": "details",
        "window": q.window,
        "accounts": cards,
        "paging": paging(q, ids.len()),
    }))
}

fn topic_err(e: TopicError) -> ErrorPayload {
    match e {
        TopicError::InvalidHyperparameter("threshold") => invalid("threshold", "must lie in (0, 1)"),
        TopicError::InvalidHyperparameter(name) => {
            ErrorPayload::InvalidHyperparameter { name: name.to_string(), message: "out of range".into() }
        }
        TopicError::UnknownTopicId(k) => invalid("topic_ids", format!("no topic {k}")),
        TopicError::EmptySelection => invalid("topic_ids", "empty selection"),
        other => ErrorPayload::Internal { message: other.to_string() },
    }
}

fn topics_view(session: &Arc<Session>, q: &ViewQuery) -> Result<Value, ErrorPayload> {
    let params = match &q.method_spec {
        Some(v) => serde_json::from_value::<LdaParamsWire>(v.clone()).map_err(|e| invalid("method_spec", e))?.resolve(),
        None => *lock(&session.current_lda),
    };
    params.validate().map_err(topic_err)?;
    let key = profile_key(q.level, q.window.as_ref(), &params);

    let cached = lock(&session.models).get(&key).cloned();
    let model = match cached {
        Some(m) => m,
        None => {
            if let Some(message) = session.lda_failure(&key) {
                return Err(invalid("window", message));
            }
            let status = session.submit_job(JobSpec::Lda { level: q.level, window: q.window, params: params.into() })?;
            match status.state {
                JobState::Done { .. } => lock(&session.models)
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| ErrorPayload::Internal { message: "finished model missing".into() })?,
                _ => return Err(ErrorPayload::JobPending { job_id: status.job_id }),
            }
        }
    };

    let topic_ids: BTreeSet<usize> = q.topic_ids.clone().unwrap_or_else(|| (0..model.k()).collect());
    let threshold = q.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let summaries = topics::summaries(&model, &session.artifacts.lexicon, TOPIC_TOP_WORDS);
    let cloud = topics::word_cloud_weights(&model, &topic_ids, WORD_CLOUD_LIMIT).map_err(topic_err)?;
    let members: Vec<String> = topics::members(&model, &topic_ids, threshold).map_err(topic_err)?.into_iter().collect();
    let row_of: HashMap<&str, usize> = model.account_ids.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let member_rows: Vec<Value> = members[page_range(q, members.len())]
        .iter()
        .map(|id| {
            let theta = &model.theta[row_of[id.as_str()]];
            let weights: Vec<Value> = topic_ids.iter().map(|&k| json!([k, theta[k]])).collect();
            json!({"account_id": id, "weights": weights})
        })
        .collect();

    Ok(json!({
        "view": "topics",
        "level": q.level,
        "window": q.window,
        "params": params,
        "result_ref": key,
        "document_count": model.n_docs(),
        "topics": summaries,
        "topic_ids": topic_ids,
        "threshold": threshold,
        "word_cloud": cloud.into_iter().map(|(token, weight)| json!({"token": token, "weight": weight})).collect::<Vec<_>>(),
        "members": member_rows,
        "paging": paging(q, members.len()),
    }))
}

fn features_view(session: &Session, q: &ViewQuery, features: &[String]) -> Result<Value, ErrorPayload> {
    if q.level != Level::Overall {
        return Err(invalid("level", "feature distributions are over whole histories; narrow with a window instead"));
    }
    let m = population_matrix(session, q.window.as_ref())?;
    let selection = session.selection();
    let labels = session.with_labels(|s| s.labels_for(m.account_ids()));
    let selected: BTreeSet<usize> = (0..m.n_rows()).filter(|&r| selection.contains(&m.account_ids()[r])).collect();
    let page = &features[page_range(q, features.len())];
    let cols: Vec<usize> = page.iter().map(|f| m.column_index(f).expect("catalog feature in matrix")).collect();
    let dists = feature_distributions(&m, &cols, &labels, &selected, Execution::default())
        .map_err(|e| ErrorPayload::Internal { message: e.to_string() })?;
    let catalog = &session.artifacts.catalog;
    let entries: Vec<Value> = page
        .iter()
        .zip(dists)
        .map(|(fid, groups)| {
            let def = &catalog.entries[catalog.index_of(fid).expect("resolved feature")];
            json!({
                "feature_id": fid,
                "name": def.name,
                "unit": def.unit,
                "kind": def.kind,
                "description": def.description,
                "groups": groups,
            })
        })
        .collect();
    Ok(json!({
        "view": "features",
        "level": q.level,
        "window": q.window,
        "accounts": m.n_rows(),
        "features": entries,
        "paging": paging(q, features.len()),
    }))
}
