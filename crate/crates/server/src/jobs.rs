//! Background jobs: LDA refits and embedding recomputes.
//!
//! At most one LDA job runs at a time. A new LDA submission while one is
//! running waits in a single queue slot, replacing (and cancelling) any job
//! already waiting there. Job states only move forward.

use std::collections::HashMap;
use std::sync::Arc;

use labelbench_core::time::{Level, PeriodRange};
use labelbench_core::topics::{fit_lda_with, prepare_documents, LdaParams, TopicError};
use labelbench_core::JobControl;
use log::{info, warn};

use crate::artifacts::profile_key;
use crate::protocol::{DimredSpec, Envelope, ErrorPayload, JobSpec, JobState, JobStatus, Kind};
use crate::query::{check_window, DimredPlan};
use crate::session::{lock, Session};

#[derive(Debug, Clone)]
enum Work {
    Lda { level: Level, window: Option<PeriodRange>, params: LdaParams, key: String },
    Dimred(DimredPlan),
}

#[derive(Debug)]
struct Entry {
    work: Work,
    state: JobState,
    control: JobControl,
}

#[derive(Debug, Default)]
pub(crate) struct Jobs {
    next_id: u64,
    entries: HashMap<String, Entry>,
    lda_running: Option<String>,
    lda_queued: Option<String>,
    /// Profile keys whose fit failed, with the reason.
    failed: HashMap<String, String>,
}

impl Jobs {
    fn status(&self, id: &str) -> Option<JobStatus> {
        let e = self.entries.get(id)?;
        let state = match &e.state {
            JobState::Running { .. } => JobState::Running { progress: e.control.progress() },
            s => s.clone(),
        };
        Some(JobStatus { job_id: id.to_string(), state })
    }
}

fn hyper_err(e: TopicError) -> ErrorPayload {
    match e {
        TopicError::InvalidHyperparameter(name) => {
            ErrorPayload::InvalidHyperparameter { name: name.to_string(), message: "out of range".into() }
        }
        other => ErrorPayload::Internal { message: other.to_string() },
    }
}

impl Session {
    /// Move a job forward and push its new status. Backward or
    /// post-terminal transitions are ignored.
    fn transition(&self, jobs: &mut Jobs, id: &str, next: JobState) {
        let Some(e) = jobs.entries.get_mut(id) else { return };
        if e.state.is_terminal() || next.rank() < e.state.rank() {
            return;
        }
        e.state = next;
        if let Some(status) = jobs.status(id) {
            self.broadcast(Envelope::new(format!("{id}:{}", status.state.rank()), Kind::JobStatus, &status));
        }
    }

    pub fn submit_job(self: &Arc<Self>, spec: JobSpec) -> Result<JobStatus, ErrorPayload> {
        let work = match spec {
            JobSpec::Lda { level, window, params } => {
                let params = params.resolve();
                params.validate().map_err(hyper_err)?;
                check_window(self, window.as_ref())?;
                *lock(&self.current_lda) = params;
                let key = profile_key(level, window.as_ref(), &params);
                Work::Lda { level, window, params, key }
            }
            JobSpec::Dimred { spec, transform, feature_ids, window } => {
                let plan = DimredPlan::new(self, spec, transform, feature_ids, window)?;
                *lock(&self.current_dimred) = DimredSpec { spec, transform };
                Work::Dimred(plan)
            }
        };

        let mut jobs = lock(&self.jobs);
        if let Work::Lda { key, .. } = &work {
            let active = [&jobs.lda_running, &jobs.lda_queued]
                .into_iter()
                .flatten()
                .find(|id| matches!(&jobs.entries[*id].work, Work::Lda { key: k, .. } if k == key));
            if let Some(id) = active.cloned() {
                return Ok(jobs.status(&id).expect("active job exists"));
            }
        }

        jobs.next_id += 1;
        let id = format!("job-{}", jobs.next_id);
        jobs.entries.insert(id.clone(), Entry { work: work.clone(), state: JobState::Queued, control: JobControl::new() });

        match work {
            Work::Lda { key, .. } => {
                if lock(&self.models).contains_key(&key) {
                    self.transition(&mut jobs, &id, JobState::Done { result_ref: key });
                } else if jobs.lda_running.is_none() {
                    self.start_lda(&mut jobs, id.clone());
                } else {
                    if let Some(old) = jobs.lda_queued.replace(id.clone()) {
                        info!("job {old} superseded by {id}");
                        self.transition(&mut jobs, &old, JobState::Cancelled);
                    }
                    self.transition(&mut jobs, &id, JobState::Queued);
                }
            }
            Work::Dimred(plan) => {
                if plan.cached(self).is_some() {
                    self.transition(&mut jobs, &id, JobState::Done { result_ref: plan.key.clone() });
                } else {
                    self.start_dimred(&mut jobs, id.clone(), plan);
                }
            }
        }
        Ok(jobs.status(&id).expect("job just inserted"))
    }

    pub fn poll_job(&self, job_id: &str) -> Result<JobStatus, ErrorPayload> {
        lock(&self.jobs).status(job_id).ok_or_else(|| ErrorPayload::UnknownJob { job_id: job_id.to_string() })
    }

    /// The queued or running LDA job, preferring the queued one (the most
    /// recent request).
    pub fn active_lda_job(&self) -> Option<String> {
        let jobs = lock(&self.jobs);
        jobs.lda_queued.clone().or_else(|| jobs.lda_running.clone())
    }

    /// Cancel every job that has not finished. Used on shutdown.
    pub fn cancel_all_jobs(&self) {
        let mut jobs = lock(&self.jobs);
        if let Some(id) = jobs.lda_queued.take() {
            self.transition(&mut jobs, &id, JobState::Cancelled);
        }
        for e in jobs.entries.values() {
            if !e.state.is_terminal() {
                e.control.cancel();
            }
        }
    }

    pub(crate) fn lda_failure(&self, key: &str) -> Option<String> {
        lock(&self.jobs).failed.get(key).cloned()
    }

    fn start_lda(self: &Arc<Self>, jobs: &mut Jobs, id: String) {
        let entry = &jobs.entries[&id];
        let Work::Lda { level, window, params, key } = entry.work.clone() else { unreachable!("not an LDA job") };
        let control = entry.control.clone();
        if lock(&self.models).contains_key(&key) {
            self.transition(jobs, &id, JobState::Done { result_ref: key });
            return;
        }
        jobs.lda_running = Some(id.clone());
        self.transition(jobs, &id, JobState::Running { progress: 0.0 });

        let session = Arc::clone(self);
        std::thread::Builder::new()
            .name(format!("lda-{id}"))
            .spawn(move || {
                let outcome =
                    prepare_documents(&session.artifacts.corpus, level, window).and_then(|docs| fit_lda_with(&docs, &params, &control));
                let mut jobs = lock(&session.jobs);
                let next = match outcome {
                    Ok(model) => {
                        lock(&session.models).insert(key.clone(), Arc::new(model));
                        JobState::Done { result_ref: key }
                    }
                    Err(TopicError::Cancelled) => JobState::Cancelled,
                    Err(e) => {
                        warn!("job {id} failed: {e}");
                        jobs.failed.insert(key, e.to_string());
                        JobState::Failed { message: e.to_string() }
                    }
                };
                session.transition(&mut jobs, &id, next);
                jobs.lda_running = None;
                if let Some(next_id) = jobs.lda_queued.take() {
                    session.start_lda(&mut jobs, next_id);
                }
            })
            .expect("spawn job thread");
    }

    fn start_dimred(self: &Arc<Self>, jobs: &mut Jobs, id: String, plan: DimredPlan) {
        let control = jobs.entries[&id].control.clone();
        self.transition(jobs, &id, JobState::Running { progress: 0.0 });
        let session = Arc::clone(self);
        std::thread::Builder::new()
            .name(format!("dimred-{id}"))
            .spawn(move || {
                let next = match plan.compute(&session, &control) {
                    Ok(_) => JobState::Done { result_ref: plan.key.clone() },
                    Err(e) => JobState::Failed { message: e.to_string() },
                };
                session.transition(&mut lock(&session.jobs), &id, next);
            })
            .expect("spawn job thread");
    }
}
