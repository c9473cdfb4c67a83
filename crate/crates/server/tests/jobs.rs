mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use labelbench_server::protocol::{JobState, JobStatus};
use labelbench_server::{Client, ErrorPayload, Kind, Session, View, ViewQuery};
use serde_json::json;

async fn submit(c: &mut Client, spec: serde_json::Value) -> Result<JobStatus, ErrorPayload> {
    c.call(Kind::JobSubmit, spec).await.unwrap().map(|v| serde_json::from_value(v).unwrap())
}

async fn poll(c: &mut Client, id: &str) -> JobStatus {
    serde_json::from_value(c.call(Kind::JobStatus, json!({"job_id": id})).await.unwrap().unwrap()).unwrap()
}

/// Every observed sequence must be forward-only with nondecreasing progress
/// and a fixed terminal state.
fn assert_forward(history: &[JobState]) {
    for w in history.windows(2) {
        assert!(w[0].rank() <= w[1].rank(), "{:?} -> {:?}", w[0], w[1]);
        if let (JobState::Running { progress: a }, JobState::Running { progress: b }) = (&w[0], &w[1]) {
            assert!(a <= b, "progress went back {a} -> {b}");
        }
        if w[0].is_terminal() {
            assert_eq!(w[0], w[1], "terminal state changed");
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn queue_policy_cache_and_state_machine() {
    let session = Session::in_memory(common::build(200, "overall:5"));
    let addr = common::serve(session.clone()).await;
    let mut c = Client::connect(addr).await.unwrap();

    // Cache hit: finished on submission.
    let hit = submit(&mut c, json!({"job": "lda", "k": 5})).await.unwrap();
    assert!(matches!(hit.state, JobState::Done { .. }), "{hit:?}");

    let a = submit(&mut c, json!({"job": "lda", "k": 20, "iterations": 400, "seed": 1})).await.unwrap();
    assert!(matches!(a.state, JobState::Running { .. }), "{a:?}");
    let b = submit(&mut c, json!({"job": "lda", "k": 20, "iterations": 60, "seed": 2})).await.unwrap();
    assert_eq!(b.state, JobState::Queued);
    let again = submit(&mut c, json!({"job": "lda", "k": 20, "iterations": 60, "seed": 2})).await.unwrap();
    assert_eq!(again.job_id, b.job_id, "identical request joins the queued job");
    let cq = submit(&mut c, json!({"job": "lda", "k": 20, "iterations": 60, "seed": 3})).await.unwrap();
    assert_eq!(cq.state, JobState::Queued);
    assert_eq!(poll(&mut c, &b.job_id).await.state, JobState::Cancelled);
    assert_eq!(session.active_lda_job().as_deref(), Some(cq.job_id.as_str()));

    // Topics view for the pending parameters reports the job instead of blocking.
    let mut q = ViewQuery::new(View::Topics);
    q.method_spec = Some(json!({"k": 20, "iterations": 60, "seed": 3}));
    assert_eq!(c.query(&q).await.unwrap().unwrap_err(), ErrorPayload::JobPending { job_id: cq.job_id.clone() });
    // Other views answer meanwhile.
    c.query(&ViewQuery::new(View::Features)).await.unwrap().unwrap();

    let ids = [hit.job_id.clone(), a.job_id.clone(), b.job_id.clone(), cq.job_id.clone()];
    let mut history: BTreeMap<String, Vec<JobState>> = BTreeMap::new();
    let deadline = Instant::now() + Duration::from_secs(120);
    let mut polls = 0;
    while polls < 1000 || ids.iter().any(|id| !history[id].last().unwrap().is_terminal()) {
        assert!(Instant::now() < deadline, "jobs did not finish");
        let id = &ids[polls % ids.len()];
        let s = poll(&mut c, id).await;
        history.entry(id.clone()).or_default().push(s.state);
        polls += 1;
        if polls % 8 == 0 {
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }
    for h in history.values() {
        assert_forward(h);
    }
    assert!(history[&b.job_id].iter().all(|s| *s == JobState::Cancelled));
    let result_ref = |id: &str| match history[id].last().unwrap() {
        JobState::Done { result_ref } => result_ref.clone(),
        other => panic!("{id}: {other:?}"),
    };
    assert_ne!(result_ref(&a.job_id), result_ref(&cq.job_id));
    let refs: Vec<JobState> = history[&cq.job_id].iter().filter(|s| s.is_terminal()).cloned().collect();
    assert!(refs.windows(2).all(|w| w[0] == w[1]), "stable result_ref");

    // Pushed statuses are forward-only per job too.
    let mut pushed: BTreeMap<String, Vec<JobState>> = BTreeMap::new();
    for env in c.take_pushes() {
        assert_eq!(env.kind, Kind::JobStatus);
        let s: JobStatus = serde_json::from_value(env.payload).unwrap();
        pushed.entry(s.job_id).or_default().push(s.state);
    }
    for h in pushed.values() {
        assert_forward(h);
    }
    assert_eq!(pushed[&b.job_id], vec![JobState::Queued, JobState::Cancelled]);

    // The finished model now serves the topics view.
    let payload = c.query(&q).await.unwrap().unwrap();
    assert_eq!(payload["result_ref"].as_str().unwrap(), result_ref(&cq.job_id));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn dimred_jobs_and_hyperparameter_errors() {
    let session = Session::in_memory(common::build(120, "none"));
    let addr = common::serve(session).await;
    let mut c = Client::connect(addr).await.unwrap();

    let spec = json!({"method": "tsne", "perplexity": 10.0, "iterations": 250, "seed": 4});
    let job = submit(&mut c, json!({"job": "dimred", "spec": spec})).await.unwrap();
    let deadline = Instant::now() + Duration::from_secs(120);
    let done = loop {
        let s = poll(&mut c, &job.job_id).await;
        if s.state.is_terminal() {
            break s;
        }
        assert!(Instant::now() < deadline);
        tokio::time::sleep(Duration::from_millis(20)).await;
    };
    let JobState::Done { result_ref } = done.state else { panic!("{done:?}") };
    // The submitted spec became current: a dimred query without a spec uses it.
    let payload = c.query(&ViewQuery::new(View::Dimred)).await.unwrap().unwrap();
    assert_eq!(payload["result_ref"].as_str().unwrap(), result_ref);

    let bad = [
        (json!({"job": "lda", "k": 5, "alpha": -1.0}), "alpha"),
        (json!({"job": "lda", "k": 0}), "k"),
        (json!({"job": "lda", "k": 5, "iterations": 10}), "iterations"),
        (json!({"job": "dimred", "spec": {"method": "tsne", "perplexity": 0.5}}), "perplexity"),
        (json!({"job": "dimred", "spec": {"method": "kpca", "kernel": {"type": "rbf", "gamma": 0.0}}}), "gamma"),
    ];
    for (spec, name) in bad {
        match submit(&mut c, spec).await.unwrap_err() {
            ErrorPayload::InvalidHyperparameter { name: n, .. } => assert_eq!(n, name),
            other => panic!("{other:?}"),
        }
    }
}
