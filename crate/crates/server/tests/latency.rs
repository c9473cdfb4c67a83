//! Non-topics queries keep answering while an LDA job runs. Kept alone in
//! its own test binary so no other test competes for the CPU.

mod common;

use std::time::{Duration, Instant};

use labelbench_core::time::Level;
use labelbench_server::protocol::JobState;
use labelbench_server::{Client, Kind, Session, View, ViewQuery};
use serde_json::json;

const ROUNDS: usize = 25;

async fn median_latency(c: &mut Client, queries: &[ViewQuery]) -> Duration {
    let mut samples = Vec::new();
    for _ in 0..ROUNDS {
        for q in queries {
            let t = Instant::now();
            c.query(q).await.unwrap().unwrap();
            samples.push(t.elapsed());
        }
    }
    samples.sort();
    samples[samples.len() / 2]
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn queries_during_lda_within_five_times_idle() {
    let session = Session::in_memory(common::fixture_928());
    let addr = common::serve(session.clone()).await;
    let mut c = Client::connect(addr).await.unwrap();

    let mut timeline = ViewQuery::new(View::Timeline);
    timeline.level = Level::Year;
    let queries = [timeline, ViewQuery::new(View::Dimred)];
    for q in &queries {
        c.query(q).await.unwrap().unwrap();
    }
    let idle = median_latency(&mut c, &queries).await;

    let job = c.call(Kind::JobSubmit, json!({"job": "lda", "k": 20, "iterations": 5000, "seed": 9})).await.unwrap().unwrap();
    let job_id = job["job_id"].as_str().unwrap().to_string();
    let busy = median_latency(&mut c, &queries).await;
    let status = c.call(Kind::JobStatus, json!({"job_id": job_id})).await.unwrap().unwrap();
    let state: JobState = serde_json::from_value(status.clone()).map(|s: labelbench_server::protocol::JobStatus| s.state).unwrap();
    session.cancel_all_jobs();

    println!("median latency idle {idle:?}, during LDA {busy:?}");
    assert!(matches!(state, JobState::Running { .. }), "job must still be running while measuring: {status}");
    assert!(busy <= idle * 5, "idle {idle:?} vs during LDA {busy:?}");
}
