#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::{Arc, OnceLock};

use labelbench_core::sentiment::Lexicon;
use labelbench_core::synthetic::{generate, SyntheticConfig};
use labelbench_core::Execution;
use labelbench_server::{Artifacts, ProfileSpec, Server, Session};

/// 928 synthetic accounts over 2013-2015 with the overall K=10 profile.
pub fn fixture_928() -> Artifacts {
    static A: OnceLock<Artifacts> = OnceLock::new();
    A.get_or_init(|| build(928, "overall:10")).clone()
}

pub fn build(accounts: usize, profiles: &str) -> Artifacts {
    let corpus = generate(&SyntheticConfig::small(accounts));
    let spec: ProfileSpec = profiles.parse().unwrap();
    Artifacts::build(corpus, Lexicon::bundled(), &spec, Execution::default()).unwrap()
}

pub async fn serve(session: Arc<Session>) -> SocketAddr {
    let server = Server::bind("127.0.0.1:0", session).await.unwrap();
    let addr = server.local_addr().unwrap();
    tokio::spawn(server.run_until(std::future::pending()));
    addr
}
