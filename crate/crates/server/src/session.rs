//! Shared state of one served corpus: selection, labels, connected
//! clients, result caches and the job table.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use labelbench_core::dimred::Embedding2D;
use labelbench_core::session::{apply_selection, select_special, LabelClass, LabelStore, SelectionState, SessionError, Universe};
use labelbench_core::topics::{LdaParams, TopicModel};
use log::debug;
use tokio::sync::mpsc::UnboundedSender;

use crate::artifacts::{labels_path, Artifacts};
use crate::jobs::Jobs;
use crate::protocol::{DimredSpec, Envelope, ErrorPayload, Kind, LabelPush, LabelRequest, SelectionPush, SelectionRequest};

pub type ClientId = u64;

/// Mutable session state. Every mutation and its broadcast happen under
/// this one lock, so all clients observe mutations in the same order.
struct Shared {
    selection: SelectionState,
    labels: LabelStore,
    seq: u64,
    clients: Vec<(ClientId, UnboundedSender<Envelope>)>,
}

pub struct Session {
    pub artifacts: Artifacts,
    universe: Universe,
    shared: Mutex<Shared>,
    next_client: AtomicU64,
    /// Bumped on every label mutation; keys supervised embeddings.
    label_version: AtomicU64,
    pub(crate) embeddings: Mutex<HashMap<String, Arc<Embedding2D>>>,
    pub(crate) models: Mutex<HashMap<String, Arc<TopicModel>>>,
    pub(crate) jobs: Mutex<Jobs>,
    pub(crate) current_lda: Mutex<LdaParams>,
    pub(crate) current_dimred: Mutex<DimredSpec>,
}

pub(crate) fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl From<SessionError> for ErrorPayload {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::UnknownAccountId(account_id) => ErrorPayload::UnknownAccountId { account_id },
            other => ErrorPayload::Internal { message: other.to_string() },
        }
    }
}

impl Session {
    /// A session whose labels persist to `labels.jsonl` in `dir`.
    pub fn open(artifacts: Artifacts, dir: &Path) -> Result<Arc<Session>, SessionError> {
        let universe: Universe = Arc::new(artifacts.corpus.accounts.keys().cloned().collect());
        let labels = LabelStore::open(&labels_path(dir), universe.clone())?;
        Ok(Session::with_store(artifacts, universe, labels))
    }

    /// A session whose labels live only in memory.
    pub fn in_memory(artifacts: Artifacts) -> Arc<Session> {
        let universe: Universe = Arc::new(artifacts.corpus.accounts.keys().cloned().collect());
        let labels = LabelStore::in_memory(universe.clone());
        Session::with_store(artifacts, universe, labels)
    }

    fn with_store(artifacts: Artifacts, universe: Universe, labels: LabelStore) -> Arc<Session> {
        let models = artifacts.profiles.iter().map(|(k, m)| (k.clone(), Arc::new(m.clone()))).collect();
        Arc::new(Session {
            artifacts,
            universe,
            shared: Mutex::new(Shared { selection: SelectionState::default(), labels, seq: 0, clients: Vec::new() }),
            next_client: AtomicU64::new(1),
            label_version: AtomicU64::new(0),
            embeddings: Mutex::new(HashMap::new()),
            models: Mutex::new(models),
            jobs: Mutex::new(Jobs::default()),
            current_lda: Mutex::new(LdaParams::default()),
            current_dimred: Mutex::new(DimredSpec::default()),
        })
    }

    pub fn universe(&self) -> &BTreeSet<String> {
        &self.universe
    }

    pub fn register(&self, tx: UnboundedSender<Envelope>) -> ClientId {
        let id = self.next_client.fetch_add(1, Ordering::SeqCst);
        lock(&self.shared).clients.push((id, tx));
        debug!("client {id} connected");
        id
    }

    pub fn unregister(&self, id: ClientId) {
        lock(&self.shared).clients.retain(|(c, _)| *c != id);
        debug!("client {id} disconnected");
    }

    pub fn client_count(&self) -> usize {
        lock(&self.shared).clients.len()
    }

    fn broadcast_locked(shared: &mut Shared, env: Envelope) {
        shared.clients.retain(|(_, tx)| tx.send(env.clone()).is_ok());
    }

    /// Send a push to every client; disconnected clients are dropped.
    pub fn broadcast(&self, env: Envelope) {
        Session::broadcast_locked(&mut lock(&self.shared), env);
    }

    pub fn selection(&self) -> BTreeSet<String> {
        lock(&self.shared).selection.selected.clone()
    }

    /// Snapshot of `(selection, labels of every account in canonical order)`.
    pub fn snapshot(&self) -> (BTreeSet<String>, Vec<LabelClass>) {
        let shared = lock(&self.shared);
        let ids: Vec<String> = self.universe.iter().cloned().collect();
        (shared.selection.selected.clone(), shared.labels.labels_for(&ids))
    }

    pub fn label_of(&self, id: &str) -> LabelClass {
        lock(&self.shared).labels.label(id)
    }

    pub fn label_version(&self) -> u64 {
        self.label_version.load(Ordering::SeqCst)
    }

    pub fn with_labels<R>(&self, f: impl FnOnce(&LabelStore) -> R) -> R {
        f(&lock(&self.shared).labels)
    }

    pub fn update_selection(&self, req: SelectionRequest) -> Result<SelectionPush, ErrorPayload> {
        let mut shared = lock(&self.shared);
        let next = match &req {
            SelectionRequest::Rule { rule, ids } => apply_selection(&shared.selection, *rule, ids, &self.universe)?,
            SelectionRequest::Special { special } => select_special(&shared.selection, *special, &self.universe, &shared.labels),
        };
        shared.selection = next;
        shared.seq += 1;
        let push = SelectionPush { seq: shared.seq, request: req, selected: shared.selection.selected.clone() };
        let env = Envelope::new(format!("push-{}", shared.seq), Kind::SelectionUpdate, &push);
        Session::broadcast_locked(&mut shared, env);
        Ok(push)
    }

    /// Last writer wins: concurrent label requests are applied in the
    /// order they take the session lock.
    pub fn update_labels(&self, req: LabelRequest) -> Result<LabelPush, ErrorPayload> {
        let mut shared = lock(&self.shared);
        shared.labels.set_labels(&req.ids, req.class)?;
        self.label_version.fetch_add(1, Ordering::SeqCst);
        shared.seq += 1;
        let push = LabelPush { seq: shared.seq, ids: req.ids, class: req.class };
        let env = Envelope::new(format!("push-{}", shared.seq), Kind::LabelUpdate, &push);
        Session::broadcast_locked(&mut shared, env);
        Ok(push)
    }
}
