//! Connection handling. One TCP port serves two framings of the same
//! envelopes: 4-byte big-endian length-prefixed JSON, and WebSocket text
//! messages for browsers. A connection starting with `GET ` is treated as a
//! WebSocket handshake.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use log::{debug, info, warn};
use serde::de::DeserializeOwned;
use serde_json::Value;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver, UnboundedSender};
use tokio_tungstenite::tungstenite::Message;

use crate::protocol::{Envelope, ErrorPayload, JobPoll, JobSpec, Kind, LabelRequest, SelectionRequest, ViewQuery, MAX_FRAME};
use crate::query::handle_query;
use crate::session::Session;

pub struct Server {
    listener: TcpListener,
    session: Arc<Session>,
}

impl Server {
    pub async fn bind(addr: impl ToSocketAddrs, session: Arc<Session>) -> io::Result<Server> {
        Ok(Server { listener: TcpListener::bind(addr).await?, session })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accept connections until `shutdown` resolves.
    pub async fn run_until(self, shutdown: impl Future<Output = ()>) -> io::Result<()> {
        tokio::pin!(shutdown);
        info!("listening on {}", self.local_addr()?);
        loop {
            tokio::select! {
                _ = &mut shutdown => break,
                accepted = self.listener.accept() => {
                    let (stream, peer) = accepted?;
                    debug!("connection from {peer}");
                    tokio::spawn(serve_connection(stream, self.session.clone()));
                }
            }
        }
        info!("shutting down");
        Ok(())
    }
}

/// How long a silent connection may wait before it is assumed to use the
/// length-prefixed framing. WebSocket clients send their handshake at once.
const SNIFF_GRACE: Duration = Duration::from_millis(200);

/// The client is registered for pushes on accept; pushes queue until the
/// first bytes reveal the framing.
pub async fn serve_connection(stream: TcpStream, session: Arc<Session>) {
    let _ = stream.set_nodelay(true);
    let (tx, rx) = unbounded_channel::<Envelope>();
    let client = session.register(tx.clone());
    let deadline = tokio::time::Instant::now() + SNIFF_GRACE;
    let mut head = [0u8; 4];
    let websocket_handshake = loop {
        match tokio::time::timeout_at(deadline, stream.peek(&mut head)).await {
            Err(_) => break Ok(false),
            Ok(Ok(0)) => break Err(None),
            Ok(Err(e)) => break Err(Some(e)),
            Ok(Ok(n)) if n >= 4 => break Ok(&head == b"GET "),
            Ok(Ok(_)) if tokio::time::Instant::now() >= deadline => break Ok(false),
            Ok(Ok(_)) => tokio::time::sleep(Duration::from_millis(1)).await,
        }
    };
    let outcome = match websocket_handshake {
        Ok(true) => websocket(stream, &session, tx, rx).await,
        Ok(false) => framed(stream, &session, tx, rx).await,
        Err(e) => e.map_or(Ok(()), Err),
    };
    session.unregister(client);
    if let Err(e) = outcome {
        debug!("connection closed: {e}");
    }
}

async fn framed(
    stream: TcpStream,
    session: &Arc<Session>,
    tx: UnboundedSender<Envelope>,
    mut rx: UnboundedReceiver<Envelope>,
) -> io::Result<()> {
    let (mut rd, mut wr) = stream.into_split();
    tokio::spawn(async move {
        while let Some(env) = rx.recv().await {
            let body = serde_json::to_vec(&env).expect("envelope serializes");
            if wr.write_u32(body.len() as u32).await.is_err() || wr.write_all(&body).await.is_err() {
                break;
            }
        }
    });
    loop {
        let len = match rd.read_u32().await {
            Ok(n) => n as usize,
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(e) => return Err(e),
        };
        if len > MAX_FRAME {
            let _ = tx.send(Envelope::error("", &ErrorPayload::bad_request(format!("frame of {len} bytes exceeds {MAX_FRAME}"))));
            return Ok(());
        }
        let mut buf = vec![0u8; len];
        rd.read_exact(&mut buf).await?;
        dispatch(session, &buf, &tx);
    }
}

async fn websocket(
    stream: TcpStream,
    session: &Arc<Session>,
    tx: UnboundedSender<Envelope>,
    mut rx: UnboundedReceiver<Envelope>,
) -> io::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await.map_err(io::Error::other)?;
    let (mut sink, mut source) = ws.split();
    tokio::spawn(async move {
        while let Some(env) = rx.recv().await {
            let body = serde_json::to_string(&env).expect("envelope serializes");
            if sink.send(Message::text(body)).await.is_err() {
                break;
            }
        }
    });
    while let Some(msg) = source.next().await {
        match msg {
            Ok(Message::Text(t)) => dispatch(session, t.as_bytes(), &tx),
            Ok(Message::Binary(b)) => dispatch(session, &b, &tx),
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(e) => {
                warn!("websocket error: {e}");
                break;
            }
        }
    }
    Ok(())
}

fn dispatch(session: &Arc<Session>, raw: &[u8], tx: &UnboundedSender<Envelope>) {
    let env: Envelope = match serde_json::from_slice(raw) {
        Ok(env) => env,
        Err(e) => {
            let id = serde_json::from_slice::<Value>(raw)
                .ok()
                .and_then(|v| v.get("id").and_then(Value::as_str).map(str::to_string))
                .unwrap_or_default();
            let _ = tx.send(Envelope::error(id, &ErrorPayload::bad_request(e)));
            return;
        }
    };
    let (session, tx) = (session.clone(), tx.clone());
    tokio::spawn(async move {
        let _ = tx.send(respond(session, env).await);
    });
}

fn parse<T: DeserializeOwned>(payload: Value) -> Result<T, ErrorPayload> {
    serde_json::from_value(payload).map_err(|e| ErrorPayload::invalid("payload", e))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ErrorPayload> + Send + 'static) -> Result<T, ErrorPayload> {
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| Err(ErrorPayload::Internal { message: e.to_string() }))
}

fn to_value<T: serde::Serialize>(r: Result<T, ErrorPayload>) -> Result<Value, ErrorPayload> {
    r.map(|v| serde_json::to_value(v).expect("payload serializes"))
}

/// The reply to one request envelope: a `result` or `error` with the same id.
pub async fn respond(session: Arc<Session>, env: Envelope) -> Envelope {
    let result = match env.kind {
        Kind::Query => match parse::<ViewQuery>(env.payload) {
            Ok(q) => blocking(move || handle_query(&session, &q)).await,
            Err(e) => Err(e),
        },
        Kind::JobSubmit => match parse::<JobSpec>(env.payload) {
            Ok(spec) => to_value(blocking(move || session.submit_job(spec)).await),
            Err(e) => Err(e),
        },
        Kind::JobStatus => parse::<JobPoll>(env.payload).and_then(|p| to_value(session.poll_job(&p.job_id))),
        Kind::SelectionUpdate => match parse::<SelectionRequest>(env.payload) {
            Ok(req) => to_value(blocking(move || session.update_selection(req)).await),
            Err(e) => Err(e),
        },
        Kind::LabelUpdate => match parse::<LabelRequest>(env.payload) {
            Ok(req) => to_value(blocking(move || session.update_labels(req)).await),
            Err(e) => Err(e),
        },
        Kind::Result | Kind::Error => Err(ErrorPayload::bad_request("clients send requests, not results")),
    };
    match result {
        Ok(v) => Envelope::new(env.id, Kind::Result, v),
        Err(e) => Envelope::error(env.id, &e),
    }
}
