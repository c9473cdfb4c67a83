//! A framed-TCP client that matches replies to requests by id and keeps
//! server pushes in arrival order.

use std::collections::{HashMap, VecDeque};
use std::io;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::tcp::OwnedWriteHalf;
use tokio::net::{TcpStream, ToSocketAddrs};
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver};

use crate::protocol::{Envelope, ErrorPayload, Kind, ViewQuery};

pub struct Client {
    writer: OwnedWriteHalf,
    inbox: UnboundedReceiver<Envelope>,
    replies: HashMap<String, Envelope>,
    pushes: VecDeque<Envelope>,
    next_id: u64,
}

fn is_reply(env: &Envelope) -> bool {
    matches!(env.kind, Kind::Result | Kind::Error)
}

impl Client {
    pub async fn connect(addr: impl ToSocketAddrs) -> io::Result<Client> {
        let stream = TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        let (mut rd, writer) = stream.into_split();
        let (tx, inbox) = unbounded_channel();
        tokio::spawn(async move {
            while let Ok(len) = rd.read_u32().await {
                let mut buf = vec![0u8; len as usize];
                if rd.read_exact(&mut buf).await.is_err() {
                    break;
                }
                let Ok(env) = serde_json::from_slice::<Envelope>(&buf) else { break };
                if tx.send(env).is_err() {
                    break;
                }
            }
        });
        Ok(Client { writer, inbox, replies: HashMap::new(), pushes: VecDeque::new(), next_id: 0 })
    }

    /// Write one raw frame body.
    pub async fn send_frame(&mut self, body: &[u8]) -> io::Result<()> {
        self.writer.write_u32(body.len() as u32).await?;
        self.writer.write_all(body).await
    }

    /// Send a request without waiting; returns its id.
    pub async fn send(&mut self, kind: Kind, payload: impl Serialize) -> io::Result<String> {
        self.next_id += 1;
        let id = format!("c{}", self.next_id);
        let env = Envelope::new(id.clone(), kind, payload);
        self.send_frame(&serde_json::to_vec(&env).expect("envelope serializes")).await?;
        Ok(id)
    }

    fn stash(&mut self, env: Envelope) {
        if is_reply(&env) {
            self.replies.insert(env.id.clone(), env);
        } else {
            self.pushes.push_back(env);
        }
    }

    /// Wait for the reply to `id`, buffering anything else that arrives.
    pub async fn reply(&mut self, id: &str) -> io::Result<Envelope> {
        loop {
            if let Some(env) = self.replies.remove(id) {
                return Ok(env);
            }
            let env = self.inbox.recv().await.ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "server closed"))?;
            self.stash(env);
        }
    }

    pub async fn request(&mut self, kind: Kind, payload: impl Serialize) -> io::Result<Envelope> {
        let id = self.send(kind, payload).await?;
        self.reply(&id).await
    }

    /// A request whose reply is split into payload or error.
    pub async fn call(&mut self, kind: Kind, payload: impl Serialize) -> io::Result<Result<Value, ErrorPayload>> {
        let env = self.request(kind, payload).await?;
        Ok(match env.kind {
            Kind::Error => Err(serde_json::from_value(env.payload).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?),
            _ => Ok(env.payload),
        })
    }

    pub async fn query(&mut self, q: &ViewQuery) -> io::Result<Result<Value, ErrorPayload>> {
        self.call(Kind::Query, q).await
    }

    /// The next push, waiting at most `timeout`.
    pub async fn next_push(&mut self, timeout: Duration) -> Option<Envelope> {
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            if let Some(env) = self.pushes.pop_front() {
                return Some(env);
            }
            let env = tokio::time::timeout_at(deadline, self.inbox.recv()).await.ok()??;
            self.stash(env);
        }
    }

    /// Pushes received so far, without waiting.
    pub fn take_pushes(&mut self) -> Vec<Envelope> {
        while let Ok(env) = self.inbox.try_recv() {
            self.stash(env);
        }
        self.pushes.drain(..).collect()
    }
}
