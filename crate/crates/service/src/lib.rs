//! WebSocket server for live sessions.
//!
//! One owner task holds the [`Session`], ticks it at a fixed rate and applies
//! commands in arrival order. After every tick or command it publishes an
//! immutable frame on a watch channel; each connection forwards the latest
//! frame whenever it changes. Slow clients skip stale frames, and the
//! `frame` field is renumbered per connection so each client sees 1, 2, 3, …
//! with no gaps.
//!
//! Wire protocol, all JSON text messages:
//! - client → server: a [`Command`], e.g. `{"cmd": "move_robot", "id": 3, "x_mm": 120.0, "y_mm": 250.0}`
//! - server → client: an [`EventFrame`], or `{"error": "...", "cmd": "..."}`
//!   when a command is rejected.

use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use misaka_core::session::{Command, EventFrame, Session, SessionError};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, watch};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port {port} is already in use")]
    PortInUse { port: u16 },
    #[error("cannot bind port {port}: {source}")]
    Bind { port: u16, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceConfig {
    /// Scene ticks per second of wall time.
    pub tick_hz: f64,
    /// Pause between iterations of a running session.
    pub interval_ms: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            tick_hz: 60.0,
            interval_ms: misaka_core::session::DEFAULT_INTERVAL_MS,
        }
    }
}

type Reply = oneshot::Sender<Result<(), SessionError>>;

/// Cloneable access to a running session owner.
#[derive(Clone)]
pub struct SessionHandle {
    commands: mpsc::Sender<(Command, Reply)>,
    frames: watch::Receiver<Arc<EventFrame>>,
}

impl SessionHandle {
    /// Queues `cmd` and waits until the owner has applied or rejected it.
    pub async fn send(&self, cmd: Command) -> Result<(), SessionError> {
        let (tx, rx) = oneshot::channel();
        self.commands
            .send((cmd, tx))
            .await
            .map_err(|_| SessionError::Unsupported("session has shut down".into()))?;
        rx.await
            .map_err(|_| SessionError::Unsupported("session has shut down".into()))?
    }

    pub fn latest(&self) -> Arc<EventFrame> {
        self.frames.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<EventFrame>> {
        self.frames.clone()
    }
}

/// Starts the owner task. It runs until every handle is dropped.
pub fn spawn_session(mut session: Session, config: ServiceConfig) -> SessionHandle {
    session
        .set_interval_ms(config.interval_ms)
        .expect("service interval must be nonnegative");
    let (cmd_tx, mut cmd_rx) = mpsc::channel::<(Command, Reply)>(64);
    let (frame_tx, frame_rx) = watch::channel(Arc::new(session.snapshot()));
    let dt = 1.0 / config.tick_hz;
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(Duration::from_secs_f64(dt));
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                _ = ticker.tick() => {
                    // A tick can only fail on a non-finite step; the owner keeps going.
                    let _ = session.tick(dt);
                }
                next = cmd_rx.recv() => {
                    let Some((cmd, reply)) = next else { break };
                    let _ = reply.send(session.apply(cmd));
                }
            }
            if frame_tx.send(Arc::new(session.snapshot())).is_err() {
                break;
            }
        }
    });
    SessionHandle {
        commands: cmd_tx,
        frames: frame_rx,
    }
}

pub fn router(handle: SessionHandle) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/frame", get(latest_frame))
        .with_state(handle)
}

async fn latest_frame(State(handle): State<SessionHandle>) -> Json<EventFrame> {
    Json(handle.latest().as_ref().clone())
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(handle): State<SessionHandle>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, handle)).into_response()
}

fn rejection(cmd: Option<&str>, message: &str) -> Message {
    let body = match cmd {
        Some(cmd) => serde_json::json!({ "error": message, "cmd": cmd }),
        None => serde_json::json!({ "error": message }),
    };
    Message::Text(body.to_string().into())
}

async fn connection(mut socket: WebSocket, handle: SessionHandle) {
    let mut frames = handle.subscribe();
    let mut seq = 0u64;
    let mut send_latest = |frames: &mut watch::Receiver<Arc<EventFrame>>| {
        seq += 1;
        let mut frame = frames.borrow_and_update().as_ref().clone();
        frame.frame = seq;
        Message::Text(frame.to_json().into())
    };
    if socket.send(send_latest(&mut frames)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            changed = frames.changed() => {
                if changed.is_err() || socket.send(send_latest(&mut frames)).await.is_err() {
                    return;
                }
            }
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(text))) => text,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                let reply = match serde_json::from_str::<Command>(text.as_str()) {
                    Ok(cmd) => {
                        let name = cmd.name();
                        handle.send(cmd).await.err().map(|e| rejection(Some(name), &e.to_string()))
                    }
                    Err(e) => Some(rejection(None, &format!("malformed command: {e}"))),
                };
                if let Some(msg) = reply {
                    if socket.send(msg).await.is_err() {
                        return;
                    }
                }
            }
        }
    }
}

/// Binds `0.0.0.0:port`; port 0 picks a free port.
pub async fn bind(port: u16) -> Result<TcpListener, ServeError> {
    TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port)))
        .await
        .map_err(|source| match source.kind() {
            io::ErrorKind::AddrInUse => ServeError::PortInUse { port },
            _ => ServeError::Bind { port, source },
        })
}

/// Serves `session` on `listener` until the process ends.
pub async fn serve(listener: TcpListener, session: Session, config: ServiceConfig) -> Result<(), ServeError> {
    let handle = spawn_session(session, config);
    axum::serve(listener, router(handle)).await?;
    Ok(())
}
