//! WebSocket service around a [`SessionState`].
//!
//! One worker thread owns the state and applies commands from a queue; queued
//! moves of the same camera collapse into the latest one. After each batch the
//! worker publishes an immutable snapshot. Connection threads only read
//! snapshots, so status and frame delivery never wait on a recompute.

use std::collections::HashSet;
use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::Duration;

use log::{debug, info, warn};
use tungstenite::handshake::HandshakeError;
use tungstenite::{Message, WebSocket};

use crate::camera::{CameraSpec, Pose};
use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::session::protocol::{ClientMessage, ServerMessage};
use crate::session::{CameraRecord, LatencySummary, SessionExport, SessionState, TransferMode, VolumeFrame};
use crate::visibility::VisCounts;

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Port 0 picks a free one.
    pub addr: SocketAddr,
    pub session_name: String,
    /// Written with the final export on shutdown.
    pub export_path: Option<PathBuf>,
    pub config_hash: Option<String>,
}

impl ServerConfig {
    pub fn local(port: u16) -> Self {
        ServerConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], port)),
            session_name: "session".into(),
            export_path: None,
            config_hash: None,
        }
    }
}

/// State as of one committed revision.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub revision: u64,
    pub counts: VisCounts,
    pub coverage: f64,
    pub covered: u64,
    pub cameras: Vec<CameraRecord>,
    pub latency: LatencySummary,
}

impl Snapshot {
    fn of(state: &SessionState) -> Self {
        let counts = state.counts().clone();
        Snapshot {
            revision: state.revision(),
            covered: counts.covered() as u64,
            counts,
            coverage: state.coverage(),
            cameras: state.export_solution().cameras,
            latency: state.latency_stats().summary(),
        }
    }

    fn status(&self) -> ServerMessage {
        ServerMessage::Status {
            revision: self.revision,
            coverage: self.coverage,
            covered: self.covered,
            latency_ms: self.latency.rolling_mean_ms,
            latency: self.latency,
            cameras: self.cameras.clone(),
        }
    }
}

enum Command {
    Move { id: u32, pose: Pose, reply: Sender<ServerMessage> },
    Add { spec: CameraSpec, pose: Pose, reply: Sender<ServerMessage> },
    Remove { id: u32, reply: Sender<ServerMessage> },
    Export { reply: Sender<ServerMessage> },
    Shutdown,
}

struct Shared {
    snapshot: RwLock<Arc<Snapshot>>,
    stop: AtomicBool,
    points_blob: Vec<u8>,
    n_points: u32,
    bounds: Aabb,
    session: String,
}

pub struct ServerHandle {
    local_addr: SocketAddr,
    shared: Arc<Shared>,
    commands: Sender<Command>,
    worker: Option<JoinHandle<SessionExport>>,
    acceptor: Option<JoinHandle<()>>,
    connections: Arc<Mutex<Vec<JoinHandle<()>>>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn url(&self) -> String {
        format!("ws://{}", self.local_addr)
    }

    /// Latest committed snapshot.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.shared.snapshot.read().unwrap().clone()
    }

    /// Stops accepting, closes connections, drains the queue and returns the final
    /// export (also written to the configured export path).
    pub fn shutdown(mut self) -> Result<SessionExport> {
        self.stop_threads()
    }

    fn stop_threads(&mut self) -> Result<SessionExport> {
        self.shared.stop.store(true, Ordering::SeqCst);
        let _ = self.commands.send(Command::Shutdown);
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
        let conns: Vec<_> = std::mem::take(&mut *self.connections.lock().unwrap());
        for c in conns {
            let _ = c.join();
        }
        match self.worker.take() {
            Some(w) => w.join().map_err(|_| Error::ServiceStopped),
            None => Err(Error::ServiceStopped),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.worker.is_some() {
            let _ = self.stop_threads();
        }
    }
}

/// Binds `config.addr` and starts serving `state`.
pub fn serve(state: SessionState, config: ServerConfig) -> Result<ServerHandle> {
    let listener = TcpListener::bind(config.addr).map_err(|e| Error::io(format!("tcp://{}", config.addr), e))?;
    let local_addr = listener.local_addr()?;
    listener.set_nonblocking(true)?;

    let mut points_blob = Vec::with_capacity(state.points().len() * 12);
    for p in state.points().points() {
        for c in [p.x, p.y, p.z] {
            points_blob.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    let shared = Arc::new(Shared {
        snapshot: RwLock::new(Arc::new(Snapshot::of(&state))),
        stop: AtomicBool::new(false),
        points_blob,
        n_points: state.points().len() as u32,
        bounds: state.mesh().bounds(),
        session: config.session_name.clone(),
    });
    let (tx, rx) = mpsc::channel();
    let worker = {
        let shared = shared.clone();
        let config = config.clone();
        std::thread::Builder::new()
            .name("session-worker".into())
            .spawn(move || run_worker(state, rx, &shared, &config))?
    };
    let connections = Arc::new(Mutex::new(Vec::new()));
    let acceptor = {
        let shared = shared.clone();
        let connections = connections.clone();
        let tx = tx.clone();
        std::thread::Builder::new()
            .name("session-accept".into())
            .spawn(move || accept_loop(listener, shared, tx, connections))?
    };
    info!("session service listening on ws://{local_addr}");
    Ok(ServerHandle { local_addr, shared, commands: tx, worker: Some(worker), acceptor: Some(acceptor), connections })
}

/// Drops moves superseded by a later move of the same camera with no other
/// command in between.
fn coalesce(batch: Vec<Command>) -> Vec<Command> {
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(batch.len());
    for cmd in batch.into_iter().rev() {
        match &cmd {
            Command::Move { id, .. } => {
                if !seen.insert(*id) {
                    continue;
                }
            }
            _ => seen.clear(),
        }
        kept.push(cmd);
    }
    kept.reverse();
    kept
}

fn run_worker(mut state: SessionState, rx: Receiver<Command>, shared: &Shared, config: &ServerConfig) -> SessionExport {
    let export =
        |state: &SessionState| SessionExport { config_hash: config.config_hash.clone(), ..state.export_solution() };
    'outer: while let Ok(first) = rx.recv() {
        let mut batch = vec![first];
        batch.extend(rx.try_iter());
        let before = state.revision();
        let mut stop = false;
        for cmd in coalesce(batch) {
            match cmd {
                Command::Move { id, pose, reply } => {
                    if let Err(e) = state.move_camera(id, pose) {
                        let _ = reply.send(ServerMessage::Error { message: e.to_string() });
                    }
                }
                Command::Add { spec, pose, reply } => match state.add_camera(spec, pose) {
                    Ok((id, s)) => {
                        let _ = reply.send(ServerMessage::CameraAdded { id, revision: s.revision });
                    }
                    Err(e) => {
                        let _ = reply.send(ServerMessage::Error { message: e.to_string() });
                    }
                },
                Command::Remove { id, reply } => {
                    if let Err(e) = state.remove_camera(id) {
                        let _ = reply.send(ServerMessage::Error { message: e.to_string() });
                    }
                }
                Command::Export { reply } => {
                    let _ = reply.send(ServerMessage::Solution { export: export(&state) });
                }
                Command::Shutdown => stop = true,
            }
        }
        if state.revision() != before {
            *shared.snapshot.write().unwrap() = Arc::new(Snapshot::of(&state));
            debug!("published revision {}", state.revision());
        }
        if stop {
            break 'outer;
        }
    }
    let out = export(&state);
    if let Some(path) = &config.export_path {
        match serde_json::to_vec_pretty(&out) {
            Ok(bytes) => match std::fs::write(path, bytes) {
                Ok(()) => info!("session export written to {}", path.display()),
                Err(e) => warn!("cannot write session export {}: {e}", path.display()),
            },
            Err(e) => warn!("cannot serialize session export: {e}"),
        }
    }
    out
}

fn accept_loop(
    listener: TcpListener,
    shared: Arc<Shared>,
    tx: Sender<Command>,
    connections: Arc<Mutex<Vec<JoinHandle<()>>>>,
) {
    while !shared.stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("connection from {peer}");
                let shared = shared.clone();
                let tx = tx.clone();
                match std::thread::Builder::new().name(format!("session-conn-{peer}")).spawn(move || {
                    if let Err(e) = run_connection(stream, &shared, tx) {
                        debug!("connection {peer} ended: {e}");
                    }
                }) {
                    Ok(h) => connections.lock().unwrap().push(h),
                    Err(e) => warn!("cannot spawn connection thread: {e}"),
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => std::thread::sleep(POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                std::thread::sleep(POLL);
            }
        }
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

fn send_json(ws: &mut WebSocket<TcpStream>, msg: &ServerMessage) -> Result<()> {
    let text = serde_json::to_string(msg).map_err(|e| Error::Protocol(e.to_string()))?;
    ws.send(Message::Text(text)).map_err(|e| Error::Protocol(e.to_string()))
}

fn run_connection(stream: TcpStream, shared: &Shared, commands: Sender<Command>) -> Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(POLL))?;
    let mut handshake = tungstenite::accept(stream);
    let mut ws = loop {
        match handshake {
            Ok(ws) => break ws,
            Err(HandshakeError::Interrupted(mid)) => {
                if shared.stop.load(Ordering::SeqCst) {
                    return Ok(());
                }
                handshake = mid.handshake();
            }
            Err(HandshakeError::Failure(e)) => return Err(Error::Protocol(e.to_string())),
        }
    };
    let (reply_tx, reply_rx) = mpsc::channel();
    let mut greeted = false;
    let mut mode = TransferMode::Quality;
    let mut sent_revision: Option<u64> = None;
    let mut force_frame = false;

    loop {
        if shared.stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
        match ws.read() {
            Ok(Message::Text(text)) => match serde_json::from_str::<ClientMessage>(&text) {
                Ok(ClientMessage::Hello { .. }) => {
                    let snap = shared.snapshot.read().unwrap().clone();
                    send_json(
                        &mut ws,
                        &ServerMessage::Welcome {
                            session: shared.session.clone(),
                            revision: snap.revision,
                            n_points: shared.n_points,
                            bounds: shared.bounds,
                            mode,
                            cameras: snap.cameras.clone(),
                        },
                    )?;
                    ws.send(Message::Binary(shared.points_blob.clone())).map_err(|e| Error::Protocol(e.to_string()))?;
                    greeted = true;
                    force_frame = true;
                }
                Ok(_) if !greeted => {
                    send_json(&mut ws, &ServerMessage::Error { message: "expected hello first".into() })?;
                }
                Ok(msg) => {
                    if let Some(cmd) = to_command(msg, &reply_tx, &mut mode, &mut force_frame) {
                        match cmd {
                            Ok(cmd) => commands.send(cmd).map_err(|_| Error::ServiceStopped)?,
                            Err(e) => send_json(&mut ws, &ServerMessage::Error { message: e.to_string() })?,
                        }
                    }
                }
                Err(e) => send_json(&mut ws, &ServerMessage::Error { message: format!("bad message: {e}") })?,
            },
            Ok(Message::Binary(_)) => {
                send_json(&mut ws, &ServerMessage::Error { message: "binary messages are not accepted".into() })?;
            }
            Ok(Message::Close(_)) => {
                let _ = ws.flush();
                return Ok(());
            }
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(Error::Protocol(e.to_string())),
        }
        for msg in reply_rx.try_iter() {
            send_json(&mut ws, &msg)?;
        }
        if greeted {
            let snap = shared.snapshot.read().unwrap().clone();
            if force_frame || sent_revision != Some(snap.revision) {
                send_json(&mut ws, &snap.status())?;
                let frame = VolumeFrame::from_counts(snap.revision, &snap.counts, mode);
                ws.send(Message::Binary(frame.encode())).map_err(|e| Error::Protocol(e.to_string()))?;
                sent_revision = Some(snap.revision);
                force_frame = false;
            }
        }
    }
}

fn to_command(
    msg: ClientMessage,
    reply: &Sender<ServerMessage>,
    mode: &mut TransferMode,
    force_frame: &mut bool,
) -> Option<Result<Command>> {
    let reply = reply.clone();
    Some(match msg {
        ClientMessage::Hello { .. } => return None,
        ClientMessage::MoveCamera { id, position, quaternion } => {
            Pose::from_xyzw(position, quaternion).map(|pose| Command::Move { id, pose, reply })
        }
        ClientMessage::AddCamera { spec, pose } => {
            Pose::from_xyzw(pose.position, pose.quaternion).map(|pose| Command::Add { spec, pose, reply })
        }
        ClientMessage::RemoveCamera { id } => Ok(Command::Remove { id, reply }),
        ClientMessage::SetMode { mode: m } => {
            *mode = m;
            *force_frame = true;
            return None;
        }
        ClientMessage::Export {} => Ok(Command::Export { reply }),
    })
}
