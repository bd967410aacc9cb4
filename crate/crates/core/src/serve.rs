//! Live service for the driver console: a wall-clock paced simulation loop
//! publishing state over WebSocket and taking pedal commands back.
//!
//! The loop owns the [`Simulation`]. Client threads only ever hand it
//! commands through a channel and receive serialized messages through
//! another, so a slow or absent client cannot stall a tick.

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tungstenite::{Message, WebSocket};

use crate::advisory::{AdvisoryState, SpeedRecommendation};
use crate::sim::{Driver, Simulation, TickOutput};

const POLL: Duration = Duration::from_millis(10);
const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("live mode needs a scenario with the external driver")]
    NotExternal,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Messages accepted from clients.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Control { accel_mps2: f64 },
    Reset,
}

/// Hex SHA-256 of the zone config document, announced in the hello message.
pub fn config_digest(document: &[u8]) -> String {
    hex::encode(Sha256::digest(document))
}

pub fn hello_message(config_digest: &str, tick_ms: u64) -> Value {
    json!({"type": "hello", "config_digest": config_digest, "tick_ms": tick_ms})
}

fn recommendation_json(rec: &SpeedRecommendation) -> Value {
    match *rec {
        SpeedRecommendation::Proceed {
            target_mps,
            window_mps,
        } => {
            json!({"kind": "proceed", "target_mps": target_mps, "window": window_mps})
        }
        SpeedRecommendation::PrepareToStop => json!({"kind": "stop"}),
        SpeedRecommendation::NoAdvice => json!({"kind": "none"}),
    }
}

fn advisory_json(a: &AdvisoryState) -> Value {
    json!({
        "active": a.active,
        "phase_id": a.phase_id,
        "color": a.current_color.code().to_string(),
        "countdown_ds": a.countdown_ds,
        "recommendation": recommendation_json(&a.recommendation),
    })
}

/// Per-tick state message. `advisory` is null until the OBU holds data for a zone.
pub fn state_message(out: &TickOutput) -> Value {
    let v = &out.vehicle;
    json!({
        "type": "state",
        "tick": out.tick,
        "vehicle": {
            "speed_mps": v.speed_mps,
            "distance_m": v.along_m,
            "lat": v.pos.lat_deg,
            "lon": v.pos.lon_deg,
        },
        "advisory": out.advisory.as_ref().map_or(Value::Null, advisory_json),
        "events": out.notifications,
    })
}

#[derive(Debug, Clone)]
pub struct LiveOptions {
    pub tick: Duration,
    pub config_digest: String,
}

type Outboxes = Arc<Mutex<Vec<Sender<Arc<str>>>>>;

/// A running live service. Dropping it does not stop the threads; call
/// [`LiveServer::shutdown`].
pub struct LiveServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl LiveServer {
    pub fn start(
        listener: TcpListener,
        sim: Simulation,
        opts: LiveOptions,
    ) -> Result<Self, ServeError> {
        if sim.scenario().driver != Driver::External {
            return Err(ServeError::NotExternal);
        }
        let addr = listener.local_addr()?;
        listener.set_nonblocking(true)?;
        let stop = Arc::new(AtomicBool::new(false));
        let outboxes: Outboxes = Arc::default();
        let (cmd_tx, cmd_rx) = mpsc::channel();
        let tick_ms = opts.tick.as_millis() as u64;
        let hello: Arc<str> = hello_message(&opts.config_digest, tick_ms)
            .to_string()
            .into();

        let sim_thread = {
            let stop = Arc::clone(&stop);
            let outboxes = Arc::clone(&outboxes);
            thread::spawn(move || sim_loop(sim, opts.tick, cmd_rx, outboxes, stop))
        };
        let accept_thread = {
            let stop = Arc::clone(&stop);
            thread::spawn(move || accept_loop(listener, hello, cmd_tx, outboxes, stop))
        };
        Ok(Self {
            addr,
            stop,
            threads: vec![sim_thread, accept_thread],
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the service stops (it only stops on shutdown).
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

fn sim_loop(
    mut sim: Simulation,
    tick: Duration,
    commands: Receiver<ClientMessage>,
    outboxes: Outboxes,
    stop: Arc<AtomicBool>,
) {
    let mut next = Instant::now();
    while !stop.load(Ordering::SeqCst) {
        // Commands received during the previous tick take effect now; the
        // last control message wins.
        loop {
            match commands.try_recv() {
                Ok(ClientMessage::Control { accel_mps2 }) => sim.set_external_accel(accel_mps2),
                Ok(ClientMessage::Reset) => sim.reset(),
                Err(_) => break,
            }
        }
        if !sim.is_finished() {
            let out = sim.step();
            let text: Arc<str> = state_message(&out).to_string().into();
            outboxes
                .lock()
                .expect("outbox list poisoned")
                .retain(|tx| tx.send(Arc::clone(&text)).is_ok());
        }
        next += tick;
        let now = Instant::now();
        if next > now {
            thread::sleep(next - now);
        } else {
            next = now;
        }
    }
}

fn accept_loop(
    listener: TcpListener,
    hello: Arc<str>,
    commands: Sender<ClientMessage>,
    outboxes: Outboxes,
    stop: Arc<AtomicBool>,
) {
    let mut clients = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let (tx, rx) = mpsc::channel();
                outboxes.lock().expect("outbox list poisoned").push(tx);
                let hello = Arc::clone(&hello);
                let commands = commands.clone();
                let stop = Arc::clone(&stop);
                clients.push(thread::spawn(move || {
                    let _ = client_session(stream, &hello, rx, commands, &stop);
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(_) => thread::sleep(POLL),
        }
        clients.retain(|c: &JoinHandle<()>| !c.is_finished());
    }
    for c in clients {
        let _ = c.join();
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut))
}

fn client_session(
    stream: TcpStream,
    hello: &str,
    outbox: Receiver<Arc<str>>,
    commands: Sender<ClientMessage>,
    stop: &AtomicBool,
) -> Result<(), tungstenite::Error> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(HANDSHAKE_TIMEOUT))?;
    let mut ws: WebSocket<TcpStream> = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => {
            tungstenite::Error::Io(io::Error::from(io::ErrorKind::TimedOut))
        }
    })?;
    ws.get_ref().set_read_timeout(Some(POLL))?;
    ws.send(Message::text(hello))?;

    while !stop.load(Ordering::SeqCst) {
        loop {
            match outbox.try_recv() {
                Ok(text) => ws.send(Message::text(&*text))?,
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return Ok(()),
            }
        }
        match ws.read() {
            Ok(Message::Text(text)) => {
                // Malformed or unknown messages are ignored.
                if let Ok(msg) = serde_json::from_str::<ClientMessage>(text.as_str()) {
                    if commands.send(msg).is_err() {
                        return Ok(());
                    }
                }
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(())
            }
            Err(e) => return Err(e),
        }
    }
    let _ = ws.close(None);
    let _ = ws.flush();
    Ok(())
}
