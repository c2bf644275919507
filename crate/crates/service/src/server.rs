//! WebSocket front end. One owner thread holds the [`Session`]; each
//! connection gets a thread that forwards requests to it and writes back
//! acks and state broadcasts.

use std::collections::BTreeMap;
use std::io::{self, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use catch_core::hand_model::HandModel;
use tungstenite::{Message, WebSocket};

use crate::protocol::{parse_request, Ack, RequestBody, ServerMessage};
use crate::session::{Session, SessionError};

pub const DEFAULT_PORT: u16 = 7919;
/// State broadcast period when idle (10 Hz).
pub const HEARTBEAT: Duration = Duration::from_millis(100);
const POLL: Duration = Duration::from_millis(10);

enum Event {
    Connected(u64, Sender<String>),
    Text(u64, String),
    Binary(u64),
    Disconnected(u64),
}

pub struct Server {
    listener: TcpListener,
    session: Session,
}

/// A server running on background threads.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the server threads exit.
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_threads();
    }

    fn stop_threads(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_threads();
    }
}

impl Server {
    pub fn bind(model: HandModel, addr: impl ToSocketAddrs) -> Result<Self, io::Error> {
        let session = Session::new(model).map_err(|e| io::Error::other(e.to_string()))?;
        Ok(Server { listener: TcpListener::bind(addr)?, session })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until the process exits.
    pub fn run(self) -> io::Result<()> {
        self.spawn()?.wait();
        Ok(())
    }

    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel();
        let owner = {
            let stop = stop.clone();
            let session = self.session;
            thread::spawn(move || own_session(session, rx, &stop))
        };
        let acceptor = {
            let stop = stop.clone();
            let listener = self.listener;
            thread::spawn(move || accept_loop(listener, tx, &stop))
        };
        Ok(ServerHandle { addr, stop, threads: vec![acceptor, owner] })
    }
}

/// Binds `0.0.0.0:port` and serves until the process exits.
pub fn serve(model: HandModel, port: u16) -> io::Result<()> {
    Server::bind(model, ("0.0.0.0", port))?.run()
}

fn accept_loop(listener: TcpListener, events: Sender<Event>, stop: &AtomicBool) {
    let mut next_id = 0u64;
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        next_id += 1;
        let id = next_id;
        let events = events.clone();
        thread::spawn(move || {
            if let Err(e) = client_loop(id, stream, &events) {
                eprintln!("client {id}: {e}");
            }
            let _ = events.send(Event::Disconnected(id));
        });
    }
}

fn client_loop(id: u64, stream: TcpStream, events: &Sender<Event>) -> Result<(), String> {
    stream.set_nodelay(true).map_err(|e| e.to_string())?;
    let mut ws = tungstenite::accept(stream).map_err(|e| e.to_string())?;
    ws.get_ref().set_read_timeout(Some(POLL)).map_err(|e| e.to_string())?;
    let (out_tx, out_rx) = mpsc::channel();
    if events.send(Event::Connected(id, out_tx)).is_err() {
        return Ok(());
    }
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                if events.send(Event::Text(id, text.as_str().to_owned())).is_err() {
                    return Ok(());
                }
            }
            Ok(Message::Binary(_)) => {
                let _ = events.send(Event::Binary(id));
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(e.to_string()),
        }
        if !flush_outgoing(&mut ws, &out_rx)? {
            return Ok(());
        }
    }
}

/// Writes queued messages; false once the owner has dropped this client.
fn flush_outgoing(ws: &mut WebSocket<TcpStream>, out: &Receiver<String>) -> Result<bool, String> {
    loop {
        match out.try_recv() {
            Ok(text) => ws.send(Message::text(text)).map_err(|e| e.to_string())?,
            Err(mpsc::TryRecvError::Empty) => return Ok(true),
            Err(mpsc::TryRecvError::Disconnected) => {
                let _ = ws.close(None);
                let _ = ws.flush();
                return Ok(false);
            }
        }
    }
}

fn own_session(mut session: Session, events: Receiver<Event>, stop: &AtomicBool) {
    let mut clients: BTreeMap<u64, Sender<String>> = BTreeMap::new();
    let mut state_json = ServerMessage::State(Box::new(session.snapshot())).to_json();
    let mut next_beat = Instant::now() + HEARTBEAT;
    while !stop.load(Ordering::SeqCst) {
        let wait = next_beat.saturating_duration_since(Instant::now()).min(POLL * 5);
        match events.recv_timeout(wait) {
            Ok(Event::Connected(id, tx)) => {
                let _ = tx.send(state_json.clone());
                clients.insert(id, tx);
            }
            Ok(Event::Disconnected(id)) => {
                clients.remove(&id);
            }
            Ok(Event::Binary(id)) => {
                let ack = Ack::rejected(session.tick(), "binary frames are not supported; send JSON text", None);
                send(&mut clients, id, ServerMessage::Ack(ack).to_json());
            }
            Ok(Event::Text(id, text)) => {
                let (ack, changed) = handle(&mut session, &text);
                match ack {
                    Reply::Ack(ack) => send(&mut clients, id, ServerMessage::Ack(ack).to_json()),
                    Reply::State => send(&mut clients, id, state_json.clone()),
                }
                if changed {
                    state_json = ServerMessage::State(Box::new(session.snapshot())).to_json();
                    broadcast(&mut clients, &state_json);
                    next_beat = Instant::now() + HEARTBEAT;
                }
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => break,
        }
        if Instant::now() >= next_beat {
            broadcast(&mut clients, &state_json);
            next_beat += HEARTBEAT;
            if next_beat < Instant::now() {
                next_beat = Instant::now() + HEARTBEAT;
            }
        }
    }
}

enum Reply {
    Ack(Ack),
    State,
}

fn handle(session: &mut Session, text: &str) -> (Reply, bool) {
    let request = match parse_request(text) {
        Ok(r) => r,
        Err(reason) => return (Reply::Ack(Ack::rejected(session.tick(), reason, None)), false),
    };
    match request.body {
        RequestBody::Snapshot => (Reply::State, false),
        RequestBody::Command(command) => match session.apply(&command) {
            Ok(tick) => (Reply::Ack(Ack::accepted(tick, command, request.id)), true),
            Err(e) => {
                let reason = match e {
                    SessionError::Statics(e) => format!("solver: {e}"),
                    e => e.to_string(),
                };
                (Reply::Ack(Ack::rejected(session.tick(), reason, request.id)), false)
            }
        },
    }
}

fn send(clients: &mut BTreeMap<u64, Sender<String>>, id: u64, text: String) {
    if let Some(tx) = clients.get(&id) {
        if tx.send(text).is_err() {
            clients.remove(&id);
        }
    }
}

fn broadcast(clients: &mut BTreeMap<u64, Sender<String>>, text: &str) {
    clients.retain(|_, tx| tx.send(text.to_owned()).is_ok());
}
