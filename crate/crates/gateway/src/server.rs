//! TCP front end. One tick thread owns the [`Service`]; connection threads
//! only parse commands into the inbound queue and write event lines from a
//! bounded per-subscriber queue.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};

use crate::error::GatewayError;
use crate::protocol::{Command, EventMsg};
use crate::service::Service;

pub type Line = Arc<str>;

/// Fan-out of event lines. A subscriber whose queue is full is dropped
/// rather than allowed to stall the tick loop.
#[derive(Default)]
pub struct Broadcaster {
    next_id: u64,
    subscribers: Vec<(u64, SyncSender<Line>)>,
}

impl Broadcaster {
    pub fn add(&mut self, tx: SyncSender<Line>) -> u64 {
        self.next_id += 1;
        self.subscribers.push((self.next_id, tx));
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.subscribers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subscribers.is_empty()
    }

    /// Send to everyone; returns the ids of dropped subscribers.
    pub fn publish(&mut self, line: &Line) -> Vec<u64> {
        let mut dropped = Vec::new();
        self.subscribers.retain(|(id, tx)| match tx.try_send(line.clone()) {
            Ok(()) => true,
            Err(TrySendError::Full(_)) | Err(TrySendError::Disconnected(_)) => {
                dropped.push(*id);
                false
            }
        });
        dropped
    }
}

pub enum Inbound {
    Subscribe(SyncSender<Line>),
    Command(Command),
    /// A line that did not parse as a command.
    Malformed { command_id: String, reason: String },
}

#[derive(Clone, Debug)]
pub struct ServeOptions {
    /// Ticks per second; 0 runs unthrottled.
    pub tick_rate: f64,
    /// Per-subscriber queue length before the subscriber is dropped.
    pub queue_capacity: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions { tick_rate: 100.0, queue_capacity: 4096 }
    }
}

pub struct Server {
    listener: TcpListener,
    addr: SocketAddr,
}

impl Server {
    pub fn bind(addr: &str) -> Result<Server, GatewayError> {
        let bind_err = |source| GatewayError::BindFailure { addr: addr.to_string(), source };
        let listener = TcpListener::bind(addr).map_err(bind_err)?;
        let addr = listener.local_addr().map_err(bind_err)?;
        Ok(Server { listener, addr })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Run until a Shutdown command is applied.
    pub fn serve(self, mut service: Service, opts: ServeOptions) -> Result<(), GatewayError> {
        let (tx, rx) = mpsc::channel::<Inbound>();
        let stop = Arc::new(AtomicBool::new(false));
        self.listener.set_nonblocking(true)?;
        let acceptor = {
            let stop = stop.clone();
            let capacity = opts.queue_capacity;
            thread::spawn(move || accept_loop(self.listener, tx, stop, capacity))
        };
        info!("listening on {}", self.addr);
        let result = tick_loop(&mut service, &rx, &opts);
        stop.store(true, Ordering::Relaxed);
        let _ = acceptor.join();
        result
    }
}

fn accept_loop(listener: TcpListener, tx: Sender<Inbound>, stop: Arc<AtomicBool>, capacity: usize) {
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("connection from {peer}");
                let _ = stream.set_nonblocking(false);
                let tx = tx.clone();
                thread::spawn(move || connection(stream, tx, capacity));
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(e) => warn!("accept failed: {e}"),
        }
    }
}

fn connection(stream: TcpStream, tx: Sender<Inbound>, capacity: usize) {
    let Ok(mut out) = stream.try_clone() else { return };
    let (line_tx, line_rx) = mpsc::sync_channel::<Line>(capacity);
    if tx.send(Inbound::Subscribe(line_tx)).is_err() {
        return;
    }
    let writer = thread::spawn(move || {
        for line in line_rx {
            if out.write_all(line.as_bytes()).and_then(|_| out.write_all(b"\n")).is_err() {
                break;
            }
        }
        let _ = out.shutdown(std::net::Shutdown::Both);
    });
    for line in BufReader::new(stream).lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let msg = match serde_json::from_str::<Command>(&line) {
            Ok(cmd) => Inbound::Command(cmd),
            Err(e) => Inbound::Malformed {
                command_id: serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("command_id").and_then(|c| c.as_str()).map(str::to_string))
                    .unwrap_or_default(),
                reason: format!("malformed command: {e}"),
            },
        };
        if tx.send(msg).is_err() {
            break;
        }
    }
    let _ = writer.join();
}

fn tick_loop(service: &mut Service, rx: &Receiver<Inbound>, opts: &ServeOptions) -> Result<(), GatewayError> {
    let mut subscribers = Broadcaster::default();
    let period = (opts.tick_rate > 0.0).then(|| Duration::from_secs_f64(1.0 / opts.tick_rate));
    let mut next = Instant::now();
    let fan_out = |subscribers: &mut Broadcaster, events: Vec<EventMsg>| {
        for e in events {
            let line: Line = e.to_line().into();
            for id in subscribers.publish(&line) {
                warn!("dropped slow or closed subscriber {id}");
            }
        }
    };
    loop {
        while let Ok(msg) = rx.try_recv() {
            match msg {
                Inbound::Subscribe(tx) => {
                    fan_out(&mut subscribers, service.drain());
                    let resync: Line = service.resync().to_line().into();
                    if tx.try_send(resync).is_ok() {
                        subscribers.add(tx);
                    }
                }
                Inbound::Command(cmd) => {
                    service.apply(cmd);
                }
                Inbound::Malformed { command_id, reason } => {
                    service.reject(command_id, reason);
                }
            }
        }
        fan_out(&mut subscribers, service.drain());
        if service.is_shutdown() {
            return Ok(());
        }
        service.tick()?;
        fan_out(&mut subscribers, service.drain());
        if let Some(p) = period {
            next += p;
            let now = Instant::now();
            if next > now {
                thread::sleep(next - now);
            } else {
                next = now;
            }
        }
    }
}
