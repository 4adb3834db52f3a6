//! Pose-streaming relay: serves the frames of a session to any number of
//! TCP subscribers at a fixed rate, using the session wire format (header
//! line, then one frame per line).
//!
//! One producer loop paces the frames; each subscriber gets a bounded
//! queue and its own writer thread, so a stalled subscriber is dropped
//! once its queue overflows and never stalls the others.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{sync_channel, SyncSender, TrySendError};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use avtr_core::error::{Error, Result};
use avtr_core::session::{format_frame, format_header, parse_frame, parse_header, FilterState,
    Session, SessionFrame};

/// Frames a subscriber may lag behind before it is disconnected.
pub const SUBSCRIBER_BUFFER: usize = 256;

#[derive(Debug, Clone)]
pub struct RelayConfig {
    /// Bind address, e.g. `127.0.0.1:7355` (port 0 picks a free port).
    pub bind: String,
    /// Streaming rate; `None` uses the session's recorded rate.
    pub rate_hz: Option<f64>,
    /// Grace period before the first frame goes out, so subscribers can
    /// join a finite replay from its beginning.
    pub start_delay: Duration,
}

impl RelayConfig {
    pub fn new(bind: impl Into<String>) -> Self {
        RelayConfig { bind: bind.into(), rate_hz: None, start_delay: Duration::ZERO }
    }
}

struct Subscriber {
    queue: SyncSender<Arc<str>>,
}

struct Shared {
    subscribers: Mutex<Vec<Subscriber>>,
    header: String,
    done: AtomicBool,
    shutdown: AtomicBool,
}

/// A running relay. Dropping it shuts the service down.
pub struct RelayServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    producer: Option<JoinHandle<()>>,
    acceptor: Option<JoinHandle<()>>,
}

impl RelayServer {
    /// Binds and starts streaming `session`. Frames are paced at the
    /// configured rate; when the source is exhausted every subscriber gets
    /// a clean end-of-stream.
    pub fn start(config: RelayConfig, session: Session) -> Result<RelayServer> {
        let rate = config.rate_hz.unwrap_or(session.rate_hz);
        if !(rate > 0.0) {
            return Err(Error::InvalidArgument("relay rate must be positive"));
        }
        let listener = TcpListener::bind(&config.bind)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;

        let shared = Arc::new(Shared {
            subscribers: Mutex::new(Vec::new()),
            header: format_header(rate),
            done: AtomicBool::new(false),
            shutdown: AtomicBool::new(false),
        });

        let acceptor = {
            let shared = Arc::clone(&shared);
            std::thread::spawn(move || accept_loop(listener, shared))
        };
        let producer = {
            let shared = Arc::clone(&shared);
            let delay = config.start_delay;
            std::thread::spawn(move || {
                if !delay.is_zero() {
                    std::thread::sleep(delay);
                }
                produce(session, rate, shared)
            })
        };

        Ok(RelayServer { addr, shared, producer: Some(producer), acceptor: Some(acceptor) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the source is exhausted and all queues are flushed.
    pub fn wait(mut self) {
        if let Some(p) = self.producer.take() {
            let _ = p.join();
        }
        self.shared.shutdown.store(true, Ordering::SeqCst);
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
    }
}

impl Drop for RelayServer {
    fn drop(&mut self) {
        self.shared.shutdown.store(true, Ordering::SeqCst);
        if let Some(p) = self.producer.take() {
            let _ = p.join();
        }
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    while !shared.shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let _ = stream.set_nodelay(true);
                let (tx, rx) = sync_channel::<Arc<str>>(SUBSCRIBER_BUFFER);
                // Header goes into the queue before the subscriber becomes
                // visible to the producer, so it always precedes frames.
                let _ = tx.send(Arc::from(shared.header.as_str()));
                if shared.done.load(Ordering::SeqCst) {
                    // Source already exhausted: header then end-of-stream.
                    drop(tx);
                } else {
                    shared.subscribers.lock().unwrap().push(Subscriber { queue: tx });
                }
                std::thread::spawn(move || {
                    let mut stream = stream;
                    while let Ok(line) = rx.recv() {
                        if stream.write_all(line.as_bytes()).is_err()
                            || stream.write_all(b"\n").is_err()
                        {
                            return;
                        }
                    }
                    let _ = stream.flush();
                });
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(_) => break,
        }
    }
}

fn produce(session: Session, rate: f64, shared: Arc<Shared>) {
    let period = Duration::from_secs_f64(1.0 / rate);
    let mut next = Instant::now();
    for frame in &session.frames {
        if shared.shutdown.load(Ordering::SeqCst) {
            break;
        }
        let line: Arc<str> = Arc::from(format_frame(frame).as_str());
        {
            let mut subs = shared.subscribers.lock().unwrap();
            subs.retain(|s| match s.queue.try_send(Arc::clone(&line)) {
                Ok(()) => true,
                // Queue overflow or a dead writer: drop this subscriber.
                Err(TrySendError::Full(_)) | Err(TrySendError::Disconnected(_)) => false,
            });
        }
        next += period;
        let now = Instant::now();
        if next > now {
            std::thread::sleep(next - now);
        }
    }
    shared.done.store(true, Ordering::SeqCst);
    // Closing the queues ends every writer after it drains.
    shared.subscribers.lock().unwrap().clear();
}

/// Client side: a connected frame stream.
pub struct Subscription {
    reader: BufReader<TcpStream>,
    rate_hz: f64,
    line_no: usize,
    filter: Option<FilterState>,
}

/// Connects and reads the stream header. With `filter_beta` set, the
/// robot base pose of every yielded frame is low-pass filtered.
pub fn subscribe<A: ToSocketAddrs>(addr: A, filter_beta: Option<f64>) -> Result<Subscription> {
    let stream = TcpStream::connect(addr)?;
    let mut reader = BufReader::new(stream);
    let mut header = String::new();
    if reader.read_line(&mut header)? == 0 {
        return Err(Error::Parse { line: 1, msg: "stream closed before header".into() });
    }
    let rate_hz = parse_header(header.trim_end())?;
    let filter = match filter_beta {
        Some(beta) => Some(FilterState::new(beta)?),
        None => None,
    };
    Ok(Subscription { reader, rate_hz, line_no: 1, filter })
}

impl Subscription {
    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }
}

impl Iterator for Subscription {
    type Item = Result<SessionFrame>;

    /// Yields parsed frames in order. A malformed line surfaces as one
    /// `Err` item and the stream continues; the iterator ends at
    /// end-of-stream.
    fn next(&mut self) -> Option<Self::Item> {
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                let trimmed = line.trim_end();
                if trimmed.is_empty() {
                    return self.next();
                }
                match parse_frame(trimmed, self.line_no) {
                    Ok(mut frame) => {
                        if let Some(filter) = &mut self.filter {
                            frame.base_pose = filter.step(frame.base_pose);
                        }
                        Some(Ok(frame))
                    }
                    Err(e) => Some(Err(e)),
                }
            }
            Err(e) => Some(Err(Error::Io(e))),
        }
    }
}
