//! A minimal HTTP search engine for exercising [`super::WebBackend`]
//! without network access.
//!
//! The server answers every request with a fixed [`StubBehavior`] and
//! records the request targets it saw.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StubHit {
    pub url: String,
    pub title: String,
    pub snippet: String,
}

impl StubHit {
    pub fn new(url: &str, title: &str, snippet: &str) -> Self {
        Self {
            url: url.to_string(),
            title: title.to_string(),
            snippet: snippet.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum StubBehavior {
    /// 200 with the hits as a JSON array.
    Hits(Vec<StubHit>),
    /// The given status with an empty body.
    Status(u16),
    /// 200 with an arbitrary body.
    Body(String),
    /// Sleeps before behaving as the inner behavior.
    Delay(Duration, Box<StubBehavior>),
}

pub struct StubServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<String>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn start(behavior: StubBehavior) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let requests = Arc::clone(&requests);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let behavior = behavior.clone();
                    let requests = Arc::clone(&requests);
                    std::thread::spawn(move || {
                        let _ = serve(stream, &behavior, &requests);
                    });
                }
            })
        };
        Ok(Self {
            addr,
            requests,
            stop,
            handle: Some(handle),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// A URL template pointing at this server.
    pub fn url_template(&self) -> String {
        format!("http://{}/search?q={{query}}&n={{k}}", self.addr)
    }

    /// Request targets (path and query string) received so far.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("stub lock poisoned").clone()
    }

    pub fn hits(&self) -> usize {
        self.requests.lock().expect("stub lock poisoned").len()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve(
    stream: TcpStream,
    behavior: &StubBehavior,
    requests: &Mutex<Vec<String>>,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header == "\r\n" || header == "\n" {
            break;
        }
    }
    let target = request_line
        .split_whitespace()
        .nth(1)
        .unwrap_or_default()
        .to_string();
    requests.lock().expect("stub lock poisoned").push(target);
    respond(stream, behavior)
}

fn respond(mut stream: TcpStream, behavior: &StubBehavior) -> std::io::Result<()> {
    let (status, body) = match behavior {
        StubBehavior::Hits(hits) => (200, serde_json::to_string(hits).expect("hits serialize")),
        StubBehavior::Status(status) => (*status, String::new()),
        StubBehavior::Body(body) => (200, body.clone()),
        StubBehavior::Delay(delay, inner) => {
            std::thread::sleep(*delay);
            return respond(stream, inner);
        }
    };
    let reason = if status == 200 { "OK" } else { "Stub" };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}
