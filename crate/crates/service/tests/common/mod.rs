#![allow(dead_code)]

use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use qamar::app::{BackendKind, Settings};
use qamar::cli::{server_state, BackendOptions};

pub fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

pub fn settings() -> Settings {
    Settings {
        lexdb: data("lexdb").into(),
        awn: data("awn/sample_awn.tsv").into(),
        config: None,
        norm_config: None,
        overrides: Vec::new(),
    }
}

/// Runs the CLI in-process with the shipped databases.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let lexdb = data("lexdb");
    let awn = data("awn/sample_awn.tsv");
    let mut argv = vec!["qamar", "--lexdb", &lexdb];
    if !args.contains(&"--awn") {
        argv.extend(["--awn", &awn]);
    }
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = qamar::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Starts a server on an ephemeral port in a background thread.
pub fn start_server(settings: &Settings, backend: BackendOptions) -> SocketAddr {
    let state = server_state(settings, &backend, Duration::from_secs(600)).expect("server state");
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || qamar::http::serve_blocking(listener, Arc::new(state)));
    addr
}

pub fn local_backend() -> BackendOptions {
    BackendOptions {
        backend: BackendKind::Local,
        corpus: Some(data("corpus/docs.tsv").into()),
        index_path: None,
        web_config: None,
    }
}

pub struct Client {
    base: String,
    http: reqwest::blocking::Client,
}

impl Client {
    pub fn new(addr: SocketAddr) -> Self {
        Self {
            base: format!("http://{addr}"),
            http: reqwest::blocking::Client::new(),
        }
    }

    pub fn get(&self, path: &str) -> (u16, serde_json::Value) {
        let response = self
            .http
            .get(format!("{}{path}", self.base))
            .send()
            .unwrap();
        Self::decode(response)
    }

    pub fn post(&self, path: &str, body: &str) -> (u16, serde_json::Value) {
        let response = self
            .http
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .unwrap();
        Self::decode(response)
    }

    fn decode(response: reqwest::blocking::Response) -> (u16, serde_json::Value) {
        let status = response.status().as_u16();
        let text = response.text().unwrap();
        (
            status,
            serde_json::from_str(&text).unwrap_or(serde_json::Value::String(text)),
        )
    }
}
