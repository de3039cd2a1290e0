//! Adapter for an external HTTP search engine.
//!
//! The serialized boolean query is substituted into a URL template and the
//! engine is expected to answer with a JSON array of hits:
//!
//! ```json
//! [{"url": "https://example.org/a", "title": "...", "snippet": "..."}]
//! ```
//!
//! Hits are scored by reciprocal rank. Network failures, timeouts and 5xx
//! responses are retried up to `max_retries` times; other failures are
//! returned at once.

use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use url::form_urlencoded;

use super::SearchResult;
use crate::kv::{self, KvError};

pub const QUERY_PLACEHOLDER: &str = "{query}";
pub const K_PLACEHOLDER: &str = "{k}";

#[derive(Debug, Error)]
pub enum WebError {
    #[error("invalid web backend configuration: {0}")]
    Config(String),
    #[error("network failure: {0}")]
    Network(String),
    #[error("request timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64 },
    #[error("search engine answered HTTP {status}")]
    Status { status: u16 },
    #[error("unparseable response at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl WebError {
    fn is_transient(&self) -> bool {
        match self {
            WebError::Network(_) | WebError::Timeout { .. } => true,
            WebError::Status { status } => *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebConfig {
    /// Must contain `{query}`; `{k}` is optional.
    pub url_template: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub max_concurrency: usize,
}

impl WebConfig {
    pub fn new(url_template: impl Into<String>) -> Self {
        Self {
            url_template: url_template.into(),
            timeout_ms: 5_000,
            max_retries: 2,
            max_concurrency: 4,
        }
    }

    /// Reads `url_template`, `timeout_ms`, `max_retries` and
    /// `max_concurrency` from a `key=value` file.
    pub fn from_file(path: &Path) -> Result<Self, KvError> {
        let mut config = Self::new("");
        for pair in kv::read_file(path)? {
            let invalid = |message: String| KvError::Invalid {
                path: path.to_path_buf(),
                line: pair.line,
                message,
            };
            let number = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| invalid(format!("`{}` expects an integer, got `{v}`", pair.key)))
            };
            match pair.key.as_str() {
                "url_template" => config.url_template = pair.value.clone(),
                "timeout_ms" => config.timeout_ms = number(&pair.value)?,
                "max_retries" => config.max_retries = number(&pair.value)? as u32,
                "max_concurrency" => config.max_concurrency = number(&pair.value)? as usize,
                other => return Err(invalid(format!("unknown key `{other}`"))),
            }
        }
        config.validate().map_err(|e| KvError::Invalid {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), WebError> {
        if !self.url_template.contains(QUERY_PLACEHOLDER) {
            return Err(WebError::Config(format!(
                "url_template must contain {QUERY_PLACEHOLDER}"
            )));
        }
        if self.max_concurrency == 0 {
            return Err(WebError::Config(
                "max_concurrency must be at least 1".into(),
            ));
        }
        if self.timeout_ms == 0 {
            return Err(WebError::Config("timeout_ms must be at least 1".into()));
        }
        Ok(())
    }

    pub fn url_for(&self, query: &str, k: usize) -> String {
        let encoded: String = form_urlencoded::byte_serialize(query.as_bytes()).collect();
        self.url_template
            .replace(QUERY_PLACEHOLDER, &encoded)
            .replace(K_PLACEHOLDER, &k.to_string())
    }
}

#[derive(Debug, Deserialize)]
struct Hit {
    url: String,
    #[serde(default)]
    #[allow(dead_code)]
    title: Option<String>,
    #[serde(default)]
    snippet: Option<String>,
}

/// Parses the hit list and scores hit `i` (1-based) as `1 / i`.
pub fn parse_hits(body: &str, k: usize) -> Result<Vec<SearchResult>, WebError> {
    let hits: Vec<Hit> = serde_json::from_str(body).map_err(|e| WebError::Parse {
        offset: byte_offset(body, e.line(), e.column()),
        message: e.to_string(),
    })?;
    Ok(hits
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, hit)| SearchResult {
            doc_id: hit.url,
            score: 1.0 / (i + 1) as f64,
            rank: i + 1,
            snippet: hit.snippet,
        })
        .collect())
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let before: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (before + column.saturating_sub(1)).min(text.len())
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    released: Condvar,
}

impl Permits {
    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().expect("permit lock poisoned");
        while *free == 0 {
            free = self.released.wait(free).expect("permit lock poisoned");
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("permit lock poisoned") += 1;
        self.0.released.notify_one();
    }
}

/// Blocking client for one configured search endpoint. Must not be used
/// from inside an async runtime thread.
#[derive(Debug)]
pub struct WebBackend {
    config: WebConfig,
    client: reqwest::blocking::Client,
    permits: Permits,
}

impl WebBackend {
    pub fn new(config: WebConfig) -> Result<Self, WebError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| WebError::Config(e.to_string()))?;
        Ok(Self {
            permits: Permits {
                free: Mutex::new(config.max_concurrency),
                released: Condvar::new(),
            },
            config,
            client,
        })
    }

    pub fn config(&self) -> &WebConfig {
        &self.config
    }

    pub fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, WebError> {
        let _permit = self.permits.acquire();
        let url = self.config.url_for(query, k);
        let mut attempt = 0;
        loop {
            match self.fetch(&url) {
                Ok(body) => return parse_hits(&body, k),
                Err(e) if e.is_transient() && attempt < self.config.max_retries => {
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(20 * attempt as u64));
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn fetch(&self, url: &str) -> Result<String, WebError> {
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                WebError::Timeout {
                    timeout_ms: self.config.timeout_ms,
                }
            } else {
                WebError::Network(e.to_string())
            }
        };
        let response = self.client.get(url).send().map_err(classify)?;
        let status = response.status();
        if !status.is_success() {
            return Err(WebError::Status {
                status: status.as_u16(),
            });
        }
        response.text().map_err(classify)
    }
}
