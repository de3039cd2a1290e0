//! Flat `key=value` configuration files.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KvError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}, line {line}: {message}", path.display())]
    Invalid {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub key: String,
    pub value: String,
    /// 1-based.
    pub line: usize,
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// skipped; whitespace around keys and values is trimmed.
pub fn parse(text: &str) -> Result<Vec<Pair>, (usize, String)> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err((idx + 1, format!("expected key=value, got `{line}`")));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err((idx + 1, "empty key".to_string()));
        }
        pairs.push(Pair {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: idx + 1,
        });
    }
    Ok(pairs)
}

pub fn read_file(path: &Path) -> Result<Vec<Pair>, KvError> {
    let text = std::fs::read_to_string(path).map_err(|source| KvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|(line, message)| KvError::Invalid {
        path: path.to_path_buf(),
        line,
        message,
    })
}

pub fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}
