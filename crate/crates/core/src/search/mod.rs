//! Retrieval backends: a local TF-IDF index and an HTTP adapter for an
//! external web search engine.

pub mod index;
pub mod stub;
pub mod web;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::{IndexError, LocalIndex};
pub use web::{WebBackend, WebConfig, WebError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
    pub snippet: Option<String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}, line {line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Loads a corpus from a directory of UTF-8 text files (file name = id,
/// first line = title) or from a TSV file of `id, title, body` rows.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        entries
            .into_iter()
            .map(|file| {
                let text = std::fs::read_to_string(&file).map_err(|source| CorpusError::Io {
                    path: file.clone(),
                    source,
                })?;
                let id = file
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let title = text.lines().next().unwrap_or_default().trim().to_string();
                Ok(Document {
                    id,
                    title,
                    body: text,
                })
            })
            .collect()
    } else {
        let text = std::fs::read_to_string(path).map_err(io)?;
        parse_corpus_tsv(&text).map_err(|(line, message)| CorpusError::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        })
    }
}

pub fn parse_corpus_tsv(text: &str) -> Result<Vec<Document>, (usize, String)> {
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(id), Some(title), Some(body)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err((
                idx + 1,
                "expected id, title and body separated by tabs".to_string(),
            ));
        };
        if id.trim().is_empty() {
            return Err((idx + 1, "empty document id".to_string()));
        }
        docs.push(Document {
            id: id.trim().to_string(),
            title: title.trim().to_string(),
            body: body.trim().to_string(),
        });
    }
    Ok(docs)
}

/// Sorts by descending score, ascending doc id, keeps `k` and numbers the ranks.
pub(crate) fn rank(mut scored: Vec<(String, f64, Option<String>)>, k: usize) -> Vec<SearchResult> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (doc_id, score, snippet))| SearchResult {
            doc_id,
            score,
            rank: i + 1,
            snippet,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_corpus() {
        let docs =
            parse_corpus_tsv("# id\ttitle\tbody\nd1\tخيل\tالخيل\tسريعة\n\nd2\t\tفرس\n").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].body, "الخيل\tسريعة");
        assert_eq!(docs[1].title, "");
        assert_eq!(parse_corpus_tsv("d1 only\n").unwrap_err().0, 1);
    }

    #[test]
    fn directory_corpus_uses_file_names() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), "عنوان\nالفرس").unwrap();
        std::fs::write(dir.path().join("a.txt"), "الخيل").unwrap();
        let docs = load_corpus(dir.path()).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a.txt", "b.txt"]);
        assert_eq!(docs[1].title, "عنوان");
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let ranked = rank(
            vec![
                ("b".into(), 1.0, None),
                ("a".into(), 1.0, None),
                ("c".into(), 2.0, None),
            ],
            2,
        );
        let ids: Vec<_> = ranked.iter().map(|r| (r.doc_id.as_str(), r.rank)).collect();
        assert_eq!(ids, [("c", 1), ("a", 2)]);
    }
}
