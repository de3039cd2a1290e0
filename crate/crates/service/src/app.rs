//! Database loading and backend setup shared by the CLI and the server.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use qamar_core::search::{self, LocalIndex, SearchResult, WebBackend, WebConfig, WebError};
use qamar_core::{
    ExpandedQuery, ExpansionConfig, LexicalDb, LinguisticDb, NormalizeConfig, Pipeline,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone)]
pub struct Settings {
    pub lexdb: PathBuf,
    pub awn: PathBuf,
    pub config: Option<PathBuf>,
    pub norm_config: Option<PathBuf>,
    /// `key=value` overrides applied on top of `config`.
    pub overrides: Vec<(String, String)>,
}

impl Settings {
    pub fn normalizer(&self) -> Result<NormalizeConfig> {
        match &self.norm_config {
            Some(path) => Ok(NormalizeConfig::from_file(path)?),
            None => Ok(NormalizeConfig::default()),
        }
    }

    pub fn expansion_config(&self) -> Result<ExpansionConfig> {
        let mut config = match &self.config {
            Some(path) => ExpansionConfig::from_file(path)?,
            None => ExpansionConfig::default(),
        };
        for (key, value) in &self.overrides {
            config
                .set(key, value)
                .map_err(|message| anyhow::anyhow!("--set {key}={value}: {message}"))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load_lexdb(&self) -> Result<Arc<LinguisticDb>> {
        let db = LinguisticDb::load(&self.lexdb, self.normalizer()?)
            .with_context(|| format!("loading linguistic database {}", self.lexdb.display()))?;
        Ok(Arc::new(db))
    }

    pub fn load_awn(&self) -> Result<Arc<LexicalDb>> {
        let db = LexicalDb::load(&self.awn, self.normalizer()?)
            .with_context(|| format!("loading lexical database {}", self.awn.display()))?;
        Ok(Arc::new(db))
    }

    /// A pipeline over the linguistic database; the lexical database is
    /// only read when `with_awn` is set.
    pub fn pipeline(&self, with_awn: bool) -> Result<Pipeline> {
        let awn = if with_awn {
            Some(self.load_awn()?)
        } else {
            None
        };
        Ok(Pipeline::new(
            self.load_lexdb()?,
            awn,
            self.expansion_config()?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Local,
    Web,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Local => "local",
            BackendKind::Web => "web",
        }
    }
}

/// Builds the local index from `corpus`, or loads the snapshot at
/// `index_path` when no corpus is given.
pub fn open_index(
    analyzer: Arc<LinguisticDb>,
    corpus: Option<&Path>,
    index_path: Option<&Path>,
) -> Result<LocalIndex> {
    match (corpus, index_path) {
        (Some(corpus), _) => {
            let docs = search::load_corpus(corpus)?;
            Ok(LocalIndex::from_documents(analyzer, &docs)?)
        }
        (None, Some(path)) => Ok(LocalIndex::load(path, analyzer)?),
        (None, None) => bail!("the local backend needs --corpus or --index-path"),
    }
}

/// Must be called outside any async runtime.
pub fn open_web(config: &Path) -> Result<WebBackend> {
    let config = WebConfig::from_file(config)?;
    Ok(WebBackend::new(config)?)
}

#[derive(Debug, Clone)]
pub enum Backend {
    Local(Arc<LocalIndex>),
    Web(Arc<WebBackend>),
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Local(_) => BackendKind::Local,
            Backend::Web(_) => BackendKind::Web,
        }
    }

    /// The local index scores the weighted form; the web engine receives
    /// the boolean form.
    pub fn search(
        &self,
        query: &ExpandedQuery,
        k: usize,
    ) -> Result<Vec<SearchResult>, SearchFailure> {
        match self {
            Backend::Local(index) => index
                .search(&query.serialize_weighted(), k)
                .map_err(|e| SearchFailure::Invalid(e.to_string())),
            Backend::Web(web) => {
                if k == 0 {
                    return Err(SearchFailure::Invalid(
                        "result cap k must be at least 1".into(),
                    ));
                }
                web.search(&query.serialize_boolean(), k)
                    .map_err(SearchFailure::Web)
            }
        }
    }
}

#[derive(Debug)]
pub enum SearchFailure {
    Invalid(String),
    Web(WebError),
}

impl std::fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchFailure::Invalid(message) => f.write_str(message),
            SearchFailure::Web(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for SearchFailure {}
