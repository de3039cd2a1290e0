//! The analyze → expand → select → serialize sequence shared by the CLI,
//! the HTTP service and the evaluation harness.

use std::sync::Arc;

use thiserror::Error;

use crate::awn::LexicalDb;
use crate::expand::{self, ExpansionConfig, ExpansionGroup};
use crate::morph::{LinguisticDb, TokenAnalysis};
use crate::query::{self, ExpandedQuery, QueryError, Selection};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("expansion requested but no lexical database is loaded")]
    NoLexicalDb,
    #[error(transparent)]
    Config(#[from] expand::ConfigError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Analyses and proposed candidates for one query text.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub analyses: Vec<TokenAnalysis>,
    pub groups: Vec<ExpansionGroup>,
    pub config: ExpansionConfig,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    morph: Arc<LinguisticDb>,
    awn: Option<Arc<LexicalDb>>,
    config: ExpansionConfig,
}

impl Pipeline {
    pub fn new(
        morph: Arc<LinguisticDb>,
        awn: Option<Arc<LexicalDb>>,
        config: ExpansionConfig,
    ) -> Self {
        Self { morph, awn, config }
    }

    pub fn morph(&self) -> &Arc<LinguisticDb> {
        &self.morph
    }

    pub fn awn(&self) -> Option<&Arc<LexicalDb>> {
        self.awn.as_ref()
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.config
    }

    pub fn analyze(&self, text: &str) -> Vec<TokenAnalysis> {
        self.morph.analyze_query(text)
    }

    /// Analyzes and expands `text` with `config`, or the default
    /// configuration when `None`.
    pub fn prepare(
        &self,
        text: &str,
        config: Option<&ExpansionConfig>,
    ) -> Result<Prepared, PipelineError> {
        let config = config.unwrap_or(&self.config).clone();
        config.validate()?;
        let analyses = self.analyze(text);
        let groups = if config.relations.is_empty() {
            expand::no_expansion(&analyses)
        } else {
            let awn = self.awn.as_ref().ok_or(PipelineError::NoLexicalDb)?;
            expand::expand(awn, &analyses, &config)
        };
        Ok(Prepared {
            analyses,
            groups,
            config,
        })
    }

    pub fn build(
        &self,
        prepared: &Prepared,
        selections: &[Selection],
    ) -> Result<ExpandedQuery, PipelineError> {
        Ok(query::build(
            &prepared.analyses,
            &prepared.groups,
            selections,
            &prepared.config,
        )?)
    }

    /// The unexpanded query. Never touches the lexical database.
    pub fn baseline(&self, text: &str) -> ExpandedQuery {
        let analyses = self.analyze(text);
        let groups = expand::no_expansion(&analyses);
        query::build(&analyses, &groups, &[], &ExpansionConfig::disabled())
            .expect("groups derived from the same analyses")
    }

    pub fn expanded(
        &self,
        text: &str,
        config: Option<&ExpansionConfig>,
        selections: &[Selection],
    ) -> Result<ExpandedQuery, PipelineError> {
        let prepared = self.prepare(text, config)?;
        self.build(&prepared, selections)
    }
}

/// Selections that turn off every candidate.
pub fn deselect_all(groups: &[ExpansionGroup]) -> Vec<Selection> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            g.candidates.iter().map(move |c| Selection {
                group: i,
                term: c.term.clone(),
                selected: false,
            })
        })
        .collect()
}
