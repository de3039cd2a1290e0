//! JSON shapes shared by `--json` CLI output and the HTTP API.

use std::collections::BTreeMap;

use qamar_core::morph::PartOfSpeech;
use qamar_core::{
    ExpandedQuery, ExpansionCandidate, ExpansionConfig, ExpansionGroup, LinguisticDb, SearchResult,
    Token, TokenAnalysis, WeightedTerm,
};
use serde::Serialize;

use crate::app::BackendKind;

#[derive(Debug, Clone, Serialize)]
pub struct SegmentView {
    pub proclitic: String,
    pub prefix: String,
    pub stem: String,
    pub suffix: String,
    pub enclitic: String,
    pub lemma: String,
    pub root: String,
    pub pos: PartOfSpeech,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TokenView {
    pub surface: String,
    pub normalized: String,
    pub position: usize,
    pub index_term: Option<String>,
    pub analyses: Vec<SegmentView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeView {
    pub tokens: Vec<TokenView>,
}

pub fn analyses(db: &LinguisticDb, analyses: &[TokenAnalysis]) -> Vec<TokenView> {
    analyses
        .iter()
        .map(|a| TokenView {
            surface: a.token.surface.clone(),
            normalized: a.token.normalized.clone(),
            position: a.token.position,
            index_term: db.index_term(&a.token),
            analyses: a
                .analyses
                .iter()
                .map(|m| SegmentView {
                    proclitic: m.proclitic.clone(),
                    prefix: m.prefix.clone(),
                    stem: m.stem.clone(),
                    suffix: m.suffix.clone(),
                    enclitic: m.enclitic.clone(),
                    lemma: m.entry.lemma.clone(),
                    root: m.entry.root.clone(),
                    pos: m.entry.pos,
                    features: m.entry.features.iter().cloned().collect(),
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupView {
    pub index: usize,
    pub source: Token,
    pub candidates: Vec<ExpansionCandidate>,
}

pub fn groups(groups: &[ExpansionGroup]) -> Vec<GroupView> {
    groups
        .iter()
        .enumerate()
        .map(|(index, g)| GroupView {
            index,
            source: g.source.clone(),
            candidates: g.candidates.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryView {
    pub boolean: String,
    pub flat: String,
    pub weighted: Vec<WeightedTerm>,
}

impl From<&ExpandedQuery> for QueryView {
    fn from(query: &ExpandedQuery) -> Self {
        Self {
            boolean: query.serialize_boolean(),
            flat: query.serialize_flat(),
            weighted: query.serialize_weighted(),
        }
    }
}

pub fn config(config: &ExpansionConfig) -> BTreeMap<String, String> {
    config
        .to_kv()
        .lines()
        .filter_map(|line| line.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchView {
    pub query: String,
    pub backend: BackendKind,
    pub k: usize,
    pub results: Vec<SearchResult>,
}
