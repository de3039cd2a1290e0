//! The enriched query and its serializations.
//!
//! Each query token forms a group with the candidates the user kept for it.
//! The boolean form ORs a group together and ANDs groups implicitly:
//!
//! ```text
//! (فرس OR خيل) (مدرسة OR بناية OR "مدرسة ابتدائية")
//! ```
//!
//! A group without candidates is written bare. Weights only appear in the
//! weighted form used by the local index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expand::{ExpansionCandidate, ExpansionConfig, ExpansionGroup, ORIGINAL_TERM_WEIGHT};
use crate::morph::TokenAnalysis;
use crate::normalize::{normalize_text, Token};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("no candidate `{term}` in group {group}")]
    UnknownCandidate { group: usize, term: String },
    #[error("expansion has {expansion} groups but the analysis has {analysis} tokens")]
    Mismatch { analysis: usize, expansion: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("boolean query, byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// A user decision about one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub group: usize,
    pub term: String,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGroup {
    pub original: Token,
    /// Selected candidates only.
    pub candidates: Vec<ExpansionCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedQuery {
    pub groups: Vec<QueryGroup>,
    pub config_snapshot: ExpansionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: f64,
    pub group: usize,
}

fn matches_candidate(selection: &Selection, candidate: &ExpansionCandidate) -> bool {
    selection.term == candidate.term
        || selection.term == candidate.display
        || normalize_text(&selection.term) == candidate.term
}

/// Applies `selections` to the expansion groups in place.
pub fn apply_selections(
    groups: &mut [ExpansionGroup],
    selections: &[Selection],
) -> Result<(), QueryError> {
    for selection in selections {
        let unknown = || QueryError::UnknownCandidate {
            group: selection.group,
            term: selection.term.clone(),
        };
        let group = groups.get_mut(selection.group).ok_or_else(unknown)?;
        let candidate = group
            .candidates
            .iter_mut()
            .find(|c| matches_candidate(selection, c))
            .ok_or_else(unknown)?;
        candidate.selected = selection.selected;
    }
    Ok(())
}

/// Assembles the query from the analysis, the expansion of that analysis
/// and optional selection overrides; deselected candidates are dropped.
pub fn build(
    analyses: &[TokenAnalysis],
    expansion: &[ExpansionGroup],
    selections: &[Selection],
    config: &ExpansionConfig,
) -> Result<ExpandedQuery, QueryError> {
    if analyses.len() != expansion.len()
        || analyses
            .iter()
            .zip(expansion)
            .any(|(a, e)| a.token != e.source)
    {
        return Err(QueryError::Mismatch {
            analysis: analyses.len(),
            expansion: expansion.len(),
        });
    }
    let mut groups = expansion.to_vec();
    apply_selections(&mut groups, selections)?;
    Ok(ExpandedQuery {
        groups: groups
            .into_iter()
            .map(|g| QueryGroup {
                original: g.source,
                candidates: g.candidates.into_iter().filter(|c| c.selected).collect(),
            })
            .collect(),
        config_snapshot: config.clone(),
    })
}

fn quoted(candidate: &ExpansionCandidate) -> String {
    if candidate.is_multiword() {
        format!("\"{}\"", candidate.term)
    } else {
        candidate.term.clone()
    }
}

impl ExpandedQuery {
    /// `(original OR c1 OR ...)` per group, groups separated by spaces.
    pub fn serialize_boolean(&self) -> String {
        self.groups
            .iter()
            .map(|group| {
                if group.candidates.is_empty() {
                    group.original.surface.clone()
                } else {
                    let mut parts = vec![group.original.surface.clone()];
                    parts.extend(group.candidates.iter().map(quoted));
                    format!("({})", parts.join(" OR "))
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Original terms followed by every candidate, space separated.
    pub fn serialize_flat(&self) -> String {
        let originals = self.groups.iter().map(|g| g.original.surface.clone());
        let candidates = self
            .groups
            .iter()
            .flat_map(|g| g.candidates.iter().map(quoted));
        originals.chain(candidates).collect::<Vec<_>>().join(" ")
    }

    /// Originals at weight 1.0 followed by their candidates at the relation
    /// weight, tagged with the group index.
    pub fn serialize_weighted(&self) -> Vec<WeightedTerm> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(idx, group)| {
                std::iter::once(WeightedTerm {
                    term: group.original.normalized.clone(),
                    weight: ORIGINAL_TERM_WEIGHT,
                    group: idx,
                })
                .chain(group.candidates.iter().map(move |c| WeightedTerm {
                    term: c.term.clone(),
                    weight: c.weight,
                    group: idx,
                }))
            })
            .collect()
    }

    pub fn candidate_count(&self) -> usize {
        self.groups.iter().map(|g| g.candidates.len()).sum()
    }
}

#[derive(Debug, PartialEq)]
enum Lexeme {
    Open,
    Close,
    Or,
    Term(String),
}

fn lex(input: &str) -> Result<Vec<(usize, Lexeme)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(offset, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch == '(' {
            chars.next();
            out.push((offset, Lexeme::Open));
        } else if ch == ')' {
            chars.next();
            out.push((offset, Lexeme::Close));
        } else if ch == '"' {
            chars.next();
            let mut phrase = String::new();
            loop {
                match chars.next() {
                    Some((_, '"')) => break,
                    Some((_, c)) => phrase.push(c),
                    None => {
                        return Err(ParseError {
                            offset,
                            message: "unterminated phrase".to_string(),
                        })
                    }
                }
            }
            out.push((offset, Lexeme::Term(phrase)));
        } else {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                    break;
                }
                word.push(c);
                chars.next();
            }
            let lexeme = if word == "OR" {
                Lexeme::Or
            } else {
                Lexeme::Term(word)
            };
            out.push((offset, lexeme));
        }
    }
    Ok(out)
}

/// Recovers the group structure from [`ExpandedQuery::serialize_boolean`]
/// output: one list per group, original term first.
pub fn parse_boolean(input: &str) -> Result<Vec<Vec<String>>, ParseError> {
    let lexemes = lex(input)?;
    let mut groups = Vec::new();
    let mut iter = lexemes.into_iter().peekable();
    let err = |offset: usize, message: &str| ParseError {
        offset,
        message: message.to_string(),
    };
    while let Some((offset, lexeme)) = iter.next() {
        match lexeme {
            Lexeme::Term(term) => groups.push(vec![term]),
            Lexeme::Open => {
                let mut group = Vec::new();
                loop {
                    match iter.next() {
                        Some((_, Lexeme::Term(term))) => group.push(term),
                        Some((at, _)) => return Err(err(at, "expected a term")),
                        None => return Err(err(offset, "unclosed group")),
                    }
                    match iter.next() {
                        Some((_, Lexeme::Or)) => continue,
                        Some((_, Lexeme::Close)) => break,
                        Some((at, _)) => return Err(err(at, "expected OR or `)`")),
                        None => return Err(err(offset, "unclosed group")),
                    }
                }
                groups.push(group);
            }
            Lexeme::Close => return Err(err(offset, "unbalanced `)`")),
            Lexeme::Or => return Err(err(offset, "OR outside a group")),
        }
    }
    Ok(groups)
}
