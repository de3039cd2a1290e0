//! Query enrichment from the synset graph.
//!
//! For each analyzed query token, every candidate lemma is looked up and
//! three kinds of related terms are harvested from its first senses:
//! co-members of the synset (synonyms), lemmas of hypernym synsets
//! (generalization) and lemmas of hyponym synsets (specialization). Only
//! direct neighbours are considered.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::awn::{ArcType, LexicalDb, Synset};
use crate::kv::{self, KvError};
use crate::morph::TokenAnalysis;
use crate::normalize::Token;

/// Weight carried by the user's own terms.
pub const ORIGINAL_TERM_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Synonym,
    Hypernym,
    Hyponym,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Synonym, Relation::Hypernym, Relation::Hyponym];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Synonym => "synonym",
            Relation::Hypernym => "hypernym",
            Relation::Hyponym => "hyponym",
        }
    }

    fn arc(self) -> Option<ArcType> {
        match self {
            Relation::Synonym => None,
            Relation::Hypernym => Some(ArcType::Hypernym),
            Relation::Hyponym => Some(ArcType::Hyponym),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synonym" => Ok(Relation::Synonym),
            "hypernym" => Ok(Relation::Hypernym),
            "hyponym" => Ok(Relation::Hyponym),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("weight for {relation} must be in (0, 1], got {value}")]
    Weight { relation: Relation, value: f64 },
    #[error("original term weight is fixed at 1.0, got {0}")]
    OriginalWeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationWeights {
    pub synonym: f64,
    pub hypernym: f64,
    pub hyponym: f64,
}

impl RelationWeights {
    pub fn get(&self, relation: Relation) -> f64 {
        match relation {
            Relation::Synonym => self.synonym,
            Relation::Hypernym => self.hypernym,
            Relation::Hyponym => self.hyponym,
        }
    }

    pub fn set(&mut self, relation: Relation, weight: f64) {
        match relation {
            Relation::Synonym => self.synonym = weight,
            Relation::Hypernym => self.hypernym = weight,
            Relation::Hyponym => self.hyponym = weight,
        }
    }
}

/// Knobs of the enrichment step: how many senses, related concepts and
/// terms per concept are taken, and what weight each relation carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub relations: BTreeSet<Relation>,
    pub max_senses: usize,
    pub max_concepts_per_relation: usize,
    pub max_terms_per_concept: usize,
    pub weights: RelationWeights,
    pub include_multiword: bool,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            relations: Relation::ALL.into_iter().collect(),
            max_senses: 3,
            max_concepts_per_relation: 2,
            max_terms_per_concept: 3,
            weights: RelationWeights {
                synonym: 0.8,
                hypernym: 0.5,
                hyponym: 0.5,
            },
            include_multiword: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 9] = [
    "relations",
    "max_senses",
    "max_concepts_per_relation",
    "max_terms_per_concept",
    "weight.synonym",
    "weight.hypernym",
    "weight.hyponym",
    "include_multiword",
    "original_term_weight",
];

impl ExpansionConfig {
    /// A configuration with every relation turned off.
    pub fn disabled() -> Self {
        Self {
            relations: BTreeSet::new(),
            ..Self::default()
        }
    }

    pub fn original_term_weight(&self) -> f64 {
        ORIGINAL_TERM_WEIGHT
    }

    pub fn is_enabled(&self, relation: Relation) -> bool {
        self.relations.contains(&relation)
    }

    pub fn without(&self, relation: Relation) -> Self {
        let mut config = self.clone();
        config.relations.remove(&relation);
        config
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for relation in Relation::ALL {
            let value = self.weights.get(relation);
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::Weight { relation, value });
            }
        }
        Ok(())
    }

    /// Applies one `key=value` setting. Keys are listed in [`CONFIG_KEYS`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("`{key}` expects a non-negative integer, got `{v}`"))
        };
        let weight = |v: &str| {
            let w = v
                .parse::<f64>()
                .map_err(|_| format!("`{key}` expects a number, got `{v}`"))?;
            if w > 0.0 && w <= 1.0 {
                Ok(w)
            } else {
                Err(format!("`{key}` must be in (0, 1], got {w}"))
            }
        };
        match key {
            "relations" => {
                self.relations = value
                    .split(',')
                    .map(str::trim)
                    .filter(|r| !r.is_empty() && *r != "none")
                    .map(str::parse)
                    .collect::<Result<_, _>>()?;
            }
            "max_senses" => self.max_senses = count(value)?,
            "max_concepts_per_relation" => self.max_concepts_per_relation = count(value)?,
            "max_terms_per_concept" => self.max_terms_per_concept = count(value)?,
            "weight.synonym" => self.weights.synonym = weight(value)?,
            "weight.hypernym" => self.weights.hypernym = weight(value)?,
            "weight.hyponym" => self.weights.hyponym = weight(value)?,
            "include_multiword" => self.include_multiword = kv::parse_bool(value)?,
            "original_term_weight" => {
                let w = value
                    .parse::<f64>()
                    .map_err(|_| format!("`{key}` expects a number, got `{value}`"))?;
                if w != ORIGINAL_TERM_WEIGHT {
                    return Err(ConfigError::OriginalWeight(w).to_string());
                }
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, KvError> {
        let mut config = Self::default();
        for pair in kv::read_file(path)? {
            config
                .set(&pair.key, &pair.value)
                .map_err(|message| KvError::Invalid {
                    path: path.to_path_buf(),
                    line: pair.line,
                    message,
                })?;
        }
        Ok(config)
    }

    pub fn to_kv(&self) -> String {
        let relations: Vec<&str> = self.relations.iter().map(|r| r.as_str()).collect();
        format!(
            "relations={}\nmax_senses={}\nmax_concepts_per_relation={}\nmax_terms_per_concept={}\n\
             weight.synonym={}\nweight.hypernym={}\nweight.hyponym={}\ninclude_multiword={}\n\
             original_term_weight={}\n",
            if relations.is_empty() {
                "none".to_string()
            } else {
                relations.join(",")
            },
            self.max_senses,
            self.max_concepts_per_relation,
            self.max_terms_per_concept,
            self.weights.synonym,
            self.weights.hypernym,
            self.weights.hyponym,
            self.include_multiword,
            ORIGINAL_TERM_WEIGHT,
        )
    }
}

/// A proposed query term and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCandidate {
    /// Normalized form; what gets sent to the backend.
    pub term: String,
    /// The lemma as stored in the lexical database.
    pub display: String,
    pub source_lemma: String,
    pub relation: Relation,
    pub synset_id: String,
    pub weight: f64,
    pub selected: bool,
}

impl ExpansionCandidate {
    pub fn is_multiword(&self) -> bool {
        self.term.chars().any(char::is_whitespace)
    }
}

/// Candidates proposed for one query token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionGroup {
    pub source: Token,
    pub candidates: Vec<ExpansionCandidate>,
}

/// Raw candidates for one token in generation order: lemma order, then
/// sense order, then synonym < hypernym < hyponym, then file order. May
/// contain repeated terms.
pub fn harvest(
    awn: &LexicalDb,
    analysis: &TokenAnalysis,
    config: &ExpansionConfig,
) -> Vec<ExpansionCandidate> {
    let norm = awn.normalizer();
    let surface_key = norm.normalize(&analysis.token.normalized);
    let mut out = Vec::new();
    if config.relations.is_empty() {
        return out;
    }

    for lemma in analysis.lemmas() {
        let lemma_key = norm.normalize(&lemma);
        let mut push = |synset: &Synset,
                        lemmas: &mut dyn Iterator<Item = (&String, &String)>,
                        relation: Relation| {
            for (display, key) in lemmas {
                if *key == lemma_key || *key == surface_key {
                    continue;
                }
                if !config.include_multiword && key.chars().any(char::is_whitespace) {
                    continue;
                }
                out.push(ExpansionCandidate {
                    term: key.clone(),
                    display: display.clone(),
                    source_lemma: lemma.clone(),
                    relation,
                    synset_id: synset.id.clone(),
                    weight: config.weights.get(relation),
                    selected: true,
                });
            }
        };

        for sense in awn
            .synsets_of(&lemma, None)
            .into_iter()
            .take(config.max_senses)
        {
            for relation in Relation::ALL {
                if !config.is_enabled(relation) {
                    continue;
                }
                match relation.arc() {
                    None => push(sense, &mut sense.lemmas.iter().zip(&sense.keys), relation),
                    Some(arc) => {
                        let targets = awn
                            .related(&sense.id, arc)
                            .expect("sense ids come from the same database");
                        for target in targets.into_iter().take(config.max_concepts_per_relation) {
                            push(
                                target,
                                &mut target
                                    .lemmas
                                    .iter()
                                    .zip(&target.keys)
                                    .take(config.max_terms_per_concept),
                                relation,
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

/// Keeps one candidate per term: the one with the highest weight, earliest
/// on ties, at its own position. Idempotent.
pub fn dedupe_and_rank(candidates: Vec<ExpansionCandidate>) -> Vec<ExpansionCandidate> {
    let mut best: HashMap<&str, usize> = HashMap::new();
    for (i, c) in candidates.iter().enumerate() {
        best.entry(c.term.as_str())
            .and_modify(|j| {
                if c.weight > candidates[*j].weight {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let keep: BTreeSet<usize> = best.into_values().collect();
    candidates
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, c)| c)
        .collect()
}

/// One group per analyzed token, in query order.
pub fn expand(
    awn: &LexicalDb,
    analyses: &[TokenAnalysis],
    config: &ExpansionConfig,
) -> Vec<ExpansionGroup> {
    analyses
        .iter()
        .map(|analysis| ExpansionGroup {
            source: analysis.token.clone(),
            candidates: dedupe_and_rank(harvest(awn, analysis, config)),
        })
        .collect()
}

/// Empty candidate lists for every token; the unexpanded query.
pub fn no_expansion(analyses: &[TokenAnalysis]) -> Vec<ExpansionGroup> {
    analyses
        .iter()
        .map(|analysis| ExpansionGroup {
            source: analysis.token.clone(),
            candidates: Vec::new(),
        })
        .collect()
}
