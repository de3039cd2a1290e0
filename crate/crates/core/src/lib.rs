//! Arabic query enrichment.
//!
//! A query is tokenized and normalized ([`normalize`]), reduced to base
//! forms by a clitic/affix segmenter checked against a dictionary
//! ([`morph`]), enriched with synonyms, hypernyms and hyponyms from a synset
//! graph ([`awn`], [`expand`]), assembled into a grouped query that the user
//! can prune ([`query`]) and sent to a search backend ([`search`]).
//! [`eval`] compares retrieval with and without enrichment.

pub mod awn;
pub mod eval;
pub mod expand;
pub mod kv;
pub mod morph;
pub mod normalize;
pub mod pipeline;
pub mod query;
pub mod search;

pub use awn::LexicalDb;
pub use expand::{ExpansionCandidate, ExpansionConfig, ExpansionGroup, Relation};
pub use morph::{LinguisticDb, MorphAnalysis, TokenAnalysis};
pub use normalize::{NormalizeConfig, Token};
pub use pipeline::Pipeline;
pub use query::{ExpandedQuery, Selection, WeightedTerm};
pub use search::{Document, LocalIndex, SearchResult};
