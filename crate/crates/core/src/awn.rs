//! Synset graph in the style of Arabic WordNet.
//!
//! Synsets are nodes holding synonymous lemmas; hypernym and hyponym arcs
//! link them. Lookups are keyed on normalized (unvocalized) forms while the
//! stored lemmas keep whatever vocalization the source file had.
//!
//! # File format
//!
//! UTF-8, tab-separated, one record per line, `#` starts a comment line:
//!
//! ```text
//! S <id> <pos> <lemma1;lemma2;...> [gloss] [root1;root2;...]
//! R <source id> hypernym|hyponym <target id>
//! ```
//!
//! The optional root column lists extra lookup keys for the synset, so a
//! query for a root form reaches every concept derived from it. Relation
//! records may reference synsets defined later in the file. Missing inverse
//! arcs are added by the loader.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morph::PartOfSpeech;
use crate::normalize::NormalizeConfig;

#[derive(Debug, Error)]
pub enum AwnError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate synset id `{id}`")]
    DuplicateId { id: String, line: usize },
    #[error("line {line}: relation from `{source_id}` to unknown synset `{target_id}`")]
    DanglingArc {
        source_id: String,
        target_id: String,
        line: usize,
    },
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcType {
    Hypernym,
    Hyponym,
}

impl ArcType {
    pub fn inverse(self) -> Self {
        match self {
            ArcType::Hypernym => ArcType::Hyponym,
            ArcType::Hyponym => ArcType::Hypernym,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArcType::Hypernym => "hypernym",
            ArcType::Hyponym => "hyponym",
        }
    }
}

impl fmt::Display for ArcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArcType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hypernym" => Ok(ArcType::Hypernym),
            "hyponym" => Ok(ArcType::Hyponym),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub id: String,
    pub pos: PartOfSpeech,
    /// Member lemmas as written in the source, in file order.
    pub lemmas: Vec<String>,
    /// `lemmas` normalized, index-aligned.
    pub keys: Vec<String>,
    pub gloss: Option<String>,
    /// Extra normalized lookup keys (roots).
    pub roots: Vec<String>,
    pub relations: Vec<(ArcType, String)>,
}

/// One row of a concept list: a synset and its member lemmas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub synset_id: String,
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalCounts {
    pub synsets: usize,
    /// Distinct normalized lemmas.
    pub words: usize,
}

#[derive(Debug, Clone, Default)]
pub struct LexicalDb {
    normalizer: NormalizeConfig,
    synsets: Vec<Synset>,
    positions: HashMap<String, usize>,
    index: HashMap<String, Vec<usize>>,
    root_index: HashMap<String, Vec<usize>>,
}

impl LexicalDb {
    pub fn load(path: &Path, normalizer: NormalizeConfig) -> Result<Self, AwnError> {
        let text = std::fs::read_to_string(path).map_err(|source| AwnError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, normalizer)
    }

    pub fn parse(text: &str, normalizer: NormalizeConfig) -> Result<Self, AwnError> {
        let mut db = LexicalDb {
            normalizer,
            ..LexicalDb::default()
        };
        // (line, source, arc, target)
        let mut arcs: Vec<(usize, String, ArcType, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            let malformed = |message: String| AwnError::Malformed { line, message };
            match fields[0] {
                "S" => {
                    if !(4..=6).contains(&fields.len()) {
                        return Err(malformed(format!(
                            "synset record needs 4 to 6 fields, got {}",
                            fields.len()
                        )));
                    }
                    let synset = db.parse_synset(&fields).map_err(malformed)?;
                    if db.positions.contains_key(&synset.id) {
                        return Err(AwnError::DuplicateId {
                            id: synset.id,
                            line,
                        });
                    }
                    db.positions.insert(synset.id.clone(), db.synsets.len());
                    db.synsets.push(synset);
                }
                "R" => {
                    if fields.len() != 4 {
                        return Err(malformed(format!(
                            "relation record needs 4 fields, got {}",
                            fields.len()
                        )));
                    }
                    let arc = fields[2].parse::<ArcType>().map_err(malformed)?;
                    arcs.push((line, fields[1].to_string(), arc, fields[3].to_string()));
                }
                other => return Err(malformed(format!("unknown record kind `{other}`"))),
            }
        }

        for (line, source, arc, target) in &arcs {
            for (from, to) in [(source, target), (target, source)] {
                if !db.positions.contains_key(from.as_str()) {
                    return Err(AwnError::DanglingArc {
                        source_id: to.clone(),
                        target_id: from.clone(),
                        line: *line,
                    });
                }
            }
            db.add_arc(source, *arc, target);
        }
        for (_, source, arc, target) in &arcs {
            db.add_arc(target, arc.inverse(), source);
        }

        for (pos, synset) in db.synsets.iter().enumerate() {
            for key in &synset.keys {
                db.index.entry(key.clone()).or_default().push(pos);
            }
            for root in &synset.roots {
                db.root_index.entry(root.clone()).or_default().push(pos);
            }
        }
        Ok(db)
    }

    fn parse_synset(&self, fields: &[&str]) -> Result<Synset, String> {
        let id = fields[1];
        if id.is_empty() {
            return Err("empty synset id".to_string());
        }
        let pos = fields[2].parse::<PartOfSpeech>()?;
        if pos == PartOfSpeech::Particle {
            return Err("synsets are nouns, verbs, adjectives or adverbs".to_string());
        }
        let lemmas: Vec<String> = fields[3]
            .split(';')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        if lemmas.is_empty() {
            return Err(format!("synset `{id}` has no lemmas"));
        }
        let mut keys = Vec::with_capacity(lemmas.len());
        for lemma in &lemmas {
            let key = self.normalizer.normalize(lemma);
            if key.is_empty() {
                return Err(format!("lemma `{lemma}` normalizes to nothing"));
            }
            if keys.contains(&key) {
                return Err(format!("duplicate lemma `{lemma}` in synset `{id}`"));
            }
            keys.push(key);
        }
        let gloss = fields
            .get(4)
            .filter(|g| !g.is_empty())
            .map(|g| g.to_string());
        let mut roots: Vec<String> = Vec::new();
        for root in fields.get(5).into_iter().flat_map(|r| r.split(';')) {
            let root = self.normalizer.normalize(root.trim());
            if !root.is_empty() && !roots.contains(&root) {
                roots.push(root);
            }
        }
        Ok(Synset {
            id: id.to_string(),
            pos,
            lemmas,
            keys,
            gloss,
            roots,
            relations: Vec::new(),
        })
    }

    fn add_arc(&mut self, source: &str, arc: ArcType, target: &str) {
        let pos = self.positions[source];
        let relations = &mut self.synsets[pos].relations;
        if !relations.iter().any(|(a, t)| *a == arc && t == target) {
            relations.push((arc, target.to_string()));
        }
    }

    pub fn normalizer(&self) -> &NormalizeConfig {
        &self.normalizer
    }

    pub fn counts(&self) -> LexicalCounts {
        LexicalCounts {
            synsets: self.synsets.len(),
            words: self.index.len(),
        }
    }

    /// All synsets in file order.
    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.positions.get(id).map(|&p| &self.synsets[p])
    }

    /// Synsets whose lemmas or roots match `lemma` after normalization, in
    /// file order, optionally restricted to one part of speech.
    pub fn synsets_of(&self, lemma: &str, pos: Option<PartOfSpeech>) -> Vec<&Synset> {
        let key = self.normalizer.normalize(lemma);
        let mut positions: Vec<usize> = self
            .index
            .get(&key)
            .into_iter()
            .chain(self.root_index.get(&key))
            .flatten()
            .copied()
            .collect();
        positions.sort_unstable();
        positions.dedup();
        positions
            .into_iter()
            .map(|p| &self.synsets[p])
            .filter(|s| pos.is_none_or(|wanted| s.pos == wanted))
            .collect()
    }

    /// Synset ids listing `lemma` as a member (roots excluded).
    pub fn member_of(&self, lemma: &str) -> Vec<&str> {
        let key = self.normalizer.normalize(lemma);
        self.index
            .get(&key)
            .into_iter()
            .flatten()
            .map(|&p| self.synsets[p].id.as_str())
            .collect()
    }

    /// Targets of `id`'s arcs of type `arc`, in arc order.
    pub fn related(&self, id: &str, arc: ArcType) -> Result<Vec<&Synset>, AwnError> {
        let synset = self
            .synset(id)
            .ok_or_else(|| AwnError::UnknownSynset(id.to_string()))?;
        Ok(synset
            .relations
            .iter()
            .filter(|(a, _)| *a == arc)
            .filter_map(|(_, target)| self.synset(target))
            .collect())
    }

    /// One row per synset of `lemma`: its id and full member list.
    pub fn concept_list(&self, lemma: &str) -> Vec<Concept> {
        self.synsets_of(lemma, None)
            .into_iter()
            .map(|s| Concept {
                synset_id: s.id.clone(),
                lemmas: s.lemmas.clone(),
            })
            .collect()
    }

    /// Checks that the lemma index is exactly the inverse of synset
    /// membership and that every arc has its inverse.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut expected: HashSet<(&str, usize)> = HashSet::new();
        for (pos, synset) in self.synsets.iter().enumerate() {
            for key in &synset.keys {
                expected.insert((key.as_str(), pos));
            }
            for (arc, target) in &synset.relations {
                let other = self
                    .synset(target)
                    .ok_or_else(|| format!("dangling arc {} -> {target}", synset.id))?;
                if !other
                    .relations
                    .iter()
                    .any(|(a, t)| *a == arc.inverse() && *t == synset.id)
                {
                    return Err(format!("arc {} {arc} {target} has no inverse", synset.id));
                }
            }
        }
        let actual: HashSet<(&str, usize)> = self
            .index
            .iter()
            .flat_map(|(k, ps)| ps.iter().map(move |&p| (k.as_str(), p)))
            .collect();
        if actual != expected {
            return Err("lemma index differs from synset membership".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHOOL: &str = "# toy\n\
        S\tmadrasa\tnoun\tمَدْرَسَةٌ\tplace of study\n\
        S\tbinaya\tnoun\tبِنَايَةٌ;مَبْنًى\n\
        S\tfaras\tnoun\tفرس;خيل\n\
        R\tmadrasa\thypernym\tbinaya\n";

    fn parse(text: &str) -> Result<LexicalDb, AwnError> {
        LexicalDb::parse(text, NormalizeConfig::default())
    }

    #[test]
    fn related_follows_arcs_and_inverses() {
        let db = parse(SCHOOL).unwrap();
        let up = db.related("madrasa", ArcType::Hypernym).unwrap();
        assert_eq!(up.len(), 1);
        assert_eq!(up[0].id, "binaya");
        let down = db.related("binaya", ArcType::Hyponym).unwrap();
        assert_eq!(down[0].id, "madrasa");
        assert!(db.related("faras", ArcType::Hypernym).unwrap().is_empty());
        assert!(matches!(
            db.related("nope", ArcType::Hyponym),
            Err(AwnError::UnknownSynset(_))
        ));
        db.check_invariants().unwrap();
    }

    #[test]
    fn lookup_is_unvocalized() {
        let db = parse(SCHOOL).unwrap();
        assert_eq!(db.synsets_of("مدرسة", None).len(), 1);
        assert_eq!(db.synsets_of("مَبْنى", None)[0].id, "binaya");
        assert_eq!(
            db.synsets_of("مدرسة", None)[0].gloss.as_deref(),
            Some("place of study")
        );
        assert!(db.synsets_of("مدرسة", Some(PartOfSpeech::Verb)).is_empty());
        assert!(db.synsets_of("كتاب", None).is_empty());
        assert_eq!(
            db.counts(),
            LexicalCounts {
                synsets: 3,
                words: 5
            }
        );
    }

    #[test]
    fn empty_file_is_empty_db() {
        let db = parse("").unwrap();
        assert_eq!(db.counts().synsets, 0);
        assert!(db.concept_list("درس").is_empty());
    }

    #[test]
    fn dangling_arc_is_rejected() {
        let err = parse("S\ta\tnoun\tفرس\nR\ta\thyponym\tb\n").unwrap_err();
        match err {
            AwnError::DanglingArc {
                target_id, line, ..
            } => {
                assert_eq!(target_id, "b");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_and_lemma_are_rejected() {
        assert!(matches!(
            parse("S\ta\tnoun\tفرس\nS\ta\tnoun\tخيل\n"),
            Err(AwnError::DuplicateId { line: 2, .. })
        ));
        assert!(matches!(
            parse("S\ta\tnoun\tتَعْلِيمٌ;تعليم\n"),
            Err(AwnError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse("S\ta\tparticle\tفي\n"),
            Err(AwnError::Malformed { .. })
        ));
        assert!(matches!(parse("X\ta\n"), Err(AwnError::Malformed { .. })));
    }

    #[test]
    fn roots_are_lookup_keys_but_not_members() {
        let db = parse("S\ta\tnoun\tمدرسة\t\tدرس\nS\tb\tverb\tدرس\n").unwrap();
        let ids: Vec<_> = db
            .synsets_of("درس", None)
            .iter()
            .map(|s| s.id.as_str())
            .collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(db.member_of("درس"), ["b"]);
        assert_eq!(db.counts().words, 2);
        db.check_invariants().unwrap();
    }

    #[test]
    fn inverse_arcs_are_not_duplicated() {
        let db = parse(
            "S\ta\tnoun\tحيوان\nS\tb\tnoun\tفرس\n\
             R\tb\thypernym\ta\nR\ta\thyponym\tb\n",
        )
        .unwrap();
        assert_eq!(db.synset("a").unwrap().relations.len(), 1);
        assert_eq!(db.synset("b").unwrap().relations.len(), 1);
    }
}
