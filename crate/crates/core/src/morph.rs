//! Morphological analysis of Arabic forms.
//!
//! A form is decomposed into five segments: proclitic, prefix, stem, suffix
//! and enclitic. Each affix slot is filled from its own table (or left
//! empty), and a decomposition is only kept when its stem is listed in the
//! lexicon of simple forms. Every valid decomposition is returned; no
//! compatibility constraints between slots are applied, so the lexicon
//! check is the only filter.
//!
//! Query analysis first drops stopwords, then segments each remaining form.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{NormalizeConfig, Token};

pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const PROCLITICS_FILE: &str = "proclitics.txt";
pub const PREFIXES_FILE: &str = "prefixes.txt";
pub const SUFFIXES_FILE: &str = "suffixes.txt";
pub const ENCLITICS_FILE: &str = "enclitics.txt";
pub const LEXICON_FILE: &str = "lexicon.tsv";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing database file {}", path.display())]
    Missing { path: PathBuf },
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

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeriveError {
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Particle,
}

impl PartOfSpeech {
    pub fn as_str(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
            PartOfSpeech::Adjective => "adjective",
            PartOfSpeech::Adverb => "adverb",
            PartOfSpeech::Particle => "particle",
        }
    }
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartOfSpeech {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noun" => Ok(PartOfSpeech::Noun),
            "verb" => Ok(PartOfSpeech::Verb),
            "adjective" => Ok(PartOfSpeech::Adjective),
            "adverb" => Ok(PartOfSpeech::Adverb),
            "particle" => Ok(PartOfSpeech::Particle),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

/// Linguistic information attached to a stem in the dictionary of simple forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub stem: String,
    /// Base form reported for the query.
    pub lemma: String,
    pub root: String,
    pub pos: PartOfSpeech,
    pub features: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AffixSlot {
    Proclitic,
    Prefix,
    Suffix,
    Enclitic,
}

impl AffixSlot {
    pub const ALL: [AffixSlot; 4] = [
        AffixSlot::Proclitic,
        AffixSlot::Prefix,
        AffixSlot::Suffix,
        AffixSlot::Enclitic,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            AffixSlot::Proclitic => PROCLITICS_FILE,
            AffixSlot::Prefix => PREFIXES_FILE,
            AffixSlot::Suffix => SUFFIXES_FILE,
            AffixSlot::Enclitic => ENCLITICS_FILE,
        }
    }
}

/// Insertion-ordered set of non-empty affixes. The empty affix is implicit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffixTable {
    items: Vec<String>,
}

impl AffixTable {
    fn insert(&mut self, affix: String) {
        if !affix.is_empty() && !self.items.contains(&affix) {
            self.items.push(affix);
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, affix: &str) -> bool {
        affix.is_empty() || self.items.iter().any(|a| a == affix)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(String::as_str)
    }

    /// The empty affix followed by every listed affix.
    fn with_empty(&self) -> impl Iterator<Item = &str> {
        std::iter::once("").chain(self.iter())
    }
}

/// One hypothesis for a surface form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MorphAnalysis {
    pub surface: String,
    pub proclitic: String,
    pub prefix: String,
    pub stem: String,
    pub suffix: String,
    pub enclitic: String,
    pub entry: LexiconEntry,
}

impl MorphAnalysis {
    /// The five segments joined back together.
    pub fn concatenated(&self) -> String {
        [
            self.proclitic.as_str(),
            &self.prefix,
            &self.stem,
            &self.suffix,
            &self.enclitic,
        ]
        .concat()
    }

    fn filled_slots(&self) -> usize {
        [&self.proclitic, &self.prefix, &self.suffix, &self.enclitic]
            .iter()
            .filter(|s| !s.is_empty())
            .count()
    }
}

/// A query token with every analysis found for it. An empty list means
/// the form is unknown to the lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAnalysis {
    pub token: Token,
    pub analyses: Vec<MorphAnalysis>,
}

impl TokenAnalysis {
    /// Distinct lemmas in analysis order. Unknown forms fall back to their
    /// normalized surface so that they still reach the search backend.
    pub fn lemmas(&self) -> Vec<String> {
        if self.analyses.is_empty() {
            return vec![self.token.normalized.clone()];
        }
        let mut seen = HashSet::new();
        self.analyses
            .iter()
            .filter(|a| seen.insert(a.entry.lemma.as_str()))
            .map(|a| a.entry.lemma.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DbCounts {
    pub stopwords: usize,
    pub proclitics: usize,
    pub prefixes: usize,
    pub suffixes: usize,
    pub enclitics: usize,
    pub lexicon_entries: usize,
    pub lexicon_stems: usize,
}

/// How [`LinguisticDb::derive_forms`] generates surface forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeriveMode {
    #[default]
    BareStem,
    /// Every prefix/suffix pair around each stem of the lemma.
    Affixed,
}

/// Stopword lexicon, clitic and affix tables, and the dictionary of simple
/// forms. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct LinguisticDb {
    normalizer: NormalizeConfig,
    stopwords: HashSet<String>,
    proclitics: AffixTable,
    prefixes: AffixTable,
    suffixes: AffixTable,
    enclitics: AffixTable,
    lexicon: HashMap<String, Vec<LexiconEntry>>,
    stems_by_lemma: HashMap<String, Vec<String>>,
    entry_count: usize,
}

impl LinguisticDb {
    pub fn builder(normalizer: NormalizeConfig) -> LinguisticDbBuilder {
        LinguisticDbBuilder {
            db: LinguisticDb {
                normalizer,
                ..LinguisticDb::default()
            },
        }
    }

    /// Loads the six table files from `dir`, normalizing every key with
    /// `normalizer`.
    pub fn load(dir: &Path, normalizer: NormalizeConfig) -> Result<Self, LoadError> {
        let mut builder = Self::builder(normalizer);

        for (_, form) in read_list(&dir.join(STOPWORDS_FILE))? {
            builder.stopword(&form);
        }
        for slot in AffixSlot::ALL {
            for (_, affix) in read_list(&dir.join(slot.file_name()))? {
                builder.affix(slot, &affix);
            }
        }

        let path = dir.join(LEXICON_FILE);
        for (line, text) in read_lines(&path)? {
            let entry = parse_lexicon_line(&text).map_err(|message| LoadError::Malformed {
                path: path.clone(),
                line,
                message,
            })?;
            builder
                .entry(entry)
                .map_err(|message| LoadError::Malformed {
                    path: path.clone(),
                    line,
                    message,
                })?;
        }
        Ok(builder.build())
    }

    pub fn normalizer(&self) -> &NormalizeConfig {
        &self.normalizer
    }

    pub fn counts(&self) -> DbCounts {
        DbCounts {
            stopwords: self.stopwords.len(),
            proclitics: self.proclitics.len(),
            prefixes: self.prefixes.len(),
            suffixes: self.suffixes.len(),
            enclitics: self.enclitics.len(),
            lexicon_entries: self.entry_count,
            lexicon_stems: self.lexicon.len(),
        }
    }

    pub fn table(&self, slot: AffixSlot) -> &AffixTable {
        match slot {
            AffixSlot::Proclitic => &self.proclitics,
            AffixSlot::Prefix => &self.prefixes,
            AffixSlot::Suffix => &self.suffixes,
            AffixSlot::Enclitic => &self.enclitics,
        }
    }

    pub fn entries(&self, stem: &str) -> &[LexiconEntry] {
        self.lexicon.get(stem).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn stems(&self) -> impl Iterator<Item = &str> {
        self.lexicon.keys().map(String::as_str)
    }

    pub fn is_stopword(&self, token: &Token) -> bool {
        !token.normalized.is_empty() && self.stopwords.contains(&token.normalized)
    }

    /// All decompositions of a normalized `form` whose stem is in the
    /// lexicon, one per matching lexicon entry.
    ///
    /// Ordered by descending stem length, then fewer filled affix slots,
    /// then (proclitic, prefix, suffix, enclitic) lexicographically; entries
    /// under one stem keep lexicon order.
    pub fn segment(&self, form: &str) -> Vec<MorphAnalysis> {
        let mut found = Vec::new();
        if form.is_empty() {
            return found;
        }
        for proclitic in self.proclitics.with_empty() {
            let Some(after_proclitic) = form.strip_prefix(proclitic) else {
                continue;
            };
            for prefix in self.prefixes.with_empty() {
                let Some(body) = after_proclitic.strip_prefix(prefix) else {
                    continue;
                };
                for enclitic in self.enclitics.with_empty() {
                    let Some(before_enclitic) = body.strip_suffix(enclitic) else {
                        continue;
                    };
                    for suffix in self.suffixes.with_empty() {
                        let Some(stem) = before_enclitic.strip_suffix(suffix) else {
                            continue;
                        };
                        if stem.is_empty() {
                            continue;
                        }
                        for entry in self.entries(stem) {
                            found.push(MorphAnalysis {
                                surface: form.to_string(),
                                proclitic: proclitic.to_string(),
                                prefix: prefix.to_string(),
                                stem: stem.to_string(),
                                suffix: suffix.to_string(),
                                enclitic: enclitic.to_string(),
                                entry: entry.clone(),
                            });
                        }
                    }
                }
            }
        }
        // Stable: entries of one decomposition stay in lexicon order.
        found.sort_by(|a, b| {
            b.stem
                .chars()
                .count()
                .cmp(&a.stem.chars().count())
                .then_with(|| a.filled_slots().cmp(&b.filled_slots()))
                .then_with(|| a.proclitic.cmp(&b.proclitic))
                .then_with(|| a.prefix.cmp(&b.prefix))
                .then_with(|| a.suffix.cmp(&b.suffix))
                .then_with(|| a.enclitic.cmp(&b.enclitic))
        });
        found
    }

    /// Analyzes one token, keeping the original surface on each analysis.
    pub fn analyze_token(&self, token: &Token) -> Vec<MorphAnalysis> {
        let mut analyses = self.segment(&token.normalized);
        for analysis in &mut analyses {
            analysis.surface = token.surface.clone();
        }
        analyses
    }

    /// Tokenizes `text`, drops stopwords and forms that normalize to
    /// nothing, and segments the rest.
    pub fn analyze_query(&self, text: &str) -> Vec<TokenAnalysis> {
        self.normalizer
            .tokenize(text)
            .into_iter()
            .filter(|token| !token.normalized.is_empty() && !self.is_stopword(token))
            .map(|token| TokenAnalysis {
                analyses: self.analyze_token(&token),
                token,
            })
            .collect()
    }

    /// The term a token is indexed and searched under: its lemma when every
    /// analysis agrees on one, otherwise the normalized surface. Stopwords
    /// and empty forms have no term.
    pub fn index_term(&self, token: &Token) -> Option<String> {
        if token.normalized.is_empty() || self.is_stopword(token) {
            return None;
        }
        let analyses = self.segment(&token.normalized);
        let mut lemmas = analyses.iter().map(|a| &a.entry.lemma);
        match lemmas.next() {
            Some(first) if lemmas.all(|l| l == first) => Some(first.clone()),
            _ => Some(token.normalized.clone()),
        }
    }

    /// Surface forms for a lemma. [`DeriveMode::BareStem`] returns its
    /// stems; [`DeriveMode::Affixed`] adds every prefix + stem + suffix.
    pub fn derive_forms(&self, lemma: &str, mode: DeriveMode) -> Result<Vec<String>, DeriveError> {
        let key = self.normalizer.normalize(lemma);
        let stems = self
            .stems_by_lemma
            .get(&key)
            .ok_or_else(|| DeriveError::UnknownLemma(lemma.to_string()))?;
        let mut forms: Vec<String> = Vec::new();
        let mut push = |form: String| {
            if !forms.contains(&form) {
                forms.push(form);
            }
        };
        for stem in stems {
            push(stem.clone());
        }
        if mode == DeriveMode::Affixed {
            for stem in stems {
                for prefix in self.prefixes.with_empty() {
                    for suffix in self.suffixes.with_empty() {
                        push(format!("{prefix}{stem}{suffix}"));
                    }
                }
            }
        }
        Ok(forms)
    }
}

/// Assembles a [`LinguisticDb`] in memory; used by the loader and by tests.
#[derive(Debug)]
pub struct LinguisticDbBuilder {
    db: LinguisticDb,
}

impl LinguisticDbBuilder {
    pub fn stopword(&mut self, form: &str) -> &mut Self {
        let form = self.db.normalizer.normalize(form.trim());
        if !form.is_empty() {
            self.db.stopwords.insert(form);
        }
        self
    }

    pub fn affix(&mut self, slot: AffixSlot, affix: &str) -> &mut Self {
        let affix = self.db.normalizer.normalize(affix.trim());
        let table = match slot {
            AffixSlot::Proclitic => &mut self.db.proclitics,
            AffixSlot::Prefix => &mut self.db.prefixes,
            AffixSlot::Suffix => &mut self.db.suffixes,
            AffixSlot::Enclitic => &mut self.db.enclitics,
        };
        table.insert(affix);
        self
    }

    pub fn affixes(&mut self, slot: AffixSlot, affixes: &[&str]) -> &mut Self {
        for affix in affixes {
            self.affix(slot, affix);
        }
        self
    }

    /// Adds an entry, normalizing stem, lemma and root.
    pub fn entry(&mut self, mut entry: LexiconEntry) -> Result<&mut Self, String> {
        let norm = &self.db.normalizer;
        entry.stem = norm.normalize(entry.stem.trim());
        entry.lemma = norm.normalize(entry.lemma.trim());
        entry.root = norm.normalize(entry.root.trim());
        if entry.stem.is_empty() {
            return Err("empty stem".to_string());
        }
        if entry.lemma.is_empty() {
            return Err("empty lemma".to_string());
        }
        if entry.root.is_empty() {
            return Err("empty root".to_string());
        }
        let stems = self
            .db
            .stems_by_lemma
            .entry(entry.lemma.clone())
            .or_default();
        if !stems.contains(&entry.stem) {
            stems.push(entry.stem.clone());
        }
        self.db
            .lexicon
            .entry(entry.stem.clone())
            .or_default()
            .push(entry);
        self.db.entry_count += 1;
        Ok(self)
    }

    /// Shorthand for tests and fixtures: a featureless entry.
    pub fn word(&mut self, stem: &str, lemma: &str, root: &str, pos: PartOfSpeech) -> &mut Self {
        self.entry(LexiconEntry {
            stem: stem.to_string(),
            lemma: lemma.to_string(),
            root: root.to_string(),
            pos,
            features: BTreeSet::new(),
        })
        .expect("non-empty fixture word")
    }

    pub fn build(&mut self) -> LinguisticDb {
        std::mem::take(&mut self.db)
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, LoadError> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(LoadError::Missing {
                path: path.to_path_buf(),
            })
        }
        Err(source) => {
            return Err(LoadError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, line)| {
            let trimmed = line.trim();
            !trimmed.is_empty() && !trimmed.starts_with('#')
        })
        .map(|(idx, line)| (idx + 1, line.to_string()))
        .collect())
}

fn read_list(path: &Path) -> Result<Vec<(usize, String)>, LoadError> {
    read_lines(path)?
        .into_iter()
        .map(|(line, text)| {
            let item = text.trim();
            if item.chars().any(char::is_whitespace) {
                Err(LoadError::Malformed {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected a single form, got `{item}`"),
                })
            } else {
                Ok((line, item.to_string()))
            }
        })
        .collect()
}

fn parse_lexicon_line(line: &str) -> Result<LexiconEntry, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(4..=5).contains(&fields.len()) {
        return Err(format!(
            "expected 4 or 5 tab-separated fields (stem, lemma, root, pos, features), got {}",
            fields.len()
        ));
    }
    let pos = fields[3].trim().parse::<PartOfSpeech>()?;
    let features = fields
        .get(4)
        .map(|f| {
            f.split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    Ok(LexiconEntry {
        stem: fields[0].to_string(),
        lemma: fields[1].to_string(),
        root: fields[2].to_string(),
        pos,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::tokenize;

    fn toy() -> LinguisticDb {
        let mut b = LinguisticDb::builder(NormalizeConfig::default());
        b.stopword("و")
            .affixes(AffixSlot::Proclitic, &["و", "ب", "ل"])
            .affixes(AffixSlot::Prefix, &["ال"])
            .affixes(AffixSlot::Suffix, &["ة", "ات", "تان"])
            .affixes(AffixSlot::Enclitic, &["ها"])
            .word("درس", "درس", "درس", PartOfSpeech::Verb)
            .word("مدرس", "مدرس", "درس", PartOfSpeech::Noun);
        b.build()
    }

    fn write_db(dir: &Path, lexicon: &str) {
        std::fs::write(dir.join(STOPWORDS_FILE), "و\nفي\nمن\n").unwrap();
        std::fs::write(dir.join(PROCLITICS_FILE), "و\nب\nل\nف\n").unwrap();
        std::fs::write(dir.join(PREFIXES_FILE), "ال\nي\n").unwrap();
        std::fs::write(dir.join(SUFFIXES_FILE), "ة\nات\nتان\n").unwrap();
        std::fs::write(dir.join(ENCLITICS_FILE), "# pronouns\nها\nه\n").unwrap();
        std::fs::write(dir.join(LEXICON_FILE), lexicon).unwrap();
    }

    const LEXICON: &str = "# stem\tlemma\troot\tpos\tfeatures\n\
        دَرَسَ\tدرس\tدرس\tverb\n\
        مدرس\tمدرس\tدرس\tnoun\tgender:masc\n\
        فرس\tفرس\tفرس\tnoun\tgender:fem;number:sg\n\
        خيل\tخيل\tخيل\tnoun\n\
        خيول\tخيل\tخيل\tnoun\tnumber:pl\n";

    #[test]
    fn load_reports_fixture_counts() {
        let dir = tempfile::tempdir().unwrap();
        write_db(dir.path(), LEXICON);
        let db = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap();
        let counts = db.counts();
        assert_eq!(counts.stopwords, 3);
        assert_eq!(counts.proclitics, 4);
        assert_eq!(counts.prefixes, 2);
        assert_eq!(counts.suffixes, 3);
        assert_eq!(counts.enclitics, 2);
        assert_eq!(counts.lexicon_entries, 5);
        // vocalized key was normalized
        assert_eq!(db.entries("درس").len(), 1);
        assert_eq!(
            db.entries("فرس")[0].features.iter().collect::<Vec<_>>(),
            ["gender:fem", "number:sg"]
        );
    }

    #[test]
    fn empty_lexicon_matches_nothing() {
        let dir = tempfile::tempdir().unwrap();
        write_db(dir.path(), "");
        let db = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap();
        assert_eq!(db.counts().lexicon_entries, 0);
        assert!(db.segment("درس").is_empty());
        assert!(db.analyze_query("والمدرسة درس")[0].analyses.is_empty());
    }

    #[test]
    fn duplicate_stems_are_kept() {
        let dir = tempfile::tempdir().unwrap();
        write_db(dir.path(), "درس\tدرس\tدرس\tverb\nدرس\tدرس\tدرس\tnoun\n");
        let db = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap();
        assert_eq!(db.counts().lexicon_entries, 2);
        assert_eq!(db.counts().lexicon_stems, 1);
        let analyses = db.segment("درس");
        assert_eq!(analyses.len(), 2);
        assert_eq!(analyses[0].entry.pos, PartOfSpeech::Verb);
        assert_eq!(analyses[1].entry.pos, PartOfSpeech::Noun);
    }

    #[test]
    fn missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write_db(dir.path(), LEXICON);
        std::fs::remove_file(dir.path().join(SUFFIXES_FILE)).unwrap();
        let err = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap_err();
        assert!(matches!(err, LoadError::Missing { .. }));
        assert!(err.to_string().contains("suffixes.txt"), "{err}");
    }

    #[test]
    fn malformed_lexicon_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        write_db(dir.path(), "درس\tدرس\tدرس\tverb\nفرس\tفرس\tفرس\tpronoun\n");
        let err = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap_err();
        match err {
            LoadError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        write_db(dir.path(), "درس\tدرس\n");
        let err = LinguisticDb::load(dir.path(), NormalizeConfig::default()).unwrap_err();
        assert!(matches!(err, LoadError::Malformed { line: 1, .. }));
    }

    #[test]
    fn stopword_lookup() {
        let db = toy();
        let tokens = tokenize("و درس \u{064E}");
        assert!(db.is_stopword(&tokens[0]));
        assert!(!db.is_stopword(&tokens[1]));
        assert!(!db.is_stopword(&tokens[2]));
    }

    #[test]
    fn segments_clitics_affixes_and_stem() {
        let db = toy();
        let analyses = db.segment("والمدرسة");
        let hit = analyses
            .iter()
            .find(|a| a.stem == "مدرس")
            .expect("مدرس analysis");
        assert_eq!(
            (
                hit.proclitic.as_str(),
                hit.prefix.as_str(),
                hit.suffix.as_str(),
                hit.enclitic.as_str()
            ),
            ("و", "ال", "ة", "")
        );
        assert_eq!(hit.entry.lemma, "مدرس");
        for a in &analyses {
            assert_eq!(a.concatenated(), "والمدرسة");
        }
    }

    #[test]
    fn bare_stem_and_unknown() {
        let db = toy();
        let analyses = db.segment("درس");
        assert_eq!(analyses.len(), 1);
        let a = &analyses[0];
        assert_eq!(
            [&a.proclitic, &a.prefix, &a.suffix, &a.enclitic],
            ["", "", "", ""]
        );
        assert_eq!(a.stem, "درس");
        assert!(db.segment("xyz").is_empty());
        assert!(db.segment("").is_empty());
    }

    #[test]
    fn segment_ordering() {
        let mut b = LinguisticDb::builder(NormalizeConfig::default());
        b.affixes(AffixSlot::Proclitic, &["ب"])
            .affixes(AffixSlot::Suffix, &["ا", "با"])
            .affixes(AffixSlot::Enclitic, &["ا"])
            .word("ب", "ب", "ب", PartOfSpeech::Particle)
            .word("با", "با", "ب", PartOfSpeech::Particle)
            .word("ببا", "ببا", "ب", PartOfSpeech::Noun);
        let db = b.build();
        let keys: Vec<_> = db
            .segment("ببا")
            .into_iter()
            .map(|a| (a.proclitic, a.stem, a.suffix, a.enclitic))
            .collect();
        let s = |x: &str| x.to_string();
        assert_eq!(
            keys,
            vec![
                (s(""), s("ببا"), s(""), s("")),
                (s("ب"), s("با"), s(""), s("")),
                (s(""), s("ب"), s("با"), s("")),
                (s("ب"), s("ب"), s(""), s("ا")),
                (s("ب"), s("ب"), s("ا"), s("")),
            ]
        );
    }

    #[test]
    fn analyze_query_drops_stopwords() {
        let db = toy();
        let result = db.analyze_query("و درس");
        assert_eq!(result.len(), 1);
        assert_eq!(result[0].token.surface, "درس");
        assert_eq!(result[0].token.position, 1);
        assert_eq!(result[0].analyses.len(), 1);
        assert!(db.analyze_query("").is_empty());
    }

    #[test]
    fn dual_form_recovers_lemma() {
        let db = toy();
        let result = db.analyze_query("مدرستان");
        assert_eq!(result[0].lemmas(), ["مدرس"]);
        let t = &tokenize("مدرستان")[0];
        assert_eq!(db.index_term(t).as_deref(), Some("مدرس"));
    }

    #[test]
    fn unknown_token_is_kept_with_fallback_lemma() {
        let db = toy();
        let result = db.analyze_query("حاسوب");
        assert_eq!(result.len(), 1);
        assert!(result[0].analyses.is_empty());
        assert_eq!(result[0].lemmas(), ["حاسوب"]);
    }

    #[test]
    fn ambiguous_form_indexes_under_surface() {
        let mut b = LinguisticDb::builder(NormalizeConfig::default());
        b.affixes(AffixSlot::Suffix, &["ة"])
            .word("مدرس", "مدرس", "درس", PartOfSpeech::Noun)
            .word("مدرسة", "مدرسة", "درس", PartOfSpeech::Noun);
        let db = b.build();
        let t = &tokenize("مدرسة")[0];
        assert_eq!(db.analyze_query("مدرسة")[0].lemmas(), ["مدرسة", "مدرس"]);
        assert_eq!(db.index_term(t).as_deref(), Some("مدرسة"));
    }

    #[test]
    fn derive_forms_modes() {
        let db = toy();
        assert_eq!(
            db.derive_forms("درس", DeriveMode::BareStem).unwrap(),
            ["درس"]
        );
        let forms = db.derive_forms("دَرَسَ", DeriveMode::Affixed).unwrap();
        assert!(forms.contains(&"درسة".to_string()));
        assert!(forms.contains(&"الدرسات".to_string()));
        // oracle: |prefixes ∪ {""}| × |suffixes ∪ {""}| combinations, bare stem first
        assert_eq!(forms.len(), 2 * 4);
        assert_eq!(forms[0], "درس");
        assert_eq!(
            db.derive_forms("كتب", DeriveMode::BareStem),
            Err(DeriveError::UnknownLemma("كتب".to_string()))
        );
    }
}
