//! In-memory inverted index with TF-IDF scoring.
//!
//! Documents and query terms go through the same term mapping
//! ([`LinguisticDb::index_term`]), so inflected and cliticized forms meet on
//! their lemma. A query term is scored as
//!
//! ```text
//! weight * tf(term, doc) * ln(1 + N / (1 + df(term)))
//! ```
//!
//! and a document's score is the sum over query terms. Multiword terms match
//! documents containing every component; their tf is the smallest component
//! tf.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{rank, Document, SearchResult};
use crate::morph::LinguisticDb;
use crate::query::WeightedTerm;

const SNIPPET_CHARS: usize = 80;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("document `{0}` is already indexed")]
    DuplicateId(String),
    #[error("result cap must be at least 1")]
    ZeroK,
    #[error("snapshot {path}: {message}")]
    Snapshot { path: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct IndexData {
    /// term -> (doc id, tf), sorted by doc id
    postings: BTreeMap<String, Vec<(String, u32)>>,
    /// doc id -> number of indexed terms
    doc_lengths: BTreeMap<String, usize>,
    snippets: BTreeMap<String, String>,
}

/// Inverted index over lemmatized documents. Readers and writers may share
/// it across threads; a search never sees a partially added document.
#[derive(Debug)]
pub struct LocalIndex {
    analyzer: Arc<LinguisticDb>,
    data: RwLock<IndexData>,
}

impl LocalIndex {
    pub fn new(analyzer: Arc<LinguisticDb>) -> Self {
        Self {
            analyzer,
            data: RwLock::new(IndexData::default()),
        }
    }

    pub fn from_documents(
        analyzer: Arc<LinguisticDb>,
        docs: &[Document],
    ) -> Result<Self, IndexError> {
        let index = Self::new(analyzer);
        for doc in docs {
            index.add(doc)?;
        }
        Ok(index)
    }

    /// Index terms of `text`, in order, stopwords removed.
    pub fn terms(&self, text: &str) -> Vec<String> {
        self.analyzer
            .normalizer()
            .tokenize(text)
            .iter()
            .filter_map(|token| self.analyzer.index_term(token))
            .collect()
    }

    pub fn add(&self, doc: &Document) -> Result<(), IndexError> {
        let mut counts: HashMap<String, u32> = HashMap::new();
        let terms = self.terms(&format!("{}\n{}", doc.title, doc.body));
        for term in &terms {
            *counts.entry(term.clone()).or_default() += 1;
        }
        let snippet = if doc.title.is_empty() {
            doc.body.chars().take(SNIPPET_CHARS).collect()
        } else {
            doc.title.clone()
        };

        let mut data = self.data.write().expect("index lock poisoned");
        if data.doc_lengths.contains_key(&doc.id) {
            return Err(IndexError::DuplicateId(doc.id.clone()));
        }
        for (term, tf) in counts {
            let list = data.postings.entry(term).or_default();
            let at = list.partition_point(|(id, _)| id < &doc.id);
            list.insert(at, (doc.id.clone(), tf));
        }
        data.doc_lengths.insert(doc.id.clone(), terms.len());
        data.snippets.insert(doc.id.clone(), snippet);
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.data
            .read()
            .expect("index lock poisoned")
            .doc_lengths
            .len()
    }

    pub fn doc_length(&self, id: &str) -> Option<usize> {
        self.data
            .read()
            .expect("index lock poisoned")
            .doc_lengths
            .get(id)
            .copied()
    }

    /// Term frequency of an index term in a document.
    pub fn tf(&self, term: &str, doc_id: &str) -> u32 {
        let data = self.data.read().expect("index lock poisoned");
        data.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by(|(id, _)| id.as_str().cmp(doc_id))
                    .ok()
                    .map(|i| list[i].1)
            })
            .unwrap_or(0)
    }

    pub fn df(&self, term: &str) -> usize {
        let data = self.data.read().expect("index lock poisoned");
        data.postings.get(term).map_or(0, Vec::len)
    }

    pub fn idf(doc_count: usize, df: usize) -> f64 {
        (1.0 + doc_count as f64 / (1.0 + df as f64)).ln()
    }

    /// Top `k` documents for a weighted query. Documents with no positive
    /// contribution are not returned.
    pub fn search(
        &self,
        query: &[WeightedTerm],
        k: usize,
    ) -> Result<Vec<SearchResult>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let mapped: Vec<(Vec<String>, f64)> = query
            .iter()
            .map(|w| (self.terms(&w.term), w.weight))
            .filter(|(components, _)| !components.is_empty())
            .collect();

        let data = self.data.read().expect("index lock poisoned");
        let n = data.doc_lengths.len();
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for (components, weight) in &mapped {
            let matches = data.matches(components);
            if matches.is_empty() {
                continue;
            }
            let idf = Self::idf(n, matches.len());
            for (doc, tf) in matches {
                *scores.entry(doc).or_default() += weight * tf as f64 * idf;
            }
        }
        let scored = scores
            .into_iter()
            .filter(|(_, score)| *score > 0.0)
            .map(|(doc, score)| (doc.to_string(), score, data.snippets.get(doc).cloned()))
            .collect();
        Ok(rank(scored, k))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let data = self.data.read().expect("index lock poisoned");
        let json = serde_json::to_string(&*data).map_err(|e| snapshot_error(path, e))?;
        std::fs::write(path, json).map_err(|e| snapshot_error(path, e))
    }

    pub fn load(path: &Path, analyzer: Arc<LinguisticDb>) -> Result<Self, IndexError> {
        let text = std::fs::read_to_string(path).map_err(|e| snapshot_error(path, e))?;
        let data: IndexData = serde_json::from_str(&text).map_err(|e| snapshot_error(path, e))?;
        Ok(Self {
            analyzer,
            data: RwLock::new(data),
        })
    }
}

fn snapshot_error(path: &Path, err: impl std::fmt::Display) -> IndexError {
    IndexError::Snapshot {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

impl IndexData {
    /// Documents containing every component, with the smallest component tf.
    fn matches<'a>(&'a self, components: &[String]) -> Vec<(&'a str, u32)> {
        let Some(first) = self.postings.get(&components[0]) else {
            return Vec::new();
        };
        let mut docs: Vec<(&str, u32)> = first.iter().map(|(id, tf)| (id.as_str(), *tf)).collect();
        for term in &components[1..] {
            let Some(list) = self.postings.get(term) else {
                return Vec::new();
            };
            docs.retain_mut(|(doc, tf)| {
                match list.binary_search_by(|(id, _)| id.as_str().cmp(doc)) {
                    Ok(i) => {
                        *tf = (*tf).min(list[i].1);
                        true
                    }
                    Err(_) => false,
                }
            });
        }
        docs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::{AffixSlot, PartOfSpeech};
    use crate::normalize::NormalizeConfig;
    use proptest::prelude::*;

    fn analyzer() -> Arc<LinguisticDb> {
        let mut b = LinguisticDb::builder(NormalizeConfig::default());
        b.stopword("في")
            .stopword("و")
            .affixes(AffixSlot::Proclitic, &["و"])
            .affixes(AffixSlot::Prefix, &["ال"])
            .affixes(AffixSlot::Suffix, &["ة", "تان"])
            .word("فرس", "فرس", "فرس", PartOfSpeech::Noun)
            .word("خيل", "خيل", "خيل", PartOfSpeech::Noun)
            .word("خيول", "خيل", "خيل", PartOfSpeech::Noun)
            .word("مدرس", "مدرس", "درس", PartOfSpeech::Noun)
            .word("درس", "درس", "درس", PartOfSpeech::Verb);
        Arc::new(b.build())
    }

    fn doc(id: &str, body: &str) -> Document {
        Document {
            id: id.to_string(),
            title: String::new(),
            body: body.to_string(),
        }
    }

    fn wt(term: &str, weight: f64) -> WeightedTerm {
        WeightedTerm {
            term: term.to_string(),
            weight,
            group: 0,
        }
    }

    // Hand-computed TF-IDF over explicit (tf, df) counts.
    fn oracle_score(parts: &[(f64, u32, usize)], n: usize) -> f64 {
        parts
            .iter()
            .map(|&(w, tf, df)| w * tf as f64 * (1.0 + n as f64 / (1.0 + df as f64)).ln())
            .sum()
    }

    #[test]
    fn counts_term_frequency() {
        let index = LocalIndex::new(analyzer());
        index.add(&doc("d1", "درس ثم درس")).unwrap();
        assert_eq!(index.tf("درس", "d1"), 2);
        assert_eq!(index.doc_length("d1"), Some(3));
        assert!(matches!(
            index.add(&doc("d1", "فرس")),
            Err(IndexError::DuplicateId(_))
        ));
    }

    #[test]
    fn stopword_only_document_has_no_postings() {
        let index = LocalIndex::new(analyzer());
        index.add(&doc("d1", "في و في")).unwrap();
        assert_eq!(index.doc_count(), 1);
        assert_eq!(index.doc_length("d1"), Some(0));
        assert_eq!(index.df("في"), 0);
    }

    #[test]
    fn inflected_forms_share_the_lemma() {
        let index = LocalIndex::new(analyzer());
        index.add(&doc("d1", "المدرستان والخيول")).unwrap();
        assert_eq!(index.tf("مدرس", "d1"), 1);
        assert_eq!(index.tf("خيل", "d1"), 1);
    }

    #[test]
    fn expansion_recovers_synonym_document() {
        let index = LocalIndex::from_documents(
            analyzer(),
            &[
                doc("a", "الفرس في السباق"),
                doc("b", "الخيل والخيول"),
                doc("c", "السوق مزدحم"),
            ],
        )
        .unwrap();
        // N = 3, df(فرس) = df(خيل) = 1, idf = ln(2.5)
        let idf = 0.916_290_731_874_155_1;
        let baseline = index.search(&[wt("فرس", 1.0)], 10).unwrap();
        assert_eq!(baseline.len(), 1);
        assert_eq!(baseline[0].doc_id, "a");
        assert!((baseline[0].score - idf).abs() < 1e-12);
        assert!((baseline[0].score - oracle_score(&[(1.0, 1, 1)], 3)).abs() < 1e-12);

        let expanded = index.search(&[wt("فرس", 1.0), wt("خيل", 0.8)], 10).unwrap();
        let ids: Vec<_> = expanded
            .iter()
            .map(|r| (r.doc_id.as_str(), r.rank))
            .collect();
        assert_eq!(ids, [("b", 1), ("a", 2)]);
        assert!((expanded[0].score - 1.466_065_170_998_648_2).abs() < 1e-12);
        assert!((expanded[0].score - oracle_score(&[(0.8, 2, 1)], 3)).abs() < 1e-12);
    }

    #[test]
    fn k_caps_results_and_zero_is_rejected() {
        let index = LocalIndex::from_documents(
            analyzer(),
            &[doc("a", "فرس"), doc("b", "فرس"), doc("c", "فرس")],
        )
        .unwrap();
        let results = index.search(&[wt("فرس", 1.0)], 2).unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].doc_id, "a");
        assert!(matches!(
            index.search(&[wt("فرس", 1.0)], 0),
            Err(IndexError::ZeroK)
        ));
        assert!(index.search(&[], 5).unwrap().is_empty());
    }

    #[test]
    fn phrase_needs_every_component() {
        let index = LocalIndex::from_documents(
            analyzer(),
            &[doc("a", "فرس خيل خيل"), doc("b", "فرس"), doc("c", "خيل")],
        )
        .unwrap();
        let results = index.search(&[wt("فرس الخيل", 1.0)], 10).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].doc_id, "a");
        assert!((results[0].score - oracle_score(&[(1.0, 1, 1)], 3)).abs() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip() {
        let index =
            LocalIndex::from_documents(analyzer(), &[doc("a", "فرس"), doc("b", "خيل")]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        index.save(&path).unwrap();
        let back = LocalIndex::load(&path, analyzer()).unwrap();
        let q = [wt("فرس", 1.0), wt("خيل", 0.5)];
        assert_eq!(back.search(&q, 5).unwrap(), index.search(&q, 5).unwrap());
    }

    #[test]
    fn idf_decreases_with_df() {
        for df in 0..50 {
            assert!(LocalIndex::idf(50, df) > LocalIndex::idf(50, df + 1));
        }
    }

    #[test]
    fn concurrent_readers_see_whole_documents() {
        let index = Arc::new(LocalIndex::new(analyzer()));
        std::thread::scope(|scope| {
            let writer = Arc::clone(&index);
            scope.spawn(move || {
                for i in 0..200 {
                    writer.add(&doc(&format!("d{i:03}"), "فرس خيل")).unwrap();
                }
            });
            for _ in 0..4 {
                let reader = Arc::clone(&index);
                scope.spawn(move || {
                    for _ in 0..200 {
                        let results = reader
                            .search(&[wt("فرس", 1.0), wt("خيل", 1.0)], 1000)
                            .unwrap();
                        // every visible document has both terms, so scores are equal
                        if let Some(first) = results.first() {
                            assert!(results
                                .iter()
                                .all(|r| (r.score - first.score).abs() < 1e-12));
                        }
                    }
                });
            }
        });
        assert_eq!(index.doc_count(), 200);
    }

    const WORDS: [&str; 6] = ["فرس", "خيل", "الخيول", "درس", "السوق", "في"];

    fn corpus() -> impl Strategy<Value = Vec<Vec<usize>>> {
        proptest::collection::vec(proptest::collection::vec(0..WORDS.len(), 0..6), 1..8)
    }

    proptest! {
        #[test]
        fn zero_weight_term_changes_nothing(docs in corpus(), q in 0..WORDS.len(), extra in 0..WORDS.len()) {
            let docs: Vec<Document> = docs.iter().enumerate()
                .map(|(i, ws)| doc(&format!("d{i}"), &ws.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")))
                .collect();
            let index = LocalIndex::from_documents(analyzer(), &docs).unwrap();
            let base = index.search(&[wt(WORDS[q], 1.0)], 100).unwrap();
            let with_zero = index.search(&[wt(WORDS[q], 1.0), wt(WORDS[extra], 0.0)], 100).unwrap();
            prop_assert_eq!(base, with_zero);
        }

        #[test]
        fn positive_terms_only_add_results(docs in corpus(), q in 0..WORDS.len(), extra in proptest::collection::vec((0..WORDS.len(), 0.01f64..1.0), 0..4)) {
            let docs: Vec<Document> = docs.iter().enumerate()
                .map(|(i, ws)| doc(&format!("d{i}"), &ws.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")))
                .collect();
            let index = LocalIndex::from_documents(analyzer(), &docs).unwrap();
            let base: Vec<WeightedTerm> = vec![wt(WORDS[q], 1.0)];
            let mut expanded = base.clone();
            expanded.extend(extra.iter().map(|&(w, weight)| wt(WORDS[w], weight)));
            let before: std::collections::BTreeSet<String> = index.search(&base, 100).unwrap().into_iter().map(|r| r.doc_id).collect();
            let after: std::collections::BTreeSet<String> = index.search(&expanded, 100).unwrap().into_iter().map(|r| r.doc_id).collect();
            prop_assert!(before.is_subset(&after));
        }

        #[test]
        fn ties_are_ordered_by_id(docs in corpus(), q in 0..WORDS.len()) {
            let docs: Vec<Document> = docs.iter().enumerate()
                .map(|(i, ws)| doc(&format!("d{i}"), &ws.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")))
                .collect();
            let index = LocalIndex::from_documents(analyzer(), &docs).unwrap();
            let results = index.search(&[wt(WORDS[q], 1.0)], 100).unwrap();
            for pair in results.windows(2) {
                prop_assert!(pair[0].score > pair[1].score || (pair[0].score == pair[1].score && pair[0].doc_id < pair[1].doc_id));
            }
        }
    }
}
