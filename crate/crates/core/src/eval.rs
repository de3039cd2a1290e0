//! Offline comparison of baseline and enriched retrieval.
//!
//! Each query is run through the local index twice, without and with
//! enrichment, plus once per enabled relation with that relation switched
//! off. Precision at k, recall at k and average precision are reported per
//! query and averaged. A precision drop under enrichment is flagged, not
//! treated as a failure.
//!
//! # Report format
//!
//! Tab-separated, header line first, columns in this order:
//!
//! ```text
//! point  query  run  k  precision_at_k  recall  average_precision  flag
//! ```
//!
//! `run` is `baseline`, `expanded` or `no_<relation>`; `query` is `ALL` for
//! the mean over queries; `flag` is `precision_drop` on expanded rows whose
//! precision fell below the baseline, otherwise `-`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expand::{ExpansionConfig, Relation};
use crate::pipeline::{Pipeline, PipelineError};
use crate::search::{Document, IndexError, LocalIndex, SearchResult};

pub const REPORT_COLUMNS: [&str; 8] = [
    "point",
    "query",
    "run",
    "k",
    "precision_at_k",
    "recall",
    "average_precision",
    "flag",
];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("result cap k must be at least 1")]
    ZeroK,
    #[error("empty configuration grid")]
    EmptyGrid,
    #[error("unknown query ids in relevance judgments: {}", .0.join(", "))]
    UnknownQueries(Vec<String>),
    #[error("unknown document ids in relevance judgments: {}", .0.join(", "))]
    UnknownDocuments(Vec<String>),
    #[error("duplicate query id `{0}`")]
    DuplicateQuery(String),
    #[error("{}, line {line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalQuery {
    pub id: String,
    pub text: String,
}

/// Relevant document ids per query id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qrels(pub BTreeMap<String, BTreeSet<String>>);

impl Qrels {
    pub fn relevant(&self, query: &str) -> Option<&BTreeSet<String>> {
        self.0.get(query)
    }

    pub fn insert(&mut self, query: &str, doc: &str) {
        self.0
            .entry(query.to_string())
            .or_default()
            .insert(doc.to_string());
    }
}

fn read_rows(path: &Path, columns: usize) -> Result<Vec<(usize, Vec<String>)>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line
            .splitn(columns, '\t')
            .map(|f| f.trim().to_string())
            .collect();
        if fields.len() != columns || fields.iter().any(String::is_empty) {
            return Err(EvalError::Malformed {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected {columns} tab-separated fields"),
            });
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

/// `queries.tsv`: query id, query text.
pub fn load_queries(path: &Path) -> Result<Vec<EvalQuery>, EvalError> {
    let mut seen = BTreeSet::new();
    read_rows(path, 2)?
        .into_iter()
        .map(|(_, mut f)| {
            let text = f.pop().unwrap_or_default();
            let id = f.pop().unwrap_or_default();
            if !seen.insert(id.clone()) {
                return Err(EvalError::DuplicateQuery(id));
            }
            Ok(EvalQuery { id, text })
        })
        .collect()
}

/// `qrels.tsv`: query id, relevant doc id.
pub fn load_qrels(path: &Path) -> Result<Qrels, EvalError> {
    let mut qrels = Qrels::default();
    for (_, fields) in read_rows(path, 2)? {
        qrels.insert(&fields[0], &fields[1]);
    }
    Ok(qrels)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision_at_k: f64,
    pub recall: f64,
    pub average_precision: f64,
}

impl Metrics {
    /// Metrics of a ranked list cut at `k`. With no relevant documents,
    /// recall and average precision are 0.
    pub fn compute(results: &[SearchResult], relevant: &BTreeSet<String>, k: usize) -> Self {
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (i, result) in results.iter().take(k).enumerate() {
            if relevant.contains(&result.doc_id) {
                hits += 1;
                precision_sum += hits as f64 / (i + 1) as f64;
            }
        }
        let (recall, average_precision) = if relevant.is_empty() {
            (0.0, 0.0)
        } else {
            (
                hits as f64 / relevant.len() as f64,
                precision_sum / relevant.len() as f64,
            )
        };
        Metrics {
            precision_at_k: hits as f64 / k as f64,
            recall,
            average_precision,
        }
    }

    fn mean(items: impl Iterator<Item = Metrics>) -> Metrics {
        let (mut sum, mut n) = (Metrics::default(), 0usize);
        for m in items {
            sum.precision_at_k += m.precision_at_k;
            sum.recall += m.recall;
            sum.average_precision += m.average_precision;
            n += 1;
        }
        if n == 0 {
            return sum;
        }
        Metrics {
            precision_at_k: sum.precision_at_k / n as f64,
            recall: sum.recall / n as f64,
            average_precision: sum.average_precision / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query_id: String,
    pub baseline: Metrics,
    pub expanded: Metrics,
    /// One row per enabled relation, with that relation disabled.
    pub ablations: Vec<(Relation, Metrics)>,
    pub candidate_count: usize,
}

impl QueryReport {
    pub fn precision_dropped(&self) -> bool {
        self.expanded.precision_at_k < self.baseline.precision_at_k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub config: ExpansionConfig,
    /// Sorted by query id.
    pub queries: Vec<QueryReport>,
    pub baseline: Metrics,
    pub expanded: Metrics,
    pub ablations: Vec<(Relation, Metrics)>,
}

impl EvalReport {
    pub fn precision_regressions(&self) -> Vec<&str> {
        self.queries
            .iter()
            .filter(|q| q.precision_dropped())
            .map(|q| q.query_id.as_str())
            .collect()
    }

    pub fn query(&self, id: &str) -> Option<&QueryReport> {
        self.queries.iter().find(|q| q.query_id == id)
    }

    fn write_rows(&self, point: usize, out: &mut String) {
        let mut row = |query: &str, run: &str, m: &Metrics, flag: &str| {
            let _ = writeln!(
                out,
                "{point}\t{query}\t{run}\t{}\t{:.6}\t{:.6}\t{:.6}\t{flag}",
                self.k, m.precision_at_k, m.recall, m.average_precision
            );
        };
        for q in &self.queries {
            row(&q.query_id, "baseline", &q.baseline, "-");
            let flag = if q.precision_dropped() {
                "precision_drop"
            } else {
                "-"
            };
            row(&q.query_id, "expanded", &q.expanded, flag);
            for (relation, m) in &q.ablations {
                row(&q.query_id, &format!("no_{relation}"), m, "-");
            }
        }
        row("ALL", "baseline", &self.baseline, "-");
        let flag = if self.expanded.precision_at_k < self.baseline.precision_at_k {
            "precision_drop"
        } else {
            "-"
        };
        row("ALL", "expanded", &self.expanded, flag);
        for (relation, m) in &self.ablations {
            row("ALL", &format!("no_{relation}"), m, "-");
        }
    }

    pub fn to_tsv(&self) -> String {
        reports_to_tsv(std::slice::from_ref(self))
    }
}

/// One table for several reports; each report's configuration is written
/// as a `# point N:` comment above the header.
pub fn reports_to_tsv(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    for (i, report) in reports.iter().enumerate() {
        let config = report.config.to_kv().trim_end().replace('\n', " ");
        let _ = writeln!(out, "# point {i}: {config}");
    }
    out.push_str(&REPORT_COLUMNS.join("\t"));
    out.push('\n');
    for (i, report) in reports.iter().enumerate() {
        report.write_rows(i, &mut out);
    }
    out
}

/// Cartesian product of configuration settings over a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigGrid {
    pub base: ExpansionConfig,
    pub axes: Vec<(String, Vec<String>)>,
}

impl ConfigGrid {
    /// Parses `key=v1,v2;key2=v3`. Relation sets inside one value are
    /// joined with `+`, e.g. `relations=synonym+hyponym,none`.
    pub fn parse(base: ExpansionConfig, spec: &str) -> Result<Self, EvalError> {
        let mut axes = Vec::new();
        for axis in spec.split(';').map(str::trim).filter(|a| !a.is_empty()) {
            let (key, values) = axis
                .split_once('=')
                .ok_or_else(|| EvalError::Grid(format!("expected key=values, got `{axis}`")))?;
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().replace('+', ","))
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(EvalError::Grid(format!("no values for `{key}`")));
            }
            axes.push((key.trim().to_string(), values));
        }
        let grid = Self { base, axes };
        grid.points()?;
        Ok(grid)
    }

    pub fn points(&self) -> Result<Vec<ExpansionConfig>, EvalError> {
        let mut points = vec![self.base.clone()];
        for (key, values) in &self.axes {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for point in &points {
                for value in values {
                    let mut config = point.clone();
                    config.set(key, value).map_err(EvalError::Grid)?;
                    next.push(config);
                }
            }
            points = next;
        }
        Ok(points)
    }
}

/// Runs queries against a fixed corpus.
pub struct Evaluator {
    pipeline: Pipeline,
    index: Arc<LocalIndex>,
    doc_ids: BTreeSet<String>,
}

impl Evaluator {
    pub fn new(pipeline: Pipeline, corpus: &[Document]) -> Result<Self, EvalError> {
        let index = LocalIndex::from_documents(Arc::clone(pipeline.morph()), corpus)?;
        Ok(Self {
            pipeline,
            index: Arc::new(index),
            doc_ids: corpus.iter().map(|d| d.id.clone()).collect(),
        })
    }

    pub fn index(&self) -> &LocalIndex {
        &self.index
    }

    fn check_ids(&self, queries: &[EvalQuery], qrels: &Qrels) -> Result<(), EvalError> {
        let query_ids: BTreeSet<&str> = queries.iter().map(|q| q.id.as_str()).collect();
        let unknown_queries: Vec<String> = qrels
            .0
            .keys()
            .filter(|q| !query_ids.contains(q.as_str()))
            .cloned()
            .collect();
        if !unknown_queries.is_empty() {
            return Err(EvalError::UnknownQueries(unknown_queries));
        }
        let unknown_docs: BTreeSet<String> = qrels
            .0
            .values()
            .flatten()
            .filter(|d| !self.doc_ids.contains(*d))
            .cloned()
            .collect();
        if !unknown_docs.is_empty() {
            return Err(EvalError::UnknownDocuments(
                unknown_docs.into_iter().collect(),
            ));
        }
        Ok(())
    }

    /// Ranked results for `text` under `config`.
    pub fn retrieve(
        &self,
        text: &str,
        config: &ExpansionConfig,
        k: usize,
    ) -> Result<(Vec<SearchResult>, usize), EvalError> {
        let query = self.pipeline.expanded(text, Some(config), &[])?;
        let results = self.index.search(&query.serialize_weighted(), k)?;
        Ok((results, query.candidate_count()))
    }

    pub fn run(
        &self,
        queries: &[EvalQuery],
        qrels: &Qrels,
        config: &ExpansionConfig,
        k: usize,
    ) -> Result<EvalReport, EvalError> {
        if k == 0 {
            return Err(EvalError::ZeroK);
        }
        self.check_ids(queries, qrels)?;
        let empty = BTreeSet::new();
        let baseline_config = ExpansionConfig::disabled();

        let mut rows: Vec<QueryReport> = queries
            .par_iter()
            .map(|q| -> Result<QueryReport, EvalError> {
                let relevant = qrels.relevant(&q.id).unwrap_or(&empty);
                let (base, _) = self.retrieve(&q.text, &baseline_config, k)?;
                let (expanded, candidate_count) = self.retrieve(&q.text, config, k)?;
                let mut ablations = Vec::new();
                for &relation in &config.relations {
                    let (results, _) = self.retrieve(&q.text, &config.without(relation), k)?;
                    ablations.push((relation, Metrics::compute(&results, relevant, k)));
                }
                Ok(QueryReport {
                    query_id: q.id.clone(),
                    baseline: Metrics::compute(&base, relevant, k),
                    expanded: Metrics::compute(&expanded, relevant, k),
                    ablations,
                    candidate_count,
                })
            })
            .collect::<Result<_, _>>()?;
        rows.sort_by(|a, b| a.query_id.cmp(&b.query_id));

        let ablations = config
            .relations
            .iter()
            .enumerate()
            .map(|(i, &relation)| {
                (
                    relation,
                    Metrics::mean(rows.iter().map(|r| r.ablations[i].1)),
                )
            })
            .collect();
        Ok(EvalReport {
            k,
            config: config.clone(),
            baseline: Metrics::mean(rows.iter().map(|r| r.baseline)),
            expanded: Metrics::mean(rows.iter().map(|r| r.expanded)),
            ablations,
            queries: rows,
        })
    }

    pub fn sweep(
        &self,
        queries: &[EvalQuery],
        qrels: &Qrels,
        grid: &[ExpansionConfig],
        k: usize,
    ) -> Result<Vec<EvalReport>, EvalError> {
        if grid.is_empty() {
            return Err(EvalError::EmptyGrid);
        }
        grid.iter()
            .map(|config| self.run(queries, qrels, config, k))
            .collect()
    }
}
