#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use qamar_core::eval::{self, EvalQuery, Qrels};
use qamar_core::search::{self, Document};
use qamar_core::{ExpansionConfig, LexicalDb, LinguisticDb, NormalizeConfig, Pipeline};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn lexdb() -> Arc<LinguisticDb> {
    Arc::new(
        LinguisticDb::load(&data_dir().join("lexdb"), NormalizeConfig::default())
            .expect("shipped lexdb"),
    )
}

pub fn awn(file: &str) -> Arc<LexicalDb> {
    Arc::new(
        LexicalDb::load(
            &data_dir().join("awn").join(file),
            NormalizeConfig::default(),
        )
        .expect("shipped awn"),
    )
}

pub fn pipeline() -> Pipeline {
    Pipeline::new(
        lexdb(),
        Some(awn("sample_awn.tsv")),
        ExpansionConfig::default(),
    )
}

pub fn corpus() -> Vec<Document> {
    search::load_corpus(&data_dir().join("corpus/docs.tsv")).expect("shipped corpus")
}

pub fn queries() -> Vec<EvalQuery> {
    eval::load_queries(&data_dir().join("corpus/queries.tsv")).expect("shipped queries")
}

pub fn qrels() -> Qrels {
    eval::load_qrels(&data_dir().join("corpus/qrels.tsv")).expect("shipped qrels")
}

pub mod oracle;
