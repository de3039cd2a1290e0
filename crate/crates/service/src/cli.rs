//! `qamar` command line.
//!
//! Every flag naming a file or setting can also be given through an
//! environment variable with the `QAMAR_` prefix, e.g. `QAMAR_LEXDB`.

use std::ffi::OsString;
use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qamar_core::eval::{self, ConfigGrid, Evaluator};
use qamar_core::pipeline::{deselect_all, Prepared};
use qamar_core::search;
use qamar_core::{ExpandedQuery, Selection};
use serde::Serialize;

use crate::app::{self, Backend, BackendKind, Settings, DEFAULT_K};
use crate::http::{self, AppState};
use crate::session::SessionStore;
use crate::views::{self, QueryView, SearchView};

#[derive(Debug, Parser)]
#[command(
    name = "qamar",
    version,
    about = "Arabic query expansion with user validation"
)]
pub struct Cli {
    /// Linguistic database directory (stopwords, affix tables, lexicon).
    #[arg(long, env = "QAMAR_LEXDB", default_value = "data/lexdb", global = true)]
    lexdb: PathBuf,
    /// Lexical database file (synsets and relations).
    #[arg(
        long,
        env = "QAMAR_AWN",
        default_value = "data/awn/sample_awn.tsv",
        global = true
    )]
    awn: PathBuf,
    /// Expansion configuration file (key=value lines).
    #[arg(long, env = "QAMAR_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Normalization configuration file (key=value lines).
    #[arg(long, env = "QAMAR_NORM_CONFIG", global = true)]
    norm_config: Option<PathBuf>,
    /// Expansion setting override, e.g. `--set max_senses=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value, global = true)]
    overrides: Vec<(String, String)>,
    #[command(subcommand)]
    command: Command,
}

fn parse_key_value(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{raw}`"))
}

#[derive(Debug, Args)]
struct BackendArgs {
    /// Search backend.
    #[arg(long, env = "QAMAR_BACKEND", value_enum, default_value = "local")]
    backend: BackendKind,
    /// Corpus for the local backend: a TSV file (id, title, body) or a
    /// directory of text files.
    #[arg(long, env = "QAMAR_CORPUS")]
    corpus: Option<PathBuf>,
    /// Saved local index, used when no corpus is given.
    #[arg(long, env = "QAMAR_INDEX_PATH")]
    index_path: Option<PathBuf>,
    /// Web backend configuration file (key=value lines).
    #[arg(long, env = "QAMAR_WEB_CONFIG")]
    web_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize, normalize and segment a text.
    Analyze {
        text: String,
        #[arg(long)]
        json: bool,
    },
    /// Propose expansion candidates for a text.
    Expand {
        text: String,
        #[arg(long)]
        json: bool,
    },
    /// Search with the expanded (or, with --no-expand, the original) query.
    Search {
        text: String,
        /// Send the query as typed; the lexical database is not read.
        #[arg(long)]
        no_expand: bool,
        /// Drop a candidate: `TERM` in every group or `GROUP:TERM`. Repeatable.
        #[arg(long, value_name = "TERM")]
        deselect: Vec<String>,
        /// Drop every candidate.
        #[arg(long, conflicts_with = "deselect")]
        deselect_all: bool,
        #[arg(short, long, default_value_t = DEFAULT_K)]
        k: usize,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        json: bool,
    },
    /// Build a local index from a corpus and save it.
    Index {
        #[arg(long, env = "QAMAR_CORPUS")]
        corpus: PathBuf,
        #[arg(long, env = "QAMAR_INDEX_PATH")]
        index_path: PathBuf,
    },
    /// Compare baseline and expanded retrieval on a judged query set.
    Eval {
        #[arg(long, env = "QAMAR_CORPUS")]
        corpus: PathBuf,
        /// Query file: id, text.
        #[arg(long)]
        queries: PathBuf,
        /// Relevance judgments: query id, doc id.
        #[arg(long)]
        qrels: PathBuf,
        #[arg(short, long, default_value_t = 20)]
        k: usize,
        /// Settings to sweep, e.g. `weight.synonym=0.5,0.8;max_senses=1,3`.
        #[arg(long)]
        grid: Option<String>,
        /// Write the TSV report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "QAMAR_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "QAMAR_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Idle session lifetime in seconds.
        #[arg(long, env = "QAMAR_SESSION_TTL", default_value_t = 1800)]
        session_ttl: u64,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 on success, 1 on failure, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

/// A closed stdout (`qamar ... | head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let settings = Settings {
        lexdb: cli.lexdb,
        awn: cli.awn,
        config: cli.config,
        norm_config: cli.norm_config,
        overrides: cli.overrides,
    };
    match cli.command {
        Command::Analyze { text, json } => analyze(&settings, &text, json, out),
        Command::Expand { text, json } => expand(&settings, &text, json, out),
        Command::Search {
            text,
            no_expand,
            deselect,
            deselect_all,
            k,
            backend,
            json,
        } => {
            let pipeline = settings.pipeline(!no_expand)?;
            let query = if no_expand {
                pipeline.baseline(&text)
            } else {
                let prepared = pipeline.prepare(&text, None)?;
                let selections = if deselect_all {
                    deselect_all_of(&prepared)
                } else {
                    parse_deselections(&prepared, &deselect)?
                };
                pipeline.build(&prepared, &selections)?
            };
            let backend = open_backend(&backend, &pipeline)?;
            let results = backend.search(&query, k)?;
            let view = SearchView {
                query: query.serialize_boolean(),
                backend: backend.kind(),
                k,
                results,
            };
            print_search(&view, json, out)
        }
        Command::Index { corpus, index_path } => {
            let index = app::open_index(settings.load_lexdb()?, Some(&corpus), None)?;
            index.save(&index_path)?;
            writeln!(
                out,
                "indexed {} documents into {}",
                index.doc_count(),
                index_path.display()
            )?;
            Ok(())
        }
        Command::Eval {
            corpus,
            queries,
            qrels,
            k,
            grid,
            output,
        } => {
            let pipeline = settings.pipeline(true)?;
            let base = pipeline.config().clone();
            let points = match grid {
                Some(spec) => ConfigGrid::parse(base, &spec)?.points()?,
                None => vec![base],
            };
            let evaluator = Evaluator::new(pipeline, &search::load_corpus(&corpus)?)?;
            let reports = evaluator.sweep(
                &eval::load_queries(&queries)?,
                &eval::load_qrels(&qrels)?,
                &points,
                k,
            )?;
            let tsv = eval::reports_to_tsv(&reports);
            match output {
                Some(path) => std::fs::write(&path, tsv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(tsv.as_bytes())?,
            }
            Ok(())
        }
        Command::Serve {
            port,
            host,
            session_ttl,
            backend,
        } => {
            let state = server_state(
                &settings,
                &BackendOptions::from(&backend),
                Duration::from_secs(session_ttl),
            )?;
            let listener = TcpListener::bind((host.as_str(), port))
                .with_context(|| format!("binding {host}:{port}"))?;
            writeln!(out, "listening on http://{}", listener.local_addr()?)?;
            out.flush()?;
            http::serve_blocking(listener, Arc::new(state))?;
            Ok(())
        }
    }
}

/// Loads databases and backends for the server. The lexical database may
/// fail to load; the server then runs without expansion and reports why on
/// `/health`.
pub fn server_state(
    settings: &Settings,
    backend: &BackendOptions,
    session_ttl: Duration,
) -> Result<AppState> {
    let morph = settings.load_lexdb()?;
    let (awn, awn_error) = match settings.load_awn() {
        Ok(db) => (Some(db), None),
        Err(e) => (None, Some(format!("{e:#}"))),
    };
    let pipeline = qamar_core::Pipeline::new(Arc::clone(&morph), awn, settings.expansion_config()?);
    let local = match (&backend.corpus, &backend.index_path) {
        (None, None) => None,
        (corpus, index_path) => Some(Arc::new(app::open_index(
            morph,
            corpus.as_deref(),
            index_path.as_deref(),
        )?)),
    };
    let web = backend
        .web_config
        .as_deref()
        .map(app::open_web)
        .transpose()?
        .map(Arc::new);
    let configured = match backend.backend {
        BackendKind::Local => local.is_some(),
        BackendKind::Web => web.is_some(),
    };
    if !configured {
        bail!(
            "default backend `{}` is not configured (give --corpus/--index-path or --web-config)",
            backend.backend.as_str()
        );
    }
    Ok(AppState {
        pipeline,
        sessions: SessionStore::new(session_ttl),
        local,
        web,
        default_backend: backend.backend,
        awn_error,
    })
}

/// Backend flags as plain data, for building a server outside the CLI.
#[derive(Debug, Clone)]
pub struct BackendOptions {
    pub backend: BackendKind,
    pub corpus: Option<PathBuf>,
    pub index_path: Option<PathBuf>,
    pub web_config: Option<PathBuf>,
}

impl From<&BackendArgs> for BackendOptions {
    fn from(args: &BackendArgs) -> Self {
        Self {
            backend: args.backend,
            corpus: args.corpus.clone(),
            index_path: args.index_path.clone(),
            web_config: args.web_config.clone(),
        }
    }
}

fn open_backend(args: &BackendArgs, pipeline: &qamar_core::Pipeline) -> Result<Backend> {
    Ok(match args.backend {
        BackendKind::Local => Backend::Local(Arc::new(app::open_index(
            Arc::clone(pipeline.morph()),
            args.corpus.as_deref(),
            args.index_path.as_deref(),
        )?)),
        BackendKind::Web => {
            let path = args
                .web_config
                .as_deref()
                .context("the web backend needs --web-config")?;
            Backend::Web(Arc::new(app::open_web(path)?))
        }
    })
}

fn deselect_all_of(prepared: &Prepared) -> Vec<Selection> {
    deselect_all(&prepared.groups)
}

fn parse_deselections(prepared: &Prepared, raw: &[String]) -> Result<Vec<Selection>> {
    let mut selections = Vec::new();
    for item in raw {
        let (group, term) = match item.split_once(':') {
            Some((g, t)) if g.parse::<usize>().is_ok() => (g.parse::<usize>().ok(), t),
            _ => (None, item.as_str()),
        };
        let term_key = qamar_core::normalize::normalize_text(term);
        let mut matched = false;
        for (i, g) in prepared.groups.iter().enumerate() {
            if group.is_some_and(|wanted| wanted != i) {
                continue;
            }
            if g.candidates
                .iter()
                .any(|c| c.term == term_key || c.display == term)
            {
                matched = true;
                selections.push(Selection {
                    group: i,
                    term: term.to_string(),
                    selected: false,
                });
            }
        }
        if !matched {
            bail!("--deselect {item}: no such candidate");
        }
    }
    Ok(selections)
}

fn write_json(value: &impl Serialize, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn analyze(settings: &Settings, text: &str, json: bool, out: &mut dyn Write) -> Result<()> {
    let db = settings.load_lexdb()?;
    let tokens = views::analyses(&db, &db.analyze_query(text));
    if json {
        return write_json(&views::AnalyzeView { tokens }, out);
    }
    for token in &tokens {
        writeln!(
            out,
            "{}\t{}\tterm={}",
            token.surface,
            token.normalized,
            token.index_term.as_deref().unwrap_or("-")
        )?;
        for a in &token.analyses {
            let dash = |s: &str| {
                if s.is_empty() {
                    "-".to_string()
                } else {
                    s.to_string()
                }
            };
            writeln!(
                out,
                "  {}+{}+[{}]+{}+{}\tlemma={}\troot={}\tpos={}",
                dash(&a.proclitic),
                dash(&a.prefix),
                a.stem,
                dash(&a.suffix),
                dash(&a.enclitic),
                a.lemma,
                a.root,
                a.pos.as_str()
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ExpandOutput {
    groups: Vec<views::GroupView>,
    query: QueryView,
}

fn expand(settings: &Settings, text: &str, json: bool, out: &mut dyn Write) -> Result<()> {
    let pipeline = settings.pipeline(true)?;
    let prepared = pipeline.prepare(text, None)?;
    let query: ExpandedQuery = pipeline.build(&prepared, &[])?;
    if json {
        let output = ExpandOutput {
            groups: views::groups(&prepared.groups),
            query: QueryView::from(&query),
        };
        return write_json(&output, out);
    }
    writeln!(out, "query\t{}", query.serialize_boolean())?;
    writeln!(out, "group\tsource\tterm\trelation\tweight\tsynset")?;
    for (i, group) in prepared.groups.iter().enumerate() {
        for c in &group.candidates {
            writeln!(
                out,
                "{i}\t{}\t{}\t{}\t{}\t{}",
                group.source.surface, c.term, c.relation, c.weight, c.synset_id
            )?;
        }
    }
    Ok(())
}

fn print_search(view: &SearchView, json: bool, out: &mut dyn Write) -> Result<()> {
    if json {
        return write_json(view, out);
    }
    writeln!(out, "query\t{}", view.query)?;
    for r in &view.results {
        writeln!(
            out,
            "{}\t{:.6}\t{}\t{}",
            r.rank,
            r.score,
            r.doc_id,
            r.snippet.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}
