mod common;

use std::process::Command;

use common::{cli, data};

#[test]
fn analyze_empty_text() {
    let (code, out, err) = cli(&["analyze", ""]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, "");
    let (code, out, _) = cli(&["analyze", "--json", ""]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["tokens"], serde_json::json!([]));
}

#[test]
fn analyze_shows_segments() {
    let (code, out, _) = cli(&["analyze", "والمدارس"]);
    assert_eq!(code, 0);
    assert!(out.contains("term=مدرسة"), "{out}");
    assert!(out.contains("و+ال+[مدارس]+-+-"), "{out}");
}

#[test]
fn expand_lists_dirasa() {
    let awn = data("awn/dars_senses.tsv");
    let (code, out, err) = cli(&["--awn", &awn, "--set", "max_senses=15", "expand", "درس"]);
    assert_eq!(code, 0, "{err}");
    assert!(
        out.lines().any(|l| l.split('\t').nth(2) == Some("دراسة")),
        "{out}"
    );
    assert!(out.starts_with("query\t(درس OR "));
}

#[test]
fn no_expand_never_reads_the_lexical_database() {
    let corpus = data("corpus/docs.tsv");
    let args = [
        "--awn",
        "/nonexistent/awn.tsv",
        "search",
        "فرس",
        "--corpus",
        &corpus,
    ];
    let (code, _, err) = cli(&args);
    assert_eq!(code, 1);
    assert!(err.contains("awn.tsv"), "{err}");

    let mut with_flag = args.to_vec();
    with_flag.push("--no-expand");
    let (code, out, err) = cli(&with_flag);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "query\tفرس");
    assert!(lines[1].starts_with("1\t") && lines[1].contains("\td01\t"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn deselect_all_matches_no_expand() {
    let corpus = data("corpus/docs.tsv");
    for text in ["فرس", "مدرسة بحث", "الخيول في المدرسة"] {
        let (_, a, _) = cli(&[
            "search",
            text,
            "--corpus",
            &corpus,
            "--deselect-all",
            "--json",
        ]);
        let (_, b, _) = cli(&["search", text, "--corpus", &corpus, "--no-expand", "--json"]);
        assert_eq!(a, b, "{text}");
    }
}

#[test]
fn deselect_single_candidate() {
    let corpus = data("corpus/docs.tsv");
    let (code, out, err) = cli(&[
        "search",
        "فرس",
        "--corpus",
        &corpus,
        "--deselect",
        "حجر",
        "--deselect",
        "0:مهر",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("query\t(فرس OR خيل OR حيوان)\n"), "{out}");
    assert!(!out.contains("d20"));
    let (code, _, err) = cli(&["search", "فرس", "--corpus", &corpus, "--deselect", "كتاب"]);
    assert_eq!(code, 1);
    assert!(err.contains("no such candidate"));
}

#[test]
fn index_then_search_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = dir.path().join("index.json");
    let snapshot = snapshot.to_str().unwrap();
    let corpus = data("corpus/docs.tsv");
    let (code, out, err) = cli(&["index", "--corpus", &corpus, "--index-path", snapshot]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("indexed 20 documents"));
    let (_, from_snapshot, _) = cli(&["search", "فرس", "--index-path", snapshot, "--json"]);
    let (_, from_corpus, _) = cli(&["search", "فرس", "--corpus", &corpus, "--json"]);
    assert_eq!(from_snapshot, from_corpus);
}

#[test]
fn eval_report_and_grid() {
    let args = [
        "eval",
        "--corpus",
        &data("corpus/docs.tsv"),
        "--queries",
        &data("corpus/queries.tsv"),
        "--qrels",
        &data("corpus/qrels.tsv"),
    ];
    let (code, out, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    assert!(
        out.contains("\n0\tq1\tbaseline\t20\t0.100000\t0.400000\t"),
        "{out}"
    );

    let mut grid = args.to_vec();
    grid.extend(["--grid", "relations=synonym+hyponym,none;max_senses=1,3"]);
    let (code, out, err) = cli(&grid);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().filter(|l| l.starts_with("# point")).count(), 4);
}

#[test]
fn errors_and_exit_codes() {
    let (code, _, err) = cli(&["search"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, _) = cli(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, err) = cli(&["--set", "max_senses=lots", "expand", "درس"]);
    assert_eq!(code, 1);
    assert!(err.contains("max_senses"), "{err}");
    let (code, _, err) = cli(&["search", "فرس"]);
    assert_eq!(code, 1);
    assert!(err.contains("--corpus"), "{err}");
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("serve"));
}

#[test]
fn binary_exit_codes_and_env_overrides() {
    let bin = env!("CARGO_BIN_EXE_qamar");
    let status = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(!status.stderr.is_empty());

    let output = Command::new(bin)
        .args(["search", "--no-expand", "فرس"])
        .env("QAMAR_LEXDB", data("lexdb"))
        .env("QAMAR_AWN", "/nonexistent")
        .env("QAMAR_CORPUS", data("corpus/docs.tsv"))
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(String::from_utf8_lossy(&output.stdout).starts_with("query\tفرس"));
}
