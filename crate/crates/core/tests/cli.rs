mod common;

use std::fs;
use std::process::Command;

use persuaide::cli::cli_main;

use common::{fixtures, ROW1, ROW2};

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("persuaide").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn conf(name: &str) -> String {
    fixtures().join(format!("{name}.conf")).display().to_string()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(cli(&[]).0, 1);
    assert_eq!(cli(&["frobnicate"]).0, 1);
    assert_eq!(cli(&["transform", "--config", "x.conf"]).0, 1);
    assert_eq!(cli(&["transform", "--config", "x.conf", "--text", "a", "--conllu", "b"]).0, 1);
    assert_eq!(cli(&["transform", "--config", "x.conf", "--text", "a", "--direction", "sideways"]).0, 1);
    assert_eq!(cli(&["transform", "--config", "x.conf", "--text", "a", "--top-k", "0"]).0, 1);
    let (code, _, err) = cli(&["index-quotes", "--quotes", "q", "--out", "o", "--parser", "{not json"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn help_and_version_exit_0() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["build-matrix", "index-quotes", "transform", "batch", "score"] {
        assert!(out.contains(sub), "{sub}");
    }
    assert_eq!(cli(&["--version"]).0, 0);
}

#[test]
fn resource_errors_exit_2() {
    let (code, _, err) = cli(&["transform", "--config", "/nonexistent.conf", "--text", ROW1]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, err) = cli(&["transform", "--config", &conf("slip"), "--matrix", "/nonexistent.matrix", "--text", ROW1]);
    assert_eq!(code, 2);
    assert!(err.contains("matrix_path"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conllu");
    fs::write(&bad, "1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n2\ty\ty\tX\t_\t_\t7\tdep\t_\t_\n").unwrap();
    let out = dir.path().join("m");
    let (code, _, err) = cli(&["build-matrix", "--corpus", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn adapter_errors_exit_3() {
    let (code, _, err) = cli(&["transform", "--config", &conf("slip"), "--text", "Nobody parsed this"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("no frozen parse"));

    let dir = tempfile::tempdir().unwrap();
    let quotes = dir.path().join("q.txt");
    fs::write(&quotes, "hello there\n").unwrap();
    let parser = r#"{"kind":"command","command":["sh","-c","echo broken >&2; exit 1"]}"#;
    let out = dir.path().join("idx");
    let (code, _, err) = cli(&["index-quotes", "--quotes", quotes.to_str().unwrap(), "--out", out.to_str().unwrap(), "--parser", parser]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn transform_prints_summary_and_json() {
    let (code, out, err) = cli(&["transform", "--config", &conf("slip"), "--text", ROW1]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("Transformed:         Think pink but don't match it"), "{out}");
    assert!(out.contains("With sentiment:      Think gleaming pink but don't match it"));

    let (code, out, _) = cli(&["transform", "--config", &conf("outfit"), "--text", ROW2, "--json"]);
    assert_eq!(code, 0);
    let trace: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(trace["final_text"].as_str().unwrap().contains("stylish clothes"));
    assert!(trace.get("timings").is_some());
}

#[test]
fn transform_flags_override_config() {
    let (_, out, _) = cli(&["transform", "--config", &conf("slip"), "--text", ROW1, "--json", "--no-sentiment", "--top-k", "1"]);
    let trace: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(trace["final_text"], "Think pink but don't match it");
    assert_eq!(trace["matched_quotes"].as_array().unwrap().len(), 1);

    let (_, out, _) = cli(&["transform", "--config", &conf("slip"), "--text", ROW1, "--json", "--min-similarity", "2"]);
    let trace: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(trace["final_text"], ROW1);

    let (_, out, _) = cli(&["transform", "--config", &conf("slip"), "--text", ROW1, "--json", "--direction", "quote_modified"]);
    let trace: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(trace["direction_used"], "quote_modified");
}

#[test]
fn transform_accepts_preparsed_input() {
    let dir = tempfile::tempdir().unwrap();
    let all = fs::read_to_string(fixtures().join("parses.conllu")).unwrap();
    let first = all.split("\n\n").next().unwrap();
    let path = dir.path().join("in.conllu");
    fs::write(&path, format!("{first}\n\n")).unwrap();
    let (code, out, err) = cli(&["transform", "--config", &conf("slip"), "--conllu", path.to_str().unwrap(), "--json", "--no-timings"]);
    assert_eq!(code, 0, "{err}");
    let (_, from_text, _) = cli(&["transform", "--config", &conf("slip"), "--text", ROW1, "--json", "--no-timings"]);
    assert_eq!(out, from_text);
}

#[test]
fn no_timings_output_is_reproducible() {
    let args = ["transform", "--config", &conf("slip"), "--text", ROW1, "--json", "--no-timings"];
    let (_, a, _) = cli(&args);
    let (_, b, _) = cli(&args);
    assert_eq!(a, b);
    assert!(!a.contains("timings"));
}

#[test]
fn score_prints_the_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let all = fs::read_to_string(fixtures().join("parses.conllu")).unwrap();
    let path = dir.path().join("in.conllu");
    fs::write(&path, format!("{}\n\n", all.split("\n\n").next().unwrap())).unwrap();
    let matrix = fixtures().join("fashion.matrix").display().to_string();
    let p = path.to_str().unwrap();
    let (code, out, _) = cli(&["score", "--matrix", &matrix, "--conllu", p, "--word", "6", "--candidate", "match"]);
    assert_eq!(code, 0);
    assert!(out.contains("child_of think"), "{out}");
    assert!(out.contains("f(match, it) = 10"), "{out}");
    assert!(out.contains("relations: 5"));
    let score: f64 = out.lines().last().unwrap().trim_start_matches("score: ").parse().unwrap();
    assert!((score - 231f64.powf(0.2)).abs() < 1e-12);
    assert_eq!(cli(&["score", "--matrix", &matrix, "--conllu", p, "--word", "99", "--candidate", "x"]).0, 1);
}

#[test]
fn batch_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, format!("{ROW1}\n\nNobody parsed this\n")).unwrap();
    let output = dir.path().join("out.jsonl");
    let (code, out, err) = cli(&[
        "batch", "--config", &conf("slip"), "--input", input.to_str().unwrap(), "--out", output.to_str().unwrap(), "--no-timings",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("wrote 2 records"));
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(&output).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["final_text"], "Think gleaming pink but don't match it");
    assert_eq!(lines[1]["line"], 3);
    assert_eq!(lines[1]["error"]["kind"], "adapter");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_persuaide");
    let output = Command::new(bin).arg("transform").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--config"));
    let output = Command::new(bin).args(["transform", "--config", &conf("slip"), "--text", ROW1]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&output.stdout).contains("gleaming"));
    let output = Command::new(bin).args(["transform", "--config", &conf("slip"), "--text", "unparsed words"]).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(output.stdout.is_empty());
}
