//! End-to-end checks of the `bugforge` binary: exit codes, output
//! streams, and determinism under explicit seeds.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bugforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bugforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr_of(out));
}

const TINY_JAVA: &str = "public class Tiny {
    public int biggest(int a, int b) {
        if (a == b) {
            return a;
        }
        int max = a;
        if (b > a) {
            max = b;
        }
        return max;
    }
}
";

#[test]
fn no_arguments_is_a_usage_error() {
    let out = bugforge(&[]);
    assert_code(&out, 2);
}

#[test]
fn taxonomy_list_prints_both_catalogs() {
    let out = bugforge(&["taxonomy", "list", "--study", "study1"]);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 18);
    assert!(text.contains("Confusing = with =="));

    let out = bugforge(&["taxonomy", "list", "--study", "study2"]);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("HighBounds"));
}

#[test]
fn inject_mutates_deterministically_and_round_trips_through_classify() {
    let dir = tempfile::tempdir().unwrap();
    let original = dir.path().join("Tiny.java");
    fs::write(&original, TINY_JAVA).unwrap();
    let record_path = dir.path().join("record.json");

    let args = [
        "inject",
        "--file",
        original.to_str().unwrap(),
        "--bug",
        "A",
        "--seed",
        "7",
        "--record",
        record_path.to_str().unwrap(),
    ];
    let first = bugforge(&args);
    assert_code(&first, 0);
    let mutated_text = stdout_of(&first);
    assert_ne!(mutated_text, TINY_JAVA, "injection changed the program");

    // Same seed, same bytes.
    let second = bugforge(&args);
    assert_eq!(stdout_of(&second), mutated_text);

    // The record landed in the side channel, not stdout.
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&record_path).unwrap()).unwrap();
    assert_eq!(record["bug"], "A");
    assert_eq!(record["seed"], 7);

    // The classifier recovers the injected code.
    let mutated = dir.path().join("TinyMutated.java");
    fs::write(&mutated, &mutated_text).unwrap();
    let verdict = bugforge(&[
        "classify",
        "--original",
        original.to_str().unwrap(),
        "--mutated",
        mutated.to_str().unwrap(),
    ]);
    assert_code(&verdict, 0);
    assert_eq!(stdout_of(&verdict).trim(), "A");
}

#[test]
fn inject_without_applicable_sites_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let original = dir.path().join("Tiny.java");
    fs::write(&original, TINY_JAVA).unwrap();
    let out = bugforge(&[
        "inject",
        "--file",
        original.to_str().unwrap(),
        "--bug",
        "HighBounds",
    ]);
    assert_code(&out, 1);
    assert!(stderr_of(&out).starts_with("error: "));
}

#[test]
fn inject_on_a_missing_file_is_a_domain_error() {
    let out = bugforge(&["inject", "--file", "/nonexistent/F.java", "--bug", "A"]);
    assert_code(&out, 1);
    assert!(stderr_of(&out).lines().count() == 1);
}

#[test]
fn classify_needs_exactly_one_mode() {
    let out = bugforge(&["classify"]);
    assert_code(&out, 2);
    assert!(stderr_of(&out).contains("pair mode"));
}

#[test]
fn generate_writes_seeded_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = bugforge(&[
            "generate",
            "--study",
            "study1",
            "--n",
            "20",
            "--seed",
            "5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_code(&out, 0);
        assert!(stderr_of(&out).contains("seed: 5"));
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap(), "same seed, same corpus");
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 20);
}

#[test]
fn classify_labels_a_whole_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let labels = dir.path().join("labels.csv");
    let out = bugforge(&[
        "generate",
        "--study",
        "study2",
        "--n",
        "10",
        "--out",
        corpus.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let out = bugforge(&[
        "classify",
        "--corpus",
        corpus.to_str().unwrap(),
        "--study",
        "study2",
        "--out",
        labels.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = fs::read_to_string(&labels).unwrap();
    assert_eq!(text.lines().count(), 11, "header plus one row per item");
    assert!(text.starts_with("item_id,label,combination"));
}

fn write_study2_fixtures(dir: &Path) -> (String, String) {
    let expected = dir.join("expected.csv");
    fs::write(
        &expected,
        "code,percent\nHighBounds,64.6\nLowMiss,20.9\nHighMiss,7.5\nLowBounds,6.9\n",
    )
    .unwrap();
    let observed = dir.join("observed.csv");
    fs::write(
        &observed,
        "code,count\nHighBounds,30\nLowMiss,21\nHighMiss,19\nLowBounds,21\nX,6\n",
    )
    .unwrap();
    (
        observed.to_str().unwrap().to_string(),
        expected.to_str().unwrap().to_string(),
    )
}

#[test]
fn stats_gof_prints_the_test_line() {
    let dir = tempfile::tempdir().unwrap();
    let (observed, expected) = write_study2_fixtures(dir.path());
    let out = bugforge(&[
        "stats",
        "gof",
        "--observed",
        &observed,
        "--expected",
        &expected,
        "--binning",
        "drop-zero",
    ]);
    assert_code(&out, 0);
    let line = stdout_of(&out);
    assert!(line.starts_with("chi2="), "got: {line}");
    assert!(line.contains(" df=3 "), "got: {line}");
    assert!(line.contains(" p="), "got: {line}");
}

#[test]
fn stats_gof_strict_rejects_unexpected_mass() {
    let dir = tempfile::tempdir().unwrap();
    let (observed, expected) = write_study2_fixtures(dir.path());
    let out = bugforge(&[
        "stats",
        "gof",
        "--observed",
        &observed,
        "--expected",
        &expected,
        "--binning",
        "strict",
    ]);
    assert_code(&out, 1);
    assert!(stderr_of(&out).contains("zero-expected"));
}

#[test]
fn stats_kappa_reports_perfect_agreement_for_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let rows = "item_id,label,combination\n\
                item-00001,C,\n\
                item-00002,A,\n\
                item-00003,LowMiss,HighBounds\n";
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, rows).unwrap();
    fs::write(&b, rows).unwrap();
    let out = bugforge(&[
        "stats",
        "kappa",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let line = stdout_of(&out);
    assert!(line.starts_with("kappa=1 "), "got: {line}");
    assert!(line.trim_end().ends_with("n=3"), "got: {line}");
}

#[test]
fn replicate_study1_writes_a_full_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let out = bugforge(&[
        "replicate",
        "study1",
        "--backend",
        "mock",
        "--trials",
        "1",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("seed: 42"), "default seed is echoed: {text}");
    assert!(text.contains("items: 75 (failures: 0)"), "got: {text}");
    for file in ["corpus.jsonl", "frequencies.csv", "report.md", "config.json"] {
        assert!(run_dir.join(file).exists(), "{file} missing");
    }
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["planned_items"], 75);
    assert_eq!(config["master_seed"], 42);
}

#[test]
fn report_tabulates_an_existing_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out_dir = dir.path().join("report");
    let out = bugforge(&[
        "generate",
        "--study",
        "study1",
        "--n",
        "30",
        "--out",
        corpus.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let out = bugforge(&[
        "report",
        "--corpus",
        corpus.to_str().unwrap(),
        "--study",
        "study1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("items: 30"), "got: {text}");
    assert!(text.contains("all: n 30"), "untagged corpora report as `all`: {text}");
    assert!(out_dir.join("frequencies.csv").exists());
    assert!(out_dir.join("report.md").exists());
}
