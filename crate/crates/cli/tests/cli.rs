//! End-to-end runs of the `lakescout` binary on a small generated lake.

use std::path::PathBuf;
use std::process::{Command, Output};

fn lakescout() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lakescout"))
}

fn run(args: &[&str]) -> Output {
    lakescout().args(args).output().expect("spawn lakescout")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Workspace {
    _dir: tempfile::TempDir,
    lake: PathBuf,
    profiles: PathBuf,
    model: PathBuf,
    truth: PathBuf,
}

/// Generate, profile and train once; most tests only read the artifacts.
fn workspace() -> &'static Workspace {
    use std::sync::OnceLock;
    static WS: OnceLock<Workspace> = OnceLock::new();
    WS.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let lake = dir.path().join("lake");
        let profiles = dir.path().join("profiles");
        let model = dir.path().join("model.json");

        let out = run(&[
            "gen",
            "--out",
            lake.to_str().unwrap(),
            "--files",
            "10",
            "--queries",
            "4",
            "--semantic",
            "6",
            "--syntactic",
            "2",
            "--seed",
            "7",
        ]);
        assert!(out.status.success(), "gen failed: {out:?}");

        let out = run(&[
            "profile",
            lake.to_str().unwrap(),
            "--out",
            profiles.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "profile failed: {out:?}");

        let out = run(&[
            "train",
            lake.to_str().unwrap(),
            "--profiles",
            profiles.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--pairs",
            "800",
            "--min-spearman",
            "0.5",
            "--seed",
            "42",
        ]);
        assert!(out.status.success(), "train failed: {out:?}");

        Workspace {
            truth: lake.join("truth").join("ground_truth.csv"),
            _dir: dir,
            lake,
            profiles,
            model,
        }
    })
}

#[test]
fn gen_reduced_reference_needs_enough_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "gen",
        "--out",
        dir.path().join("x").to_str().unwrap(),
        "--files",
        "2",
        "--queries",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn profile_outputs_are_idempotent() {
    let ws = workspace();
    let again = ws.profiles.parent().unwrap().join("profiles2");
    let out = run(&[
        "profile",
        ws.lake.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for entry in std::fs::read_dir(&ws.profiles).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(again.join(name)).unwrap(),
            "{name:?} differs between runs"
        );
    }
}

#[test]
fn query_table_and_json() {
    let ws = workspace();
    let base = [
        "query",
        "--profiles",
        ws.profiles.to_str().unwrap(),
        "--model",
        ws.model.to_str().unwrap(),
        "--dataset",
        "synq00",
        "--column",
        "q000",
        "-k",
        "5",
    ];
    let out = run(&base);
    assert!(out.status.success());
    assert!(stdout(&out).contains("rank"));

    let mut json_args = base.to_vec();
    json_args.push("--json");
    let out = run(&json_args);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["rank"], 1);
    assert!(rows[0]["score"].as_f64().unwrap() >= rows[4]["score"].as_f64().unwrap());
    // The strongest planted candidate wins.
    assert_eq!(rows[0]["column"], "s000x00");
}

#[test]
fn query_exact_matches_top_candidate() {
    let ws = workspace();
    let out = run(&[
        "query",
        "--exact",
        "--lake",
        ws.lake.to_str().unwrap(),
        "--dataset",
        "synq00",
        "--column",
        "q000",
        "-k",
        "3",
        "--json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["column"], "s000x00");
}

#[test]
fn query_unknown_column_exits_2() {
    let ws = workspace();
    let out = run(&[
        "query",
        "--profiles",
        ws.profiles.to_str().unwrap(),
        "--model",
        ws.model.to_str().unwrap(),
        "--dataset",
        "synq00",
        "--column",
        "missing",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn query_k_caps_at_candidate_count() {
    let ws = workspace();
    let out = run(&[
        "query",
        "--profiles",
        ws.profiles.to_str().unwrap(),
        "--model",
        ws.model.to_str().unwrap(),
        "--dataset",
        "synq00",
        "--column",
        "q000",
        "-k",
        "100000",
        "--json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let n = rows.as_array().unwrap().len();
    // 4 queries + 24 candidates + 8 decoys + pads, minus the query's own file.
    assert!(n > 10 && n < 60, "{n} candidates");
}

#[test]
fn eval_reports_and_study() {
    let ws = workspace();
    let json_path = ws.lake.parent().unwrap().join("report.json");
    let csv_path = ws.lake.parent().unwrap().join("report.csv");
    let out = run(&[
        "eval",
        "--lake",
        ws.lake.to_str().unwrap(),
        "--truth",
        ws.truth.to_str().unwrap(),
        "--model",
        ws.model.to_str().unwrap(),
        "--kmax",
        "6",
        "--study",
        "--report-json",
        json_path.to_str().unwrap(),
        "--report-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("precision"));
    assert!(text.contains("multiset_jaccard"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["queries_evaluated"], 4);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("k,precision,recall"));
}

#[test]
fn fit_recovers_parameters() {
    // Samples via the binary's own quality CDF shape: uniform grid quantiles
    // of a truncated normal written as CSV, one variable per column.
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    // j column: all mass at 0.3; k column: spread.
    let mut text = String::from("j,k\n");
    for i in 0..2000 {
        let u = (i as f64 + 0.5) / 2000.0;
        // Triangle-ish spread around 0.45 for k, constant for j.
        let k = (0.45 + 0.2 * (u - 0.5)).clamp(0.0, 1.0);
        text.push_str(&format!("0.3,{k}\n"));
    }
    std::fs::write(&samples, text).unwrap();
    let out = run(&["fit", samples.to_str().unwrap(), "--grid-step", "0.05"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("j: mu=0.3"), "{text}");
    assert!(text.contains("k: mu="), "{text}");
}

#[test]
fn config_file_overrides_flags() {
    let ws = workspace();
    let cfg_path = ws.lake.parent().unwrap().join("config.json");
    std::fs::write(
        &cfg_path,
        format!(
            r#"{{"profiles_dir": {:?}, "model_path": {:?}}}"#,
            ws.profiles, ws.model
        ),
    )
    .unwrap();
    // Flags point nowhere; the config file must win.
    let out = lakescout()
        .args([
            "query",
            "--config",
            cfg_path.to_str().unwrap(),
            "--profiles",
            "/nonexistent",
            "--model",
            "/nonexistent.json",
            "--dataset",
            "synq00",
            "--column",
            "q000",
            "--json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");

    // Same through the environment variable fallback.
    let out = lakescout()
        .env("LAKESCOUT_CONFIG", cfg_path.to_str().unwrap())
        .args(["query", "--dataset", "synq00", "--column", "q000", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn strictness_is_validated() {
    let out = run(&[
        "--strictness",
        "0.3",
        "query",
        "--dataset",
        "a",
        "--column",
        "b",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("strictness"), "{err}");
}

#[test]
fn bad_arguments_exit_2() {
    let out = run(&["query", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["profile", "/nonexistent-lake", "--out", "/tmp/unused-out"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_scales_planted_structure_to_file_budget() {
    let dir = tempfile::tempdir().unwrap();
    let lake = dir.path().join("lake");
    let out = run(&[
        "gen",
        "--out",
        lake.to_str().unwrap(),
        "--files",
        "10",
        "--size",
        "1MB",
    ]);
    assert!(out.status.success(), "{out:?}");
    let csvs = std::fs::read_dir(&lake)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().map(|x| x == "csv").unwrap_or(false))
        .count();
    assert_eq!(csvs, 10);
    for entry in std::fs::read_dir(&lake).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "csv").unwrap_or(false) {
            let bytes = std::fs::metadata(&path).unwrap().len() as f64;
            assert!((bytes - 1048576.0).abs() <= 0.05 * 1048576.0, "{bytes}");
        }
    }
    assert!(lake.join("truth").join("ground_truth.csv").exists());
}

#[test]
fn gen_filler_preset_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let lake = dir.path().join("lake");
    let out = run(&[
        "gen",
        "--preset",
        "filler",
        "--files",
        "3",
        "--size",
        "128KB",
        "--out",
        lake.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let mut n = 0;
    for entry in std::fs::read_dir(&lake).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "csv").unwrap_or(false) {
            let bytes = std::fs::metadata(&path).unwrap().len() as f64;
            assert!((bytes - 131072.0).abs() <= 0.05 * 131072.0, "{bytes}");
            n += 1;
        }
    }
    assert_eq!(n, 3);
}

