//! Command-level checks: artifact layout, exit codes and the predict path.

use std::path::Path;
use std::process::{Command, Output};

fn lexigraph(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexigraph"))
        .args(args)
        .current_dir(cwd)
        .env("LEXIGRAPH_LOG", "error")
        .output()
        .expect("binary runs")
}

fn synth_fixture(root: &Path) {
    let out = lexigraph(
        &[
            "synth",
            "--children",
            "25",
            "--observations-per-child",
            "6",
            "--vocab",
            "24",
            "--seed",
            "3",
            "--out",
            root.join("data").to_str().unwrap(),
        ],
        root,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn build_graphs_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixture(dir.path());
    let out = lexigraph(
        &[
            "build-graphs",
            "--norms-dir",
            dir.path().join("data/norms").to_str().unwrap(),
            "--semantic-dir",
            dir.path().join("data/semantic").to_str().unwrap(),
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--out",
            dir.path().join("graphs").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let graphs = dir.path().join("graphs");
    assert!(graphs.join("lexicon.csv").is_file());
    assert!(graphs.join("coverage.json").is_file());
    assert!(graphs.join("run_config.json").is_file());
    assert!(graphs.join("layers/stats.json").is_file());
    let csvs: Vec<_> = std::fs::read_dir(graphs.join("layers"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(
        csvs.len(),
        13,
        "two semantic plus eleven sensorimotor layers"
    );
    for entry in csvs {
        let sidecar = std::path::PathBuf::from(format!("{}.meta.json", entry.path().display()));
        assert!(sidecar.is_file(), "missing sidecar for {:?}", entry.path());
    }
}

#[test]
fn prepare_reports_split_counts() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixture(dir.path());
    let out = lexigraph(
        &[
            "prepare",
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--mode",
            "pessimistic",
            "--seq-len",
            "4",
            "--seed",
            "9",
            "--out",
            dir.path().join("prep").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = std::fs::read_to_string(dir.path().join("prep/dataset.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    let manifest = &value["manifest"];
    let children = manifest["children"].as_array().unwrap();
    assert_eq!(children.len(), 25);
    // split partitions the windows without losing or duplicating any;
    // all-empty snapshots have no CSV rows, so per-child counts come from
    // the manifest rather than a fixed formula
    let expected: u64 = children
        .iter()
        .map(|c| c["sequences"].as_u64().unwrap())
        .sum();
    let total = manifest["train_sequences"].as_u64().unwrap()
        + manifest["validation_sequences"].as_u64().unwrap()
        + manifest["test_sequences"].as_u64().unwrap();
    assert_eq!(total, expected);
    assert!(total > 0);
    assert_eq!(manifest["repair_mode"].as_str().unwrap(), "pessimistic");
}

#[test]
fn full_pipeline_predicts_for_every_child() {
    let dir = tempfile::tempdir().unwrap();
    synth_fixture(dir.path());
    let run_dir = dir.path().join("run");
    let out = lexigraph(
        &[
            "train",
            "--norms-dir",
            dir.path().join("data/norms").to_str().unwrap(),
            "--semantic-dir",
            dir.path().join("data/semantic").to_str().unwrap(),
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--epochs",
            "5",
            "--out",
            run_dir.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = lexigraph(
        &[
            "predict",
            "--models",
            run_dir.to_str().unwrap(),
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--top",
            "5",
            "--out",
            dir.path().join("pred").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = std::fs::read_to_string(dir.path().join("pred/predictions.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["children"].as_array().unwrap().len(), 25);
    assert_eq!(value["skipped_children"].as_array().unwrap().len(), 0);
    let first = &value["children"][0];
    assert_eq!(first["per_layer"].as_object().unwrap().len(), 13);

    // evaluating every partition also works
    let out = lexigraph(
        &[
            "evaluate",
            "--models",
            run_dir.to_str().unwrap(),
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--split",
            "all",
            "--out",
            dir.path().join("eval").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(dir.path().join("eval/report.md")).unwrap();
    assert_eq!(
        report.lines().filter(|l| l.starts_with('|')).count(),
        16,
        "14 rows plus header rows"
    );
}

#[test]
fn missing_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = lexigraph(
        &[
            "prepare",
            "--observations",
            dir.path().join("absent.csv").to_str().unwrap(),
            "--out",
            dir.path().join("prep").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn empty_training_set_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = lexigraph(
        &[
            "synth",
            "--children",
            "4",
            "--observations-per-child",
            "3",
            "--vocab",
            "24",
            "--out",
            dir.path().join("data").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    // three snapshots per child cannot fill a four-step window
    let out = lexigraph(
        &[
            "train",
            "--norms-dir",
            dir.path().join("data/norms").to_str().unwrap(),
            "--semantic-dir",
            dir.path().join("data/semantic").to_str().unwrap(),
            "--observations",
            dir.path().join("data/observations.csv").to_str().unwrap(),
            "--epochs",
            "2",
            "--out",
            dir.path().join("run").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_value_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = lexigraph(
        &[
            "prepare",
            "--observations",
            "whatever.csv",
            "--mode",
            "hopeful",
            "--out",
            dir.path().join("prep").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(!out.status.success());
}
