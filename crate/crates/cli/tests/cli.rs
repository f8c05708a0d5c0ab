use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ascal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ascal")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = ascal(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let (n, seed) = (n.to_string(), seed.to_string());
    ok(&["simulate", "--n-pos", &n, "--n-neg", &n, "--seed", &seed, "--output", p(&path)]);
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn missing_input_is_an_io_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let out = ascal(&["calibrate", "--input", p(&dir.path().join("absent.csv")), "--model-out", p(&model)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!model.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_rows_and_models_have_their_own_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "similarity,label\n0.2,1\nabc,-1\n").unwrap();
    assert_eq!(ascal(&["evaluate", "--input", p(&bad)]).status.code(), Some(4));

    let range = dir.path().join("range.csv");
    std::fs::write(&range, "0.2,1\n1.5,-1\n").unwrap();
    assert_eq!(ascal(&["evaluate", "--input", p(&range)]).status.code(), Some(5));

    let one_class = dir.path().join("one.csv");
    std::fs::write(&one_class, "0.2,1\n0.5,1\n").unwrap();
    let model = dir.path().join("m.json");
    let out = ascal(&["calibrate", "--input", p(&one_class), "--model-out", p(&model)]);
    assert_eq!(out.status.code(), Some(6));
    assert!(!model.exists());

    let data = simulate(dir.path(), "d.csv", 50, 1);
    std::fs::write(&model, r#"{"format":"ascal-calibrator","version":9,"kind":"asc","params":{}}"#).unwrap();
    let out = ascal(&["evaluate", "--input", p(&data), "--model-in", p(&model)]);
    assert_eq!(out.status.code(), Some(7));

    let out = ascal(&["evaluate", "--input", p(&data), "--tau-mode", "far-target"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_model_matches_uncalibrated_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", 300, 2);
    let model = dir.path().join("identity.json");
    std::fs::write(
        &model,
        r#"{"format":"ascal-calibrator","version":1,"kind":"asc","params":{"w":1.0,"b":0.0,"tau_raw":0.35,"tau_calibrated":0.35}}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    ok(&["evaluate", "--input", p(&data), "--model-in", p(&model), "--report-out", p(&report)]);
    let r = json(&report);
    let (before, after) = (&r["uncalibrated"], &r["calibrated"]);
    assert_eq!(before["accuracy"], after["accuracy"]);
    assert_eq!(before["verification"], after["verification"]);
    assert!((f(&before["ece"]["ece"]) - f(&after["ece"]["ece"])).abs() < 1e-12);
    assert!((f(&before["mean_confidence"]) - f(&after["mean_confidence"])).abs() < 1e-12);
}

#[test]
fn identity_optimal_data_keeps_its_ece() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "1,1\n-1,-1\n1,1\n-1,-1\n-1,-1\n").unwrap();
    let model = dir.path().join("m.json");
    let report = dir.path().join("r.json");
    ok(&["calibrate", "--input", p(&data), "--tau", "-0.2", "--model-out", p(&model), "--report-out", p(&report)]);
    let r = json(&report);
    assert!((f(&r["before"]["ece"]["ece"]) - f(&r["after"]["ece"]["ece"])).abs() < 1e-9);
    assert_eq!(f(&r["before"]["ece"]["ece"]), 0.0);
}

#[test]
fn calibrate_prints_the_ece_that_evaluate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", 1000, 3);
    for kind in ["asc", "histogram", "isotonic"] {
        let model = dir.path().join(format!("{kind}.json"));
        let out = ok(&["calibrate", "--input", p(&data), "--calibrator", kind, "--model-out", p(&model)]);
        let stdout = String::from_utf8(out.stdout).unwrap();
        let line = stdout.lines().find(|l| l.starts_with("ece")).unwrap();
        let nums: Vec<f64> = line
            .rsplit(':')
            .next()
            .unwrap()
            .split("->")
            .map(|x| x.trim().parse().unwrap())
            .collect();

        let out = ok(&["evaluate", "--input", p(&data), "--model-in", p(&model)]);
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!((nums[0] - f(&r["uncalibrated"]["ece"]["ece"])).abs() <= 1e-12, "{kind}");
        assert!((nums[1] - f(&r["calibrated"]["ece"]["ece"])).abs() <= 1e-12, "{kind}");
        assert_eq!(r["calibrator"], kind);
    }
}

#[test]
fn evaluate_report_is_consistent_and_has_a_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.jsonl", 400, 4);
    let model = dir.path().join("m.json");
    ok(&["calibrate", "--input", p(&data), "--far-target", "0.05", "--model-out", p(&model)]);
    let report = dir.path().join("r.json");
    let svg = dir.path().join("r.svg");
    ok(&[
        "evaluate", "--input", p(&data), "--model-in", p(&model), "--scheme", "equal-frequency",
        "--bins", "7", "--report-out", p(&report), "--diagram-out", p(&svg),
    ]);
    let r = json(&report);
    for side in ["uncalibrated", "calibrated"] {
        let e = &r[side]["ece"];
        let n: u64 = e["bins"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
        assert_eq!(n, 800);
        let recomputed: f64 = e["bins"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| b["count"].as_f64().unwrap() / 800.0 * (f(&b["accuracy"]) - f(&b["mean_confidence"])).abs())
            .sum();
        assert!((recomputed - f(&e["ece"])).abs() < 1e-12);
        let auc = f(&r[side]["verification"]["auc"]);
        assert!(auc > 0.5 && auc <= 1.0);
    }
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn perfectly_separated_confident_data_has_zero_ece() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "similarity,label\n1,1\n1,1\n-1,-1\n-1,-1\n").unwrap();
    let out = ok(&["evaluate", "--input", p(&data), "--tau", "0"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(f(&r["uncalibrated"]["ece"]["ece"]), 0.0);
    assert_eq!(f(&r["uncalibrated"]["accuracy"]), 1.0);
    assert_eq!(r["calibrator"], "none");
    assert!(r["calibrated"].is_null());
}

#[test]
fn kfold_reports_each_fold_and_their_mean() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "d.csv", 500, 5);
    let out = ok(&["kfold", "--input", p(&data), "--folds", "5", "--seed", "9"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let folds = r["folds"].as_array().unwrap();
    assert_eq!(folds.len(), 5);
    assert_eq!(r["folds_source"], "stratified");
    let tested: u64 = folds.iter().map(|f| f["n_test"].as_u64().unwrap()).sum();
    assert_eq!(tested, 1000);
    for key in ["ece_before", "ece_after", "accuracy_before", "mean_confidence_after"] {
        let mean = folds.iter().map(|row| f(&row[key])).sum::<f64>() / 5.0;
        assert!((mean - f(&r["mean"][key])).abs() <= 1e-12, "{key}");
    }
    for row in folds {
        assert_eq!(row["accuracy_before"], row["accuracy_after"]);
    }
}

#[test]
fn kfold_uses_fold_ids_from_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::from("similarity,label,fold\n");
    for i in 0..60 {
        let label = if i % 2 == 0 { 1 } else { -1 };
        let s = if label == 1 { 0.3 + (i % 7) as f64 * 0.05 } else { 0.1 + (i % 5) as f64 * 0.05 };
        text.push_str(&format!("{s},{label},{}\n", i % 3));
    }
    std::fs::write(&data, text).unwrap();
    let out = ok(&["kfold", "--input", p(&data), "--calibrator", "isotonic"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["k"], 3);
    assert_eq!(r["folds_source"], "input");
}

#[test]
fn kfold_with_too_few_per_class_fails() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "0.9,1\n0.8,1\n0.1,-1\n0.2,-1\n0.3,-1\n").unwrap();
    let out = ascal(&["kfold", "--input", p(&data), "--folds", "5"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(out.stdout.is_empty());
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(simulate(dir.path(), "a.csv", 200, 7)).unwrap();
    let b = std::fs::read(simulate(dir.path(), "b.csv", 200, 7)).unwrap();
    let c = std::fs::read(simulate(dir.path(), "c.csv", 200, 8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let jsonl = simulate(dir.path(), "d.jsonl", 10, 7);
    let first = std::fs::read_to_string(jsonl).unwrap();
    let row: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(row["label"], 1);
}
