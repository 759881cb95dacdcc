mod common;

use std::fs;

use common::*;
use hitrocket::{evaluate, SyntheticKind};
use hitrocket_cli::pipeline::mean_var;
use serde_json::json;

fn half() -> serde_json::Value {
    json!({"preset": "0.5k", "seed": 3})
}

#[test]
fn transform_train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "tc", SyntheticKind::TwoClassFreq, 20, 96, 1);
    let mut cfg = config("tc", half(), json!({"kind": "ridge"}), 1);
    // Predicting on the training file itself.
    cfg["io"].as_object_mut().unwrap().remove("test_path");
    let path = write_config(dir.path(), "run.json", &cfg);
    let out = dir.path().join("out");

    let o = run_cmd("transform", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(printed(&o, "f_dimension").as_deref(), Some("528"));
    assert!(printed(&o, "transform_ms").is_some());
    assert!(out.join("train_features.csv").is_file());
    assert!(out.join("biases.json").is_file());
    assert!(!out.join("test_features.csv").exists());

    let o = run_cmd("train", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run_cmd("predict", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed_acc: f64 = printed(&o, "accuracy").unwrap().parse().unwrap();

    let (header, rows) = read_csv(&out.join("predictions.csv"));
    assert_eq!(header, ["row", "predicted", "score_0", "score_1"]);
    assert_eq!(rows.len(), 20);
    let features = hitrocket::FeatureMatrix::read_csv(fs::File::open(out.join("train_features.csv")).unwrap()).unwrap();
    let preds: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    let report = evaluate(&preds, &features.required_labels().unwrap()).unwrap();
    assert_eq!(printed_acc, report.accuracy);
    assert!(!out.join(".hitrocket.lock").exists());
}

#[test]
fn preset_3k_gives_3200_columns() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "ar", SyntheticKind::ArProcess, 6, 128, 2);
    let path = write_config(dir.path(), "run.json", &config("ar", json!({"preset": "3k"}), json!({"kind": "ridge"}), 1));
    let out = dir.path().join("out");
    let o = run_cmd("transform", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("test_features.csv"));
    assert_eq!(header.len(), 3201);
    assert_eq!(rows.len(), 6);
}

#[test]
fn missing_train_file_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "run.json", &config("absent", half(), json!({"kind": "ridge"}), 1));
    let out = dir.path().join("out");
    for cmd in ["transform", "bench"] {
        let o = run_cmd(cmd, &path, &out, None);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(stderr(&o).contains("absent_TRAIN.tsv"));
        assert!(!out.exists());
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "tc", SyntheticKind::TwoClassFreq, 8, 64, 1);
    let mut cfg = config("tc", half(), json!({"kind": "ridge"}), 1);
    cfg["unexpected"] = json!(true);
    let path = write_config(dir.path(), "bad.json", &cfg);
    let o = run_cmd("transform", &path, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unexpected"));

    let mut cfg = config("tc", half(), json!({"kind": "ridge"}), 1);
    cfg["io"].as_object_mut().unwrap().remove("train_path");
    let path = write_config(dir.path(), "nopath.json", &cfg);
    assert_eq!(run_cmd("transform", &path, &dir.path().join("out"), None).status.code(), Some(2));

    let path = write_config(dir.path(), "ok.json", &config("tc", half(), json!({"kind": "ridge"}), 1));
    let o = run_cmd("noise-sweep", &path, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run_cmd("transform", &path, &dir.path().join("out"), Some("many")).status.code(), Some(2));
    assert_eq!(run(&["frobnicate", "--config", "x"], None).status.code(), Some(2));
    assert_eq!(run(&["transform"], None).status.code(), Some(2));
}

#[test]
fn locked_output_dir_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "tc", SyntheticKind::TwoClassFreq, 8, 64, 1);
    let path = write_config(dir.path(), "run.json", &config("tc", half(), json!({"kind": "ridge"}), 1));
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join(".hitrocket.lock"), "1").unwrap();
    let o = run_cmd("transform", &path, &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("in use"));
    assert!(!out.join("train_features.csv").exists());
}

#[test]
fn layout_mismatch_and_corrupt_model_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "tc", SyntheticKind::TwoClassFreq, 12, 96, 1);
    let small = write_config(dir.path(), "small.json", &config("tc", half(), json!({"kind": "ridge"}), 1));
    let big = write_config(dir.path(), "big.json", &config("tc", json!({"preset": "3k"}), json!({"kind": "ridge"}), 1));
    let out = dir.path().join("out");
    assert!(run_cmd("transform", &small, &out, None).status.success());
    assert!(run_cmd("train", &small, &out, None).status.success());
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    let model_hash = model["layout"]["hash"].as_str().unwrap().to_owned();

    assert!(run_cmd("transform", &big, &out, None).status.success());
    let o = run_cmd("predict", &big, &out, None);
    assert_eq!(o.status.code(), Some(3));
    let features = hitrocket::FeatureMatrix::read_csv(fs::File::open(out.join("test_features.csv")).unwrap()).unwrap();
    let err = stderr(&o);
    assert!(err.contains(&model_hash) && err.contains(&features.layout_hash()), "{err}");

    fs::write(out.join("model.json"), "{\"version\": 1, \"kind\": \"ridge\", \"weights\": [").unwrap();
    let o = run_cmd("predict", &big, &out, None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn bench_aggregates_recompute_from_repeats() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "ar", SyntheticKind::ArProcess, 16, 96, 4);
    let path = write_config(dir.path(), "run.json", &config("ar", half(), json!({"kind": "ridge"}), 10));
    let out = dir.path().join("out");
    let o = run_cmd("bench", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bench_report.json")).unwrap()).unwrap();
    let repeats = report["repeats"].as_array().unwrap();
    assert_eq!(repeats.len(), 10);
    let f1: Vec<f64> = repeats.iter().map(|r| r["report"]["macro_f1"].as_f64().unwrap()).collect();
    let seeds: Vec<u64> = repeats.iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (3..13).collect::<Vec<_>>());
    let arith = f1.iter().sum::<f64>() / 10.0;
    assert!((report["aggregate"]["mean_f1"].as_f64().unwrap() - arith).abs() <= 1e-12);
    let (m, v) = mean_var(&f1);
    assert_eq!(report["aggregate"]["mean_f1"].as_f64().unwrap(), m);
    assert_eq!(report["aggregate"]["var_f1"].as_f64().unwrap(), v);
    assert!(report["repeats"][0]["report"].get("timing").is_none());
    assert!(report["config"]["io"].get("output_dir").is_none());
    let timing: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bench_timing.json")).unwrap()).unwrap();
    assert_eq!(timing["repeats"].as_array().unwrap().len(), 10);
    let (_, rows) = read_csv(&out.join("bench_repeats.csv"));
    assert_eq!(rows.len(), 10);

    // The echoed config reruns the same experiment.
    let echo = write_config(dir.path(), "echo.json", &report["config"]);
    let again = dir.path().join("again");
    assert!(run_cmd("bench", &echo, &again, None).status.success());
    assert_eq!(
        fs::read(out.join("bench_report.json")).unwrap(),
        fs::read(again.join("bench_report.json")).unwrap()
    );
}

#[test]
fn clean_sweep_row_matches_bench() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "tc", SyntheticKind::TwoClassFreq, 16, 96, 5);
    let mut cfg = config("tc", half(), json!({"kind": "logistic"}), 3);
    cfg["noise"] = json!({"snr_list_db": [20, "none"], "seed": 8});
    let path = write_config(dir.path(), "run.json", &cfg);
    let out = dir.path().join("out");
    assert!(run_cmd("bench", &path, &out, None).status.success());
    let o = run_cmd("noise-sweep", &path, &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let bench: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bench_report.json")).unwrap()).unwrap();
    let sweep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("noise_sweep.json")).unwrap()).unwrap();
    let rows = sweep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["snr_db"], "none");
    let bench_f1: Vec<f64> = bench["repeats"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["report"]["macro_f1"].as_f64().unwrap())
        .collect();
    let clean: Vec<f64> = rows[1]["f1"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(clean, bench_f1);
    assert_eq!(rows[1]["mean_f1"], bench["aggregate"]["mean_f1"]);
    let (header, csv_rows) = read_csv(&out.join("noise_sweep.csv"));
    assert_eq!(header, ["snr_db", "mean_f1", "var_f1", "f1_0", "f1_1", "f1_2"]);
    assert_eq!(csv_rows[0][0], "20");
    assert_eq!(csv_rows[1][0], "none");
}

#[test]
fn one_class_commands() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), "blob", SyntheticKind::BlobOutliers, 60, 96, 6);
    let path = write_config(
        dir.path(),
        "run.json",
        &config("blob", half(), json!({"kind": "ls_ocsvm", "target_recall": 0.9}), 1),
    );
    let out = dir.path().join("out");
    for cmd in ["transform", "train", "predict", "bench"] {
        let o = run_cmd(cmd, &path, &out, None);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
    let (header, rows) = read_csv(&out.join("predictions.csv"));
    assert_eq!(header, ["row", "predicted", "score_score"]);
    assert_eq!(rows.len(), 66);
    assert!(rows.iter().all(|r| r[1] == "inlier" || r[1] == "outlier"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bench_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["classifier"]["positive_label"], serde_json::Value::Null);
    assert_eq!(report["repeats"][0]["report"]["classes"], json!(["inlier", "outlier"]));
}
