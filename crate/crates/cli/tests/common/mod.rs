#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hitrocket::{make_synthetic, save_tsv, SyntheticKind};
use sha2::{Digest, Sha256};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hitrocket")
}

/// Writes `<name>_TRAIN.tsv` and `<name>_TEST.tsv` generated from different seeds.
pub fn write_dataset(dir: &Path, name: &str, kind: SyntheticKind, n: usize, length: usize, seed: u64) {
    let train = make_synthetic(kind, n, length, seed).unwrap();
    let test = make_synthetic(kind, n, length, seed + 1000).unwrap();
    save_tsv(&train, dir.join(format!("{name}_TRAIN.tsv"))).unwrap();
    save_tsv(&test, dir.join(format!("{name}_TEST.tsv"))).unwrap();
}

/// A config document for the dataset written by [`write_dataset`].
pub fn config(name: &str, transform: serde_json::Value, classifier: serde_json::Value, repeats: usize) -> serde_json::Value {
    serde_json::json!({
        "transform": transform,
        "classifier": classifier,
        "io": {
            "train_path": format!("{name}_TRAIN.tsv"),
            "test_path": format!("{name}_TEST.tsv"),
            "output_dir": "out"
        },
        "repeats": repeats
    })
}

pub fn write_config(dir: &Path, file: &str, cfg: &serde_json::Value) -> PathBuf {
    let path = dir.join(file);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

pub fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HITROCKET_THREADS", t),
        None => cmd.env_remove("HITROCKET_THREADS"),
    };
    cmd.output().unwrap()
}

pub fn run_cmd(command: &str, config: &Path, out: &Path, threads: Option<&str>) -> Output {
    run(
        &[command, "--config", config.to_str().unwrap(), "--output-dir", out.to_str().unwrap()],
        threads,
    )
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `key=value` lines printed by a command.
pub fn printed(o: &Output, key: &str) -> Option<String> {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_owned))
}

/// SHA-256 of every artifact in `dir`, skipping timing files.
pub fn artifact_hashes(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            !name.contains("timing")
        })
        .map(|e| {
            let bytes = fs::read(e.path()).unwrap();
            (e.file_name().to_string_lossy().into_owned(), hex::encode(Sha256::digest(&bytes)))
        })
        .collect()
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}
