//! The five subcommands.

use std::fs;
use std::path::Path;
use std::time::Instant;

use hitrocket::classifiers::Timing;
use hitrocket::{evaluate, EvalReport, FeatureMatrix, Model, NoiseSpec};
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, Snr};
use crate::error::{CliError, Result};
use crate::output::{csv_bytes, OutputDir};
use crate::pipeline::{self, mean_var, Inputs, RunOutcome};

pub const TRAIN_FEATURES: &str = "train_features.csv";
pub const TEST_FEATURES: &str = "test_features.csv";
pub const BIASES: &str = "biases.json";
pub const MODEL: &str = "model.json";
pub const PREDICTIONS: &str = "predictions.csv";

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    FeatureMatrix::read_csv(std::io::BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_features(out: &OutputDir, name: &str, fm: &FeatureMatrix) -> Result<()> {
    out.write_with(name, |f| {
        fm.write_csv(std::io::BufWriter::new(f))?;
        Ok(())
    })
}

pub fn transform(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output_dir()?;
    let inputs = pipeline::load_inputs(cfg, false)?;
    let out = OutputDir::lock(&dir)?;
    let features = pipeline::featurize(&cfg.transform, &inputs.train, inputs.test.as_ref())?;
    write_features(&out, TRAIN_FEATURES, &features.train)?;
    if let Some(test) = &features.test {
        write_features(&out, TEST_FEATURES, test)?;
    }
    out.write(BIASES, features.biases.to_json()?.as_bytes())?;
    println!("f_dimension={}", features.train.n_cols());
    println!("transform_ms={}", features.transform_ms);
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output_dir()?;
    let x = read_features(&dir.join(TRAIN_FEATURES))?;
    let out = OutputDir::lock(&dir)?;
    let start = Instant::now();
    let model = pipeline::fit(&cfg.classifier, &x)?;
    let fit_ms = start.elapsed().as_millis();
    out.write(MODEL, format!("{}\n", model.to_json()?).as_bytes())?;
    if let Model::Linear(m) = &model {
        if let Some(t) = &m.termination {
            println!("termination={:?} iterations={}", t.reason, t.iterations);
        }
    }
    println!("fit_ms={fit_ms}");
    Ok(())
}

pub fn predict(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output_dir()?;
    let features = if cfg.io.test_path.is_some() { TEST_FEATURES } else { TRAIN_FEATURES };
    let x = read_features(&dir.join(features))?;
    let model_path = dir.join(MODEL);
    let text = fs::read_to_string(&model_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", model_path.display())))?;
    let model = Model::from_json_for_layout(&text, &x.layout_hash()).map_err(|e| match e {
        hitrocket::Error::Shape { expected, found } => CliError::Data(format!(
            "layout mismatch: model was trained on layout {expected}, features have layout {found}"
        )),
        other => CliError::Data(format!("cannot load {}: {other}", model_path.display())),
    })?;
    let positive = match &model {
        Model::OneClass(_) => {
            let train_labels = read_features(&dir.join(TRAIN_FEATURES))?.required_labels()?;
            pipeline::positive_label(&cfg.classifier, &train_labels)
        }
        Model::Linear(_) => None,
    };
    let out = OutputDir::lock(&dir)?;
    let preds = pipeline::predict(&model, &x)?;
    let header: Vec<String> = ["row".to_owned(), "predicted".to_owned()]
        .into_iter()
        .chain(preds.score_names.iter().map(|c| format!("score_{c}")))
        .collect();
    let rows: Vec<Vec<String>> = preds
        .labels
        .iter()
        .zip(&preds.scores)
        .enumerate()
        .map(|(i, (label, scores))| {
            [i.to_string(), label.clone()]
                .into_iter()
                .chain(scores.iter().map(|s| s.to_string()))
                .collect()
        })
        .collect();
    out.write(PREDICTIONS, &csv_bytes(&header, &rows)?)?;
    if let Ok(labels) = x.required_labels() {
        let truth = pipeline::truth_labels(&labels, positive.as_deref());
        let report = evaluate(&preds.labels, &truth)?;
        println!("accuracy={}", report.accuracy);
        println!("macro_f1={}", report.macro_f1);
    }
    Ok(())
}

/// An evaluation report without its timing, for deterministic artifacts.
fn report_value(report: &EvalReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v.as_object_mut().expect("report is an object").remove("timing");
    v
}

struct Repeats {
    outcomes: Vec<RunOutcome>,
    seeds: Vec<u64>,
}

impl Repeats {
    fn f1(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.report.macro_f1).collect()
    }

    fn mean_ms(&self, pick: impl Fn(&Timing) -> u64) -> f64 {
        self.outcomes.iter().map(|o| pick(&o.timing) as f64).sum::<f64>() / self.outcomes.len() as f64
    }
}

/// Runs the pipeline `cfg.repeats` times; repeat `r` uses transform seed
/// `base + r` and, with noise, noise seed `noise.seed + r`.
fn repeat_runs(
    cfg: &RunConfig,
    transform: &hitrocket::TransformConfig,
    inputs: &Inputs,
    noise: Option<(Snr, u64)>,
) -> Result<Repeats> {
    let mut outcomes = Vec::with_capacity(cfg.repeats);
    let mut seeds = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats as u64 {
        let seed = transform.seed + r;
        let spec = match noise {
            Some((Snr::Db(db), noise_seed)) => NoiseSpec::new(db, noise_seed + r),
            _ => NoiseSpec::none(),
        };
        let t = transform.clone().with_seed(seed);
        outcomes.push(pipeline::run_noisy(&t, &cfg.classifier, inputs, &spec)?);
        seeds.push(seed);
    }
    Ok(Repeats { outcomes, seeds })
}

pub fn bench(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output_dir()?;
    let inputs = pipeline::load_inputs(cfg, true)?;
    let out = OutputDir::lock(&dir)?;
    let runs = repeat_runs(cfg, &cfg.transform, &inputs, None)?;
    let f1 = runs.f1();
    let (mean_f1, var_f1) = mean_var(&f1);
    let accuracy: Vec<f64> = runs.outcomes.iter().map(|o| o.report.accuracy).collect();
    let (mean_accuracy, _) = mean_var(&accuracy);

    let mut sweep_rows = Vec::new();
    let mut sweep_timing_rows = Vec::new();
    let mut sweep_json = Vec::new();
    for &level in cfg.dimension_sweep.iter().flatten() {
        let t = hitrocket::TransformConfig::level(level).with_seed(cfg.transform.seed);
        let level_runs = repeat_runs(cfg, &t, &inputs, None)?;
        let (m, v) = mean_var(&level_runs.f1());
        let dim = level_runs.outcomes[0].dimension;
        sweep_rows.push(vec![level.to_string(), dim.to_string(), m.to_string(), v.to_string()]);
        sweep_timing_rows.push(vec![
            level.to_string(),
            dim.to_string(),
            m.to_string(),
            level_runs.mean_ms(|t| t.fit_ms).to_string(),
            level_runs.mean_ms(|t| t.transform_ms).to_string(),
        ]);
        sweep_json.push(json!({"level": level, "dimension": dim, "mean_f1": m, "var_f1": v, "f1": level_runs.f1()}));
    }

    let first = &runs.outcomes[0];
    let repeats_json: Vec<_> = runs
        .outcomes
        .iter()
        .zip(&runs.seeds)
        .enumerate()
        .map(|(r, (o, seed))| json!({"repeat": r, "seed": seed, "report": report_value(&o.report)}))
        .collect();
    let mut report = json!({
        "tool": "hitrocket",
        "version": VERSION,
        "config": cfg,
        "dimension": first.dimension,
        "layout_hash": first.layout_hash,
        "repeats": repeats_json,
        "aggregate": {"mean_f1": mean_f1, "var_f1": var_f1, "mean_accuracy": mean_accuracy},
    });
    if cfg.dimension_sweep.is_some() {
        report["dimension_sweep"] = json!(sweep_json);
    }
    out.write("bench_report.json", &json_bytes(&report)?)?;
    let rows: Vec<Vec<String>> = runs
        .outcomes
        .iter()
        .zip(&runs.seeds)
        .enumerate()
        .map(|(r, (o, seed))| {
            vec![r.to_string(), seed.to_string(), o.report.macro_f1.to_string(), o.report.accuracy.to_string()]
        })
        .collect();
    out.write("bench_repeats.csv", &csv_bytes(&["repeat", "seed", "macro_f1", "accuracy"], &rows)?)?;

    let timing: Vec<_> = runs
        .outcomes
        .iter()
        .enumerate()
        .map(|(r, o)| json!({"repeat": r, "transform_ms": o.timing.transform_ms, "fit_ms": o.timing.fit_ms, "predict_ms": o.timing.predict_ms}))
        .collect();
    let timing = json!({
        "repeats": timing,
        "mean_transform_ms": runs.mean_ms(|t| t.transform_ms),
        "mean_fit_ms": runs.mean_ms(|t| t.fit_ms),
        "mean_predict_ms": runs.mean_ms(|t| t.predict_ms),
    });
    out.write("bench_timing.json", &json_bytes(&timing)?)?;
    if cfg.dimension_sweep.is_some() {
        out.write(
            "dimension_sweep.csv",
            &csv_bytes(&["level", "dimension", "mean_f1", "var_f1"], &sweep_rows)?,
        )?;
        out.write(
            "dimension_sweep_timing.csv",
            &csv_bytes(
                &["level", "dimension", "mean_f1", "mean_fit_ms", "mean_transform_ms"],
                &sweep_timing_rows,
            )?,
        )?;
    }
    println!("f_dimension={}", first.dimension);
    println!("mean_f1={mean_f1}");
    println!("var_f1={var_f1}");
    println!("mean_accuracy={mean_accuracy}");
    println!("mean_transform_ms={}", runs.mean_ms(|t| t.transform_ms));
    Ok(())
}

pub fn noise_sweep(cfg: &RunConfig) -> Result<()> {
    let noise = cfg
        .noise
        .as_ref()
        .ok_or_else(|| CliError::Usage("noise-sweep needs a noise block in the config".into()))?;
    let dir = cfg.output_dir()?;
    let inputs = pipeline::load_inputs(cfg, true)?;
    let out = OutputDir::lock(&dir)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for &snr in &noise.snr_list_db {
        let runs = repeat_runs(cfg, &cfg.transform, &inputs, Some((snr, noise.seed)))?;
        let f1 = runs.f1();
        let (mean_f1, var_f1) = mean_var(&f1);
        println!("snr_db={snr} mean_f1={mean_f1} var_f1={var_f1}");
        rows.push(
            [snr.to_string(), mean_f1.to_string(), var_f1.to_string()]
                .into_iter()
                .chain(f1.iter().map(|v| v.to_string()))
                .collect(),
        );
        json_rows.push(json!({"snr_db": snr, "mean_f1": mean_f1, "var_f1": var_f1, "f1": f1}));
    }
    let report = json!({
        "tool": "hitrocket",
        "version": VERSION,
        "config": cfg,
        "rows": json_rows,
    });
    out.write("noise_sweep.json", &json_bytes(&report)?)?;
    let header: Vec<String> = ["snr_db", "mean_f1", "var_f1"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..cfg.repeats).map(|r| format!("f1_{r}")))
        .collect();
    out.write("noise_sweep.csv", &csv_bytes(&header, &rows)?)?;
    Ok(())
}
