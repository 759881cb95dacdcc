//! One full pass of transform, fit, predict and evaluate.

use std::time::Instant;

use hitrocket::classifiers::{class_order, logistic_fit, ridge_fit, LogisticOptions, Timing};
use hitrocket::dataset::add_awgn_dataset;
use hitrocket::one_class::{ls_ocsvm_fit, OneClassParams};
use hitrocket::{
    evaluate, load_tsv, BiasTable, Dataset, EvalReport, Execution, FeatureMatrix, Featurizer, Model,
    NoiseSpec, TransformConfig,
};

use crate::config::{ClassifierConfig, RunConfig};
use crate::error::{CliError, Result};

/// Stream offset for test series, keeping their noise independent of the
/// training series.
pub const TEST_STREAM_BASE: u64 = 1 << 32;

pub struct Inputs {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

/// Loads the configured datasets. Runs before anything is written.
pub fn load_inputs(cfg: &RunConfig, require_test: bool) -> Result<Inputs> {
    let load = |path: std::path::PathBuf| {
        if !path.is_file() {
            return Err(CliError::Usage(format!("input file not found: {}", path.display())));
        }
        load_tsv(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    };
    let train = load(cfg.train_path())?;
    let test = match cfg.test_path() {
        Some(p) => Some(load(p)?),
        None if require_test => return Err(CliError::Usage("io.test_path is required".into())),
        None => None,
    };
    Ok(Inputs { train, test })
}

pub struct Features {
    pub biases: BiasTable,
    pub train: FeatureMatrix,
    pub test: Option<FeatureMatrix>,
    pub transform_ms: u64,
}

pub fn featurize(cfg: &TransformConfig, train: &Dataset, test: Option<&Dataset>) -> Result<Features> {
    let start = Instant::now();
    let f = Featurizer::new(cfg.clone())?;
    let biases = f.fit_biases(&train.series)?;
    let exec = Execution::default();
    let train_fm = f.transform_with(&train.series, &biases, exec)?;
    let test_fm = test.map(|t| f.transform_with(&t.series, &biases, exec)).transpose()?;
    Ok(Features {
        biases,
        train: train_fm,
        test: test_fm,
        transform_ms: millis(start),
    })
}

fn millis(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// The normal class for one-class training: the configured label, or the
/// most frequent training label with ties going to the first in class order.
pub fn positive_label(cfg: &ClassifierConfig, labels: &[String]) -> Option<String> {
    match cfg {
        ClassifierConfig::LsOcsvm { positive_label: Some(l), .. } => Some(l.clone()),
        ClassifierConfig::LsOcsvm { positive_label: None, .. } => class_order(labels)
            .into_iter()
            .map(|c| {
                let n = labels.iter().filter(|l| **l == c).count();
                (c, n)
            })
            .fold(None, |best: Option<(String, usize)>, (c, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((c, n)),
            })
            .map(|(c, _)| c),
        _ => None,
    }
}

/// Ground truth in the vocabulary of the model's predictions.
pub fn truth_labels(labels: &[String], positive: Option<&str>) -> Vec<String> {
    match positive {
        Some(p) => labels
            .iter()
            .map(|l| if l == p { "inlier" } else { "outlier" }.to_owned())
            .collect(),
        None => labels.to_vec(),
    }
}

pub fn fit(cfg: &ClassifierConfig, x: &FeatureMatrix) -> Result<Model> {
    let labels = x.required_labels()?;
    Ok(match cfg {
        ClassifierConfig::Ridge { alpha } => Model::Linear(ridge_fit(x, &labels, *alpha)?),
        ClassifierConfig::Logistic { l2_lambda, max_iter, tol } => {
            let opts = LogisticOptions {
                l2_lambda: *l2_lambda,
                max_iter: *max_iter,
                tol: *tol,
            };
            Model::Linear(logistic_fit(x, &labels, opts)?)
        }
        ClassifierConfig::LsOcsvm { gamma, lambda, target_recall, .. } => {
            let positive = positive_label(cfg, &labels).unwrap_or_default();
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == positive).collect();
            if rows.is_empty() {
                return Err(CliError::Data(format!("no training rows labelled {positive:?}")));
            }
            let params = OneClassParams {
                gamma: *gamma,
                lambda: *lambda,
                target_recall: *target_recall,
            };
            Model::OneClass(ls_ocsvm_fit(&x.select_rows(&rows), params)?)
        }
    })
}

pub struct Predictions {
    pub labels: Vec<String>,
    pub score_names: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

pub fn predict(model: &Model, x: &FeatureMatrix) -> Result<Predictions> {
    Ok(match model {
        Model::Linear(m) => {
            let scores = m.decision_function(x)?;
            Predictions {
                labels: m.predict(x)?,
                score_names: m.classes.clone(),
                scores,
            }
        }
        Model::OneClass(m) => Predictions {
            labels: m.predict(x)?.iter().map(|d| d.as_str().to_owned()).collect(),
            score_names: vec!["score".into()],
            scores: m.scores(x)?.into_iter().map(|s| vec![s]).collect(),
        },
    })
}

/// Result of one pipeline run. `report.timing` is left at zero; wall-clock
/// numbers travel separately in `timing`.
pub struct RunOutcome {
    pub report: EvalReport,
    pub timing: Timing,
    pub dimension: usize,
    pub layout_hash: String,
}

/// Transforms, fits on `train` and evaluates on `test`.
pub fn run_once(
    transform: &TransformConfig,
    classifier: &ClassifierConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<RunOutcome> {
    let features = featurize(transform, train, Some(test))?;
    let test_fm = features.test.expect("test features requested");
    let start = Instant::now();
    let model = fit(classifier, &features.train)?;
    let fit_ms = millis(start);
    let start = Instant::now();
    let preds = predict(&model, &test_fm)?;
    let predict_ms = millis(start);
    let positive = positive_label(classifier, &train.labels());
    let truth = truth_labels(&test.labels(), positive.as_deref());
    let report = evaluate(&preds.labels, &truth)?;
    Ok(RunOutcome {
        report,
        timing: Timing {
            transform_ms: features.transform_ms,
            fit_ms,
            predict_ms,
        },
        dimension: features.train.n_cols(),
        layout_hash: features.train.layout_hash(),
    })
}

/// [`run_once`] on noisy copies of both splits.
pub fn run_noisy(
    transform: &TransformConfig,
    classifier: &ClassifierConfig,
    inputs: &Inputs,
    noise: &NoiseSpec,
) -> Result<RunOutcome> {
    let test = inputs.test.as_ref().expect("test split loaded");
    if noise.is_none() {
        return run_once(transform, classifier, &inputs.train, test);
    }
    let train = add_awgn_dataset(&inputs.train, noise, 0);
    let test = add_awgn_dataset(test, noise, TEST_STREAM_BASE);
    run_once(transform, classifier, &train, &test)
}

/// Population mean and variance, summed in order.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}
