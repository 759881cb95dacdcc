//! Linear classifiers over feature matrices and their evaluation.

mod logistic;
mod metrics;
mod ridge;

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::one_class::OneClassModel;

pub use logistic::{
    logistic_fit, logistic_fit_traced, logistic_loss_grad, LogisticOptions, Termination,
    TerminationReason,
};
pub use metrics::{evaluate, ClassMetrics, EvalReport, Timing};
pub use ridge::{ridge_fit, ridge_fit_with, ridge_solve};

pub const MODEL_VERSION: u32 = 1;

/// Per-column affine map `(x - mean) / scale`.
///
/// Zero-variance columns keep scale 1 and are marked `constant`; models give
/// them zero weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    /// Identity map over `n` columns.
    pub fn identity(n: usize) -> Self {
        Self {
            mean: vec![0.0; n],
            scale: vec![1.0; n],
            constant: vec![false; n],
        }
    }

    /// Column means and population standard deviations of `x`. With
    /// `center = false` the means are fixed at zero and only scale is fitted.
    pub fn fit(x: &FeatureMatrix, center: bool) -> Self {
        let n = x.n_rows as f64;
        let cols = x.n_cols();
        let mut mean = vec![0.0; cols];
        for row in x.rows() {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for row in x.rows() {
            var.iter_mut()
                .zip(row)
                .zip(&mean)
                .for_each(|((s, v), m)| *s += (v - m) * (v - m));
        }
        let mut constant = vec![false; cols];
        let scale = var
            .iter()
            .zip(&mut constant)
            .map(|(s, c)| {
                let sd = (s / n).sqrt();
                // Float noise around a constant column is still constant.
                if sd > 1e-12 {
                    sd
                } else {
                    *c = true;
                    1.0
                }
            })
            .collect();
        if !center {
            mean.iter_mut().for_each(|m| *m = 0.0);
        }
        Self {
            mean,
            scale,
            constant,
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Standardized copy of `x` as a dense matrix.
    pub fn apply(&self, x: &FeatureMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(x.n_rows, x.n_cols(), |r, c| {
            (x.get(r, c) - self.mean[c]) / self.scale[c]
        })
    }

    pub fn apply_to_matrix(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let z = self.apply(x);
        FeatureMatrix {
            n_rows: x.n_rows,
            columns: x.columns.clone(),
            values: (0..x.n_rows)
                .flat_map(|r| (0..x.n_cols()).map(move |c| (r, c)))
                .map(|(r, c)| z[(r, c)])
                .collect(),
            labels: x.labels.clone(),
        }
    }
}

/// The feature layout a model was trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEcho {
    pub hash: String,
    pub n_features: usize,
}

impl LayoutEcho {
    pub fn of(x: &FeatureMatrix) -> Self {
        Self {
            hash: x.layout_hash(),
            n_features: x.n_cols(),
        }
    }

    pub fn check(&self, x: &FeatureMatrix) -> Result<()> {
        let found = Self::of(x);
        if &found != self {
            return Err(Error::Shape {
                expected: format!("{} ({} features)", self.hash, self.n_features),
                found: format!("{} ({} features)", found.hash, found.n_features),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Ridge,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparams {
    Alpha(f64),
    L2Lambda(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub version: u32,
    pub kind: LinearKind,
    pub classes: Vec<String>,
    /// One row of `n_features` weights per class, on standardized features.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub standardizer: Standardizer,
    pub hyperparams: Hyperparams,
    pub layout: LayoutEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
}

impl LinearModel {
    /// Class scores, one row per input row.
    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        self.layout.check(x)?;
        let z = self.standardizer.apply(x);
        Ok((0..x.n_rows)
            .map(|r| {
                self.weights
                    .iter()
                    .zip(&self.intercepts)
                    .map(|(w, b)| b + w.iter().enumerate().map(|(c, wc)| wc * z[(r, c)]).sum::<f64>())
                    .collect()
            })
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<String>> {
        Ok(self
            .decision_function(x)?
            .iter()
            .map(|scores| self.classes[argmax(scores)].clone())
            .collect())
    }

    fn validate(&self) -> Result<()> {
        let f = self.layout.n_features;
        let k = self.classes.len();
        let ok = self.version == MODEL_VERSION
            && k >= 2
            && self.weights.len() == k
            && self.intercepts.len() == k
            && self.weights.iter().all(|w| w.len() == f)
            && self.standardizer.len() == f
            && self.standardizer.scale.len() == f
            && self.standardizer.constant.len() == f
            && self.standardizer.scale.iter().all(|&s| s > 0.0);
        if !ok {
            return Err(Error::Config("inconsistent linear model document".into()));
        }
        Ok(())
    }
}

/// A serialized model of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    OneClass(OneClassModel),
}

impl Model {
    pub fn to_json(&self) -> Result<String> {
        Ok(match self {
            Self::Linear(m) => serde_json::to_string_pretty(m)?,
            Self::OneClass(m) => serde_json::to_string_pretty(m)?,
        })
    }

    /// Parses a model document, dispatching on its `kind` tag.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        let version = value.get("version").and_then(serde_json::Value::as_u64);
        if version != Some(u64::from(MODEL_VERSION)) {
            return Err(Error::Version {
                found: version.unwrap_or(0) as u32,
                expected: MODEL_VERSION,
            });
        }
        match value.get("kind").and_then(serde_json::Value::as_str) {
            Some("ridge") | Some("logistic") => {
                let m: LinearModel = serde_json::from_value(value)?;
                m.validate()?;
                Ok(Self::Linear(m))
            }
            Some("ls_ocsvm") => {
                let m: OneClassModel = serde_json::from_value(value)?;
                m.validate()?;
                Ok(Self::OneClass(m))
            }
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }

    /// Like [`Model::from_json`], refusing models trained on another layout.
    pub fn from_json_for_layout(s: &str, layout_hash: &str) -> Result<Self> {
        let model = Self::from_json(s)?;
        let echo = model.layout();
        if echo.hash != layout_hash {
            return Err(Error::Shape {
                expected: echo.hash.clone(),
                found: layout_hash.to_owned(),
            });
        }
        Ok(model)
    }

    pub fn layout(&self) -> &LayoutEcho {
        match self {
            Self::Linear(m) => &m.layout,
            Self::OneClass(m) => &m.layout,
        }
    }
}

/// Index of the largest score; the first wins ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Sorted distinct labels: numerically when every label parses as a number,
/// lexicographically otherwise.
pub fn class_order<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_owned()).collect();
    let numeric: Option<Vec<f64>> = classes.iter().map(|c| c.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        classes.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        });
    } else {
        classes.sort();
    }
    classes.dedup();
    classes
}

/// Checks the shared fit preconditions and maps labels to class indices.
pub(crate) fn prepare_labels(x: &FeatureMatrix, y: &[String]) -> Result<(Vec<String>, Vec<usize>)> {
    if y.len() != x.n_rows {
        return Err(Error::Shape {
            expected: format!("{} labels", x.n_rows),
            found: format!("{} labels", y.len()),
        });
    }
    if x.n_rows < 2 {
        return Err(Error::DegenerateLabels("at least two rows are required".into()));
    }
    let classes = class_order(y);
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "only one class present: {:?}",
            classes.first()
        )));
    }
    let idx = y
        .iter()
        .map(|l| classes.iter().position(|c| c == l).unwrap())
        .collect();
    Ok((classes, idx))
}
