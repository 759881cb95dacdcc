//! Regularized least-squares one-class classifier with a linear kernel.
//!
//! The fit minimizes
//!
//! ```text
//! ½(‖w‖² + b²) + (γ/2NF) Σᵢ (wᵀzᵢ + b − 1)² + (λ/2) ((1/N) Σᵢ (wᵀzᵢ + b) − 1)²
//! ```
//!
//! over `N` rows of `F` features `z`, scaled (not centred) by their training
//! standard deviation. Dividing γ by `NF` keeps one setting meaningful across
//! feature levels and training-set sizes, since `‖z‖²` grows with `F`. Training rows are pulled onto the hyperplane `wᵀz + b = 1`; the
//! λ term additionally penalizes the mean modelling error. Without the unit
//! target, or with the intercept left unpenalized, `w = 0` would be optimal.
//!
//! A row's score is the negated distance of its decision value from the
//! target, `-|wᵀz + b − 1|`, and rows scoring at least the threshold are
//! inliers. The threshold is the training-score quantile that keeps
//! `target_recall` of the training rows inside.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ridge_solve, LayoutEcho, Standardizer, MODEL_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneClassKind {
    LsOcsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneClassParams {
    pub gamma: f64,
    pub lambda: f64,
    pub target_recall: f64,
}

impl Default for OneClassParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lambda: 1.0,
            target_recall: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Inlier,
    Outlier,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Inlier => "inlier",
            Self::Outlier => "outlier",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneClassModel {
    pub version: u32,
    pub kind: OneClassKind,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub threshold: f64,
    pub standardizer: Standardizer,
    pub hyperparams: OneClassParams,
    pub layout: LayoutEcho,
}

/// Fits the model on rows of the positive class only.
pub fn ls_ocsvm_fit(x: &FeatureMatrix, params: OneClassParams) -> Result<OneClassModel> {
    let OneClassParams {
        gamma,
        lambda,
        target_recall,
    } = params;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    if !(target_recall > 0.0 && target_recall <= 1.0) {
        return Err(Error::Config(format!(
            "target_recall must lie in (0, 1], got {target_recall}"
        )));
    }
    if x.n_rows < 2 {
        return Err(Error::DegenerateLabels("at least two rows are required".into()));
    }
    let standardizer = Standardizer::fit(x, false);
    let z = standardizer.apply(x);
    let (n, f) = z.shape();

    // Stack the squared-error rows and the mean-error row into one ridge
    // problem with unit penalty on (w, b).
    let (sg, sl) = ((gamma / (n * f) as f64).sqrt(), lambda.sqrt());
    let mean_row: Vec<f64> = (0..f).map(|c| z.column(c).mean()).collect();
    let design = DMatrix::from_fn(n + 1, f + 1, |r, c| match (r < n, c < f) {
        (true, true) => sg * z[(r, c)],
        (true, false) => sg,
        (false, true) => sl * mean_row[c],
        (false, false) => sl,
    });
    let targets = DMatrix::from_fn(n + 1, 1, |r, _| if r < n { sg } else { sl });
    let theta = ridge_solve(&design, &targets, 1.0)?;
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("one-class solution is not finite".into()));
    }

    let mut model = OneClassModel {
        version: MODEL_VERSION,
        kind: OneClassKind::LsOcsvm,
        weights: theta.as_slice()[..f].to_vec(),
        intercept: theta[(f, 0)],
        threshold: 0.0,
        standardizer,
        hyperparams: params,
        layout: LayoutEcho::of(x),
    };
    let mut scores = model.scores(x)?;
    scores.sort_by(f64::total_cmp);
    let k = (((1.0 - target_recall) * n as f64) + 1e-9).floor() as usize;
    model.threshold = scores[k.min(n - 1)];
    if !model.threshold.is_finite() {
        return Err(Error::Numeric("one-class threshold is not finite".into()));
    }
    Ok(model)
}

impl OneClassModel {
    /// `wᵀz + b` per row; close to 1 for rows like the training data.
    pub fn decision_values(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.layout.check(x)?;
        let z = self.standardizer.apply(x);
        Ok((0..x.n_rows)
            .map(|r| {
                self.intercept
                    + self
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(c, w)| w * z[(r, c)])
                        .sum::<f64>()
            })
            .collect())
    }

    /// `-|wᵀz + b − 1|` per row.
    pub fn scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self
            .decision_values(x)?
            .into_iter()
            .map(|v| -(v - 1.0).abs())
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Decision>> {
        Ok(self
            .scores(x)?
            .into_iter()
            .map(|s| {
                if s >= self.threshold {
                    Decision::Inlier
                } else {
                    Decision::Outlier
                }
            })
            .collect())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let f = self.layout.n_features;
        let ok = self.version == MODEL_VERSION
            && self.weights.len() == f
            && self.standardizer.len() == f
            && self.standardizer.scale.len() == f
            && self.standardizer.constant.len() == f
            && self.threshold.is_finite()
            && self.intercept.is_finite();
        if !ok {
            return Err(Error::Config("inconsistent one-class model document".into()));
        }
        Ok(())
    }
}
