use serde::{Deserialize, Serialize};

use super::class_order;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub transform_ms: u64,
    pub fit_ms: u64,
    pub predict_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[truth][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<usize>>,
    #[serde(default)]
    pub timing: Timing,
}

/// Scores predictions against the truth over the union of both label sets.
/// Precision, recall and F1 are 0 wherever their denominator is 0.
pub fn evaluate<S: AsRef<str>, T: AsRef<str>>(preds: &[S], truth: &[T]) -> Result<EvalReport> {
    if preds.len() != truth.len() {
        return Err(Error::Shape {
            expected: format!("{} predictions", truth.len()),
            found: format!("{} predictions", preds.len()),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let all: Vec<&str> = preds.iter().map(AsRef::as_ref).chain(truth.iter().map(AsRef::as_ref)).collect();
    let classes = class_order(&all);
    let pos = |l: &str| classes.iter().position(|c| c == l).unwrap();
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (p, t) in preds.iter().zip(truth) {
        confusion[pos(t.as_ref())][pos(p.as_ref())] += 1;
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: classes[c].clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    Ok(EvalReport {
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64,
        accuracy: ratio(correct, truth.len()),
        classes,
        per_class,
        confusion,
        timing: Timing::default(),
    })
}
