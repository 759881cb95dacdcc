use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{prepare_labels, Hyperparams, LayoutEcho, LinearKind, LinearModel, Standardizer, MODEL_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticOptions {
    pub l2_lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            l2_lambda: 1e-3,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    GradientTolerance,
    MaxIterations,
    /// No step along the search direction decreased the loss.
    LineSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub reason: TerminationReason,
    pub iterations: usize,
    pub loss: f64,
    pub grad_inf_norm: f64,
}

/// Mean softmax cross-entropy plus `λ/2 ‖W‖²` and its gradient.
///
/// `params` holds the `k × f` weights row-major followed by `k` intercepts;
/// intercepts are not penalized.
pub fn logistic_loss_grad(
    params: &[f64],
    z: &DMatrix<f64>,
    y: &[usize],
    k: usize,
    l2_lambda: f64,
) -> (f64, Vec<f64>) {
    let (n, f) = z.shape();
    let w = DMatrix::from_row_slice(k, f, &params[..k * f]);
    let b = &params[k * f..];
    let mut scores = z * w.transpose();
    let mut loss = 0.0;
    for r in 0..n {
        let mut row_max = f64::NEG_INFINITY;
        for c in 0..k {
            scores[(r, c)] += b[c];
            row_max = row_max.max(scores[(r, c)]);
        }
        let sum: f64 = (0..k).map(|c| (scores[(r, c)] - row_max).exp()).sum();
        let lse = row_max + sum.ln();
        loss += lse - scores[(r, y[r])];
        // scores become (p - onehot) / n
        for c in 0..k {
            let p = (scores[(r, c)] - lse).exp();
            scores[(r, c)] = (p - f64::from(u8::from(y[r] == c))) / n as f64;
        }
    }
    loss /= n as f64;
    loss += 0.5 * l2_lambda * w.iter().map(|v| v * v).sum::<f64>();

    let gw = scores.transpose() * z + &w * l2_lambda;
    let mut grad = Vec::with_capacity(params.len());
    for c in 0..k {
        grad.extend(gw.row(c).iter());
    }
    for c in 0..k {
        grad.push(scores.column(c).sum());
    }
    (loss, grad)
}

/// Multinomial logistic regression fitted by L-BFGS with backtracking.
pub fn logistic_fit(x: &FeatureMatrix, y: &[String], opts: LogisticOptions) -> Result<LinearModel> {
    logistic_fit_traced(x, y, opts, Standardizer::fit(x, true)).map(|(m, _)| m)
}

/// [`logistic_fit`] with an explicit standardizer, also returning the loss
/// after every accepted step.
pub fn logistic_fit_traced(
    x: &FeatureMatrix,
    y: &[String],
    opts: LogisticOptions,
    standardizer: Standardizer,
) -> Result<(LinearModel, Vec<f64>)> {
    if !(opts.l2_lambda.is_finite() && opts.l2_lambda >= 0.0) || !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::Config(
            "l2_lambda must be non-negative and tol positive".into(),
        ));
    }
    let (classes, idx) = prepare_labels(x, y)?;
    let mut z = standardizer.apply(x);
    for (j, &constant) in standardizer.constant.iter().enumerate() {
        if constant {
            z.column_mut(j).fill(0.0);
        }
    }
    let k = classes.len();
    let f = z.ncols();
    let eval = |p: &[f64]| logistic_loss_grad(p, &z, &idx, k, opts.l2_lambda);

    let mut params = vec![0.0; k * f + k];
    let (mut loss, mut grad) = eval(&params);
    let mut history = vec![loss];
    let mut memory: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    const MEMORY: usize = 10;

    let mut iterations = 0;
    let reason = loop {
        let gnorm = inf_norm(&grad);
        if gnorm < opts.tol {
            break TerminationReason::GradientTolerance;
        }
        if iterations >= opts.max_iter {
            break TerminationReason::MaxIterations;
        }
        iterations += 1;

        let g = DVector::from_column_slice(&grad);
        let mut dir = -two_loop(&g, &memory);
        let mut slope = g.dot(&dir);
        if slope.is_nan() || slope >= 0.0 {
            memory.clear();
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut step = if memory.is_empty() {
            1.0 / g.norm().max(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = params.iter().zip(dir.iter()).map(|(p, d)| p + step * d).collect();
            let (l, gr) = eval(&trial);
            if !l.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite logistic loss at iteration {iterations}"
                )));
            }
            if l <= loss + 1e-4 * step * slope {
                accepted = Some((trial, l, gr));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, l, gr)) = accepted else {
            break TerminationReason::LineSearch;
        };

        let s = DVector::from_iterator(trial.len(), trial.iter().zip(&params).map(|(a, b)| a - b));
        let yv = DVector::from_iterator(gr.len(), gr.iter().zip(&grad).map(|(a, b)| a - b));
        let sy = s.dot(&yv);
        if sy > 1e-12 {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, yv, 1.0 / sy));
        }
        params = trial;
        loss = l;
        grad = gr;
        history.push(loss);
    };

    let mut weights: Vec<Vec<f64>> = params[..k * f].chunks(f).map(<[f64]>::to_vec).collect();
    for row in &mut weights {
        for (j, w) in row.iter_mut().enumerate() {
            if standardizer.constant[j] {
                *w = 0.0;
            }
        }
    }
    let termination = Termination {
        reason,
        iterations,
        loss,
        grad_inf_norm: inf_norm(&grad),
    };
    let model = LinearModel {
        version: MODEL_VERSION,
        kind: LinearKind::Logistic,
        classes,
        weights,
        intercepts: params[k * f..].to_vec(),
        standardizer,
        hyperparams: Hyperparams::L2Lambda(opts.l2_lambda),
        layout: LayoutEcho::of(x),
        termination: Some(termination),
    };
    Ok((model, history))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// L-BFGS two-loop recursion: approximate inverse Hessian times `g`.
fn two_loop(g: &DVector<f64>, memory: &VecDeque<(DVector<f64>, DVector<f64>, f64)>) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    q
}
