use nalgebra::{Cholesky, DMatrix};

use super::{prepare_labels, Hyperparams, LayoutEcho, LinearKind, LinearModel, Standardizer, MODEL_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Solves `(XᵀX + αI) W = Xᵀ T` for every column of `targets`.
///
/// With more columns than rows the equivalent system
/// `W = Xᵀ (XXᵀ + αI)⁻¹ T` is factored instead, so the Cholesky factor is
/// always of size `min(rows, cols)`.
pub fn ridge_solve(x: &DMatrix<f64>, targets: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive and finite, got {alpha}")));
    }
    let (n, f) = x.shape();
    let xt = x.transpose();
    let singular = || Error::Numeric("ridge system is not positive definite".into());
    if f <= n {
        let mut gram = &xt * x;
        for i in 0..f {
            gram[(i, i)] += alpha;
        }
        let chol = Cholesky::new(gram).ok_or_else(singular)?;
        Ok(chol.solve(&(&xt * targets)))
    } else {
        let mut gram = x * &xt;
        for i in 0..n {
            gram[(i, i)] += alpha;
        }
        let chol = Cholesky::new(gram).ok_or_else(singular)?;
        Ok(&xt * chol.solve(targets))
    }
}

/// One-vs-rest ridge classifier on standardized columns with ±1 targets.
pub fn ridge_fit(x: &FeatureMatrix, y: &[String], alpha: f64) -> Result<LinearModel> {
    ridge_fit_with(x, y, alpha, Standardizer::fit(x, true))
}

pub fn ridge_fit_with(
    x: &FeatureMatrix,
    y: &[String],
    alpha: f64,
    standardizer: Standardizer,
) -> Result<LinearModel> {
    let (classes, idx) = prepare_labels(x, y)?;
    let z = standardizer.apply(x);
    let n = x.n_rows;
    let k = classes.len();
    let targets = DMatrix::from_fn(n, k, |r, c| if idx[r] == c { 1.0 } else { -1.0 });
    let intercepts: Vec<f64> = (0..k).map(|c| targets.column(c).mean()).collect();
    // Centre the targets so the intercept carries their mean even when the
    // features are not centred.
    let centred = DMatrix::from_fn(n, k, |r, c| targets[(r, c)] - intercepts[c]);
    let col_means: Vec<f64> = (0..z.ncols()).map(|c| z.column(c).mean()).collect();
    let zc = DMatrix::from_fn(n, z.ncols(), |r, c| z[(r, c)] - col_means[c]);
    let w = ridge_solve(&zc, &centred, alpha)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("ridge weights are not finite".into()));
    }
    let mut weights: Vec<Vec<f64>> = (0..k).map(|c| w.column(c).iter().copied().collect()).collect();
    let mut intercepts = intercepts;
    for (c, row) in weights.iter_mut().enumerate() {
        for (j, wj) in row.iter_mut().enumerate() {
            if standardizer.constant[j] {
                *wj = 0.0;
            }
        }
        intercepts[c] -= row.iter().zip(&col_means).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(LinearModel {
        version: MODEL_VERSION,
        kind: LinearKind::Ridge,
        classes,
        weights,
        intercepts,
        standardizer,
        hyperparams: Hyperparams::Alpha(alpha),
        layout: LayoutEcho::of(x),
        termination: None,
    })
}
