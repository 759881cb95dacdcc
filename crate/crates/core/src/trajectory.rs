//! Trajectory-matrix form of the Hadamard convolution.
//!
//! Stacking delayed copies of a series into a matrix `X` (one row per kernel
//! tap, one column per window) turns every kernel convolution into a single
//! matrix product `Y = H · X`. This path is dense and slow; it exists as a
//! reference for [`crate::conv::convolve_valid`], not for production use.

use crate::error::{Error, Result};
use crate::hadamard::HadamardMatrix;

/// Dense row-major matrix used by the reference path.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Plain triple-loop product, accumulating over the inner index in order.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn from_hadamard(h: &HadamardMatrix) -> Self {
        let n = h.order();
        let mut m = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, f64::from(h.get(r, c)));
            }
        }
        m
    }
}

/// Delay embedding with `rows` taps spaced `dilation` apart and windows
/// advancing by `stride`. The series is zero-padded at the end until the
/// window count is an integer.
pub fn trajectory_matrix(
    x: &[f64],
    rows: usize,
    stride: usize,
    dilation: usize,
) -> Result<DenseMatrix> {
    if rows == 0 || stride == 0 || dilation == 0 {
        return Err(Error::Config("rows, stride and dilation must be positive".into()));
    }
    let span = (rows - 1) * dilation + 1;
    if x.len() < span {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            required: span,
        });
    }
    let mut padded = x.to_vec();
    let rem = (padded.len() - span) % stride;
    if rem != 0 {
        padded.resize(padded.len() + stride - rem, 0.0);
    }
    let cols = (padded.len() - span) / stride + 1;
    let mut m = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, padded[c * stride + r * dilation]);
        }
    }
    Ok(m)
}

/// `H · X` for the trajectory matrix of `x`; row `i` holds the outputs of
/// kernel `i` at every window.
pub fn matrix_oracle(
    x: &[f64],
    h: &HadamardMatrix,
    stride: usize,
    dilation: usize,
) -> Result<DenseMatrix> {
    let traj = trajectory_matrix(x, h.order(), stride, dilation)?;
    Ok(DenseMatrix::from_hadamard(h).matmul(&traj))
}
