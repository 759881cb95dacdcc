//! Valid-mode dilated convolution with ±1 kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hadamard::DilatedKernel;

/// A univariate series with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub label: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            label: None,
        }
    }

    pub fn labelled(values: Vec<f64>, label: impl Into<String>) -> Self {
        Self {
            values,
            label: Some(label.into()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            label: self.label.clone(),
        }
    }
}

/// `out[n] = Σ w · x[n + offset]` over the taps of `kernel`, for every window
/// that fits entirely inside `x`.
///
/// Taps are ±1, so each term is an add or a subtract. Each output accumulates
/// its taps left to right starting from zero.
pub fn convolve_valid(x: &[f64], kernel: &DilatedKernel) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    convolve_into(x, kernel, &mut out)?;
    Ok(out)
}

/// [`convolve_valid`] writing into a reusable buffer.
pub fn convolve_into(x: &[f64], kernel: &DilatedKernel, out: &mut Vec<f64>) -> Result<()> {
    let span = kernel.span();
    if x.len() < span || span == 0 {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            required: span,
        });
    }
    let n_out = x.len() - span + 1;
    out.clear();
    out.resize(n_out, 0.0);
    for tap in kernel.taps() {
        let window = &x[tap.offset..tap.offset + n_out];
        if tap.weight > 0 {
            out.iter_mut().zip(window).for_each(|(o, &v)| *o += v);
        } else {
            out.iter_mut().zip(window).for_each(|(o, &v)| *o -= v);
        }
    }
    Ok(())
}

/// First difference: `out[t] = x[t + 1] - x[t]`.
pub fn diff_series(x: &TimeSeries) -> Result<TimeSeries> {
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            required: 2,
        });
    }
    Ok(x.with_values(x.values.windows(2).map(|w| w[1] - w[0]).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadMode {
    Trailing,
    /// Half the padding on each side; the odd zero goes at the end.
    Symmetric,
}

pub fn zero_pad(x: &TimeSeries, target_len: usize, mode: PadMode) -> Result<TimeSeries> {
    if target_len < x.len() {
        return Err(Error::InvalidTarget {
            len: x.len(),
            target: target_len,
        });
    }
    let extra = target_len - x.len();
    let front = match mode {
        PadMode::Trailing => 0,
        PadMode::Symmetric => extra / 2,
    };
    let mut values = vec![0.0; target_len];
    values[front..front + x.len()].copy_from_slice(&x.values);
    Ok(x.with_values(values))
}
