//! Sylvester Hadamard matrices and the dilated kernels derived from their columns.
//!
//! Every column of an order-`N` Hadamard matrix is a ±1 vector orthogonal to all
//! other columns. Those columns are the convolution weights of the transform.
//! Dilation spreads the taps of a kernel apart by inserting zeros; the non-zero
//! weights are never altered, so orthogonality of the underlying vectors holds
//! for every scheme.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by [`sylvester`].
pub const MAX_ORDER: usize = 64;

/// Square ±1 matrix in Sylvester normal form, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    /// Column `index` as an owned ±1 vector.
    pub fn column(&self, index: usize) -> Result<Vec<i8>> {
        extract_kernel(self, index)
    }

    /// `transpose(H) · H` computed in exact integer arithmetic.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let n = self.order;
        let mut out = vec![vec![0i64; n]; n];
        for (i, out_row) in out.iter_mut().enumerate() {
            for (j, cell) in out_row.iter_mut().enumerate() {
                *cell = (0..n)
                    .map(|k| i64::from(self.get(k, i)) * i64::from(self.get(k, j)))
                    .sum();
            }
        }
        out
    }
}

/// Builds `H_order` by the recursion `H_2n = [[H_n, H_n], [H_n, -H_n]]`.
pub fn sylvester(order: usize) -> Result<HadamardMatrix> {
    if order == 0 || !order.is_power_of_two() || order > MAX_ORDER {
        return Err(Error::InvalidOrder(order));
    }
    let mut entries = vec![1i8];
    let mut n = 1;
    while n < order {
        let m = 2 * n;
        let mut next = vec![0i8; m * m];
        for r in 0..n {
            for c in 0..n {
                let v = entries[r * n + c];
                next[r * m + c] = v;
                next[r * m + c + n] = v;
                next[(r + n) * m + c] = v;
                next[(r + n) * m + c + n] = -v;
            }
        }
        entries = next;
        n = m;
    }
    Ok(HadamardMatrix { order, entries })
}

/// Column `index` of `h`.
pub fn extract_kernel(h: &HadamardMatrix, index: usize) -> Result<Vec<i8>> {
    if index >= h.order {
        return Err(Error::KernelIndex {
            index,
            order: h.order,
        });
    }
    Ok((0..h.order).map(|r| h.get(r, index)).collect())
}

/// One column of the source matrix, tagged with its column index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub index: usize,
    pub weights: Vec<i8>,
}

/// The kernels the transform convolves with: columns of `H_length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBank {
    length: usize,
    kernels: Vec<Kernel>,
}

impl KernelBank {
    /// All columns of `H_length`, optionally without the all-ones column 0.
    pub fn new(length: usize, include_dc: bool) -> Result<Self> {
        let h = sylvester(length)?;
        let first = usize::from(!include_dc);
        let kernels = (first..length)
            .map(|index| {
                Ok(Kernel {
                    index,
                    weights: extract_kernel(&h, index)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { length, kernels })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// How zeros are inserted between the taps of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DilationScheme {
    /// Taps `d` apart (`d - 1` zeros between neighbours).
    Uniform { d: usize },
    /// `m * k` zeros after the `k`-th tap.
    Increasing { m: usize },
    /// A seeded random gap in `[0, max_gap]` after each tap.
    Random { seed: u64, max_gap: usize },
    /// A single zero inserted before element `position`.
    ZeroInsert { position: usize },
}

impl DilationScheme {
    /// `Uniform(d)` for every `d` in `range`.
    pub fn uniform_range(range: std::ops::Range<usize>) -> Vec<Self> {
        range.map(|d| Self::Uniform { d }).collect()
    }

    pub fn validate(&self, kernel_len: usize) -> Result<()> {
        match *self {
            Self::Uniform { d: 0 } => Err(Error::InvalidScheme("uniform dilation must be >= 1".into())),
            Self::Random { max_gap: 0, .. } => {
                Err(Error::InvalidScheme("random max_gap must be >= 1".into()))
            }
            Self::ZeroInsert { position } if position > kernel_len => Err(Error::InvalidScheme(
                format!("zero insert position {position} exceeds kernel length {kernel_len}"),
            )),
            _ => Ok(()),
        }
    }

    /// Number of zeros following each of the first `len - 1` taps.
    fn gaps(&self, len: usize) -> Vec<usize> {
        match *self {
            Self::Uniform { d } => vec![d - 1; len - 1],
            Self::Increasing { m } => (1..len).map(|k| m * k).collect(),
            Self::Random { seed, max_gap } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (1..len).map(|_| rng.random_range(0..=max_gap)).collect()
            }
            Self::ZeroInsert { position } => (1..len)
                .map(|k| usize::from(k == position))
                .collect(),
        }
    }
}

impl fmt::Display for DilationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { d } => write!(f, "u{d}"),
            Self::Increasing { m } => write!(f, "inc{m}"),
            Self::Random { seed, max_gap } => write!(f, "rnd{seed}g{max_gap}"),
            Self::ZeroInsert { position } => write!(f, "zi{position}"),
        }
    }
}

/// A non-zero kernel weight and its offset within the dilated window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tap {
    pub offset: usize,
    pub weight: i8,
}

/// A kernel after dilation, in both dense and sparse form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilatedKernel {
    weights: Vec<i8>,
    taps: Vec<Tap>,
}

impl DilatedKernel {
    /// Dense weights, zeros included.
    pub fn weights(&self) -> &[i8] {
        &self.weights
    }

    /// Non-zero weights with their offsets, in increasing offset order.
    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Window length covered by the kernel (the dense length).
    pub fn span(&self) -> usize {
        self.weights.len()
    }
}

/// Expands `kernel` according to `scheme`.
pub fn dilate(kernel: &[i8], scheme: DilationScheme) -> Result<DilatedKernel> {
    if kernel.len() < 2 {
        return Err(Error::InvalidScheme(format!(
            "kernel length {} is below 2",
            kernel.len()
        )));
    }
    if kernel.iter().any(|&w| w != 1 && w != -1) {
        return Err(Error::InvalidScheme("kernel weights must be +1 or -1".into()));
    }
    scheme.validate(kernel.len())?;

    let leading = usize::from(matches!(scheme, DilationScheme::ZeroInsert { position: 0 }));
    let trailing = usize::from(
        matches!(scheme, DilationScheme::ZeroInsert { position } if position == kernel.len()),
    );
    let gaps = scheme.gaps(kernel.len());

    let mut taps = Vec::with_capacity(kernel.len());
    let mut offset = leading;
    for (k, &weight) in kernel.iter().enumerate() {
        taps.push(Tap { offset, weight });
        offset += 1 + gaps.get(k).copied().unwrap_or(0);
    }
    let span = taps.last().map_or(0, |t| t.offset + 1) + trailing;
    let mut weights = vec![0i8; span];
    for tap in &taps {
        weights[tap.offset] = tap.weight;
    }
    Ok(DilatedKernel { weights, taps })
}
