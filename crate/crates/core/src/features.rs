//! Bias fitting and the pooled feature transform.
//!
//! Column order of a [`FeatureMatrix`] is fixed by [`feature_layout`]:
//!
//! ```text
//! for channel in [raw, diff?]
//!   for kernel in bank
//!     for scheme in dilations
//!       ppv for (sample, quantile) in sample-major order
//!       max, mpv, mipv, lspv   (those enabled, always in this order)
//! ```
//!
//! Biases are stored in the same (channel, kernel, scheme, sample, quantile)
//! order, so the PPV columns of a row line up one-to-one with the bias table.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conv::{convolve_into, TimeSeries};
use crate::error::{Error, Result};
use crate::exec::{for_each_row, Execution};
use crate::hadamard::{dilate, DilatedKernel, DilationScheme, KernelBank};
use crate::pooling::{lspv, max_unchecked, mipv, mpv, ppv_unchecked, quantiles};

pub const BIAS_TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Ppv,
    Max,
    Mpv,
    Mipv,
    Lspv,
}

impl FeatureKind {
    /// Bias-independent kinds, in column order.
    pub const ENHANCED: [FeatureKind; 4] = [Self::Max, Self::Mpv, Self::Mipv, Self::Lspv];

    fn as_str(self) -> &'static str {
        match self {
            Self::Ppv => "ppv",
            Self::Max => "max",
            Self::Mpv => "mpv",
            Self::Mipv => "mipv",
            Self::Lspv => "lspv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Raw,
    Diff,
}

impl Channel {
    fn as_str(self) -> &'static str {
        match self {
            Self::Raw => "raw",
            Self::Diff => "diff",
        }
    }
}

/// Named parameter sets at roughly 0.5k, 3k and 8k PPV features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureLevel {
    #[serde(rename = "0.5k")]
    Half,
    #[serde(rename = "3k")]
    ThreeK,
    #[serde(rename = "8k")]
    EightK,
}

impl fmt::Display for FeatureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Half => "0.5k",
            Self::ThreeK => "3k",
            Self::EightK => "8k",
        })
    }
}

impl FromStr for FeatureLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0.5k" => Ok(Self::Half),
            "3k" => Ok(Self::ThreeK),
            "8k" => Ok(Self::EightK),
            other => Err(Error::Config(format!("unknown feature level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub kernel_length: usize,
    pub dilations: Vec<DilationScheme>,
    pub quantiles: Vec<f64>,
    pub n_bias_samples: usize,
    pub features: Vec<FeatureKind>,
    pub use_diff_channel: bool,
    pub include_dc_kernel: bool,
    pub seed: u64,
}

impl TransformConfig {
    pub fn level(level: FeatureLevel) -> Self {
        let (dilations, quantiles, samples) = match level {
            FeatureLevel::Half => (1..12, vec![0.618], 3),
            FeatureLevel::ThreeK => (1..21, vec![0.618, 0.95], 5),
            FeatureLevel::EightK => (1..25, vec![0.05, 0.3, 0.618, 0.95], 5),
        };
        Self {
            kernel_length: 16,
            dilations: DilationScheme::uniform_range(dilations),
            quantiles,
            n_bias_samples: samples,
            features: vec![FeatureKind::Ppv],
            use_diff_channel: false,
            include_dc_kernel: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if ![8, 16, 32].contains(&self.kernel_length) {
            return Err(Error::Config(format!(
                "kernel_length must be 8, 16 or 32, got {}",
                self.kernel_length
            )));
        }
        if self.dilations.is_empty() {
            return Err(Error::Config("dilations must not be empty".into()));
        }
        for scheme in &self.dilations {
            scheme.validate(self.kernel_length)?;
        }
        if self.quantiles.is_empty() {
            return Err(Error::Config("quantiles must not be empty".into()));
        }
        if self.quantiles.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::Config("quantiles must lie in (0, 1)".into()));
        }
        if self.quantiles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("quantiles must be strictly increasing".into()));
        }
        if self.n_bias_samples == 0 {
            return Err(Error::Config("n_bias_samples must be positive".into()));
        }
        if !self.features.contains(&FeatureKind::Ppv) {
            return Err(Error::Config("features must include ppv".into()));
        }
        let mut kinds = self.features.clone();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.features.len() {
            return Err(Error::Config("features contain duplicates".into()));
        }
        Ok(())
    }

    pub fn channels(&self) -> Vec<Channel> {
        if self.use_diff_channel {
            vec![Channel::Raw, Channel::Diff]
        } else {
            vec![Channel::Raw]
        }
    }

    /// Enabled bias-independent features in column order.
    pub fn enhanced(&self) -> Vec<FeatureKind> {
        FeatureKind::ENHANCED
            .into_iter()
            .filter(|k| self.features.contains(k))
            .collect()
    }

    pub fn bank(&self) -> Result<KernelBank> {
        KernelBank::new(self.kernel_length, self.include_dc_kernel)
    }
}

/// Identity of one feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColumnMeta {
    pub channel: Channel,
    /// Column index of the kernel in the source Hadamard matrix.
    pub kernel: usize,
    /// Position of the scheme in `TransformConfig::dilations`.
    pub scheme: usize,
    pub kind: FeatureKind,
    /// `(sample, quantile)` for PPV columns.
    pub bias: Option<(usize, usize)>,
}

impl fmt::Display for ColumnMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.k{}.d{}", self.channel.as_str(), self.kernel, self.scheme)?;
        if let Some((s, q)) = self.bias {
            write!(f, ".s{s}.q{q}")?;
        }
        write!(f, ".{}", self.kind.as_str())
    }
}

/// Column metadata for every feature `transform` emits, in column order.
pub fn feature_layout(cfg: &TransformConfig, bank: &KernelBank) -> Vec<ColumnMeta> {
    let enhanced = cfg.enhanced();
    let mut out = Vec::with_capacity(feature_dimension(cfg, bank));
    for channel in cfg.channels() {
        for kernel in bank.kernels() {
            for scheme in 0..cfg.dilations.len() {
                for sample in 0..cfg.n_bias_samples {
                    for quantile in 0..cfg.quantiles.len() {
                        out.push(ColumnMeta {
                            channel,
                            kernel: kernel.index,
                            scheme,
                            kind: FeatureKind::Ppv,
                            bias: Some((sample, quantile)),
                        });
                    }
                }
                for &kind in &enhanced {
                    out.push(ColumnMeta {
                        channel,
                        kernel: kernel.index,
                        scheme,
                        kind,
                        bias: None,
                    });
                }
            }
        }
    }
    out
}

/// Number of columns `transform` emits for `cfg`.
pub fn feature_dimension(cfg: &TransformConfig, bank: &KernelBank) -> usize {
    let per_output = cfg.n_bias_samples * cfg.quantiles.len() + cfg.enhanced().len();
    cfg.channels().len() * bank.len() * cfg.dilations.len() * per_output
}

/// Hex SHA-256 over the comma-joined column identifiers.
pub fn layout_hash<S: AsRef<str>>(columns: &[S]) -> String {
    let mut hasher = Sha256::new();
    for (i, c) in columns.iter().enumerate() {
        if i > 0 {
            hasher.update(b",");
        }
        hasher.update(c.as_ref().as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Position of a bias: `(channel, kernel, scheme, sample, quantile)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasKey {
    pub channel: Channel,
    pub kernel: usize,
    pub scheme: usize,
    pub sample: usize,
    pub quantile: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasTable {
    pub version: u32,
    pub config: TransformConfig,
    /// Training-set indices of the series the biases were drawn from.
    pub sample_indices: Vec<usize>,
    pub layout: Vec<BiasKey>,
    pub biases: Vec<f64>,
}

impl BiasTable {
    pub fn len(&self) -> usize {
        self.biases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.biases.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(s)?;
        if table.version != BIAS_TABLE_VERSION {
            return Err(Error::Version {
                found: table.version,
                expected: BIAS_TABLE_VERSION,
            });
        }
        table.config.validate()?;
        let bank = table.config.bank()?;
        let expected = bias_layout(&table.config, &bank);
        if table.layout != expected || table.biases.len() != expected.len() {
            return Err(Error::Shape {
                expected: format!("{} bias entries", expected.len()),
                found: format!("{} layout / {} biases", table.layout.len(), table.biases.len()),
            });
        }
        if table.biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("bias table contains non-finite values".into()));
        }
        Ok(table)
    }
}

fn bias_layout(cfg: &TransformConfig, bank: &KernelBank) -> Vec<BiasKey> {
    let mut out = Vec::new();
    for channel in cfg.channels() {
        for kernel in bank.kernels() {
            for scheme in 0..cfg.dilations.len() {
                for sample in 0..cfg.n_bias_samples {
                    for quantile in 0..cfg.quantiles.len() {
                        out.push(BiasKey {
                            channel,
                            kernel: kernel.index,
                            scheme,
                            sample,
                            quantile,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Features of a dataset: one row per series, columns per [`feature_layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n_rows: usize,
    pub columns: Vec<String>,
    /// Row-major values.
    pub values: Vec<f64>,
    pub labels: Vec<Option<String>>,
}

impl FeatureMatrix {
    /// Wraps raw row-major values with generated column ids `c0, c1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Option<String>>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape {
                expected: format!("{n_cols} columns in every row"),
                found: "ragged rows".into(),
            });
        }
        if labels.len() != rows.len() {
            return Err(Error::Shape {
                expected: format!("{} labels", rows.len()),
                found: format!("{} labels", labels.len()),
            });
        }
        Ok(Self {
            n_rows: rows.len(),
            columns: (0..n_cols).map(|c| format!("c{c}")).collect(),
            values: rows.concat(),
            labels,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.n_cols();
        &self.values[r * w..(r + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |r| self.row(r))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, c)).collect()
    }

    pub fn layout_hash(&self) -> String {
        layout_hash(&self.columns)
    }

    /// Copy restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            n_rows: rows.len(),
            columns: self.columns.clone(),
            values: rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect(),
            labels: rows.iter().map(|&r| self.labels[r].clone()).collect(),
        }
    }

    /// Labels, failing when any row is unlabelled.
    pub fn required_labels(&self) -> Result<Vec<String>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.clone()
                    .ok_or_else(|| Error::DegenerateLabels(format!("row {i} has no label")))
            })
            .collect()
    }

    /// CSV with a `label` column followed by one column per feature id.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("label").chain(self.columns.iter().map(String::as_str)))
            .map_err(csv_err)?;
        let mut record = Vec::with_capacity(self.n_cols() + 1);
        for r in 0..self.n_rows {
            record.clear();
            record.push(self.labels[r].clone().unwrap_or_default());
            record.extend(self.row(r).iter().map(|v| v.to_string()));
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(csv_err)?.clone();
        if header.get(0) != Some("label") {
            return Err(Error::Parse {
                line: 1,
                message: "first column must be `label`".into(),
            });
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            if rec.len() != columns.len() + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", columns.len() + 1, rec.len()),
                });
            }
            let label = &rec[0];
            labels.push((!label.is_empty()).then(|| label.to_owned()));
            for field in rec.iter().skip(1) {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric field {field:?}"),
                })?;
                values.push(v);
            }
        }
        Ok(Self {
            n_rows: labels.len(),
            columns,
            values,
            labels,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// A transform configuration with its kernel bank and every dilated kernel
/// precomputed.
#[derive(Debug, Clone)]
pub struct Featurizer {
    cfg: TransformConfig,
    bank: KernelBank,
    /// Indexed `[kernel * n_schemes + scheme]`.
    kernels: Vec<DilatedKernel>,
    max_span: usize,
}

impl Featurizer {
    pub fn new(cfg: TransformConfig) -> Result<Self> {
        let bank = cfg.bank()?;
        Self::with_bank(cfg, bank)
    }

    pub fn with_bank(cfg: TransformConfig, bank: KernelBank) -> Result<Self> {
        cfg.validate()?;
        if bank.length() != cfg.kernel_length {
            return Err(Error::Config(format!(
                "kernel bank of length {} does not match kernel_length {}",
                bank.length(),
                cfg.kernel_length
            )));
        }
        let kernels = bank
            .kernels()
            .iter()
            .flat_map(|k| cfg.dilations.iter().map(move |&s| dilate(&k.weights, s)))
            .collect::<Result<Vec<_>>>()?;
        let max_span = kernels.iter().map(DilatedKernel::span).max().unwrap_or(1);
        Ok(Self {
            cfg,
            bank,
            kernels,
            max_span,
        })
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &KernelBank {
        &self.bank
    }

    /// Longest kernel span; shorter series are zero-padded to it.
    pub fn max_span(&self) -> usize {
        self.max_span
    }

    pub fn dimension(&self) -> usize {
        feature_dimension(&self.cfg, &self.bank)
    }

    pub fn layout(&self) -> Vec<ColumnMeta> {
        feature_layout(&self.cfg, &self.bank)
    }

    /// Raw (and diff) inputs of `x`, each trailing-zero-padded to `max_span`.
    fn channel_inputs(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let pad = |mut v: Vec<f64>| {
            if v.len() < self.max_span {
                v.resize(self.max_span, 0.0);
            }
            v
        };
        self.cfg
            .channels()
            .into_iter()
            .map(|c| match c {
                Channel::Raw => pad(x.to_vec()),
                Channel::Diff => pad(x.windows(2).map(|w| w[1] - w[0]).collect()),
            })
            .collect()
    }

    /// Draws the bias series and takes quantiles of each of their convolution
    /// outputs.
    pub fn fit_biases(&self, train: &[TimeSeries]) -> Result<BiasTable> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let s = self.cfg.n_bias_samples;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let sample_indices = if train.len() >= s {
            index::sample(&mut rng, train.len(), s).into_vec()
        } else {
            log::warn!(
                "training set has {} series, fewer than the {s} bias samples; sampling with replacement",
                train.len()
            );
            (0..s).map(|_| rng.random_range(0..train.len())).collect()
        };

        let inputs: Vec<Vec<Vec<f64>>> = sample_indices
            .iter()
            .map(|&i| self.channel_inputs(&train[i].values))
            .collect();
        let n_schemes = self.cfg.dilations.len();
        let mut biases = Vec::with_capacity(self.kernels.len() * s * self.cfg.quantiles.len());
        let mut out = Vec::new();
        for ch in 0..self.cfg.channels().len() {
            for k in 0..self.bank.len() {
                for d in 0..n_schemes {
                    let kernel = &self.kernels[k * n_schemes + d];
                    for sample in &inputs {
                        convolve_into(&sample[ch], kernel, &mut out)?;
                        biases.extend(quantiles(&out, &self.cfg.quantiles)?);
                    }
                }
            }
        }
        Ok(BiasTable {
            version: BIAS_TABLE_VERSION,
            config: self.cfg.clone(),
            sample_indices,
            layout: bias_layout(&self.cfg, &self.bank),
            biases,
        })
    }

    pub fn transform(&self, data: &[TimeSeries], biases: &BiasTable) -> Result<FeatureMatrix> {
        self.transform_with(data, biases, Execution::default())
    }

    pub fn transform_with(
        &self,
        data: &[TimeSeries],
        biases: &BiasTable,
        exec: Execution,
    ) -> Result<FeatureMatrix> {
        if biases.config != self.cfg {
            return Err(Error::Shape {
                expected: "bias table fitted with this transform config".into(),
                found: "bias table from a different config".into(),
            });
        }
        let width = self.dimension();
        if biases.len() != self.kernels.len() * self.cfg.channels().len() * self.per_output_biases()
        {
            return Err(Error::Shape {
                expected: format!("{} biases", width),
                found: format!("{} biases", biases.len()),
            });
        }
        let mut values = vec![0.0; data.len() * width];
        for_each_row(exec, &mut values, width, |i, row| {
            self.transform_row(&data[i].values, &biases.biases, row)
        })?;
        Ok(FeatureMatrix {
            n_rows: data.len(),
            columns: self.layout().iter().map(ToString::to_string).collect(),
            values,
            labels: data.iter().map(|s| s.label.clone()).collect(),
        })
    }

    fn per_output_biases(&self) -> usize {
        self.cfg.n_bias_samples * self.cfg.quantiles.len()
    }

    fn transform_row(&self, x: &[f64], biases: &[f64], row: &mut [f64]) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("series contains non-finite values".into()));
        }
        let per_output = self.per_output_biases();
        let enhanced = self.cfg.enhanced();
        let mut out = Vec::new();
        let mut col = 0;
        let mut bias_pos = 0;
        for input in self.channel_inputs(x) {
            for kernel in &self.kernels {
                convolve_into(&input, kernel, &mut out)?;
                for &b in &biases[bias_pos..bias_pos + per_output] {
                    row[col] = ppv_unchecked(&out, b);
                    col += 1;
                }
                bias_pos += per_output;
                for &kind in &enhanced {
                    row[col] = match kind {
                        FeatureKind::Max => max_unchecked(&out),
                        FeatureKind::Mpv => mpv(&out),
                        FeatureKind::Mipv => mipv(&out),
                        FeatureKind::Lspv => lspv(&out) as f64,
                        FeatureKind::Ppv => unreachable!("ppv is not an enhanced feature"),
                    };
                    col += 1;
                }
            }
        }
        debug_assert_eq!(col, row.len());
        Ok(())
    }
}

/// Fits a bias table for `cfg` over `bank`.
pub fn fit_biases(train: &[TimeSeries], bank: &KernelBank, cfg: &TransformConfig) -> Result<BiasTable> {
    Featurizer::with_bank(cfg.clone(), bank.clone())?.fit_biases(train)
}

/// Transforms `data` with a previously fitted bias table.
pub fn transform(
    data: &[TimeSeries],
    bank: &KernelBank,
    cfg: &TransformConfig,
    biases: &BiasTable,
) -> Result<FeatureMatrix> {
    Featurizer::with_bank(cfg.clone(), bank.clone())?.transform(data, biases)
}

/// Mean absolute Pearson correlation between raw-channel PPV columns that
/// share scheme, sample and quantile but come from different kernels.
/// Constant columns are skipped; `None` when no pair qualifies.
pub fn ppv_cross_kernel_correlation(fm: &FeatureMatrix, layout: &[ColumnMeta]) -> Option<f64> {
    use std::collections::BTreeMap;

    let mut groups: BTreeMap<(usize, (usize, usize)), Vec<usize>> = BTreeMap::new();
    for (c, meta) in layout.iter().enumerate() {
        if let (Channel::Raw, FeatureKind::Ppv, Some(bias)) = (meta.channel, meta.kind, meta.bias) {
            groups.entry((meta.scheme, bias)).or_default().push(c);
        }
    }
    let standardized = |c: usize| -> Option<Vec<f64>> {
        let col = fm.column(c);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let ss = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        (ss > 0.0).then(|| col.iter().map(|v| (v - mean) / ss.sqrt()).collect())
    };
    let mut total = 0.0;
    let mut pairs = 0usize;
    for cols in groups.values() {
        let zs: Vec<Vec<f64>> = cols.iter().filter_map(|&c| standardized(c)).collect();
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                let r: f64 = zs[i].iter().zip(&zs[j]).map(|(a, b)| a * b).sum();
                total += r.abs();
                pairs += 1;
            }
        }
    }
    (pairs > 0).then(|| total / pairs as f64)
}
