//! Delimited dataset files, synthetic fixtures and calibrated noise.
//!
//! Files follow the UCR archive layout: one series per line, the class label
//! first, then the values, separated by tabs or commas.
//!
//! All randomness comes from ChaCha8 streams seeded with `seed_from_u64`;
//! Gaussian samples use the ziggurat sampler of `rand_distr::StandardNormal`.
//! Noise for series `i` of a dataset is drawn from stream `i` of the seed, so
//! the result does not depend on how the series are scheduled.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conv::TimeSeries;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    pub series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Labels of every series; unlabelled series map to the empty string.
    pub fn labels(&self) -> Vec<String> {
        self.series
            .iter()
            .map(|s| s.label.clone().unwrap_or_default())
            .collect()
    }
}

/// Loads a delimited dataset. The split is `Test` when the file name contains
/// `TEST` and `Train` otherwise.
pub fn load_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let split = if name.to_ascii_uppercase().contains("TEST") {
        Split::Test
    } else {
        Split::Train
    };
    let series = parse_delimited(&text)?;
    Ok(Dataset {
        name,
        split,
        series,
    })
}

/// Parses delimited text; the delimiter is taken from the first non-empty line.
pub fn parse_delimited(text: &str) -> Result<Vec<TimeSeries>> {
    let mut delimiter = None;
    let mut series = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let delim = *delimiter.get_or_insert(if line.contains('\t') { '\t' } else { ',' });
        let other = if delim == '\t' { ',' } else { '\t' };
        if line.contains(other) && !line.contains(delim) {
            return Err(err(format!("inconsistent delimiter: expected {delim:?}")));
        }
        let mut fields = line.split(delim);
        let label = fields.next().unwrap_or_default().trim().to_owned();
        let values = fields
            .map(|f| {
                let f = f.trim();
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(err(format!("non-finite value {f:?}"))),
                    Err(_) => Err(err(format!("non-numeric value {f:?}"))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(err("line has a label but no values".into()));
        }
        series.push(TimeSeries::labelled(values, label));
    }
    if series.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(series)
}

/// Writes `ds` tab-separated, values in shortest round-trip form.
pub fn save_tsv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_tsv(&ds.series))?;
    Ok(())
}

pub fn format_tsv(series: &[TimeSeries]) -> String {
    let mut out = String::new();
    for s in series {
        out.push_str(s.label.as_deref().unwrap_or(""));
        for v in &s.values {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

/// Additive white Gaussian noise at a target signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// `f64::INFINITY` means no noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn none() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_none(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// ChaCha8 stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Adds noise with variance `mean(x²) / 10^(snr_db / 10)`.
pub fn add_awgn(x: &TimeSeries, spec: &NoiseSpec) -> TimeSeries {
    add_awgn_stream(x, spec, 0)
}

fn add_awgn_stream(x: &TimeSeries, spec: &NoiseSpec, stream: u64) -> TimeSeries {
    if spec.is_none() || x.is_empty() {
        return x.clone();
    }
    let power = x.values.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if x.values.windows(2).all(|w| w[0] == w[1]) {
        log::warn!("adding noise to a constant series; signal power taken from its squared mean");
    }
    let sigma = (power / 10f64.powf(spec.snr_db / 10.0)).sqrt();
    let mut rng = stream_rng(spec.seed, stream);
    TimeSeries {
        values: x
            .values
            .iter()
            .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        label: x.label.clone(),
    }
}

/// Noisy copy of every series; series `i` uses stream `stream_base + i`.
pub fn add_awgn_dataset(ds: &Dataset, spec: &NoiseSpec, stream_base: u64) -> Dataset {
    add_awgn_dataset_with(ds, spec, stream_base, Execution::default())
}

pub fn add_awgn_dataset_with(
    ds: &Dataset,
    spec: &NoiseSpec,
    stream_base: u64,
    exec: Execution,
) -> Dataset {
    let series = map_indexed(exec, ds.len(), |i| {
        add_awgn_stream(&ds.series[i], spec, stream_base + i as u64)
    });
    Dataset {
        name: ds.name.clone(),
        split: ds.split,
        series,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Sinusoids at 4 or 9 cycles per series, random phase, labels `0`/`1`.
    TwoClassFreq,
    /// AR(2) processes with two coefficient sets, labels `0`/`1`.
    ArProcess,
    /// `n` noisy copies of a template labelled `inlier` plus `n / 10` copies
    /// shifted by six noise standard deviations labelled `outlier`.
    BlobOutliers,
}

/// Noise level of the blob fixture.
pub const BLOB_SIGMA: f64 = 0.25;

pub fn make_synthetic(kind: SyntheticKind, n: usize, length: usize, seed: u64) -> Result<Dataset> {
    if n < 4 || length < 64 {
        return Err(Error::Config(format!(
            "synthetic datasets need n >= 4 and length >= 64, got n = {n}, length = {length}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(StandardNormal);
    let series = match kind {
        SyntheticKind::TwoClassFreq => (0..n)
            .map(|i| {
                let class = i % 2;
                let cycles = [4.0, 9.0][class];
                let phase = rng.random_range(0.0..2.0 * PI);
                let values = (0..length)
                    .map(|t| {
                        (2.0 * PI * cycles * t as f64 / length as f64 + phase).sin()
                            + 0.1 * gauss(&mut rng)
                    })
                    .collect();
                TimeSeries::labelled(values, class.to_string())
            })
            .collect(),
        SyntheticKind::ArProcess => (0..n)
            .map(|i| {
                let class = i % 2;
                let (a1, a2) = [(1.2, -0.6), (0.2, 0.5)][class];
                let (mut p1, mut p2) = (0.0, 0.0);
                let mut values = Vec::with_capacity(length);
                for t in 0..length + 50 {
                    let v = a1 * p1 + a2 * p2 + gauss(&mut rng);
                    p2 = p1;
                    p1 = v;
                    if t >= 50 {
                        values.push(v);
                    }
                }
                TimeSeries::labelled(values, class.to_string())
            })
            .collect(),
        SyntheticKind::BlobOutliers => {
            let outliers = (n / 10).max(1);
            (0..n + outliers)
                .map(|i| {
                    let shift = if i < n { 0.0 } else { 6.0 * BLOB_SIGMA };
                    let values = (0..length)
                        .map(|t| {
                            (2.0 * PI * 3.0 * t as f64 / length as f64).sin()
                                + shift
                                + BLOB_SIGMA * gauss(&mut rng)
                        })
                        .collect();
                    TimeSeries::labelled(values, if i < n { "inlier" } else { "outlier" })
                })
                .collect()
        }
    };
    Ok(Dataset {
        name: format!("{kind:?}"),
        split: Split::Train,
        series,
    })
}
