//! Run configuration documents.

use std::fmt;
use std::path::{Path, PathBuf};

use hitrocket::classifiers::LogisticOptions;
use hitrocket::one_class::OneClassParams;
use hitrocket::{FeatureLevel, TransformConfig};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A full transform config, or `{"preset": "3k", "seed": 0}`.
    #[serde(deserialize_with = "transform_or_preset")]
    pub transform: TransformConfig,
    pub classifier: ClassifierConfig,
    pub io: IoConfig,
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    /// Feature levels to run through `bench` in addition to the main config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension_sweep: Option<Vec<FeatureLevel>>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierConfig {
    Ridge {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Logistic {
        #[serde(default = "default_l2")]
        l2_lambda: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    LsOcsvm {
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "default_recall")]
        target_recall: f64,
        /// Label of the normal class; the most frequent training label when absent.
        #[serde(default)]
        positive_label: Option<String>,
    },
}

fn default_alpha() -> f64 {
    1.0
}
fn default_l2() -> f64 {
    LogisticOptions::default().l2_lambda
}
fn default_max_iter() -> usize {
    LogisticOptions::default().max_iter
}
fn default_tol() -> f64 {
    LogisticOptions::default().tol
}
fn default_gamma() -> f64 {
    OneClassParams::default().gamma
}
fn default_lambda() -> f64 {
    OneClassParams::default().lambda
}
fn default_recall() -> f64 {
    OneClassParams::default().target_recall
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub train_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
    /// Left out of report echoes; it does not affect results.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub snr_list_db: Vec<Snr>,
    pub seed: u64,
}

/// A signal-to-noise ratio in dB, or no noise at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    Clean,
}

impl Snr {
    pub fn as_db(self) -> f64 {
        match self {
            Self::Db(v) => v,
            Self::Clean => f64::INFINITY,
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Db(v) => write!(f, "{v}"),
            Self::Clean => f.write_str("none"),
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Db(v) => s.serialize_f64(*v),
            Self::Clean => s.serialize_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Self::Db(v)),
            Raw::Text(t) if t == "none" => Ok(Self::Clean),
            _ => Err(de::Error::custom("snr entries must be finite numbers or \"none\"")),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Preset {
    preset: FeatureLevel,
    #[serde(default)]
    seed: u64,
}

fn transform_or_preset<'de, D: Deserializer<'de>>(d: D) -> Result<TransformConfig, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    if value.get("preset").is_some() {
        let p: Preset = serde_json::from_value(value).map_err(de::Error::custom)?;
        Ok(TransformConfig::level(p.preset).with_seed(p.seed))
    } else {
        serde_json::from_value(value).map_err(de::Error::custom)
    }
}

impl RunConfig {
    /// Parses a config; relative paths are resolved against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Applies `--seed` and `--output-dir`.
    pub fn with_overrides(mut self, seed: Option<u64>, output_dir: Option<PathBuf>) -> Self {
        if let Some(seed) = seed {
            self.transform.seed = seed;
        }
        if let Some(dir) = output_dir {
            self.io.output_dir = Some(dir);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.transform.validate()?;
        if self.repeats == 0 {
            return Err(CliError::Usage("repeats must be at least 1".into()));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive and finite")))
            }
        };
        match &self.classifier {
            ClassifierConfig::Ridge { alpha } => positive("alpha", *alpha)?,
            ClassifierConfig::Logistic { l2_lambda, max_iter, tol } => {
                positive("l2_lambda", *l2_lambda)?;
                positive("tol", *tol)?;
                if *max_iter == 0 {
                    return Err(CliError::Usage("max_iter must be at least 1".into()));
                }
            }
            ClassifierConfig::LsOcsvm { gamma, lambda, target_recall, .. } => {
                positive("gamma", *gamma)?;
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return Err(CliError::Usage("lambda must be non-negative".into()));
                }
                if !(*target_recall > 0.0 && *target_recall <= 1.0) {
                    return Err(CliError::Usage("target_recall must lie in (0, 1]".into()));
                }
            }
        }
        if let Some(noise) = &self.noise {
            if noise.snr_list_db.is_empty() {
                return Err(CliError::Usage("snr_list_db is empty".into()));
            }
            if noise.snr_list_db.windows(2).any(|w| w[0].as_db() >= w[1].as_db()) {
                return Err(CliError::Usage(
                    "snr_list_db must be strictly ascending, with \"none\" last".into(),
                ));
            }
        }
        if matches!(&self.dimension_sweep, Some(levels) if levels.is_empty()) {
            return Err(CliError::Usage("dimension_sweep is empty".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn train_path(&self) -> PathBuf {
        self.resolve(&self.io.train_path)
    }

    pub fn test_path(&self) -> Option<PathBuf> {
        self.io.test_path.as_deref().map(|p| self.resolve(p))
    }

    pub fn output_dir(&self) -> Result<PathBuf> {
        self.io
            .output_dir
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| CliError::Usage("no output directory: set io.output_dir or pass --output-dir".into()))
    }

    /// Copy with the transform seed replaced.
    pub fn transform_with_seed(&self, seed: u64) -> TransformConfig {
        self.transform.clone().with_seed(seed)
    }
}
