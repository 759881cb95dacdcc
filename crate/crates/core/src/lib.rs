//! Time series features from dilated convolutions with Hadamard kernels.
//!
//! The columns of a Sylvester Hadamard matrix are mutually orthogonal ±1
//! vectors. Convolving a series with each of them at a range of dilations and
//! pooling every output against quantile biases gives a compact feature vector
//! for linear classifiers.
//!
//! ```
//! use hitrocket::{Featurizer, FeatureLevel, TimeSeries, TransformConfig};
//!
//! let cfg = TransformConfig::level(FeatureLevel::Half).with_seed(7);
//! let featurizer = Featurizer::new(cfg).unwrap();
//! let train: Vec<TimeSeries> = (0..4)
//!     .map(|k| TimeSeries::new((0..200).map(|t| ((t * (k + 1)) as f64 * 0.1).sin()).collect()))
//!     .collect();
//! let biases = featurizer.fit_biases(&train).unwrap();
//! let features = featurizer.transform(&train, &biases).unwrap();
//! assert_eq!(features.n_cols(), 528);
//! ```

pub mod classifiers;
pub mod conv;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod features;
pub mod hadamard;
pub mod one_class;
pub mod pooling;
pub mod trajectory;

pub use classifiers::{evaluate, EvalReport, LinearModel, Model};
pub use conv::{convolve_valid, diff_series, zero_pad, PadMode, TimeSeries};
pub use dataset::{add_awgn, load_tsv, make_synthetic, save_tsv, Dataset, NoiseSpec, SyntheticKind};
pub use error::{Error, Result};
pub use exec::Execution;
pub use features::{
    feature_dimension, feature_layout, fit_biases, transform, BiasTable, Channel, ColumnMeta,
    FeatureKind, FeatureLevel, FeatureMatrix, Featurizer, TransformConfig,
};
pub use hadamard::{dilate, extract_kernel, sylvester, DilatedKernel, DilationScheme, HadamardMatrix, KernelBank};
pub use one_class::OneClassModel;
