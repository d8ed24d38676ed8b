//! Heterogeneous defect prediction (HDP).
//!
//! Builds defect classifiers across software projects whose metric schemas do
//! not overlap. Source metrics are ranked by gain ratio, paired with target
//! metrics through Kolmogorov–Smirnov p-values and a maximum-weight bipartite
//! matching, and a classifier trained on the matched source columns scores the
//! target. The [`experiment`] module benchmarks this against within-project
//! and cross-project prediction.

pub mod dataset;
pub mod experiment;
pub mod matching;
pub mod matrix;
pub mod model;
pub mod seed;
pub mod selection;
pub mod stats;
pub mod synthetic;

pub use dataset::{DatasetError, DatasetStats, DefectDataset, Manifest};
pub use matching::{FeasibilityPolicy, MetricMatching, ScoreMatrix};
pub use matrix::Matrix;
pub use model::{ClassifierKind, Hyperparameters, TrainedModel};
