use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::ValueEnum;
use hdp_core::dataset::{compute_stats, DefectDataset};
use hdp_core::experiment::ExperimentConfig;
use hdp_core::matching::{FeasibilityPolicy, MatchConfig};
use hdp_core::model::{ClassifierKind, Hyperparameters};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierChoice {
    Lr,
    Rf,
    Both,
}

impl ClassifierChoice {
    pub fn kinds(self) -> Vec<ClassifierKind> {
        match self {
            ClassifierChoice::Lr => vec![ClassifierKind::LogisticRegression],
            ClassifierChoice::Rf => vec![ClassifierKind::RandomForest],
            ClassifierChoice::Both => vec![ClassifierKind::LogisticRegression, ClassifierKind::RandomForest],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyChoice {
    AllSource,
    Any,
}

impl From<PolicyChoice> for FeasibilityPolicy {
    fn from(p: PolicyChoice) -> Self {
        match p {
            PolicyChoice::AllSource => FeasibilityPolicy::AllSource,
            PolicyChoice::Any => FeasibilityPolicy::Any,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Wpdp,
    Cpdp,
    Hdp,
    Ensemble,
    Similarity,
    Coverage,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Wpdp,
        Analysis::Cpdp,
        Analysis::Hdp,
        Analysis::Ensemble,
        Analysis::Similarity,
        Analysis::Coverage,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub classifier: ClassifierChoice,
    pub fraction: f64,
    pub cutoff: f64,
    pub repeats: usize,
    pub nan_threshold: f64,
    pub policy: PolicyChoice,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub only: Vec<Analysis>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            bail!("--fraction must be in (0, 1], got {}", self.fraction);
        }
        if !(0.0..=1.0).contains(&self.cutoff) {
            bail!("--cutoff must be in [0, 1], got {}", self.cutoff);
        }
        if !(0.0..=1.0).contains(&self.nan_threshold) {
            bail!("--nan-threshold must be in [0, 1], got {}", self.nan_threshold);
        }
        if self.repeats == 0 {
            bail!("--repeats must be at least 1");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(())
    }

    pub fn analyses(&self) -> Vec<Analysis> {
        let mut a = if self.only.is_empty() {
            Analysis::ALL.to_vec()
        } else {
            self.only.clone()
        };
        a.sort();
        a.dedup();
        a
    }

    pub fn experiment(&self, classifier: ClassifierKind) -> ExperimentConfig {
        ExperimentConfig {
            classifier,
            hyperparameters: Hyperparameters::default(),
            matching: MatchConfig {
                fraction: self.fraction,
                cutoff: self.cutoff,
                n_bins: MatchConfig::default().n_bins,
                policy: self.policy.into(),
            },
            n_repeats: self.repeats,
            nan_threshold: self.nan_threshold,
            alpha: ExperimentConfig::default().alpha,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub project: String,
    pub group: String,
    pub n_instances: usize,
    pub n_buggy: usize,
    pub n_metrics: usize,
}

impl DatasetSummary {
    pub fn of(d: &DefectDataset) -> Self {
        let s = compute_stats(d);
        Self {
            project: d.project_name().to_string(),
            group: d.group_name().to_string(),
            n_instances: s.n_instances,
            n_buggy: s.n_buggy,
            n_metrics: s.n_metrics,
        }
    }
}

/// Everything that determines result values, apart from the classifier
/// (each file names its own) and execution settings.
#[derive(Serialize)]
struct Hashed<'a> {
    experiment: ExperimentConfig,
    datasets: &'a [DatasetSummary],
}

pub fn config_hash(cfg: &RunConfig, datasets: &[DatasetSummary]) -> String {
    let e = cfg.experiment(ClassifierKind::LogisticRegression);
    let json = serde_json::to_vec(&Hashed {
        experiment: e,
        datasets,
    })
    .expect("config serializes");
    hex::encode(Sha256::digest(&json))
}
