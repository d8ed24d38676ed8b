//! Benchmark runners: within-project (WPDP), cross-project on shared metrics
//! (CPDP), heterogeneous (HDP) pairwise and ensemble prediction, similarity
//! based source selection, and coverage reporting.
//!
//! Every task derives its seeds from the global seed and its own identity
//! (project indices, replication, fold), and results are collected in task
//! order, so outputs are identical at any degree of parallelism.

mod coverage;
mod ensemble;
mod hdp;
mod similarity;
mod wpdp;

pub use coverage::{coverage_report, CoverageReport, GroupCoverage, GroupPairCell};
pub use ensemble::{ensemble_hdp, ensemble_summary, run_ensemble, EnsembleResult, EnsembleSummary};
pub use hdp::{
    compare_wpdp_hdp, comparison_totals, feasibility_curve, hdp_pairwise, run_hdp_grid, AucGrid, ComparisonRecord,
    ComparisonTotals, Outcome, PairSummary, SourceComparison,
};
pub use similarity::{
    closest_source_records, closest_source_summary, dissimilarity, domain_agnostic_select, similarity_table,
    top_label_correlated, ClosestSourceRecord, ClosestSourceSummary, Selection,
};
pub use wpdp::{cpdp, cpdp_table, run_wpdp, shared_metrics, wpdp, CvScheme};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::{FeasibilityPolicy, MatchConfig};
use crate::model::{ClassifierKind, Hyperparameters, ModelError};
use crate::seed;
use crate::selection::SelectionError;
use crate::stats::StatsError;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("no source can be matched to target {target}")]
    NoFeasibleSource { target: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Settings shared by every runner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub classifier: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub matching: MatchConfig,
    /// Replications of 2-fold cross-validation for HDP and paired WPDP.
    pub n_repeats: usize,
    /// Largest acceptable fraction of missing HDP cells for a pair to count.
    pub nan_threshold: f64,
    /// Significance level of the win/tie/loss test.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::LogisticRegression,
            hyperparameters: Hyperparameters::default(),
            matching: MatchConfig::default(),
            n_repeats: 100,
            nan_threshold: 0.99,
            alpha: 0.05,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        let m = &self.matching;
        if !(m.fraction > 0.0 && m.fraction <= 1.0) {
            return bad("fraction must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&m.cutoff) {
            return bad("cutoff must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.nan_threshold) {
            return bad("nan threshold must be in [0, 1]");
        }
        if self.n_repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must be in (0, 1)");
        }
        if m.n_bins < 2 {
            return bad("at least two bins are needed");
        }
        Ok(())
    }

    pub fn with_classifier(mut self, kind: ClassifierKind) -> Self {
        self.classifier = kind;
        self
    }

    pub fn with_policy(mut self, policy: FeasibilityPolicy) -> Self {
        self.matching.policy = policy;
        self
    }
}

/// Seed of the fold split used for `target` in replication `rep` of a
/// `k`-fold scheme. WPDP and HDP share it, so their folds pair up.
pub fn fold_seed(global: u64, target: usize, rep: usize, k: usize) -> u64 {
    seed::derive(global, &[seed::tag::FOLDS, target as u64, rep as u64, k as u64])
}

/// Test-row indices of `k` stratified folds, each sorted ascending.
///
/// Clean and buggy rows are shuffled separately, then dealt round-robin: clean
/// rows start at fold 0 and buggy rows continue where the clean ones stopped,
/// which keeps fold sizes within one of each other.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(k >= 1, "need at least one fold");
    let mut rng = seed::rng(seed);
    let mut clean: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let mut buggy: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    clean.shuffle(&mut rng);
    buggy.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, &r) in clean.iter().chain(&buggy).enumerate() {
        folds[i % k].push(r);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Rows not in `test`, given `test` sorted.
pub(crate) fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - test.len());
    let mut j = 0;
    for i in 0..n {
        if j < test.len() && test[j] == i {
            j += 1;
        } else {
            out.push(i);
        }
    }
    out
}

/// Mean of the present cells.
pub fn mean_of_cells(v: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = v.iter().flatten().copied().collect();
    crate::stats::mean(&present)
}
