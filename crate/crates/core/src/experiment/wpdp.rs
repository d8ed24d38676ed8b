use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complement, fold_seed, stratified_folds, ExperimentConfig, ExperimentError};
use crate::dataset::DefectDataset;
use crate::model::{fit, ModelError};
use crate::seed;
use crate::stats::auc_roc;

/// Repeated stratified k-fold cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvScheme {
    pub repeats: usize,
    pub folds: usize,
}

impl CvScheme {
    pub const TEN_BY_TEN: CvScheme = CvScheme { repeats: 10, folds: 10 };

    pub fn two_fold(repeats: usize) -> Self {
        CvScheme { repeats, folds: 2 }
    }

    pub fn n_cells(&self) -> usize {
        self.repeats * self.folds
    }
}

/// Within-project AUCs, replication-major (`rep * folds + fold`). A cell is
/// `None` when its training or test fold holds a single class.
pub fn wpdp(
    d: &DefectDataset,
    target_index: usize,
    scheme: CvScheme,
    cfg: &ExperimentConfig,
) -> Result<Vec<Option<f64>>, ExperimentError> {
    let per_rep: Vec<Result<Vec<Option<f64>>, ExperimentError>> = (0..scheme.repeats)
        .into_par_iter()
        .map(|rep| {
            let folds = stratified_folds(
                d.labels(),
                scheme.folds,
                fold_seed(cfg.seed, target_index, rep, scheme.folds),
            );
            folds
                .iter()
                .enumerate()
                .map(|(f, test)| {
                    let train = complement(d.n_instances(), test);
                    let (xtr, ytr) = d.subset_rows(&train);
                    let (xte, yte) = d.subset_rows(test);
                    let model_seed = seed::derive(
                        cfg.seed,
                        &[
                            seed::tag::MODEL,
                            target_index as u64,
                            target_index as u64,
                            rep as u64,
                            f as u64,
                        ],
                    );
                    let model = match fit(cfg.classifier, &xtr, &ytr, &cfg.hyperparameters, model_seed) {
                        Ok(m) => m,
                        Err(ModelError::SingleClass) | Err(ModelError::TooFewRows(_)) => {
                            log::warn!(
                                "{}: replication {} fold {} has a single-class training set",
                                d.project_name(),
                                rep + 1,
                                f + 1
                            );
                            return Ok(None);
                        }
                        Err(e) => return Err(e.into()),
                    };
                    let p = model.predict_proba(&xte)?;
                    match auc_roc(&p, &yte) {
                        Ok(a) => Ok(Some(a)),
                        Err(_) => {
                            log::warn!(
                                "{}: replication {} fold {} has a single-class test set",
                                d.project_name(),
                                rep + 1,
                                f + 1
                            );
                            Ok(None)
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(scheme.n_cells());
    for r in per_rep {
        out.extend(r?);
    }
    Ok(out)
}

/// WPDP for every dataset, indexed like `datasets`.
pub fn run_wpdp(
    datasets: &[DefectDataset],
    scheme: CvScheme,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<Option<f64>>>, ExperimentError> {
    datasets
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let cells = wpdp(d, i, scheme, cfg)?;
            log::info!("wpdp {}: {} folds", d.project_name(), cells.len());
            Ok(cells)
        })
        .collect()
}

/// Metric names present in both datasets, in source column order.
pub fn shared_metrics(source: &DefectDataset, target: &DefectDataset) -> Vec<String> {
    source
        .metric_names()
        .iter()
        .filter(|m| target.metric_index(m).is_some())
        .cloned()
        .collect()
}

/// Trains on the whole source restricted to the metrics it shares by name
/// with the target and tests once on the whole target. `None` when the two
/// share no metric.
pub fn cpdp(
    source: &DefectDataset,
    target: &DefectDataset,
    cfg: &ExperimentConfig,
    model_seed: u64,
) -> Result<Option<f64>, ExperimentError> {
    let shared = shared_metrics(source, target);
    if shared.is_empty() {
        return Ok(None);
    }
    let sc: Vec<usize> = shared.iter().map(|m| source.metric_index(m).unwrap()).collect();
    let tc: Vec<usize> = shared.iter().map(|m| target.metric_index(m).unwrap()).collect();
    let model = fit(
        cfg.classifier,
        &source.instances().select_columns(&sc),
        source.labels(),
        &cfg.hyperparameters,
        model_seed,
    )?;
    let p = model.predict_proba(&target.instances().select_columns(&tc))?;
    Ok(Some(auc_roc(&p, target.labels())?))
}

/// `table[s][t]` = CPDP AUC from source `s` to target `t`; the diagonal is `None`.
pub fn cpdp_table(
    datasets: &[DefectDataset],
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<Option<f64>>>, ExperimentError> {
    let n = datasets.len();
    let cells: Vec<Result<Option<f64>, ExperimentError>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (s, t) = (k / n, k % n);
            if s == t {
                return Ok(None);
            }
            let ms = seed::derive(cfg.seed, &[seed::tag::CPDP, s as u64, t as u64]);
            cpdp(&datasets[s], &datasets[t], cfg, ms)
        })
        .collect();
    let mut table = vec![vec![None; n]; n];
    for (k, c) in cells.into_iter().enumerate() {
        table[k / n][k % n] = c?;
    }
    Ok(table)
}
