use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError};
use crate::dataset::DefectDataset;
use crate::matching::match_datasets;
use crate::model::fit;
use crate::seed;
use crate::stats::{auc_roc, mean, wilcoxon_signed_rank, WilcoxonResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub target: String,
    pub feasible_sources: Vec<String>,
    /// AUC of each feasible source alone on the whole target.
    pub source_aucs: Vec<f64>,
    pub ensemble_auc: f64,
    pub mean_pairwise_auc: f64,
}

/// Ensemble-voting HDP. Each source is matched against the whole target; the
/// feasible ones each train a model, and a target instance scores the mean of
/// their defect probabilities. `model_seed(i)` seeds the model of `sources[i]`.
pub fn ensemble_hdp(
    sources: &[&DefectDataset],
    target: &DefectDataset,
    cfg: &ExperimentConfig,
    model_seed: impl Fn(usize) -> u64 + Sync,
) -> Result<EnsembleResult, ExperimentError> {
    let per_source: Vec<Result<Option<Vec<f64>>, ExperimentError>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let m = match_datasets(src, target, &cfg.matching)?.matching;
            if !m.feasible {
                return Ok(None);
            }
            let model = fit(
                cfg.classifier,
                &src.instances().select_columns(&m.source_columns()),
                src.labels(),
                &cfg.hyperparameters,
                model_seed(i),
            )?;
            Ok(Some(model.predict_proba(
                &target.instances().select_columns(&m.target_columns()),
            )?))
        })
        .collect();
    let mut feasible_sources = Vec::new();
    let mut probs = Vec::new();
    for (src, r) in sources.iter().zip(per_source) {
        if let Some(p) = r? {
            feasible_sources.push(src.project_name().to_string());
            probs.push(p);
        }
    }
    if probs.is_empty() {
        return Err(ExperimentError::NoFeasibleSource {
            target: target.project_name().to_string(),
        });
    }
    let source_aucs = probs
        .iter()
        .map(|p| auc_roc(p, target.labels()))
        .collect::<Result<Vec<f64>, _>>()?;
    let k = probs.len() as f64;
    let voted: Vec<f64> = (0..target.n_instances())
        .map(|r| probs.iter().map(|p| p[r]).sum::<f64>() / k)
        .collect();
    Ok(EnsembleResult {
        target: target.project_name().to_string(),
        feasible_sources,
        ensemble_auc: auc_roc(&voted, target.labels())?,
        mean_pairwise_auc: mean(&source_aucs).expect("at least one source"),
        source_aucs,
    })
}

/// Ensemble HDP for every target, using all other datasets as sources.
pub fn run_ensemble(
    datasets: &[DefectDataset],
    cfg: &ExperimentConfig,
) -> Vec<Result<EnsembleResult, ExperimentError>> {
    (0..datasets.len())
        .into_par_iter()
        .map(|t| {
            let idx: Vec<usize> = (0..datasets.len()).filter(|&s| s != t).collect();
            let sources: Vec<&DefectDataset> = idx.iter().map(|&s| &datasets[s]).collect();
            let r = ensemble_hdp(&sources, &datasets[t], cfg, |i| {
                seed::derive(cfg.seed, &[seed::tag::ENSEMBLE, idx[i] as u64, t as u64])
            });
            match &r {
                Ok(e) => log::info!("ensemble {}: {} feasible sources", e.target, e.feasible_sources.len()),
                Err(e) => log::info!("ensemble {}: {e}", datasets[t].project_name()),
            }
            r
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_targets: usize,
    pub mean_ensemble: f64,
    pub mean_pairwise: f64,
    /// Paired test of ensemble against mean pairwise AUC over targets.
    pub wilcoxon: Option<WilcoxonResult>,
}

pub fn ensemble_summary(results: &[EnsembleResult]) -> Option<EnsembleSummary> {
    let e: Vec<f64> = results.iter().map(|r| r.ensemble_auc).collect();
    let p: Vec<f64> = results.iter().map(|r| r.mean_pairwise_auc).collect();
    Some(EnsembleSummary {
        n_targets: results.len(),
        mean_ensemble: mean(&e)?,
        mean_pairwise: mean(&p)?,
        wilcoxon: wilcoxon_signed_rank(&e, &p, true).ok(),
    })
}
