use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cpdp, ExperimentConfig, ExperimentError};
use crate::dataset::DefectDataset;
use crate::seed;
use crate::stats::{mean, one_sample_t_test, spearman, TTestResult};

const SIGNATURE_METRICS: usize = 3;

/// Columns of `candidate` with the largest |Spearman ρ| against the label,
/// among metrics the target also has by name. Ties go to the lower column.
/// `None` if fewer than three metrics are shared.
pub fn top_label_correlated(candidate: &DefectDataset, target: &DefectDataset) -> Option<Vec<usize>> {
    let y: Vec<f64> = candidate.labels().iter().map(|&b| b as u8 as f64).collect();
    let mut scored: Vec<(usize, f64)> = (0..candidate.n_metrics())
        .filter(|&c| target.metric_index(&candidate.metric_names()[c]).is_some())
        .map(|c| (c, spearman(&candidate.column(c), &y).map_or(0.0, f64::abs)))
        .collect();
    if scored.len() < SIGNATURE_METRICS {
        return None;
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Some(scored[..SIGNATURE_METRICS].iter().map(|s| s.0).collect())
}

fn signature(d: &DefectDataset, cols: &[usize]) -> [f64; 3] {
    let corr = |i: usize, j: usize| spearman(&d.column(cols[i]), &d.column(cols[j])).unwrap_or(0.0);
    [corr(0, 1), corr(0, 2), corr(1, 2)]
}

/// Euclidean distance between the pairwise rank-correlation vectors of the
/// candidate's three most label-correlated metrics, computed in the candidate
/// and in the target. Directional: the metrics are chosen on the candidate.
pub fn dissimilarity(candidate: &DefectDataset, target: &DefectDataset) -> Option<f64> {
    let cols = top_label_correlated(candidate, target)?;
    let tcols: Vec<usize> = cols
        .iter()
        .map(|&c| target.metric_index(&candidate.metric_names()[c]).unwrap())
        .collect();
    let a = signature(candidate, &cols);
    let b = signature(target, &tcols);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub target: String,
    pub candidates: Vec<String>,
    pub distances: Vec<Option<f64>>,
    /// Index into `candidates` of the closest one; the first wins ties.
    pub chosen: Option<usize>,
}

impl Selection {
    pub fn chosen_name(&self) -> Option<&str> {
        self.chosen.map(|i| self.candidates[i].as_str())
    }
}

fn closest(distances: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in distances.iter().enumerate() {
        if let Some(d) = *d {
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
    }
    best.map(|b| b.0)
}

pub fn domain_agnostic_select(candidates: &[&DefectDataset], target: &DefectDataset) -> Selection {
    let distances: Vec<Option<f64>> = candidates.iter().map(|c| dissimilarity(c, target)).collect();
    Selection {
        target: target.project_name().to_string(),
        candidates: candidates.iter().map(|c| c.project_name().to_string()).collect(),
        chosen: closest(&distances),
        distances,
    }
}

/// `table[c][t]` = dissimilarity of candidate `c` for target `t`.
pub fn similarity_table(datasets: &[DefectDataset]) -> Vec<Vec<Option<f64>>> {
    datasets
        .par_iter()
        .map(|c| datasets.iter().map(|t| dissimilarity(c, t)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosestSourceRecord {
    pub target: String,
    pub chosen: Option<String>,
    pub distance: Option<f64>,
    pub cpdp_auc: Option<f64>,
    pub wpdp_mean: Option<f64>,
    /// CPDP AUC of the chosen source divided by the target's WPDP mean.
    pub normalized: Option<f64>,
}

/// For each target, picks the closest other dataset from `table` and scores
/// its CPDP model against the target's WPDP mean.
pub fn closest_source_records(
    datasets: &[DefectDataset],
    table: &[Vec<Option<f64>>],
    wpdp_means: &[Option<f64>],
    cfg: &ExperimentConfig,
) -> Result<Vec<ClosestSourceRecord>, ExperimentError> {
    (0..datasets.len())
        .map(|t| {
            let column: Vec<Option<f64>> = (0..datasets.len())
                .map(|c| if c == t { None } else { table[c][t] })
                .collect();
            let chosen = closest(&column);
            let cpdp_auc = match chosen {
                Some(c) => cpdp(
                    &datasets[c],
                    &datasets[t],
                    cfg,
                    seed::derive(cfg.seed, &[seed::tag::CPDP, c as u64, t as u64]),
                )?,
                None => None,
            };
            let normalized = match (cpdp_auc, wpdp_means[t]) {
                (Some(a), Some(w)) if w > 0.0 => Some(a / w),
                _ => None,
            };
            Ok(ClosestSourceRecord {
                target: datasets[t].project_name().to_string(),
                chosen: chosen.map(|c| datasets[c].project_name().to_string()),
                distance: chosen.and_then(|c| column[c]),
                cpdp_auc,
                wpdp_mean: wpdp_means[t],
                normalized,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosestSourceSummary {
    pub n: usize,
    pub mean_normalized: f64,
    /// One-sample t-test of normalized AUCs against 1.
    pub t_test: Option<TTestResult>,
}

pub fn closest_source_summary(records: &[ClosestSourceRecord]) -> Option<ClosestSourceSummary> {
    let v: Vec<f64> = records.iter().filter_map(|r| r.normalized).collect();
    Some(ClosestSourceSummary {
        n: v.len(),
        mean_normalized: mean(&v)?,
        t_test: one_sample_t_test(&v, 1.0).ok(),
    })
}
