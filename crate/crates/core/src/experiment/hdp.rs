use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fold_seed, mean_of_cells, stratified_folds, ExperimentConfig, ExperimentError};
use crate::dataset::DefectDataset;
use crate::matching::match_selected;
use crate::model::{fit, TrainedModel};
use crate::seed;
use crate::selection::select_top;
use crate::stats::{auc_roc, cliffs_delta, mean, median, wilcoxon_signed_rank, CliffsDelta};

/// HDP AUCs for every ordered (source, target) pair. Each pair holds
/// `n_repeats × n_folds` cells, replication-major; `None` marks a fold on
/// which the matching was infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct AucGrid {
    pub projects: Vec<String>,
    pub groups: Vec<String>,
    pub n_repeats: usize,
    pub n_folds: usize,
    cells: BTreeMap<(usize, usize), Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub source: String,
    pub target: String,
    pub n_feasible: usize,
    pub n_total: usize,
    pub mean_auc: Option<f64>,
    pub feasible_under_threshold: bool,
}

impl AucGrid {
    pub fn new(projects: Vec<String>, groups: Vec<String>, n_repeats: usize, n_folds: usize) -> Self {
        assert_eq!(projects.len(), groups.len());
        Self {
            projects,
            groups,
            n_repeats,
            n_folds,
            cells: BTreeMap::new(),
        }
    }

    pub fn cells_per_pair(&self) -> usize {
        self.n_repeats * self.n_folds
    }

    /// Replaces the cells of one pair.
    pub fn insert(&mut self, source: usize, target: usize, cells: Vec<Option<f64>>) {
        assert_eq!(cells.len(), self.cells_per_pair(), "wrong number of cells");
        assert!(source < self.projects.len() && target < self.projects.len());
        self.cells.insert((source, target), cells);
    }

    pub fn get(&self, source: usize, target: usize) -> Option<&[Option<f64>]> {
        self.cells.get(&(source, target)).map(Vec::as_slice)
    }

    /// Filled pairs in (source, target) order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &[Option<f64>])> {
        self.cells.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn n_pairs(&self) -> usize {
        self.cells.len()
    }

    pub fn project_index(&self, name: &str) -> Option<usize> {
        self.projects.iter().position(|p| p == name)
    }

    /// A pair is feasible under `nan_threshold` when it has at least one AUC
    /// and its fraction of missing cells is at most the threshold.
    pub fn summary(&self, source: usize, target: usize, nan_threshold: f64) -> Option<PairSummary> {
        let cells = self.get(source, target)?;
        let n_total = cells.len();
        let n_feasible = cells.iter().filter(|c| c.is_some()).count();
        let missing = (n_total - n_feasible) as f64 / n_total.max(1) as f64;
        Some(PairSummary {
            source: self.projects[source].clone(),
            target: self.projects[target].clone(),
            n_feasible,
            n_total,
            mean_auc: mean_of_cells(cells),
            feasible_under_threshold: n_feasible > 0 && missing <= nan_threshold + 1e-12,
        })
    }
}

/// Pairwise HDP with `n_repeats` replications of stratified 2-fold splits of
/// the target. Source metrics are selected once; the matching is recomputed
/// against each target fold, and the classifier is trained on the whole
/// source restricted to the matched metrics.
pub fn hdp_pairwise(
    source: &DefectDataset,
    target: &DefectDataset,
    source_index: usize,
    target_index: usize,
    cfg: &ExperimentConfig,
) -> Result<Vec<Option<f64>>, ExperimentError> {
    let mc = &cfg.matching;
    let selected = select_top(source, mc.fraction, mc.n_bins)?;
    let model_seed = seed::derive(cfg.seed, &[seed::tag::MODEL, source_index as u64, target_index as u64]);
    let mut models: HashMap<Vec<usize>, TrainedModel> = HashMap::new();
    let mut out = Vec::with_capacity(cfg.n_repeats * 2);
    for rep in 0..cfg.n_repeats {
        let folds = stratified_folds(target.labels(), 2, fold_seed(cfg.seed, target_index, rep, 2));
        for fold in &folds {
            let sorted: Vec<Vec<f64>> = (0..target.n_metrics())
                .map(|c| {
                    let mut v: Vec<f64> = fold.iter().map(|&r| target.instances().get(r, c)).collect();
                    v.sort_by(f64::total_cmp);
                    v
                })
                .collect();
            let m = match_selected(source, &selected, target.metric_names(), &sorted, mc.cutoff, mc.policy);
            if !m.feasible {
                out.push(None);
                continue;
            }
            let src_cols = m.source_columns();
            if !models.contains_key(&src_cols) {
                let x = source.instances().select_columns(&src_cols);
                let model = fit(cfg.classifier, &x, source.labels(), &cfg.hyperparameters, model_seed)?;
                models.insert(src_cols.clone(), model);
            }
            let (xt, yt) = target.subset_rows(fold);
            let p = models[&src_cols].predict_proba(&xt.select_columns(&m.target_columns()))?;
            out.push(auc_roc(&p, &yt).ok());
        }
    }
    Ok(out)
}

/// HDP over every ordered pair of distinct datasets.
pub fn run_hdp_grid(datasets: &[DefectDataset], cfg: &ExperimentConfig) -> Result<AucGrid, ExperimentError> {
    cfg.validate()?;
    let n = datasets.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();
    let results: Vec<Result<Vec<Option<f64>>, ExperimentError>> = pairs
        .par_iter()
        .map(|&(s, t)| {
            let cells = hdp_pairwise(&datasets[s], &datasets[t], s, t, cfg)?;
            log::info!(
                "hdp {} -> {}: {}/{} feasible",
                datasets[s].project_name(),
                datasets[t].project_name(),
                cells.iter().filter(|c| c.is_some()).count(),
                cells.len()
            );
            Ok(cells)
        })
        .collect();
    let mut grid = AucGrid::new(
        datasets.iter().map(|d| d.project_name().to_string()).collect(),
        datasets.iter().map(|d| d.group_name().to_string()).collect(),
        cfg.n_repeats,
        2,
    );
    for (&(s, t), r) in pairs.iter().zip(results) {
        grid.insert(s, t, r?);
    }
    Ok(grid)
}

/// Number of pairs feasible at each missing-fraction threshold.
pub fn feasibility_curve(grid: &AucGrid, thresholds: &[f64]) -> Vec<(f64, usize)> {
    thresholds
        .iter()
        .map(|&t| {
            let count = grid
                .pairs()
                .filter(|((s, tg), _)| grid.summary(*s, *tg, t).is_some_and(|p| p.feasible_under_threshold))
                .count();
            (t, count)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Tie,
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceComparison {
    pub source: String,
    pub outcome: Outcome,
    pub p_value: f64,
    pub n_paired: usize,
}

/// HDP against WPDP for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub target: String,
    pub wpdp_mean: Option<f64>,
    /// Mean over the cells of sources feasible under the threshold.
    pub hdp_mean: Option<f64>,
    /// Cliff's δ of pooled HDP AUCs against WPDP AUCs; positive favours HDP.
    pub cliffs: Option<CliffsDelta>,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Feasible cells over all sources, and all cells, for predictability.
    pub feasible_cells: usize,
    pub total_cells: usize,
    pub sources: Vec<SourceComparison>,
}

impl ComparisonRecord {
    pub fn predictability(&self) -> f64 {
        if self.total_cells == 0 {
            0.0
        } else {
            100.0 * self.feasible_cells as f64 / self.total_cells as f64
        }
    }
}

/// Win/tie/loss of HDP against WPDP, pairing cells that share a replication
/// and fold. A paired Wilcoxon p-value of at least `alpha` is a tie; otherwise
/// the sign of the median paired difference decides.
///
/// `wpdp[t]` holds the 2-fold WPDP cells of target `t`, built with the same
/// fold seeds as the grid.
pub fn compare_wpdp_hdp(
    grid: &AucGrid,
    wpdp: &[Vec<Option<f64>>],
    alpha: f64,
    nan_threshold: f64,
) -> Vec<ComparisonRecord> {
    assert_eq!(wpdp.len(), grid.projects.len(), "one WPDP result per project");
    (0..grid.projects.len())
        .map(|t| {
            let w = &wpdp[t];
            let w_present: Vec<f64> = w.iter().flatten().copied().collect();
            let mut pooled = Vec::new();
            let mut sources = Vec::new();
            let (mut feasible_cells, mut total_cells) = (0, 0);
            for s in 0..grid.projects.len() {
                let Some(cells) = grid.get(s, t) else { continue };
                feasible_cells += cells.iter().filter(|c| c.is_some()).count();
                total_cells += cells.len();
                if !grid
                    .summary(s, t, nan_threshold)
                    .is_some_and(|p| p.feasible_under_threshold)
                {
                    continue;
                }
                pooled.extend(cells.iter().flatten());
                let (h, wp): (Vec<f64>, Vec<f64>) =
                    cells.iter().zip(w).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
                let p_value = wilcoxon_signed_rank(&h, &wp, true).map(|r| r.p_value).unwrap_or(1.0);
                let diffs: Vec<f64> = h.iter().zip(&wp).map(|(a, b)| a - b).collect();
                let outcome = if p_value >= alpha {
                    Outcome::Tie
                } else {
                    match median(&diffs) {
                        Some(m) if m > 0.0 => Outcome::Win,
                        Some(m) if m < 0.0 => Outcome::Loss,
                        _ => Outcome::Tie,
                    }
                };
                sources.push(SourceComparison {
                    source: grid.projects[s].clone(),
                    outcome,
                    p_value,
                    n_paired: h.len(),
                });
            }
            let count = |o: Outcome| sources.iter().filter(|c| c.outcome == o).count();
            ComparisonRecord {
                target: grid.projects[t].clone(),
                wpdp_mean: mean(&w_present),
                hdp_mean: mean(&pooled),
                cliffs: cliffs_delta(&pooled, &w_present).ok(),
                wins: count(Outcome::Win),
                ties: count(Outcome::Tie),
                losses: count(Outcome::Loss),
                feasible_cells,
                total_cells,
                sources,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTotals {
    /// Mean of every present WPDP cell over all targets.
    pub wpdp_mean: Option<f64>,
    /// Mean of every HDP cell counted in the per-target comparisons.
    pub hdp_mean: Option<f64>,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

pub fn comparison_totals(
    grid: &AucGrid,
    wpdp: &[Vec<Option<f64>>],
    records: &[ComparisonRecord],
    nan_threshold: f64,
) -> ComparisonTotals {
    let w: Vec<f64> = wpdp.iter().flatten().flatten().copied().collect();
    let h: Vec<f64> = grid
        .pairs()
        .filter(|((s, t), _)| {
            grid.summary(*s, *t, nan_threshold)
                .is_some_and(|p| p.feasible_under_threshold)
        })
        .flat_map(|(_, c)| c.iter().flatten().copied())
        .collect();
    ComparisonTotals {
        wpdp_mean: mean(&w),
        hdp_mean: mean(&h),
        wins: records.iter().map(|r| r.wins).sum(),
        ties: records.iter().map(|r| r.ties).sum(),
        losses: records.iter().map(|r| r.losses).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::testutil::threshold_dataset;
    use crate::experiment::{wpdp, CvScheme};
    use crate::matching::FeasibilityPolicy;
    use crate::synthetic::{heterogeneous_pair, PairConfig};

    fn grid_with(cells: Vec<((usize, usize), Vec<Option<f64>>)>, n: usize, reps: usize) -> AucGrid {
        let mut g = AucGrid::new(
            (0..n).map(|i| format!("p{i}")).collect(),
            (0..n).map(|_| "g".to_string()).collect(),
            reps,
            2,
        );
        for ((s, t), c) in cells {
            g.insert(s, t, c);
        }
        g
    }

    #[test]
    fn summary_and_curve() {
        let g = grid_with(
            vec![
                ((0, 1), vec![Some(0.6), Some(0.7), Some(0.8), Some(0.5)]),
                ((1, 0), vec![None, Some(0.7), Some(0.6), Some(0.5)]),
                ((0, 2), vec![None, None, None, Some(0.9)]),
                ((2, 0), vec![None; 4]),
            ],
            3,
            2,
        );
        let s = g.summary(1, 0, 0.2).unwrap();
        assert_eq!((s.n_feasible, s.n_total), (3, 4));
        assert!(!s.feasible_under_threshold);
        assert!((s.mean_auc.unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(g.summary(2, 0, 1.0).unwrap().mean_auc, None);
        assert!(!g.summary(2, 0, 1.0).unwrap().feasible_under_threshold);
        let curve = feasibility_curve(&g, &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(curve.iter().map(|c| c.1).collect::<Vec<_>>(), vec![1, 2, 2, 3, 3]);
    }

    #[test]
    fn identical_cells_are_ties() {
        let w = vec![Some(0.7), Some(0.65), Some(0.8), Some(0.72), Some(0.6), Some(0.9)];
        let g = grid_with(vec![((1, 0), w.clone()), ((0, 1), w.clone())], 2, 3);
        let records = compare_wpdp_hdp(&g, &[w.clone(), w], 0.05, 0.99);
        for r in &records {
            assert_eq!((r.wins, r.ties, r.losses), (0, 1, 0));
            assert_eq!(r.cliffs.unwrap().delta, 0.0);
        }
    }

    #[test]
    fn consistently_worse_hdp_loses() {
        let w: Vec<Option<f64>> = (0..40).map(|i| Some(0.8 + 0.001 * i as f64)).collect();
        let h: Vec<Option<f64>> = (0..40)
            .map(|i| {
                if i % 10 == 0 {
                    None
                } else {
                    Some(0.5 + 0.002 * i as f64)
                }
            })
            .collect();
        let g = grid_with(vec![((1, 0), h)], 2, 20);
        let r = &compare_wpdp_hdp(&g, &[w.clone(), w], 0.05, 0.99)[0];
        assert_eq!((r.wins, r.ties, r.losses), (0, 0, 1));
        assert_eq!(r.sources[0].n_paired, 36);
        assert_eq!(r.cliffs.unwrap().delta, -1.0);
        assert_eq!((r.feasible_cells, r.total_cells), (36, 40));
        assert!((r.predictability() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn dissimilar_source_is_all_missing() {
        // uniform on [0,1] versus uniform on [0,1] shifted far away
        let a = threshold_dataset("a", "g", "x", 200, 4, 1);
        let mut rows: Vec<Vec<f64>> = a
            .instances()
            .rows_iter()
            .map(|r| r.iter().map(|v| v + 100.0).collect())
            .collect();
        rows.truncate(200);
        let b = DefectDataset::new(
            "b",
            "h",
            (0..4).map(|c| format!("y{c}")).collect(),
            crate::matrix::Matrix::from_rows(&rows),
            a.labels().to_vec(),
        )
        .unwrap();
        let cfg = ExperimentConfig {
            n_repeats: 5,
            ..ExperimentConfig::default()
        };
        assert_eq!(hdp_pairwise(&a, &b, 0, 1, &cfg).unwrap(), vec![None; 10]);
    }

    #[test]
    fn synthetic_pair_transfers() {
        let p = heterogeneous_pair(&PairConfig::default(), 3);
        let cfg = ExperimentConfig {
            n_repeats: 10,
            ..ExperimentConfig::default()
        };
        let cells = hdp_pairwise(&p.source, &p.target, 0, 1, &cfg).unwrap();
        assert!(cells.iter().filter(|c| c.is_some()).count() >= 10);
        assert!(mean_of_cells(&cells).unwrap() > 0.85);
        let any = hdp_pairwise(&p.source, &p.target, 0, 1, &cfg.with_policy(FeasibilityPolicy::Any)).unwrap();
        assert!(any.iter().filter(|c| c.is_some()).count() >= cells.iter().filter(|c| c.is_some()).count());
    }

    #[test]
    fn grid_runs_every_ordered_pair_and_pairs_with_wpdp() {
        let ds = vec![
            threshold_dataset("a", "g", "x", 100, 3, 1),
            threshold_dataset("b", "g", "y", 100, 3, 2),
            threshold_dataset("c", "h", "z", 100, 3, 3),
        ];
        let cfg = ExperimentConfig {
            n_repeats: 3,
            ..ExperimentConfig::default()
        };
        let grid = run_hdp_grid(&ds, &cfg).unwrap();
        assert_eq!(grid.n_pairs(), 6);
        assert!(grid.get(0, 0).is_none());
        let w: Vec<_> = ds
            .iter()
            .enumerate()
            .map(|(i, d)| wpdp(d, i, CvScheme::two_fold(3), &cfg).unwrap())
            .collect();
        let recs = compare_wpdp_hdp(&grid, &w, 0.05, 0.99);
        for r in &recs {
            let feasible = (0..3)
                .filter(|&s| {
                    grid.summary(s, grid.project_index(&r.target).unwrap(), 0.99)
                        .is_some_and(|p| p.feasible_under_threshold)
                })
                .count();
            assert_eq!(r.wins + r.ties + r.losses, feasible);
        }
        let tot = comparison_totals(&grid, &w, &recs, 0.99);
        assert_eq!(
            tot.wins + tot.ties + tot.losses,
            recs.iter().map(|r| r.sources.len()).sum::<usize>()
        );
    }
}
