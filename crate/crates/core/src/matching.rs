//! Metric matching between a source and a target project.
//!
//! Each selected source metric is scored against every target metric by the
//! KS-test p-value, edges below the cutoff are dropped, and a maximum-weight
//! bipartite matching picks the pairing. Whether the result is usable
//! depends on the [`FeasibilityPolicy`].

use serde::{Deserialize, Serialize};

use crate::dataset::DefectDataset;
use crate::selection::{select_top, SelectedFeatures, SelectionError};
use crate::stats::{ks_two_sample_sorted, sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibilityPolicy {
    /// Every selected source metric must be matched.
    #[default]
    AllSource,
    /// At least one pair is enough.
    Any,
}

/// KS p-values between selected source metrics (rows) and target metrics (columns).
/// `None` marks an edge removed by the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub source_metrics: Vec<String>,
    pub target_metrics: Vec<String>,
    pub source_columns: Vec<usize>,
    pub target_columns: Vec<usize>,
    pub scores: Vec<Vec<Option<f64>>>,
}

impl ScoreMatrix {
    /// Matrix with every edge present; used by tests and callers with their own scores.
    pub fn from_scores(scores: Vec<Vec<f64>>) -> Self {
        let n = scores.len();
        let m = scores.first().map_or(0, Vec::len);
        Self {
            source_metrics: (0..n).map(|i| format!("s{}", i + 1)).collect(),
            target_metrics: (0..m).map(|j| format!("t{}", j + 1)).collect(),
            source_columns: (0..n).collect(),
            target_columns: (0..m).collect(),
            scores: scores.into_iter().map(|r| r.into_iter().map(Some).collect()).collect(),
        }
    }

    pub fn n_sources(&self) -> usize {
        self.scores.len()
    }

    pub fn n_targets(&self) -> usize {
        self.target_metrics.len()
    }

    pub fn n_edges(&self) -> usize {
        self.scores.iter().flatten().filter(|s| s.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub source_metric: String,
    pub target_metric: String,
    pub source_column: usize,
    pub target_column: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatching {
    /// Ordered by source row.
    pub pairs: Vec<MatchedPair>,
    pub total_weight: f64,
    pub feasible: bool,
    pub cutoff: f64,
    pub n_sources: usize,
}

impl MetricMatching {
    pub fn source_columns(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.source_column).collect()
    }

    pub fn target_columns(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.target_column).collect()
    }
}

/// Scores selected source columns against pre-sorted target columns.
pub fn score_matrix_sorted(
    source: &DefectDataset,
    selected: &SelectedFeatures,
    target_metrics: &[String],
    target_sorted: &[Vec<f64>],
) -> ScoreMatrix {
    let scores = selected
        .columns
        .iter()
        .map(|&c| {
            let s = sorted(&source.column(c));
            target_sorted
                .iter()
                .map(|t| Some(ks_two_sample_sorted(&s, t).p_value))
                .collect()
        })
        .collect();
    ScoreMatrix {
        source_metrics: selected.metric_names.clone(),
        target_metrics: target_metrics.to_vec(),
        source_columns: selected.columns.clone(),
        target_columns: (0..target_metrics.len()).collect(),
        scores,
    }
}

pub fn score_matrix(source: &DefectDataset, selected: &SelectedFeatures, target: &DefectDataset) -> ScoreMatrix {
    let target_sorted: Vec<Vec<f64>> = (0..target.n_metrics()).map(|c| sorted(&target.column(c))).collect();
    score_matrix_sorted(source, selected, target.metric_names(), &target_sorted)
}

/// Drops edges scoring strictly below `cutoff`.
pub fn apply_cutoff(m: &ScoreMatrix, cutoff: f64) -> ScoreMatrix {
    let mut out = m.clone();
    for row in &mut out.scores {
        for cell in row.iter_mut() {
            if cell.is_some_and(|s| s < cutoff) {
                *cell = None;
            }
        }
    }
    out
}

/// Min-cost assignment of every row to a distinct column (`rows ≤ cols`).
///
/// Shortest augmenting path formulation of the Hungarian method with row and
/// column potentials; O(rows² · cols).
fn assign_min_cost(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Best total weight over `rows`, using only `cols`.
///
/// With `saturate`, every row must take a present edge and `None` is returned
/// when that is impossible; otherwise rows may stay unmatched.
fn best_weight(m: &ScoreMatrix, rows: &[usize], cols: &[usize], saturate: bool) -> Option<f64> {
    if rows.is_empty() {
        return Some(0.0);
    }
    let w = |i: usize, j: usize| m.scores[i][j];
    if saturate {
        if rows.len() > cols.len() {
            return None;
        }
        let big = 1e3 * (rows.len() as f64 + 1.0);
        let cost: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| w(i, j).map_or(big, |s| -s)).collect())
            .collect();
        let a = assign_min_cost(&cost);
        let mut total = 0.0;
        for (r, &c) in a.iter().enumerate() {
            total += w(rows[r], cols[c])?;
        }
        Some(total)
    } else {
        // one zero-cost "unmatched" column per row
        let cost: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| {
                cols.iter()
                    .map(|&j| w(i, j).map_or(0.0, |s| -s))
                    .chain(std::iter::repeat_n(0.0, rows.len()))
                    .collect()
            })
            .collect();
        let a = assign_min_cost(&cost);
        Some(
            a.iter()
                .enumerate()
                .filter(|(_, &c)| c < cols.len())
                .filter_map(|(r, &c)| w(rows[r], cols[c]))
                .sum(),
        )
    }
}

/// Greedy lexicographic reconstruction of an optimal matching: each source in
/// turn takes the lowest-index target (then "unmatched") that still admits
/// the optimum for the remaining rows.
fn lexicographic_optimum(m: &ScoreMatrix, saturate: bool) -> Option<Vec<Option<usize>>> {
    let n = m.n_sources();
    let all_rows: Vec<usize> = (0..n).collect();
    let all_cols: Vec<usize> = (0..m.n_targets()).collect();
    let optimum = best_weight(m, &all_rows, &all_cols, saturate)?;
    let eps = 1e-12 * (1.0 + optimum.abs());
    let mut free_cols = all_cols;
    let mut chosen = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let mut pick = None;
        for (k, &j) in free_cols.iter().enumerate() {
            let Some(s) = m.scores[i][j] else { continue };
            let mut remaining = free_cols.clone();
            remaining.remove(k);
            if let Some(r) = best_weight(m, &rest, &remaining, saturate) {
                if acc + s + r >= optimum - eps {
                    pick = Some((k, j, s));
                    break;
                }
            }
        }
        match pick {
            Some((k, j, s)) => {
                free_cols.remove(k);
                acc += s;
                chosen.push(Some(j));
            }
            None => {
                // saturated optimum always finds a pick above
                debug_assert!(!saturate);
                chosen.push(None);
            }
        }
    }
    Some(chosen)
}

fn build_matching(m: &ScoreMatrix, assignment: &[Option<usize>], cutoff: f64, feasible: bool) -> MetricMatching {
    let pairs: Vec<MatchedPair> = assignment
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let j = (*a)?;
            Some(MatchedPair {
                source_metric: m.source_metrics[i].clone(),
                target_metric: m.target_metrics[j].clone(),
                source_column: m.source_columns[i],
                target_column: m.target_columns[j],
                score: m.scores[i][j].expect("assigned edges are present"),
            })
        })
        .collect();
    MetricMatching {
        total_weight: pairs.iter().map(|p| p.score).sum(),
        pairs,
        feasible,
        cutoff,
        n_sources: m.n_sources(),
    }
}

/// Maximum-weight bipartite matching over the present edges.
///
/// Under [`FeasibilityPolicy::AllSource`] the result is the heaviest matching
/// that covers every source row when one exists; otherwise the unconstrained
/// optimum is returned and flagged infeasible. Ties between equally heavy
/// matchings resolve to the lexicographically smallest (source, target) list.
pub fn max_weight_matching(m: &ScoreMatrix, cutoff: f64, policy: FeasibilityPolicy) -> MetricMatching {
    if policy == FeasibilityPolicy::AllSource && m.n_sources() > 0 {
        if let Some(a) = lexicographic_optimum(m, true) {
            return build_matching(m, &a, cutoff, true);
        }
    }
    let a = lexicographic_optimum(m, false).expect("unconstrained matching always exists");
    let mut out = build_matching(m, &a, cutoff, false);
    out.feasible = match policy {
        FeasibilityPolicy::Any => !out.pairs.is_empty(),
        FeasibilityPolicy::AllSource => m.n_sources() > 0 && out.pairs.len() == m.n_sources(),
    };
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub fraction: f64,
    pub cutoff: f64,
    pub n_bins: usize,
    pub policy: FeasibilityPolicy,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            fraction: 0.15,
            cutoff: 0.05,
            n_bins: 10,
            policy: FeasibilityPolicy::AllSource,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub selected: SelectedFeatures,
    pub scores: ScoreMatrix,
    pub matching: MetricMatching,
}

/// Full pipeline: select source metrics, score, cut, match.
pub fn match_datasets(
    source: &DefectDataset,
    target: &DefectDataset,
    cfg: &MatchConfig,
) -> Result<MatchOutcome, SelectionError> {
    let selected = select_top(source, cfg.fraction, cfg.n_bins)?;
    let scores = score_matrix(source, &selected, target);
    let matching = max_weight_matching(&apply_cutoff(&scores, cfg.cutoff), cfg.cutoff, cfg.policy);
    Ok(MatchOutcome {
        selected,
        scores,
        matching,
    })
}

/// Matching against target columns given as sorted samples (a target fold),
/// with the source selection computed once by the caller.
pub fn match_selected(
    source: &DefectDataset,
    selected: &SelectedFeatures,
    target_metrics: &[String],
    target_sorted: &[Vec<f64>],
    cutoff: f64,
    policy: FeasibilityPolicy,
) -> MetricMatching {
    let scores = score_matrix_sorted(source, selected, target_metrics, target_sorted);
    max_weight_matching(&apply_cutoff(&scores, cutoff), cutoff, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use proptest::prelude::*;
    use rand::Rng;

    /// Oracle: enumerate every partial matching (each source picks a free
    /// present target or nothing). Returns (best weight, best saturating weight).
    pub(crate) fn brute_force(m: &ScoreMatrix) -> (f64, Option<f64>) {
        fn go(
            m: &ScoreMatrix,
            i: usize,
            used: &mut Vec<bool>,
            acc: &mut Vec<f64>,
            best: &mut f64,
            best_full: &mut Option<f64>,
        ) {
            if i == m.n_sources() {
                // sum in source order, same as the implementation
                let w: f64 = acc.iter().sum();
                *best = best.max(w);
                if acc.len() == m.n_sources() {
                    *best_full = Some(best_full.map_or(w, |b: f64| b.max(w)));
                }
                return;
            }
            go(m, i + 1, used, acc, best, best_full);
            for j in 0..m.n_targets() {
                if let (false, Some(s)) = (used[j], m.scores[i][j]) {
                    used[j] = true;
                    acc.push(s);
                    go(m, i + 1, used, acc, best, best_full);
                    acc.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = 0.0;
        let mut best_full = None;
        go(
            m,
            0,
            &mut vec![false; m.n_targets()],
            &mut Vec::new(),
            &mut best,
            &mut best_full,
        );
        (best, best_full)
    }

    #[test]
    fn two_by_two_example() {
        let m = ScoreMatrix::from_scores(vec![vec![0.9, 0.2], vec![0.3, 0.8]]);
        let r = max_weight_matching(&apply_cutoff(&m, 0.05), 0.05, FeasibilityPolicy::AllSource);
        let pairs: Vec<_> = r
            .pairs
            .iter()
            .map(|p| (p.source_metric.as_str(), p.target_metric.as_str()))
            .collect();
        assert_eq!(pairs, vec![("s1", "t1"), ("s2", "t2")]);
        assert!((r.total_weight - 1.7).abs() < 1e-15);
        assert!(r.feasible);
        assert_eq!(brute_force(&m).0, r.total_weight);
    }

    /// Three source and three target metrics shaped like the worked example:
    /// the last target has a single surviving candidate at cutoff 0.4.
    fn worked_example() -> ScoreMatrix {
        let mut m = ScoreMatrix::from_scores(vec![
            vec![0.55, 0.30, 0.10],
            vec![0.20, 0.70, 0.05],
            vec![0.45, 0.15, 0.60],
        ]);
        m.source_metrics = vec!["X1".into(), "X2".into(), "Xn'".into()];
        m.target_metrics = vec!["Y1".into(), "Y2".into(), "Ym".into()];
        m
    }

    #[test]
    fn worked_example_cutoffs() {
        let m = worked_example();
        let cut = apply_cutoff(&m, 0.4);
        assert_eq!(cut.n_edges(), 4);
        let r = max_weight_matching(&cut, 0.4, FeasibilityPolicy::AllSource);
        let pairs: Vec<_> = r
            .pairs
            .iter()
            .map(|p| format!("{}-{}", p.source_metric, p.target_metric))
            .collect();
        assert_eq!(pairs, vec!["X1-Y1", "X2-Y2", "Xn'-Ym"]);
        assert!(r.feasible);
        assert!(r.pairs.iter().all(|p| p.score >= 0.4));

        let strict = max_weight_matching(&apply_cutoff(&m, 0.8), 0.8, FeasibilityPolicy::AllSource);
        assert!(!strict.feasible);
        assert!(strict.pairs.is_empty());
    }

    #[test]
    fn cutoff_edge_cases() {
        let m = ScoreMatrix::from_scores(vec![vec![0.0, 0.05, 0.5]]);
        assert_eq!(apply_cutoff(&m, 0.0).n_edges(), 3);
        // a score equal to the cutoff survives
        assert_eq!(apply_cutoff(&m, 0.05).n_edges(), 2);
        assert_eq!(apply_cutoff(&m, 1.0).n_edges(), 0);
        let empty = max_weight_matching(&apply_cutoff(&m, 1.0), 1.0, FeasibilityPolicy::Any);
        assert!(!empty.feasible && empty.pairs.is_empty());
    }

    #[test]
    fn saturating_beats_heavier_partial() {
        // unconstrained optimum leaves s2 unmatched
        let mut m = ScoreMatrix::from_scores(vec![vec![1.0, 0.05], vec![0.06, 0.0]]);
        m.scores[1][1] = None;
        let all = max_weight_matching(&m, 0.0, FeasibilityPolicy::AllSource);
        assert!(all.feasible);
        assert_eq!(all.pairs.len(), 2);
        assert!((all.total_weight - 0.11).abs() < 1e-12);
        let any = max_weight_matching(&m, 0.0, FeasibilityPolicy::Any);
        assert_eq!(any.pairs.len(), 1);
        assert_eq!(any.total_weight, 1.0);
        assert!(any.feasible);
    }

    #[test]
    fn more_sources_than_targets_is_infeasible_under_all_source() {
        let m = ScoreMatrix::from_scores(vec![vec![0.5], vec![0.7]]);
        let r = max_weight_matching(&m, 0.0, FeasibilityPolicy::AllSource);
        assert!(!r.feasible);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.pairs[0].source_metric, "s2");
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let m = ScoreMatrix::from_scores(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let r = max_weight_matching(&m, 0.0, FeasibilityPolicy::AllSource);
        let t: Vec<_> = r.pairs.iter().map(|p| p.target_column).collect();
        assert_eq!(t, vec![0, 1]);
    }

    fn random_matrix(r: &mut impl Rng, n: usize, m: usize, grid: bool) -> ScoreMatrix {
        let scores = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        if grid {
                            r.random_range(0..9) as f64 / 8.0
                        } else {
                            r.random::<f64>()
                        }
                    })
                    .collect()
            })
            .collect();
        apply_cutoff(&ScoreMatrix::from_scores(scores), 0.3)
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut r = crate::seed::rng(99);
        for case in 0..300 {
            let n = r.random_range(1..=6);
            let m = r.random_range(1..=6);
            let mat = random_matrix(&mut r, n, m, case % 2 == 0);
            let (best, best_full) = brute_force(&mat);
            let any = max_weight_matching(&mat, 0.3, FeasibilityPolicy::Any);
            assert_eq!(any.total_weight, best, "case {case}");
            let all = max_weight_matching(&mat, 0.3, FeasibilityPolicy::AllSource);
            match best_full {
                Some(w) => {
                    assert!(all.feasible);
                    assert_eq!(all.total_weight, w, "case {case}");
                }
                None => assert!(!all.feasible),
            }
        }
    }

    fn dataset(cols: Vec<Vec<f64>>, labels: Vec<bool>, prefix: &str) -> DefectDataset {
        let n = labels.len();
        let p = cols.len();
        let mut m = Matrix::zeros(n, p);
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        let names = (0..p).map(|i| format!("{prefix}{i}")).collect();
        DefectDataset::new(prefix, "G", names, m, labels).unwrap()
    }

    #[test]
    fn self_match_is_feasible_with_high_scores() {
        let mut r = crate::seed::rng(5);
        let labels: Vec<bool> = (0..120).map(|i| i % 4 == 0).collect();
        let cols: Vec<Vec<f64>> = (0..7)
            .map(|c| {
                labels
                    .iter()
                    .map(|&l| (c as f64 * 10.0) + r.random::<f64>() + if l && c == 2 { 3.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let d = dataset(cols, labels, "a");
        let out = match_datasets(&d, &d, &MatchConfig::default()).unwrap();
        assert!(out.matching.feasible);
        assert_eq!(out.selected.metric_names.len(), 2);
        for p in &out.matching.pairs {
            assert_eq!(p.source_column, p.target_column);
            assert!((p.score - 1.0).abs() < 1e-12);
        }
        assert_eq!(out.scores.n_targets(), 7);
    }

    #[test]
    fn disjoint_ranges_are_infeasible() {
        let labels: Vec<bool> = (0..50).map(|i| i % 2 == 0).collect();
        let src = dataset(
            (0..3)
                .map(|c| (0..50).map(|i| (i * (c + 1)) as f64 / 100.0).collect())
                .collect(),
            labels.clone(),
            "s",
        );
        let tgt = dataset(
            (0..4)
                .map(|c| (0..50).map(|i| 100.0 + (i + c) as f64).collect())
                .collect(),
            labels,
            "t",
        );
        let out = match_datasets(&src, &tgt, &MatchConfig::default()).unwrap();
        assert!(!out.matching.feasible);
        let any = match_datasets(
            &src,
            &tgt,
            &MatchConfig {
                policy: FeasibilityPolicy::Any,
                ..MatchConfig::default()
            },
        )
        .unwrap();
        assert!(!any.matching.feasible);
        assert!(out.scores.scores.iter().flatten().all(|s| s.unwrap() < 0.001));
    }

    proptest! {
        #[test]
        fn cutoff_never_increases_weight(
            seed in any::<u64>(), n in 1usize..5, m in 1usize..6, cutoff in 0.0f64..1.0
        ) {
            let mut r = crate::seed::rng(seed);
            let scores: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| r.random()).collect()).collect();
            let full = ScoreMatrix::from_scores(scores);
            let cut = apply_cutoff(&full, cutoff);
            let a = max_weight_matching(&full, 0.0, FeasibilityPolicy::Any);
            let b = max_weight_matching(&cut, cutoff, FeasibilityPolicy::Any);
            prop_assert!(b.total_weight <= a.total_weight + 1e-12);
            prop_assert!(b.pairs.iter().all(|p| p.score >= cutoff));
            let mut seen_t = std::collections::HashSet::new();
            for p in &b.pairs {
                prop_assert!(seen_t.insert(p.target_column));
            }
        }

        #[test]
        fn target_permutation_keeps_weight(seed in any::<u64>(), n in 1usize..5, m in 1usize..6) {
            let mut r = crate::seed::rng(seed);
            let scores: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| r.random()).collect()).collect();
            let a = ScoreMatrix::from_scores(scores.clone());
            let rev: Vec<Vec<f64>> = scores.iter().map(|row| row.iter().rev().copied().collect()).collect();
            let b = ScoreMatrix::from_scores(rev);
            let wa = max_weight_matching(&a, 0.0, FeasibilityPolicy::AllSource).total_weight;
            let wb = max_weight_matching(&b, 0.0, FeasibilityPolicy::AllSource).total_weight;
            prop_assert!((wa - wb).abs() < 1e-12);
        }
    }
}
