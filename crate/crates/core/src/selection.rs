//! Gain-ratio metric selection on the source project.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DefectDataset;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("cannot discretize an empty column")]
    Empty,
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("length mismatch: {0} bins vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("selection fraction must lie in (0, 1], got {0}")]
    BadFraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub metric_name: String,
    pub column: usize,
    pub gain_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeatures {
    /// Highest gain ratio first.
    pub metric_names: Vec<String>,
    /// Column indices in the source dataset, parallel to `metric_names`.
    pub columns: Vec<usize>,
    pub scores: Vec<f64>,
    pub fraction: f64,
}

/// Equal-frequency binning. A distinct value is placed in the bin of its
/// first sorted position, `⌊pos·bins/n⌋`, so ties never straddle a bin edge.
/// Bin ids are compacted to `0..k`, `k ≤ n_bins`.
pub fn discretize(values: &[f64], n_bins: usize) -> Result<Vec<usize>, SelectionError> {
    if n_bins < 2 {
        return Err(SelectionError::TooFewBins(n_bins));
    }
    if values.is_empty() {
        return Err(SelectionError::Empty);
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut bins = vec![0usize; n];
    let mut next_id = 0;
    let mut last_raw = None;
    let mut pos = 0;
    while pos < n {
        let v = values[order[pos]];
        let mut end = pos + 1;
        while end < n && values[order[end]] == v {
            end += 1;
        }
        let raw = pos * n_bins / n;
        if last_raw.is_some_and(|r| r != raw) {
            next_id += 1;
        }
        last_raw = Some(raw);
        for &i in &order[pos..end] {
            bins[i] = next_id;
        }
        pos = end;
    }
    Ok(bins)
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: f64) -> f64 {
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// `(H(Y) − H(Y|X)) / H(X)` in bits; 0 when the feature has a single value.
pub fn gain_ratio(feature_bins: &[usize], labels: &[bool]) -> Result<f64, SelectionError> {
    if feature_bins.len() != labels.len() {
        return Err(SelectionError::LengthMismatch(feature_bins.len(), labels.len()));
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let n = labels.len() as f64;
    let mut per_bin: HashMap<usize, [usize; 2]> = HashMap::new();
    let mut label_counts = [0usize; 2];
    for (&b, &l) in feature_bins.iter().zip(labels) {
        per_bin.entry(b).or_default()[l as usize] += 1;
        label_counts[l as usize] += 1;
    }
    let bin_sizes: Vec<usize> = per_bin.values().map(|c| c[0] + c[1]).collect();
    let split_info = entropy_of_counts(bin_sizes.iter(), n);
    if split_info <= 0.0 {
        return Ok(0.0);
    }
    let h_y = entropy_of_counts(label_counts.iter(), n);
    let h_y_given_x: f64 = per_bin
        .values()
        .map(|c| {
            let size = (c[0] + c[1]) as f64;
            size / n * entropy_of_counts(c.iter(), size)
        })
        .sum();
    Ok(((h_y - h_y_given_x) / split_info).max(0.0))
}

/// Number of metrics kept: `⌈fraction · n⌉`, at least one.
pub fn top_count(fraction: f64, n_metrics: usize) -> usize {
    // 0.15 * 20 is 3.0000000000000004 in binary floating point
    let k = (fraction * n_metrics as f64 - 1e-9).ceil() as usize;
    k.clamp(1, n_metrics.max(1))
}

pub fn score_features(d: &DefectDataset, n_bins: usize) -> Vec<FeatureScore> {
    d.metric_names()
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let bins = discretize(&d.column(c), n_bins).expect("dataset columns are non-empty");
            FeatureScore {
                metric_name: name.clone(),
                column: c,
                gain_ratio: gain_ratio(&bins, d.labels()).expect("lengths agree"),
            }
        })
        .collect()
}

/// Ranks metrics by gain ratio (ties: lower column first) and keeps the top fraction.
pub fn select_top(d: &DefectDataset, fraction: f64, n_bins: usize) -> Result<SelectedFeatures, SelectionError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SelectionError::BadFraction(fraction));
    }
    if n_bins < 2 {
        return Err(SelectionError::TooFewBins(n_bins));
    }
    let mut scores = score_features(d, n_bins);
    scores.sort_by(|a, b| b.gain_ratio.total_cmp(&a.gain_ratio).then(a.column.cmp(&b.column)));
    scores.truncate(top_count(fraction, d.n_metrics()));
    Ok(SelectedFeatures {
        metric_names: scores.iter().map(|s| s.metric_name.clone()).collect(),
        columns: scores.iter().map(|s| s.column).collect(),
        scores: scores.iter().map(|s| s.gain_ratio).collect(),
        fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(discretize(&[5.0; 6], 10).unwrap(), vec![0; 6]);
        // sorted positions 0..6 → raw bins 0,0,0,1,1,1; the three 1s share bin 0
        assert_eq!(
            discretize(&[1.0, 1.0, 1.0, 2.0, 3.0, 4.0], 2).unwrap(),
            vec![0, 0, 0, 1, 1, 1]
        );
        // tie group starting at a bin edge stays together
        assert_eq!(
            discretize(&[1.0, 2.0, 2.0, 2.0, 3.0, 4.0], 2).unwrap(),
            vec![0, 0, 0, 0, 1, 1]
        );
        assert_eq!(discretize(&[], 2), Err(SelectionError::Empty));
        assert_eq!(discretize(&[1.0], 1), Err(SelectionError::TooFewBins(1)));
    }

    #[test]
    fn discretize_respects_order_not_position() {
        assert_eq!(discretize(&[4.0, 1.0, 3.0, 2.0], 2).unwrap(), vec![1, 0, 1, 0]);
    }

    #[test]
    fn gain_ratio_examples() {
        let labels = [true, false, true, false, true];
        let bins: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        assert_abs_diff_eq!(gain_ratio(&bins, &labels).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(gain_ratio(&[3; 5], &labels).unwrap(), 0.0);
        // bins [0,0,1,1] vs labels [T,F,T,F]: each bin is 50/50 → IG 0
        assert_eq!(gain_ratio(&[0, 0, 1, 1], &[true, false, true, false]).unwrap(), 0.0);
        assert!(gain_ratio(&[0], &[true, false]).is_err());
    }

    #[test]
    fn gain_ratio_hand_computed_table() {
        // bin 0: 3 buggy 1 clean; bin 1: 0 buggy 2 clean
        let bins = [0, 0, 0, 0, 1, 1];
        let labels = [true, true, true, false, false, false];
        let h = |p: f64| {
            if p == 0.0 || p == 1.0 {
                0.0
            } else {
                -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
            }
        };
        let h_y = h(0.5);
        let h_y_x = 4.0 / 6.0 * h(0.75);
        let split = h(4.0 / 6.0);
        assert_abs_diff_eq!(
            gain_ratio(&bins, &labels).unwrap(),
            (h_y - h_y_x) / split,
            epsilon = 1e-12
        );
    }

    #[test]
    fn top_count_rounding() {
        assert_eq!(top_count(0.15, 19), 3);
        assert_eq!(top_count(0.15, 20), 3);
        assert_eq!(top_count(0.15, 17), 3);
        assert_eq!(top_count(0.15, 65), 10);
        assert_eq!(top_count(0.15, 2), 1);
        assert_eq!(top_count(1.0, 7), 7);
    }

    fn dataset(cols: Vec<Vec<f64>>, labels: Vec<bool>) -> DefectDataset {
        let n = labels.len();
        let p = cols.len();
        let mut m = Matrix::zeros(n, p);
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        let names = (0..p).map(|i| format!("m{i}")).collect();
        DefectDataset::new("P", "G", names, m, labels).unwrap()
    }

    #[test]
    fn select_top_ranks_by_score_then_column() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let noise: Vec<f64> = (0..20).map(|i| (i / 2) as f64).collect();
        let perfect: Vec<f64> = labels.iter().map(|&l| if l { 5.0 } else { 1.0 }).collect();
        let d = dataset(vec![noise.clone(), perfect.clone(), noise, perfect], labels);
        let all = select_top(&d, 1.0, 10).unwrap();
        assert_eq!(all.columns, vec![1, 3, 0, 2]);
        let top = select_top(&d, 0.15, 10).unwrap();
        assert_eq!(top.metric_names, vec!["m1"]);
        assert_eq!(select_top(&d, 0.0, 10), Err(SelectionError::BadFraction(0.0)));
    }

    #[test]
    fn nineteen_metrics_keep_three() {
        let labels: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let cols = (0..19)
            .map(|c| (0..40).map(|r| ((r * (c + 3)) % 11) as f64).collect())
            .collect();
        let d = dataset(cols, labels);
        assert_eq!(select_top(&d, 0.15, 10).unwrap().metric_names.len(), 3);
    }

    proptest! {
        #[test]
        fn gain_ratio_invariances(
            rows in prop::collection::vec((0usize..5, any::<bool>()), 1..80),
            perm in Just(vec![3usize, 0, 4, 1, 2]),
        ) {
            let bins: Vec<usize> = rows.iter().map(|r| r.0).collect();
            let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
            let g = gain_ratio(&bins, &labels).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&g));
            let relabeled: Vec<usize> = bins.iter().map(|&b| perm[b]).collect();
            prop_assert!((g - gain_ratio(&relabeled, &labels).unwrap()).abs() < 1e-12);
            let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
            prop_assert!((g - gain_ratio(&bins, &flipped).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn discretize_keeps_ties_and_bin_budget(
            values in prop::collection::vec(0i32..12, 1..100),
            n_bins in 2usize..12,
        ) {
            let v: Vec<f64> = values.into_iter().map(f64::from).collect();
            let bins = discretize(&v, n_bins).unwrap();
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] == v[j] { prop_assert_eq!(bins[i], bins[j]); }
                    if v[i] < v[j] { prop_assert!(bins[i] <= bins[j]); }
                }
            }
            let k = bins.iter().max().unwrap() + 1;
            prop_assert!(k <= n_bins);
        }
    }
}
