use serde::{Deserialize, Serialize};

use super::AucGrid;
use crate::stats::median;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPairCell {
    pub source_group: String,
    pub target_group: String,
    /// Feasible (source, target) project pairs between the two groups.
    pub feasible: usize,
    /// `|S|·|T|`, or `|G|·(|G|−1)` within one group.
    pub possible: usize,
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCoverage {
    pub group: String,
    pub n_projects: usize,
    /// Datasets predictable by at least one member of the group.
    pub targets_covered: usize,
    pub n_targets: usize,
    pub coverage_percent: f64,
    /// Over the WPDP cells of the covered targets.
    pub median_wpdp: Option<f64>,
    /// Over the HDP cells of the group's feasible pairs.
    pub median_hdp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// In order of first appearance in the grid.
    pub groups: Vec<String>,
    /// Source-group-major, one cell per (source group, target group).
    pub cells: Vec<GroupPairCell>,
    pub sources: Vec<GroupCoverage>,
}

impl CoverageReport {
    pub fn cell(&self, source_group: &str, target_group: &str) -> Option<&GroupPairCell> {
        self.cells
            .iter()
            .find(|c| c.source_group == source_group && c.target_group == target_group)
    }

    pub fn source(&self, group: &str) -> Option<&GroupCoverage> {
        self.sources.iter().find(|s| s.group == group)
    }
}

/// Feasible-pair counts between project groups and the share of all datasets
/// each source group can predict, at the given missing-cell threshold.
pub fn coverage_report(grid: &AucGrid, wpdp: &[Vec<Option<f64>>], nan_threshold: f64) -> CoverageReport {
    let n = grid.projects.len();
    let mut groups: Vec<String> = Vec::new();
    for g in &grid.groups {
        if !groups.contains(g) {
            groups.push(g.clone());
        }
    }
    let members = |g: &str| -> Vec<usize> { (0..n).filter(|&i| grid.groups[i] == g).collect() };
    let feasible = |s: usize, t: usize| {
        grid.summary(s, t, nan_threshold)
            .is_some_and(|p| p.feasible_under_threshold)
    };

    let mut cells = Vec::new();
    for sg in &groups {
        let sm = members(sg);
        for tg in &groups {
            let tm = members(tg);
            let possible = if sg == tg {
                sm.len() * sm.len().saturating_sub(1)
            } else {
                sm.len() * tm.len()
            };
            let count = sm
                .iter()
                .flat_map(|&s| tm.iter().map(move |&t| (s, t)))
                .filter(|&(s, t)| s != t && feasible(s, t))
                .count();
            cells.push(GroupPairCell {
                source_group: sg.clone(),
                target_group: tg.clone(),
                feasible: count,
                possible,
                percent: (possible > 0).then(|| 100.0 * count as f64 / possible as f64),
            });
        }
    }

    let sources = groups
        .iter()
        .map(|g| {
            let sm = members(g);
            let covered: Vec<usize> = (0..n)
                .filter(|&t| sm.iter().any(|&s| s != t && feasible(s, t)))
                .collect();
            let w: Vec<f64> = covered
                .iter()
                .filter_map(|&t| wpdp.get(t))
                .flat_map(|c| c.iter().flatten().copied())
                .collect();
            let h: Vec<f64> = sm
                .iter()
                .flat_map(|&s| (0..n).map(move |t| (s, t)))
                .filter(|&(s, t)| s != t && feasible(s, t))
                .filter_map(|(s, t)| grid.get(s, t))
                .flat_map(|c| c.iter().flatten().copied())
                .collect();
            GroupCoverage {
                group: g.clone(),
                n_projects: sm.len(),
                targets_covered: covered.len(),
                n_targets: n,
                coverage_percent: if n == 0 {
                    0.0
                } else {
                    100.0 * covered.len() as f64 / n as f64
                },
                median_wpdp: median(&w),
                median_hdp: median(&h),
            }
        })
        .collect();
    CoverageReport { groups, cells, sources }
}
