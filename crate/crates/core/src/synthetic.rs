//! Synthetic defect datasets with a known metric correspondence.
//!
//! Every metric is `exp(location + scale·z)` of its own standard-normal latent
//! `z`. Two projects that list a metric with the same `(location, scale)` share
//! its distribution, so the true HDP matching is known. Labels follow a shared
//! rule: the rows with the largest sum of informative latents (plus noise) are
//! buggy.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::DefectDataset;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSpec {
    pub location: f64,
    pub scale: f64,
    /// Contributes to the defect score.
    pub informative: bool,
}

impl MetricSpec {
    pub fn new(location: f64, scale: f64, informative: bool) -> Self {
        Self {
            location,
            scale,
            informative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectSpec {
    pub name: String,
    pub group: String,
    pub metric_prefix: String,
    pub n_instances: usize,
    pub metrics: Vec<MetricSpec>,
    pub defect_rate: f64,
    /// Standard deviation of the noise added to the defect score.
    pub label_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProject {
    pub dataset: DefectDataset,
    /// `spec_index[c]` is the position in `ProjectSpec::metrics` of column `c`.
    pub spec_index: Vec<usize>,
}

/// Draws one project. Column order is shuffled and columns are named
/// `{prefix}{c}`, so neither order nor names reveal the generating `MetricSpec`.
pub fn generate(spec: &ProjectSpec, seed: u64) -> GeneratedProject {
    assert!(spec.n_instances >= 2, "need at least two instances");
    assert!(!spec.metrics.is_empty(), "need at least one metric");
    let mut rng = seed::rng(seed);
    let p = spec.metrics.len();
    let n = spec.n_instances;
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng);

    let mut latent = Matrix::zeros(n, p);
    let mut score = vec![0.0; n];
    for (r, s) in score.iter_mut().enumerate() {
        for (k, m) in spec.metrics.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            latent.set(r, k, z);
            if m.informative {
                *s += z;
            }
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        *s += spec.label_noise * e;
    }
    let n_buggy = ((spec.defect_rate * n as f64).round() as usize).clamp(1, n - 1);
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut labels = vec![false; n];
    for &r in &ranked[..n_buggy] {
        labels[r] = true;
    }

    let mut values = Matrix::zeros(n, p);
    for r in 0..n {
        for (c, &k) in order.iter().enumerate() {
            let m = spec.metrics[k];
            values.set(r, c, (m.location + m.scale * latent.get(r, k)).exp());
        }
    }
    let names = (0..p).map(|c| format!("{}{c}", spec.metric_prefix)).collect();
    let dataset = DefectDataset::new(spec.name.clone(), spec.group.clone(), names, values, labels)
        .expect("generated data satisfies dataset invariants");
    GeneratedProject {
        dataset,
        spec_index: order,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    pub n_source: usize,
    pub n_target: usize,
    /// Metric distributions present in both projects.
    pub n_shared: usize,
    pub n_source_only: usize,
    pub n_target_only: usize,
    /// The first `n_informative` shared metrics drive the defect rule.
    pub n_informative: usize,
    pub defect_rate: f64,
    pub label_noise: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            n_source: 400,
            n_target: 400,
            n_shared: 12,
            n_source_only: 4,
            n_target_only: 6,
            n_informative: 3,
            defect_rate: 0.25,
            label_noise: 0.3,
        }
    }
}

/// Source and target with disjoint metric names and a known correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub source: DefectDataset,
    pub target: DefectDataset,
    /// `(source metric, target metric)` for every shared distribution.
    pub truth: Vec<(String, String)>,
}

impl SyntheticPair {
    pub fn true_target_of(&self, source_metric: &str) -> Option<&str> {
        self.truth
            .iter()
            .find(|(s, _)| s == source_metric)
            .map(|(_, t)| t.as_str())
    }
}

/// Well-separated `(location, scale)` for distribution slot `k`.
fn slot(k: usize) -> (f64, f64) {
    (0.9 * k as f64, 0.4 + 0.1 * (k % 4) as f64)
}

pub fn heterogeneous_pair(cfg: &PairConfig, seed: u64) -> SyntheticPair {
    assert!(cfg.n_informative <= cfg.n_shared);
    let shared: Vec<MetricSpec> = (0..cfg.n_shared)
        .map(|k| {
            let (l, s) = slot(k);
            MetricSpec::new(l, s, k < cfg.n_informative)
        })
        .collect();
    let extra = |from: usize, count: usize| -> Vec<MetricSpec> {
        (from..from + count)
            .map(|k| {
                let (l, s) = slot(k);
                MetricSpec::new(l, s, false)
            })
            .collect()
    };
    let mut src_metrics = shared.clone();
    src_metrics.extend(extra(cfg.n_shared, cfg.n_source_only));
    let mut tgt_metrics = shared;
    tgt_metrics.extend(extra(cfg.n_shared + cfg.n_source_only, cfg.n_target_only));

    let source = generate(
        &ProjectSpec {
            name: "synthetic-source".into(),
            group: "source".into(),
            metric_prefix: "s".into(),
            n_instances: cfg.n_source,
            metrics: src_metrics,
            defect_rate: cfg.defect_rate,
            label_noise: cfg.label_noise,
        },
        seed::derive(seed, &[1]),
    );
    let target = generate(
        &ProjectSpec {
            name: "synthetic-target".into(),
            group: "target".into(),
            metric_prefix: "t".into(),
            n_instances: cfg.n_target,
            metrics: tgt_metrics,
            defect_rate: cfg.defect_rate,
            label_noise: cfg.label_noise,
        },
        seed::derive(seed, &[2]),
    );
    let column_of = |g: &GeneratedProject, k: usize| g.spec_index.iter().position(|&x| x == k).unwrap();
    let truth = (0..cfg.n_shared)
        .map(|k| {
            (
                source.dataset.metric_names()[column_of(&source, k)].clone(),
                target.dataset.metric_names()[column_of(&target, k)].clone(),
            )
        })
        .collect();
    SyntheticPair {
        source: source.dataset,
        target: target.dataset,
        truth,
    }
}

/// Six projects in three groups whose pairs span the whole feasibility range:
///
/// * `dense`: three distributions with four metrics each, so every selected
///   source metric has several plausible targets and matching rarely fails;
/// * `sparse`: twelve distinct distributions, one metric each;
/// * `shifted`: the `sparse` distributions with locations moved slightly, so
///   matching succeeds on some target folds only.
///
/// `dense` shares no distribution with the other two groups.
pub fn desk_corpus(seed: u64) -> Vec<DefectDataset> {
    let n = 600;
    let dense: Vec<MetricSpec> = (0..12)
        .map(|k| MetricSpec::new(-6.0 - 1.5 * (k / 4) as f64, 0.5, k % 4 == 0))
        .collect();
    let sparse: Vec<MetricSpec> = (0..12)
        .map(|k| {
            let (l, s) = slot(k);
            MetricSpec::new(l, s, k < 3)
        })
        .collect();
    let shifted: Vec<MetricSpec> = sparse
        .iter()
        .map(|m| MetricSpec::new(m.location + 0.12 * m.scale, m.scale, m.informative))
        .collect();
    let groups = [("dense", dense), ("sparse", sparse), ("shifted", shifted)];
    let mut out = Vec::new();
    for (g, (group, metrics)) in groups.iter().enumerate() {
        for i in 0..2 {
            let spec = ProjectSpec {
                name: format!("{group}-{}", i + 1),
                group: group.to_string(),
                metric_prefix: format!("{group}{}_m", i + 1),
                n_instances: n,
                metrics: metrics.clone(),
                defect_rate: 0.25,
                label_noise: 0.3,
            };
            out.push(generate(&spec, seed::derive(seed, &[g as u64, i as u64])).dataset);
        }
    }
    out
}
