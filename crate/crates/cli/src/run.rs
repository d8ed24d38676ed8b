use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use hdp_core::dataset::{apply_inclusion_criteria, DefectDataset, InclusionCriteria, Manifest};
use hdp_core::experiment::{
    closest_source_records, closest_source_summary, compare_wpdp_hdp, comparison_totals, coverage_report, cpdp_table,
    ensemble_summary, feasibility_curve, mean_of_cells, run_ensemble, run_hdp_grid, run_wpdp, similarity_table,
    AucGrid, CvScheme, ExperimentConfig, ExperimentError,
};
use hdp_core::model::ClassifierKind;
use serde::Serialize;

use crate::config::{config_hash, Analysis, DatasetSummary, RunConfig};
use crate::output::{fmt_f64, fmt_opt, write_csv, FileHeader};

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    seed: u64,
    manifest: String,
    classifier: crate::config::ClassifierChoice,
    fraction: f64,
    cutoff: f64,
    repeats: usize,
    nan_threshold: f64,
    policy: crate::config::PolicyChoice,
    analyses: Vec<Analysis>,
    experiment: ExperimentConfig,
    datasets: &'a [DatasetSummary],
    rejected: Vec<(String, String)>,
}

pub fn load_accepted(manifest_path: &std::path::Path) -> Result<(Vec<DefectDataset>, Vec<(String, String)>)> {
    let manifest =
        Manifest::load(manifest_path).with_context(|| format!("loading manifest {}", manifest_path.display()))?;
    let mut datasets = Vec::new();
    for (entry, loaded) in manifest.entries.iter().zip(manifest.load_all()) {
        datasets.push(loaded.with_context(|| format!("loading {}", entry.path.display()))?);
    }
    let outcome = apply_inclusion_criteria(datasets, &InclusionCriteria::default());
    let rejected = outcome
        .rejected
        .iter()
        .map(|(d, r)| {
            log::warn!("excluding {}: {r}", d.project_name());
            (d.project_name().to_string(), r.to_string())
        })
        .collect();
    Ok((outcome.accepted, rejected))
}

struct Writer<'a> {
    out: &'a PathBuf,
    hash: &'a str,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn csv(
        &mut self,
        name: &str,
        kind: &str,
        classifier: Option<ClassifierKind>,
        cols: &[&str],
        rows: &[Vec<String>],
    ) -> Result<()> {
        let header = FileHeader {
            kind: kind.into(),
            classifier: classifier.map_or("none", |c| c.short_name()).into(),
            config_hash: self.hash.into(),
            seed: self.seed,
        };
        let path = self.out.join(name);
        write_csv(&path, &header, cols, rows)?;
        self.written.push(path);
        Ok(())
    }
}

fn thresholds() -> Vec<f64> {
    (0..=100).map(|p| p as f64 / 100.0).collect()
}

/// Runs the requested analyses and writes their result files into `cfg.out`.
pub fn cmd_run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let (datasets, rejected) = load_accepted(&cfg.manifest)?;
    let summaries: Vec<DatasetSummary> = datasets.iter().map(DatasetSummary::of).collect();
    let hash = config_hash(cfg, &summaries);
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let analyses = cfg.analyses();
    let wants = |a: Analysis| analyses.contains(&a);

    let meta = Metadata {
        tool: "hdp",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        seed: cfg.seed,
        manifest: cfg.manifest.display().to_string(),
        classifier: cfg.classifier,
        fraction: cfg.fraction,
        cutoff: cfg.cutoff,
        repeats: cfg.repeats,
        nan_threshold: cfg.nan_threshold,
        policy: cfg.policy,
        analyses: analyses.clone(),
        experiment: cfg.experiment(ClassifierKind::LogisticRegression),
        datasets: &summaries,
        rejected,
    };
    let meta_path = cfg.out.join("run_metadata.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")?;

    let mut w = Writer {
        out: &cfg.out,
        hash: &hash,
        seed: cfg.seed,
        written: vec![meta_path],
    };
    let names: Vec<String> = datasets.iter().map(|d| d.project_name().to_string()).collect();

    let sim = if wants(Analysis::Similarity) {
        let table = similarity_table(&datasets);
        let mut rows = Vec::new();
        for (c, row) in table.iter().enumerate() {
            for (t, d) in row.iter().enumerate() {
                rows.push(vec![names[c].clone(), names[t].clone(), fmt_opt(*d)]);
            }
        }
        w.csv(
            "similarity.csv",
            "similarity",
            None,
            &["candidate", "target", "distance"],
            &rows,
        )?;
        Some(table)
    } else {
        None
    };

    for kind in cfg.classifier.kinds() {
        let ecfg = cfg.experiment(kind);
        let clf = kind.short_name();
        log::info!("classifier {clf}");

        let wpdp10 = if wants(Analysis::Wpdp) || wants(Analysis::Similarity) {
            Some(run_wpdp(&datasets, CvScheme::TEN_BY_TEN, &ecfg)?)
        } else {
            None
        };
        let folds = if wants(Analysis::Wpdp) || wants(Analysis::Hdp) || wants(Analysis::Coverage) {
            Some(run_wpdp(&datasets, CvScheme::two_fold(cfg.repeats), &ecfg)?)
        } else {
            None
        };

        if wants(Analysis::Wpdp) {
            let w10 = wpdp10.as_ref().unwrap();
            let rows: Vec<Vec<String>> = datasets
                .iter()
                .zip(w10)
                .map(|(d, cells)| {
                    vec![
                        d.project_name().to_string(),
                        d.group_name().to_string(),
                        fmt_opt(mean_of_cells(cells)),
                        cells.len().to_string(),
                        cells.iter().filter(|c| c.is_none()).count().to_string(),
                    ]
                })
                .collect();
            w.csv(
                &format!("wpdp10x10_{clf}.csv"),
                "wpdp",
                Some(kind),
                &["project", "group", "mean_auc", "n_folds", "n_missing"],
                &rows,
            )?;
            let mut rows = Vec::new();
            for (d, cells) in datasets.iter().zip(folds.as_ref().unwrap()) {
                for (i, c) in cells.iter().enumerate() {
                    rows.push(vec![
                        d.project_name().to_string(),
                        (i / 2 + 1).to_string(),
                        (i % 2 + 1).to_string(),
                        fmt_opt(*c),
                    ]);
                }
            }
            w.csv(
                &format!("wpdp_folds_{clf}.csv"),
                "wpdp-folds",
                Some(kind),
                &["project", "replication", "fold", "auc"],
                &rows,
            )?;
        }

        if wants(Analysis::Cpdp) {
            let table = cpdp_table(&datasets, &ecfg)?;
            let mut rows = Vec::new();
            for (s, row) in table.iter().enumerate() {
                for (t, a) in row.iter().enumerate() {
                    if s != t {
                        rows.push(vec![names[s].clone(), names[t].clone(), fmt_opt(*a)]);
                    }
                }
            }
            w.csv(
                &format!("cpdp_{clf}.csv"),
                "cpdp",
                Some(kind),
                &["source", "target", "auc"],
                &rows,
            )?;
        }

        let grid = if wants(Analysis::Hdp) || wants(Analysis::Coverage) {
            Some(run_hdp_grid(&datasets, &ecfg)?)
        } else {
            None
        };

        if wants(Analysis::Hdp) {
            let grid = grid.as_ref().unwrap();
            write_hdp(&mut w, grid, folds.as_ref().unwrap(), &ecfg, kind)?;
        }

        if wants(Analysis::Ensemble) {
            let results = run_ensemble(&datasets, &ecfg);
            let mut ok = Vec::new();
            let mut rows = Vec::new();
            for (d, r) in datasets.iter().zip(results) {
                match r {
                    Ok(e) => {
                        rows.push(vec![
                            e.target.clone(),
                            e.feasible_sources.len().to_string(),
                            e.feasible_sources.join(";"),
                            fmt_f64(e.mean_pairwise_auc),
                            fmt_f64(e.ensemble_auc),
                        ]);
                        ok.push(e);
                    }
                    Err(ExperimentError::NoFeasibleSource { .. }) => rows.push(vec![
                        d.project_name().to_string(),
                        "0".into(),
                        String::new(),
                        "NaN".into(),
                        "NaN".into(),
                    ]),
                    Err(e) => return Err(e.into()),
                }
            }
            w.csv(
                &format!("ensemble_{clf}.csv"),
                "ensemble",
                Some(kind),
                &[
                    "target",
                    "n_feasible_sources",
                    "feasible_sources",
                    "mean_pairwise_auc",
                    "ensemble_auc",
                ],
                &rows,
            )?;
            let s = ensemble_summary(&ok);
            let row = vec![
                ok.len().to_string(),
                fmt_opt(s.map(|s| s.mean_pairwise)),
                fmt_opt(s.map(|s| s.mean_ensemble)),
                fmt_opt(s.and_then(|s| s.wilcoxon).map(|w| w.statistic)),
                fmt_opt(s.and_then(|s| s.wilcoxon).map(|w| w.p_value)),
            ];
            w.csv(
                &format!("ensemble_summary_{clf}.csv"),
                "ensemble-summary",
                Some(kind),
                &[
                    "n_targets",
                    "mean_pairwise_auc",
                    "mean_ensemble_auc",
                    "wilcoxon_statistic",
                    "wilcoxon_p",
                ],
                &[row],
            )?;
        }

        if wants(Analysis::Similarity) {
            let means: Vec<Option<f64>> = wpdp10.as_ref().unwrap().iter().map(|c| mean_of_cells(c)).collect();
            let records = closest_source_records(&datasets, sim.as_ref().unwrap(), &means, &ecfg)?;
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.target.clone(),
                        r.chosen.clone().unwrap_or_default(),
                        fmt_opt(r.distance),
                        fmt_opt(r.cpdp_auc),
                        fmt_opt(r.wpdp_mean),
                        fmt_opt(r.normalized),
                    ]
                })
                .collect();
            w.csv(
                &format!("closest_source_{clf}.csv"),
                "closest-source",
                Some(kind),
                &[
                    "target",
                    "chosen",
                    "distance",
                    "cpdp_auc",
                    "wpdp_mean",
                    "normalized_auc",
                ],
                &rows,
            )?;
            let s = closest_source_summary(&records);
            let t = s.and_then(|s| s.t_test);
            let row = vec![
                s.map_or(0, |s| s.n).to_string(),
                fmt_opt(s.map(|s| s.mean_normalized)),
                fmt_opt(t.map(|t| t.t_statistic)),
                fmt_opt(t.map(|t| t.df)),
                fmt_opt(t.map(|t| t.p_value)),
            ];
            w.csv(
                &format!("closest_source_summary_{clf}.csv"),
                "closest-source-summary",
                Some(kind),
                &["n", "mean_normalized_auc", "t_statistic", "df", "p_value"],
                &[row],
            )?;
        }

        if wants(Analysis::Coverage) {
            let rep = coverage_report(grid.as_ref().unwrap(), folds.as_ref().unwrap(), cfg.nan_threshold);
            let rows: Vec<Vec<String>> = rep
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.source_group.clone(),
                        c.target_group.clone(),
                        c.feasible.to_string(),
                        c.possible.to_string(),
                        fmt_opt(c.percent),
                    ]
                })
                .collect();
            w.csv(
                &format!("coverage_groups_{clf}.csv"),
                "coverage-groups",
                Some(kind),
                &["source_group", "target_group", "feasible", "possible", "percent"],
                &rows,
            )?;
            let rows: Vec<Vec<String>> = rep
                .sources
                .iter()
                .map(|s| {
                    vec![
                        s.group.clone(),
                        s.n_projects.to_string(),
                        s.targets_covered.to_string(),
                        s.n_targets.to_string(),
                        fmt_f64(s.coverage_percent),
                        fmt_opt(s.median_wpdp),
                        fmt_opt(s.median_hdp),
                    ]
                })
                .collect();
            w.csv(
                &format!("coverage_sources_{clf}.csv"),
                "coverage-sources",
                Some(kind),
                &[
                    "group",
                    "n_projects",
                    "targets_covered",
                    "n_targets",
                    "coverage_percent",
                    "median_wpdp_auc",
                    "median_hdp_auc",
                ],
                &rows,
            )?;
        }
    }
    Ok(w.written)
}

fn write_hdp(
    w: &mut Writer,
    grid: &AucGrid,
    folds: &[Vec<Option<f64>>],
    ecfg: &ExperimentConfig,
    kind: ClassifierKind,
) -> Result<()> {
    let clf = kind.short_name();
    let mut rows = Vec::new();
    for ((s, t), cells) in grid.pairs() {
        for (i, c) in cells.iter().enumerate() {
            rows.push(vec![
                grid.projects[s].clone(),
                grid.groups[s].clone(),
                grid.projects[t].clone(),
                grid.groups[t].clone(),
                (i / grid.n_folds + 1).to_string(),
                (i % grid.n_folds + 1).to_string(),
                fmt_opt(*c),
            ]);
        }
    }
    w.csv(
        &format!("hdp_grid_{clf}.csv"),
        "hdp-grid",
        Some(kind),
        &[
            "source",
            "source_group",
            "target",
            "target_group",
            "replication",
            "fold",
            "auc",
        ],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = grid
        .pairs()
        .map(|((s, t), _)| {
            let p = grid
                .summary(s, t, ecfg.nan_threshold)
                .ok_or_else(|| anyhow!("missing pair"))?;
            Ok(vec![
                p.source,
                p.target,
                p.n_feasible.to_string(),
                p.n_total.to_string(),
                fmt_opt(p.mean_auc),
                p.feasible_under_threshold.to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    w.csv(
        &format!("hdp_pairs_{clf}.csv"),
        "hdp-pairs",
        Some(kind),
        &["source", "target", "n_feasible", "n_total", "mean_auc", "feasible"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = feasibility_curve(grid, &thresholds())
        .into_iter()
        .map(|(t, n)| vec![fmt_f64(t), n.to_string(), grid.n_pairs().to_string()])
        .collect();
    w.csv(
        &format!("feasibility_{clf}.csv"),
        "feasibility",
        Some(kind),
        &["nan_threshold", "feasible_pairs", "total_pairs"],
        &rows,
    )?;

    let records = compare_wpdp_hdp(grid, folds, ecfg.alpha, ecfg.nan_threshold);
    let totals = comparison_totals(grid, folds, &records, ecfg.nan_threshold);
    let mut rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.target.clone(),
                fmt_opt(r.wpdp_mean),
                fmt_opt(r.hdp_mean),
                fmt_opt(r.cliffs.map(|c| c.delta)),
                r.cliffs.map(|c| c.magnitude.letter().to_string()).unwrap_or_default(),
                r.wins.to_string(),
                r.ties.to_string(),
                r.losses.to_string(),
                r.feasible_cells.to_string(),
                r.total_cells.to_string(),
                fmt_f64(r.predictability()),
            ]
        })
        .collect();
    let feasible: usize = records.iter().map(|r| r.feasible_cells).sum();
    let total: usize = records.iter().map(|r| r.total_cells).sum();
    if !records.is_empty() {
        rows.push(vec![
            "Total".into(),
            fmt_opt(totals.wpdp_mean),
            fmt_opt(totals.hdp_mean),
            "NaN".into(),
            String::new(),
            totals.wins.to_string(),
            totals.ties.to_string(),
            totals.losses.to_string(),
            feasible.to_string(),
            total.to_string(),
            fmt_f64(if total == 0 {
                0.0
            } else {
                100.0 * feasible as f64 / total as f64
            }),
        ]);
    }
    w.csv(
        &format!("comparison_{clf}.csv"),
        "comparison",
        Some(kind),
        &[
            "target",
            "wpdp_mean",
            "hdp_mean",
            "cliffs_delta",
            "magnitude",
            "wins",
            "ties",
            "losses",
            "feasible_cells",
            "total_cells",
            "predictability",
        ],
        &rows,
    )?;

    let mut rows = Vec::new();
    for r in &records {
        for s in &r.sources {
            rows.push(vec![
                r.target.clone(),
                s.source.clone(),
                format!("{:?}", s.outcome).to_lowercase(),
                fmt_f64(s.p_value),
                s.n_paired.to_string(),
            ]);
        }
    }
    w.csv(
        &format!("comparison_pairs_{clf}.csv"),
        "comparison-pairs",
        Some(kind),
        &["target", "source", "outcome", "p_value", "n_paired"],
        &rows,
    )
}
