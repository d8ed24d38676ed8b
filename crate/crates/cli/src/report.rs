//! Renders the result files of a run as summary tables.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::output::{fmt_short, parse_opt, FileHeader, ResultFile, TextTable};

/// Reads every result file among `inputs` (files or directories) and fails if
/// they come from different configurations.
pub fn load_results(inputs: &[PathBuf]) -> Result<Vec<(PathBuf, ResultFile)>> {
    let mut paths = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.extension().is_some_and(|x| x == "csv"))
                .collect();
            entries.sort();
            paths.extend(entries);
        } else {
            paths.push(p.clone());
        }
    }
    let mut files: Vec<(PathBuf, ResultFile)> = Vec::new();
    for p in paths {
        let Some(f) = ResultFile::read(&p)? else {
            log::debug!("skipping {}: not a result file", p.display());
            continue;
        };
        if let Some((first, g)) = files.first() {
            if g.header.config_hash != f.header.config_hash || g.header.seed != f.header.seed {
                bail!(
                    "config hash mismatch: {} has {} (seed {}) but {} has {} (seed {})",
                    first.display(),
                    g.header.config_hash,
                    g.header.seed,
                    p.display(),
                    f.header.config_hash,
                    f.header.seed
                );
            }
        }
        files.push((p, f));
    }
    Ok(files)
}

struct Results<'a> {
    files: &'a [(PathBuf, ResultFile)],
}

impl Results<'_> {
    fn find(&self, kind: &str, classifier: &str) -> Option<&ResultFile> {
        self.files
            .iter()
            .map(|(_, f)| f)
            .find(|f| f.header.kind == kind && f.header.classifier == classifier)
    }
}

fn s(v: &str) -> String {
    v.to_string()
}

fn short(v: &str) -> String {
    fmt_short(parse_opt(v), 3)
}

fn wpdp_cpdp_table(wpdp: &ResultFile, cpdp: Option<&ResultFile>, clf: &str) -> Result<TextTable> {
    let pc = wpdp.col("project")?;
    let mc = wpdp.col("mean_auc")?;
    let projects: Vec<String> = wpdp.rows.iter().map(|r| r[pc].clone()).collect();
    let mut headers = vec![s("source \\ target")];
    headers.extend(projects.iter().cloned());
    let mut t = TextTable::new(format!("WPDP (diagonal) and CPDP AUC, {clf}"), headers);
    let lookup = |src: &str, tgt: &str| -> Result<String> {
        let Some(c) = cpdp else { return Ok(s("NaN")) };
        let (sc, tc, ac) = (c.col("source")?, c.col("target")?, c.col("auc")?);
        Ok(c.rows
            .iter()
            .find(|r| r[sc] == src && r[tc] == tgt)
            .map_or_else(|| s("NaN"), |r| short(&r[ac])))
    };
    for (i, src) in projects.iter().enumerate() {
        let mut row = vec![src.clone()];
        for (j, tgt) in projects.iter().enumerate() {
            row.push(if i == j {
                short(&wpdp.rows[i][mc])
            } else {
                lookup(src, tgt)?
            });
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn comparison_table(f: &ResultFile, clf: &str) -> Result<TextTable> {
    let c = |n: &str| f.col(n);
    let (tg, w, h, d, m) = (
        c("target")?,
        c("wpdp_mean")?,
        c("hdp_mean")?,
        c("cliffs_delta")?,
        c("magnitude")?,
    );
    let (wi, ti, li) = (c("wins")?, c("ties")?, c("losses")?);
    let (fc, tc, pr) = (c("feasible_cells")?, c("total_cells")?, c("predictability")?);
    let mut t = TextTable::new(
        format!("HDP against WPDP, {clf}"),
        [
            "target",
            "WPDP",
            "HDP",
            "Cliff's delta",
            "win",
            "tie",
            "loss",
            "predictable",
            "%",
        ]
        .map(String::from)
        .to_vec(),
    );
    for r in &f.rows {
        let delta = match parse_opt(&r[d]) {
            Some(v) => format!("{v:.3} ({})", r[m]),
            None => s("NaN"),
        };
        t.rows.push(vec![
            r[tg].clone(),
            short(&r[w]),
            short(&r[h]),
            delta,
            r[wi].clone(),
            r[ti].clone(),
            r[li].clone(),
            format!("{}/{}", r[fc], r[tc]),
            fmt_short(parse_opt(&r[pr]), 1),
        ]);
    }
    Ok(t)
}

fn feasibility_table(f: &ResultFile, clf: &str) -> Result<TextTable> {
    let (th, fp, tp) = (f.col("nan_threshold")?, f.col("feasible_pairs")?, f.col("total_pairs")?);
    let mut t = TextTable::new(
        format!("Feasible pairs by acceptable missing fraction, {clf}"),
        ["nan threshold", "feasible pairs", "of"].map(String::from).to_vec(),
    );
    let keep = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0];
    for r in &f.rows {
        if parse_opt(&r[th]).is_some_and(|v| keep.iter().any(|k| (k - v).abs() < 1e-9)) {
            t.rows.push(vec![r[th].clone(), r[fp].clone(), r[tp].clone()]);
        }
    }
    Ok(t)
}

fn ensemble_table(f: &ResultFile, summary: Option<&ResultFile>, clf: &str) -> Result<TextTable> {
    let (tg, n, src, p, e) = (
        f.col("target")?,
        f.col("n_feasible_sources")?,
        f.col("feasible_sources")?,
        f.col("mean_pairwise_auc")?,
        f.col("ensemble_auc")?,
    );
    let mut t = TextTable::new(
        format!("Ensemble HDP, {clf}"),
        ["target", "sources", "feasible sources", "pairwise mean", "ensemble"]
            .map(String::from)
            .to_vec(),
    );
    for r in &f.rows {
        t.rows.push(vec![
            r[tg].clone(),
            r[n].clone(),
            r[src].clone(),
            short(&r[p]),
            short(&r[e]),
        ]);
    }
    if let Some(sf) = summary {
        let (mp, me, wp) = (
            sf.col("mean_pairwise_auc")?,
            sf.col("mean_ensemble_auc")?,
            sf.col("wilcoxon_p")?,
        );
        for r in &sf.rows {
            t.rows.push(vec![
                s("Mean"),
                String::new(),
                String::new(),
                short(&r[mp]),
                short(&r[me]),
            ]);
            t.rows.push(vec![
                s("Wilcoxon p"),
                String::new(),
                String::new(),
                String::new(),
                fmt_short(parse_opt(&r[wp]), 4),
            ]);
        }
    }
    Ok(t)
}

fn coverage_table(groups: &ResultFile, sources: Option<&ResultFile>, clf: &str) -> Result<TextTable> {
    let (sg, tg, fe, pc) = (
        groups.col("source_group")?,
        groups.col("target_group")?,
        groups.col("feasible")?,
        groups.col("percent")?,
    );
    let mut names: Vec<String> = Vec::new();
    for r in &groups.rows {
        if !names.contains(&r[sg]) {
            names.push(r[sg].clone());
        }
    }
    let mut headers = vec![s("source \\ target")];
    headers.extend(names.iter().cloned());
    headers.extend(["coverage %", "median WPDP", "median HDP"].map(String::from));
    let mut t = TextTable::new(format!("Target prediction coverage, {clf}"), headers);
    for g in &names {
        let mut row = vec![g.clone()];
        for h in &names {
            let cell = groups.rows.iter().find(|r| &r[sg] == g && &r[tg] == h).map_or_else(
                || s("NaN"),
                |r| format!("{} ({}%)", r[fe], fmt_short(parse_opt(&r[pc]), 1)),
            );
            row.push(cell);
        }
        match sources {
            Some(sf) => {
                let (gc, cp, mw, mh) = (
                    sf.col("group")?,
                    sf.col("coverage_percent")?,
                    sf.col("median_wpdp_auc")?,
                    sf.col("median_hdp_auc")?,
                );
                match sf.rows.iter().find(|r| &r[gc] == g) {
                    Some(r) => row.extend([fmt_short(parse_opt(&r[cp]), 1), short(&r[mw]), short(&r[mh])]),
                    None => row.extend([s("NaN"), s("NaN"), s("NaN")]),
                }
            }
            None => row.extend([s("NaN"), s("NaN"), s("NaN")]),
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn similarity_matrix(f: &ResultFile) -> Result<TextTable> {
    let (cc, tc, dc) = (f.col("candidate")?, f.col("target")?, f.col("distance")?);
    let mut names: Vec<String> = Vec::new();
    for r in &f.rows {
        if !names.contains(&r[cc]) {
            names.push(r[cc].clone());
        }
    }
    let mut headers = vec![s("training \\ target")];
    headers.extend(names.iter().cloned());
    let mut t = TextTable::new("Domain-agnostic distance", headers);
    for c in &names {
        let mut row = vec![c.clone()];
        for g in &names {
            row.push(
                f.rows
                    .iter()
                    .find(|r| &r[cc] == c && &r[tc] == g)
                    .map_or_else(|| s("NaN"), |r| fmt_short(parse_opt(&r[dc]), 2)),
            );
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn closest_source_table(f: &ResultFile, summary: Option<&ResultFile>, clf: &str) -> Result<TextTable> {
    let cols = [
        "target",
        "chosen",
        "distance",
        "cpdp_auc",
        "wpdp_mean",
        "normalized_auc",
    ];
    let idx: Vec<usize> = cols.iter().map(|c| f.col(c)).collect::<Result<_>>()?;
    let mut t = TextTable::new(
        format!("Closest-source CPDP against WPDP, {clf}"),
        ["target", "chosen", "distance", "CPDP", "WPDP", "normalized"]
            .map(String::from)
            .to_vec(),
    );
    for r in &f.rows {
        t.rows.push(vec![
            r[idx[0]].clone(),
            r[idx[1]].clone(),
            short(&r[idx[2]]),
            short(&r[idx[3]]),
            short(&r[idx[4]]),
            short(&r[idx[5]]),
        ]);
    }
    if let Some(sf) = summary {
        let (mn, p) = (sf.col("mean_normalized_auc")?, sf.col("p_value")?);
        for r in &sf.rows {
            t.rows.push(vec![
                s("Mean"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                short(&r[mn]),
            ]);
            t.rows.push(vec![
                s("t-test p (vs 1)"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_short(parse_opt(&r[p]), 4),
            ]);
        }
    }
    Ok(t)
}

/// Named tables rendered from the loaded results, in display order.
pub fn render(files: &[(PathBuf, ResultFile)]) -> Result<Vec<(String, TextTable)>> {
    let res = Results { files };
    let classifiers: BTreeSet<&str> = files
        .iter()
        .map(|(_, f)| f.header.classifier.as_str())
        .filter(|c| *c != "none")
        .collect();
    let mut out = Vec::new();
    if let Some(f) = res.find("similarity", "none") {
        out.push((s("similarity_table"), similarity_matrix(f)?));
    }
    for clf in classifiers {
        if let Some(w) = res.find("wpdp", clf) {
            out.push((
                format!("wpdp_cpdp_table_{clf}"),
                wpdp_cpdp_table(w, res.find("cpdp", clf), clf)?,
            ));
        }
        if let Some(f) = res.find("closest-source", clf) {
            out.push((
                format!("closest_source_table_{clf}"),
                closest_source_table(f, res.find("closest-source-summary", clf), clf)?,
            ));
        }
        if let Some(f) = res.find("feasibility", clf) {
            out.push((format!("feasibility_table_{clf}"), feasibility_table(f, clf)?));
        }
        if let Some(f) = res.find("comparison", clf) {
            out.push((format!("comparison_table_{clf}"), comparison_table(f, clf)?));
        }
        if let Some(f) = res.find("ensemble", clf) {
            out.push((
                format!("ensemble_table_{clf}"),
                ensemble_table(f, res.find("ensemble-summary", clf), clf)?,
            ));
        }
        if let Some(f) = res.find("coverage-groups", clf) {
            out.push((
                format!("coverage_table_{clf}"),
                coverage_table(f, res.find("coverage-sources", clf), clf)?,
            ));
        }
    }
    Ok(out)
}

/// Loads, checks, and renders results; writes `report.txt` and one CSV per
/// table into `out`. Returns the text report.
pub fn cmd_report(inputs: &[PathBuf], out: &Path) -> Result<String> {
    let files = load_results(inputs)?;
    let Some((_, first)) = files.first() else {
        bail!("no result files found");
    };
    let (hash, seed) = (first.header.config_hash.clone(), first.header.seed);
    let tables = render(&files)?;
    fs::create_dir_all(out)?;
    let mut text = format!("config_hash={hash} seed={seed}\n\n");
    for (name, t) in &tables {
        text.push_str(&t.render());
        text.push('\n');
        let header = FileHeader {
            kind: format!("report-{name}"),
            classifier: "none".into(),
            config_hash: hash.clone(),
            seed,
        };
        fs::write(out.join(format!("{name}.csv")), t.to_csv(&header)?)?;
    }
    fs::write(out.join("report.txt"), &text)?;
    Ok(text)
}
