use std::path::Path;

use anyhow::{Context, Result};
use hdp_core::dataset::{compute_stats, InclusionCriteria, Manifest};

use crate::output::TextTable;

pub struct Validation {
    pub table: TextTable,
    pub accepted: usize,
    /// One message per dataset file that failed to load.
    pub errors: Vec<String>,
}

pub fn cmd_validate(manifest_path: &Path, criteria: &InclusionCriteria) -> Result<Validation> {
    let manifest =
        Manifest::load(manifest_path).with_context(|| format!("loading manifest {}", manifest_path.display()))?;
    let mut table = TextTable::new(
        "Datasets",
        [
            "project",
            "group",
            "instances",
            "buggy",
            "buggy %",
            "metrics",
            "EPV",
            "verdict",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut errors = Vec::new();
    let mut accepted = 0;
    for (entry, loaded) in manifest.entries.iter().zip(manifest.load_all()) {
        match loaded {
            Ok(d) => {
                let s = compute_stats(&d);
                let verdict = match criteria.check(&s) {
                    None => {
                        accepted += 1;
                        "accepted".to_string()
                    }
                    Some(r) => format!("rejected: {r}"),
                };
                table.rows.push(vec![
                    d.project_name().to_string(),
                    d.group_name().to_string(),
                    s.n_instances.to_string(),
                    s.n_buggy.to_string(),
                    format!("{:.1}", 100.0 * s.buggy_ratio),
                    s.n_metrics.to_string(),
                    format!("{:.1}", s.epv),
                    verdict,
                ]);
            }
            Err(e) => errors.push(format!("{}: {e}", entry.path.display())),
        }
    }
    Ok(Validation {
        table,
        accepted,
        errors,
    })
}
