#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdp_core::dataset::{write_dataset, DefectDataset, Manifest, ManifestEntry};

/// Writes each dataset as CSV under `dir` plus a manifest listing them.
pub fn write_corpus(dir: &Path, datasets: &[DefectDataset]) -> PathBuf {
    let mut manifest = Manifest::default();
    for d in datasets {
        let file = format!("{}.csv", d.project_name());
        write_dataset(d, dir.join(&file), "bug").unwrap();
        manifest.entries.push(ManifestEntry {
            path: file.into(),
            project: d.project_name().to_string(),
            group: d.group_name().to_string(),
            label_column: "bug".into(),
            label_encoding: Default::default(),
            drop_columns: vec![],
        });
    }
    let path = dir.join("manifest.toml");
    std::fs::write(&path, manifest.to_toml_string()).unwrap();
    path
}

pub fn hdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("HDP_JOBS")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
