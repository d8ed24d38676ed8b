//! `hdp`: run heterogeneous defect prediction benchmarks from a dataset manifest.

mod config;
mod output;
mod report;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hdp_core::dataset::InclusionCriteria;

use config::{Analysis, ClassifierChoice, PolicyChoice, RunConfig};

#[derive(Parser)]
#[command(name = "hdp", version, about = "Heterogeneous defect prediction benchmark harness")]
struct Cli {
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load every dataset in a manifest and check the inclusion criteria.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        min_epv: f64,
        #[arg(long, default_value_t = 0.5)]
        max_buggy_ratio: f64,
    },
    /// Run experiments and write result files.
    Run(RunArgs),
    /// Render result files as summary tables.
    Report {
        /// Result files or directories containing them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Where to write report.txt and table CSVs (default: first input directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassifierChoice::Both)]
    classifier: ClassifierChoice,
    /// Fraction of source metrics kept by gain ratio.
    #[arg(long, default_value_t = 0.15)]
    fraction: f64,
    /// Minimum KS p-value for a metric pair to be matchable.
    #[arg(long, default_value_t = 0.05)]
    cutoff: f64,
    /// Replications of 2-fold cross-validation.
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    /// Largest acceptable fraction of infeasible folds for a pair.
    #[arg(long, default_value_t = 0.99)]
    nan_threshold: f64,
    #[arg(long, value_enum, default_value_t = PolicyChoice::AllSource)]
    policy: PolicyChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "hdp-results")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, env = "HDP_JOBS")]
    jobs: Option<usize>,
    /// Analyses to run, comma separated (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    only: Vec<Analysis>,
}

impl From<RunArgs> for RunConfig {
    fn from(a: RunArgs) -> Self {
        RunConfig {
            manifest: a.manifest,
            classifier: a.classifier,
            fraction: a.fraction,
            cutoff: a.cutoff,
            repeats: a.repeats,
            nan_threshold: a.nan_threshold,
            policy: a.policy,
            seed: a.seed,
            out: a.out,
            jobs: a.jobs,
            only: a.only,
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            manifest,
            min_epv,
            max_buggy_ratio,
        } => {
            let v = validate::cmd_validate(
                &manifest,
                &InclusionCriteria {
                    min_epv,
                    max_buggy_ratio,
                },
            )?;
            print!("{}", v.table.render());
            println!("{} of {} datasets accepted", v.accepted, v.table.rows.len());
            for e in &v.errors {
                eprintln!("error: {e}");
            }
            Ok(if v.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Run(args) => {
            let cfg = RunConfig::from(args);
            cfg.validate()?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = cfg.jobs {
                pool = pool.num_threads(j);
            }
            let written = pool.build()?.install(|| run::cmd_run(&cfg))?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { inputs, out } => {
            let out = out.unwrap_or_else(|| {
                inputs
                    .iter()
                    .find(|p| p.is_dir())
                    .cloned()
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            print!("{}", report::cmd_report(&inputs, &out)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
