//! Command-line front door: split / run / analyze / demo.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation error, 3 partial run
//! (some candidates failed but records were written) or demo orderings
//! not holding.

use cate_select::config::load_run_config;
use cate_select::data::{load_csv_dataset, load_manifest, CsvSchema, DataSource, SplitPlan};
use cate_select::demo::run_demo;
use cate_select::error::Error;
use cate_select::harness::{
    aggregate_and_merge, read_records_csv, report, run_grid, write_results_csv,
};
use cate_select::metrics::MetricOutcome;
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cate-select", version, about = "Model selection harness for treatment effect estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and persist the train/test/fold split plan (stage 1).
    Split {
        /// Dataset CSV (single-file mode; iterations reshuffle it).
        #[arg(long, conflicts_with = "manifest")]
        data: Option<PathBuf>,
        /// TOML manifest listing one CSV per iteration.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Column schema TOML for --data (defaults to the IHDP-style layout).
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0.1)]
        test_frac: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output plan file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute the candidate grid over a stored plan (stage 2 + 3).
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Run configuration TOML (data, grid, metrics, seeds).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for records.csv, results.csv and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0, env = "CATE_SELECT_JOBS")]
        jobs: usize,
    },
    /// Analysis queries over a records file (stage 4).
    Analyze {
        #[arg(long)]
        records: PathBuf,
        /// winners | oracle | regret | rank-corr | truth-corr | defaults-vs-oracle
        #[arg(long)]
        mode: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated test-metric pair for truth-corr and
        /// defaults-vs-oracle (default "e_ate,pehe").
        #[arg(long)]
        metrics: Option<String>,
    },
    /// The MSE-versus-PEHE demonstration study.
    Demo {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn ensure_dir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Split { data, manifest, schema, iters, folds, test_frac, seed, out } => {
            let source = match (data, manifest) {
                (Some(csv), None) => {
                    let schema = match schema {
                        Some(p) => {
                            let text = std::fs::read_to_string(&p)
                                .map_err(|e| Error::io(p.display().to_string(), e))?;
                            toml::from_str::<CsvSchema>(&text)
                                .map_err(|e| Error::invalid(format!("bad schema file: {e}")))?
                        }
                        None => CsvSchema::default(),
                    };
                    DataSource::Single(load_csv_dataset(&csv, &schema)?)
                }
                (None, Some(m)) => load_manifest(&m)?,
                _ => return Err(Error::invalid("provide exactly one of --data or --manifest")),
            };
            let plan = cate_select::data::build_split_plan(&source, iters, test_frac, folds, seed)?;
            write_atomic(&out, plan.to_text().as_bytes())?;
            println!(
                "{} iterations × {} folds (train {}, test {}) -> {}",
                plan.iterations.len(),
                plan.n_folds,
                plan.iterations[0].train_idx.len(),
                plan.iterations[0].test_idx.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Run { plan, config, out, jobs } => {
            let started = std::time::Instant::now();
            let cfg = load_run_config(&config)?;
            let base_dir = config.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
            let resolved = cfg.resolve(&base_dir, jobs)?;
            let plan = SplitPlan::load(&plan)?;
            if let DataSource::PerIteration(sets) = &resolved.source {
                if sets.len() != plan.iterations.len() {
                    return Err(Error::invalid(format!(
                        "plan has {} iterations but the manifest provides {} datasets",
                        plan.iterations.len(),
                        sets.len()
                    )));
                }
            }
            ensure_dir(&out)?;

            let records =
                run_grid(&resolved.source, &plan, &resolved.candidates, &resolved.settings)?;
            let csv_bytes = cate_select::harness::record::records_to_csv(&records)?;
            write_atomic(&out.join("records.csv"), &csv_bytes)?;

            let table = aggregate_and_merge(&records)?;
            write_results_csv(&table, out.join("results.csv"))?;

            let config_bytes = std::fs::read(&config)
                .map_err(|e| Error::io(config.display().to_string(), e))?;
            let config_hash = format!("{:x}", Sha256::digest(&config_bytes));
            let failed: usize = records
                .iter()
                .filter(|r| matches!(&r.value, MetricOutcome::Unavailable(reason) if reason.starts_with("fit failed")))
                .count();
            let manifest_text = format!(
                "version = 1\nconfig_sha256 = \"{config_hash}\"\ncrate_version = \"{}\"\nwall_seconds = {:.3}\nn_candidates = {}\nn_records = {}\nn_fit_failures = {}\njobs = {}\n",
                env!("CARGO_PKG_VERSION"),
                started.elapsed().as_secs_f64(),
                resolved.candidates.len(),
                records.len(),
                failed,
                jobs,
            );
            write_atomic(&out.join("run_manifest.toml"), manifest_text.as_bytes())?;

            println!(
                "{} candidates × {} iterations -> {} records in {:.1}s ({} fit failures)",
                resolved.candidates.len(),
                plan.iterations.len(),
                records.len(),
                started.elapsed().as_secs_f64(),
                failed
            );
            Ok(if failed > 0 { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }

        Command::Analyze { records, mode, out, metrics } => {
            let records = read_records_csv(&records)?;
            let table = aggregate_and_merge(&records)?;
            ensure_dir(&out)?;
            let pair = || -> Result<Vec<String>, Error> {
                let raw = metrics.clone().unwrap_or_else(|| "e_ate,pehe".to_string());
                let parts: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
                if parts.len() != 2 || parts.iter().any(String::is_empty) {
                    return Err(Error::invalid("--metrics expects two comma-separated names"));
                }
                Ok(parts)
            };
            let (file, content) = match mode.as_str() {
                "winners" => ("winners.csv", report::winners_report(&table)?),
                "oracle" => ("oracle.csv", report::oracle_report(&table)?),
                "regret" => ("regret.csv", report::regret_report(&table)?),
                "rank-corr" => ("rank_corr.csv", report::rank_corr_report(&table)?),
                "truth-corr" => {
                    let p = pair()?;
                    ("truth_corr.csv", report::truth_corr_report(&table, &p[0], &p[1])?)
                }
                "defaults-vs-oracle" => {
                    let p = pair()?;
                    ("defaults_vs_oracle.csv", report::defaults_vs_oracle_report(&table, &p)?)
                }
                other => {
                    return Err(Error::invalid(format!(
                        "unknown mode '{other}' (winners|oracle|regret|rank-corr|truth-corr|defaults-vs-oracle)"
                    )))
                }
            };
            let path = out.join(file);
            write_atomic(&path, content.as_bytes())?;
            println!("{mode} -> {}", path.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Demo { seed, out } => {
            let report = run_demo(seed, &out)?;
            for case in &report.cases {
                println!("{:<36} mse {:>8.4}   pehe {:>8.4}", case.name, case.mse, case.pehe);
            }
            if report.orderings_hold() {
                println!("orderings hold: MSE favors case 1, PEHE favors case 3, case 2 minimizes the sum");
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("orderings DID NOT hold for seed {seed}");
                Ok(ExitCode::from(3))
            }
        }
    }
}
