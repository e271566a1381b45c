use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use testevo::config::RunConfig;
use testevo::ledger::read_jsonl;
use testevo::metrics::{precision, sample_for_validation};
use testevo::pipeline::{run, RepoOutcome};
use testevo::report::{fmt_pct2, read_labels, read_tools_csv, render_summary};

#[derive(Parser)]
#[command(name = "testevo", version, about = "Mines GUI test suite evolution and fragility from Android git histories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over a corpus described by a config file.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Worker pool size (overrides the config).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the per-tool summary table from a tools.csv.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Draw a reproducible validation sample of fragile-class records.
    Sample {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Compute proxy precision from a manual label file.
    Precision {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> testevo::Result<ExitCode> {
    match Cli::parse().command {
        Command::Analyze { config, jobs, out } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(jobs) = jobs {
                config.jobs = Some(jobs);
            }
            if let Some(out) = out {
                config.output_dir = out;
            }
            let outcome = run(&config)?;
            for repo in &outcome.manifest.repos {
                match (&repo.status, &repo.reason) {
                    (RepoOutcome::Analyzed, _) => println!("analyzed  {}", repo.host_id),
                    (status, reason) => println!(
                        "{}  {} ({})",
                        match status {
                            RepoOutcome::Skipped => "skipped ",
                            _ => "failed  ",
                        },
                        repo.host_id,
                        reason.as_deref().unwrap_or("unknown")
                    ),
                }
            }
            println!(
                "{} analyzed, {} skipped, {} failed -> {}",
                outcome.analyzed_count(),
                outcome.manifest.count(RepoOutcome::Skipped),
                outcome.manifest.count(RepoOutcome::Failed),
                config.output_dir.display()
            );
            if outcome.analyzed_count() == 0 {
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize { input } => {
            let summaries = read_tools_csv(&input)?;
            print!("{}", render_summary(&summaries));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample { ledger, k, seed } => {
            let records = read_jsonl(&ledger)?;
            for id in sample_for_validation(&records, k, seed)? {
                println!("{id}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Precision { ledger, labels } => {
            let records = read_jsonl(&ledger)?;
            let labels = read_labels(&labels)?;
            let report = precision(&records, &labels)?;
            println!(
                "classes: measured={} TP={} FP={} P={}",
                report.classes.measured,
                report.classes.tp,
                report.classes.fp,
                fmt_pct2(report.classes.precision)
            );
            println!(
                "methods: measured={} TP={} FP={} P={}",
                report.methods.measured,
                report.methods.tp,
                report.methods.fp,
                fmt_pct2(report.methods.precision)
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
