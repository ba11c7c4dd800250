use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use segnet::pipeline::{run_pipeline, summarize_dir, RunConfig};
use segnet::synth::SynthConfig;

/// Segregation analysis of attributed village networks.
#[derive(Parser)]
#[command(name = "segnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze every village of a corpus and write all artifacts.
    Run {
        /// Key-value run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute the corpus summary tables from the village bundles in DIR.
    Summarize { dir: PathBuf },
    /// Generate a synthetic corpus from a JSON description.
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let report = run_pipeline(&cfg)?;
            eprintln!(
                "analyzed {} of {} villages into {}",
                report.villages.len() - report.failures.len(),
                report.villages.len(),
                report.output_dir.display()
            );
            for f in &report.failures {
                eprintln!("failed: {}: {}", f.village_id, f.message);
            }
            Ok(report.success())
        }
        Command::Summarize { dir } => {
            let summary = summarize_dir(&dir)?;
            eprintln!(
                "summarized {} villages in {}",
                summary.villages.len(),
                dir.display()
            );
            Ok(true)
        }
        Command::Synth { config, out } => {
            let cfg = SynthConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .context("no output directory: pass --out or set output_dir")?;
            for v in cfg.write_corpus(&dir)? {
                for w in &v.warnings {
                    eprintln!("warning: {}: {w}", v.dataset.village_id);
                }
            }
            eprintln!("wrote {} villages to {}", cfg.villages.len(), dir.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
