//! `crossguard` command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crossguard::augment::Condition;
use crossguard::experiment::{
    augment_frames, load_results, run_experiment, write_ground_truth_files, EvaluationReport,
    ExperimentConfig, Source, RESULTS_FILE,
};
use crossguard::Error;

const THREADS_ENV: &str = "CROSSGUARD_THREADS";

#[derive(Parser)]
#[command(name = "crossguard", version, about = "Road-crossing danger evaluation under simulated weather")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON). Defaults to the built-in benchmark.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write ground-truth trajectory CSVs for every configured sequence.
    Simulate(Common),
    /// Apply an environmental filter to a directory of PNG frames.
    Augment {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        /// Condition key, e.g. `fog_0.5`, `rain_heavy`, `dark_0.3`.
        #[arg(long)]
        condition: String,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the full evaluation and write the CSV reports.
    Run {
        #[command(flatten)]
        common: Common,
        /// Read detections (and optional ground truth) from DIR instead of
        /// simulating detectors.
        #[arg(long, value_name = "DIR")]
        ingest: Option<PathBuf>,
    },
    /// Rebuild aggregate and boxplot CSVs from an existing results.csv.
    Report {
        /// Directory holding results.csv; the summaries are written beside it.
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

/// Writes to stdout, ignoring a closed pipe (e.g. `| head`).
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn report_files(dir: &Path) -> Result<EvaluationReport, Error> {
    let records = load_results(&dir.join(RESULTS_FILE))?;
    let report = EvaluationReport::from_records(records)?;
    report.write(dir)?;
    Ok(report)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load_config(&common)?;
            let written = write_ground_truth_files(&cfg, &cfg.output_dir)?;
            emit(&format!("wrote {} ground-truth files to {}\n", written.len(), cfg.output_dir.display()));
        }
        Command::Augment {
            input,
            condition,
            seed,
            out,
        } => {
            let condition: Condition = condition.parse()?;
            let summary = augment_frames(&input, condition, seed, &out)?;
            for (path, err) in &summary.failures {
                eprintln!("error: {}: {err}", path.display());
            }
            emit(&format!("wrote {} frames to {}\n", summary.written, out.display()));
            if !summary.failures.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Run { common, ingest } => {
            let cfg = load_config(&common)?;
            let source = ingest.map_or(Source::Synthetic, Source::Ingest);
            let report = run_experiment(&cfg, &source)?;
            emit(&report.summary_table());
            emit(&format!(
                "wrote {} per-sequence rows to {}\n",
                report.records.len(),
                cfg.output_dir.join(RESULTS_FILE).display()
            ));
        }
        Command::Report { out } => {
            let report = report_files(&out)?;
            emit(&report.summary_table());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("{THREADS_ENV}: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
