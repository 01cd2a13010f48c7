//! Command-line front end: sweeps, spectral gaps, closed forms, smoothing
//! grids and amplification tables, all written as plot-ready CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use roughsampler::analytic::analytic_summary;
use roughsampler::experiments::{
    amplification_table, emit_amplification_csv, emit_json, read_records_csv, render_amplification,
    run_gap_study, run_sigma_sweep, run_smoothing, write_gap_csv, write_records_csv,
    write_smooth_csv, GapConfig, SmoothConfig, SweepConfig, SweepSummary,
};

#[derive(Parser)]
#[command(
    name = "roughsampler",
    version,
    about = "MCMC experiments on rough energy landscapes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a step-size sweep (TOML config, or the JSON summary of an earlier sweep).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Record CSV; overrides `output.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON summary with the full config; overrides `output.json`.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Amplification table CSV; overrides `output.amplification`.
        #[arg(long)]
        amplification: Option<PathBuf>,
    },
    /// Spectral gaps of discretized one-dimensional kernels.
    Gap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form constants as JSON.
    Analytic {
        #[arg(long)]
        out: PathBuf,
    },
    /// Local-entropy value and gradient along a grid.
    Smooth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplification table from a sweep CSV.
    Amplify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A file when a path is given, stdout otherwise.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep(
    config: &Path,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
    amp: Option<PathBuf>,
) -> Result<()> {
    let cfg = SweepConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let records = run_sigma_sweep(&cfg)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!(
            "roughsampler: {failed} of {} cells failed; see the JSON summary",
            records.len()
        );
    }
    let csv = csv.or_else(|| cfg.output.csv.clone());
    write_records_csv(&records, sink(csv.as_deref())?)?;
    if let Some(p) = json.or_else(|| cfg.output.json.clone()) {
        emit_json(&SweepSummary::new(&cfg, &records), &p)?;
    }
    if let Some(p) = amp.or_else(|| cfg.output.amplification.clone()) {
        let rows = amplification_table(&records)?;
        emit_amplification_csv(&rows, sink(Some(&p))?)?;
        eprint!("{}", render_amplification(&rows));
    }
    Ok(())
}

fn gap(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = GapConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let records = run_gap_study(&cfg)?;
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "roughsampler: {} eps={} sigma={}: {}",
            r.method,
            r.epsilon,
            r.sigma,
            r.error.as_deref().unwrap_or_default()
        );
    }
    let out = out.or_else(|| cfg.output.clone());
    write_gap_csv(&records, sink(out.as_deref())?)?;
    Ok(())
}

fn smooth(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg =
        SmoothConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let records = run_smoothing(&cfg)?;
    let out = out.or_else(|| cfg.output.clone());
    write_smooth_csv(&records, sink(out.as_deref())?)?;
    Ok(())
}

fn amplify(input: &Path, out: &Path) -> Result<()> {
    let file = File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let records = read_records_csv(file)?;
    let rows = amplification_table(&records)?;
    emit_amplification_csv(&rows, sink(Some(out))?)?;
    print!("{}", render_amplification(&rows));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            csv,
            json,
            amplification,
        } => sweep(&config, csv, json, amplification),
        Command::Gap { config, out } => gap(&config, out),
        Command::Analytic { out } => Ok(emit_json(&analytic_summary()?, &out)?),
        Command::Smooth { config, out } => smooth(&config, out),
        Command::Amplify { input, out } => amplify(&input, &out),
    }
}

/// The error chain joined by `: `, skipping causes already quoted by
/// their parent (library errors embed their source in the message).
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if last.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
        last = msg;
    }
    out
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roughsampler: error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}
