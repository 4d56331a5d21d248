//! `gdpnet`: fit, compare and sample maximum-entropy trade-network ensembles.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input or state error,
//! 3 solver non-convergence or boundary divergence. Errors are reported on
//! stderr as a single JSON object.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use gdpnet::{FitnessSource, MacroParams, SampledModel, SolveMode};

use manifest::{ManifestFile, ModelChoice, Overrides, RunManifest, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "gdpnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the selected models and write fitted vectors and reports.
    Fit(RunArgs),
    /// Write observed node metrics.
    Metrics(RunArgs),
    /// Write figure tables and expected-property tables from a previous fit.
    Figdata(RunArgs),
    /// Draw graphs from a fitted ensemble and summarize them.
    Sample(RunArgs),
    /// Check fitted artifacts: residuals, moments, Monte Carlo agreement.
    Validate(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON run manifest; flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Directed flows as `source,target,volume`.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// GDP table as `country,gdp`.
    #[arg(long)]
    gdp: Option<PathBuf>,
    /// Multiplier applied to volumes before rounding to integer weights.
    #[arg(long)]
    scale: Option<f64>,
    /// Comma-separated list from bcm, ecm, ts, gdp_ts.
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    models: Option<Vec<ModelChoice>>,
    /// Model whose fitted vectors feed the GDP regressions: ts or ecm.
    #[arg(long, value_parser = parse_source)]
    source: Option<FitnessSource>,
    /// Output directory (otherwise the manifest, then $GDPNET_OUTPUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled graphs.
    #[arg(long)]
    samples: Option<usize>,
    /// Sampled model: ecm, ts or gdp_ts.
    #[arg(long, value_parser = parse_sampled)]
    sample_model: Option<SampledModel>,
    /// Planted macro parameters `a,b,c` for the recovery check.
    #[arg(long, value_parser = parse_planted)]
    planted: Option<MacroParams>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
    /// newton or fixed_point.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SolveMode>,
}

fn parse_model(s: &str) -> Result<ModelChoice> {
    ModelChoice::parse(s)
}

fn parse_source(s: &str) -> Result<FitnessSource> {
    match s {
        "ts" => Ok(FitnessSource::Ts),
        "ecm" => Ok(FitnessSource::Ecm),
        other => Err(anyhow!("unknown fitness source {other:?} (expected ts or ecm)")),
    }
}

fn parse_sampled(s: &str) -> Result<SampledModel> {
    match s {
        "ecm" => Ok(SampledModel::Ecm),
        "ts" => Ok(SampledModel::Ts),
        "gdp_ts" => Ok(SampledModel::GdpTs),
        other => Err(anyhow!("unknown sampled model {other:?} (expected ecm, ts or gdp_ts)")),
    }
}

fn parse_mode(s: &str) -> Result<SolveMode> {
    match s {
        "newton" => Ok(SolveMode::Newton),
        "fixed_point" | "fixed-point" => Ok(SolveMode::FixedPoint),
        other => Err(anyhow!("unknown mode {other:?} (expected newton or fixed_point)")),
    }
}

fn parse_planted(s: &str) -> Result<MacroParams> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("planted parameters must be three numbers a,b,c: {e}"))?;
    match parts.as_slice() {
        &[a, b, c] => Ok(MacroParams::new(a, b, c)?),
        _ => Err(anyhow!("planted parameters must be three numbers a,b,c")),
    }
}

impl RunArgs {
    fn resolve(self) -> Result<RunManifest> {
        let file = match &self.manifest {
            Some(path) => ManifestFile::load(path)?,
            None => ManifestFile::default(),
        };
        let flags = Overrides {
            edges: self.edges,
            gdp: self.gdp,
            scale: self.scale,
            models: self.models,
            fitness_source: self.source,
            output_dir: self.out,
            seed: self.seed,
            n_samples: self.samples,
            sample_model: self.sample_model,
            planted: self.planted,
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            mode: self.mode,
        };
        let env_output = std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        RunManifest::resolve(file, flags, env_output)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => commands::fit(&args.resolve()?),
        Command::Metrics(args) => commands::metrics(&args.resolve()?),
        Command::Figdata(args) => commands::figdata(&args.resolve()?),
        Command::Sample(args) => commands::sample(&args.resolve()?),
        Command::Validate(args) => commands::validate(&args.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let failure = commands::classify(&err);
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code)
        }
    }
}
