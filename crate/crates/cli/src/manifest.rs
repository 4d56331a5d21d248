//! Run manifest: a JSON file whose fields can each be overridden by flags.
//!
//! ```json
//! {
//!   "edges": "flows.csv",
//!   "gdp": "gdp.csv",
//!   "scale": 1.0,
//!   "solver": { "tol": 1e-10, "max_iter": 100000, "damping": 1.0, "mode": "newton" },
//!   "models": ["bcm", "ecm", "ts", "gdp_ts"],
//!   "fitness_source": "ts",
//!   "output_dir": "out",
//!   "seed": 7,
//!   "n_samples": 100,
//!   "sample_model": "ts",
//!   "planted": { "a": 50.0, "b": 20.0, "c": 0.8 }
//! }
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Every field
//! is optional in the file; `edges` must come from the file or a flag.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gdpnet::{FitnessSource, MacroParams, SampledModel, SolveMode, SolverConfig};
use serde::{Deserialize, Serialize};

pub const OUTPUT_DIR_ENV: &str = "GDPNET_OUTPUT_DIR";
const FALLBACK_OUTPUT_DIR: &str = "gdpnet-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Bcm,
    Ecm,
    Ts,
    GdpTs,
}

impl ModelChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Bcm => "bcm",
            ModelChoice::Ecm => "ecm",
            ModelChoice::Ts => "ts",
            ModelChoice::GdpTs => "gdp_ts",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "bcm" => ModelChoice::Bcm,
            "ecm" => ModelChoice::Ecm,
            "ts" => ModelChoice::Ts,
            "gdp_ts" => ModelChoice::GdpTs,
            other => bail!("unknown model {other:?} (expected bcm, ecm, ts or gdp_ts)"),
        })
    }
}

/// Manifest as written on disk.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub edges: Option<PathBuf>,
    pub gdp: Option<PathBuf>,
    pub scale: Option<f64>,
    pub solver: Option<SolverConfig>,
    pub models: Option<Vec<ModelChoice>>,
    pub fitness_source: Option<FitnessSource>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub sample_model: Option<SampledModel>,
    pub planted: Option<MacroParams>,
}

impl ManifestFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let mut file: ManifestFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.edges, &mut file.gdp, &mut file.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Flag values; `None` leaves the manifest value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub edges: Option<PathBuf>,
    pub gdp: Option<PathBuf>,
    pub scale: Option<f64>,
    pub models: Option<Vec<ModelChoice>>,
    pub fitness_source: Option<FitnessSource>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub sample_model: Option<SampledModel>,
    pub planted: Option<MacroParams>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub mode: Option<SolveMode>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub edges: Option<PathBuf>,
    pub gdp: Option<PathBuf>,
    pub scale: f64,
    pub solver: SolverConfig,
    pub models: Vec<ModelChoice>,
    pub fitness_source: FitnessSource,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub n_samples: usize,
    pub sample_model: SampledModel,
    pub planted: Option<MacroParams>,
}

impl RunManifest {
    /// Precedence: flags, then the manifest file, then the environment
    /// (output directory only), then built-in defaults.
    pub fn resolve(file: ManifestFile, flags: Overrides, env_output: Option<PathBuf>) -> Result<Self> {
        let mut solver = file.solver.unwrap_or_default();
        if let Some(v) = flags.tol {
            solver.tol = v;
        }
        if let Some(v) = flags.max_iter {
            solver.max_iter = v;
        }
        if let Some(v) = flags.damping {
            solver.damping = v;
        }
        if let Some(v) = flags.mode {
            solver.mode = v;
        }
        solver.validate()?;

        let mut models = flags
            .models
            .or(file.models)
            .unwrap_or_else(|| vec![ModelChoice::Bcm, ModelChoice::Ecm, ModelChoice::Ts]);
        models.sort();
        models.dedup();

        let manifest = Self {
            edges: flags.edges.or(file.edges),
            gdp: flags.gdp.or(file.gdp),
            scale: flags.scale.or(file.scale).unwrap_or(1.0),
            solver,
            models,
            fitness_source: flags.fitness_source.or(file.fitness_source).unwrap_or_default(),
            output_dir: flags
                .output_dir
                .or(file.output_dir)
                .or(env_output)
                .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR)),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            n_samples: flags.n_samples.or(file.n_samples).unwrap_or(100),
            sample_model: flags
                .sample_model
                .or(file.sample_model)
                .unwrap_or(SampledModel::Ts),
            planted: flags.planted.or(file.planted),
        };
        if !(manifest.scale.is_finite() && manifest.scale > 0.0) {
            bail!("scale must be finite and > 0, got {}", manifest.scale);
        }
        if let Some(p) = manifest.planted {
            MacroParams::new(p.a, p.b, p.c).context("planted parameters")?;
        }
        if manifest.n_samples == 0 {
            bail!("n_samples must be >= 1");
        }
        Ok(manifest)
    }

    pub fn edges(&self) -> Result<&Path> {
        match &self.edges {
            Some(p) => Ok(p),
            None => bail!("no edge file given (set \"edges\" in the manifest or pass --edges)"),
        }
    }

    pub fn wants(&self, model: ModelChoice) -> bool {
        self.models.contains(&model)
    }
}
