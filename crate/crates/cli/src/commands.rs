//! Subcommand implementations. Each reads the resolved manifest, loads the
//! inputs it needs and writes its artifacts into the output directory.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gdpnet::io::{
    align_gdp, read_fitness, read_flows, read_gdp, write_expected, write_fitness, write_graph,
    write_metrics, write_pairs,
};
use gdpnet::{
    constraints, ensemble_statistics, fit_gdp_model, gdp_fitness_vectors, log_likelihood,
    property_table, sample_graph, solve_bcm, solve_ecm, solve_ts, symmetrize, ConstraintSet,
    Ensemble, EnsembleSampler, ExpectedMetrics, ExpectedProperties, FitnessVectors, GdpModel,
    GdpVector, GravityBaseline, MacroParams, ModelKind, SampleConfig, SampledModel, SolveReport,
    WeightedGraph,
};
use serde::{Deserialize, Serialize};

use crate::manifest::{ModelChoice, RunManifest};
use crate::output::{ensure_dir, num, opt, write_json, write_with, Table};

/// Absolute or relative tolerance for reproduced constraints.
const CONSTRAINT_TOL: f64 = 1e-8;
const MOMENT_TOL: f64 = 1e-10;
const LINK_COUNT_TOL: f64 = 1e-9;
/// Sampled means may sit this many standard errors from the expectation.
const MONTE_CARLO_Z: f64 = 4.0;
const RECOVERY_TOL_A: f64 = 0.05;
const RECOVERY_TOL_B: f64 = 0.20;
const RECOVERY_TOL_C: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing {}; run `gdpnet {command}` first", path.display())]
    MissingArtifact { path: PathBuf, command: &'static str },
    #[error("{0}")]
    StaleArtifact(String),
    #[error("{0} requires a GDP file (pass --gdp or set \"gdp\" in the manifest)")]
    MissingGdp(&'static str),
    #[error("{failed} of {total} validation checks failed")]
    ValidationFailed { failed: usize, total: usize },
}

/// How an error is reported on exit.
pub struct Failure {
    pub exit_code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.exit_code,
                "message": self.message,
            }
        })
        .to_string()
    }
}

pub fn classify(err: &anyhow::Error) -> Failure {
    let (exit_code, kind) = err
        .chain()
        .find_map(|cause| {
            if let Some(e) = cause.downcast_ref::<CliError>() {
                return Some(match e {
                    CliError::ValidationFailed { .. } => (1, "validation"),
                    CliError::MissingArtifact { .. } | CliError::StaleArtifact(_) => (2, "state"),
                    CliError::MissingGdp(_) => (2, "input"),
                });
            }
            if let Some(e) = cause.downcast_ref::<gdpnet::Error>() {
                return Some(match e {
                    gdpnet::Error::NotConverged { .. } => (3, "not_converged"),
                    gdpnet::Error::BoundaryDivergence { .. } => (3, "boundary_divergence"),
                    gdpnet::Error::Domain(_) => (2, "domain"),
                    gdpnet::Error::Infeasible { .. } => (2, "infeasible"),
                    gdpnet::Error::Io(_) => (2, "io"),
                    _ => (2, "input"),
                });
            }
            cause.downcast_ref::<std::io::Error>().map(|_| (2, "io"))
        })
        .unwrap_or((2, "input"));
    Failure {
        exit_code,
        kind,
        message: format!("{err:#}"),
    }
}

struct Inputs {
    graph: WeightedGraph,
    gdp: Option<GdpVector>,
}

impl Inputs {
    fn gdp(&self, needed_by: &'static str) -> Result<&GdpVector> {
        Ok(self.gdp.as_ref().ok_or(CliError::MissingGdp(needed_by))?)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

/// Builds the undirected graph, with every GDP country present as a node,
/// and the GDP shares aligned to the graph's node order.
fn load_inputs(m: &RunManifest) -> Result<Inputs> {
    let edges = m.edges()?;
    let flows = read_flows(open(edges)?).with_context(|| format!("reading {}", edges.display()))?;
    let rows = match &m.gdp {
        Some(path) => {
            Some(read_gdp(open(path)?).with_context(|| format!("reading {}", path.display()))?)
        }
        None => None,
    };
    let extra: Vec<String> = rows
        .iter()
        .flatten()
        .map(|(country, _)| country.clone())
        .collect();
    let graph = symmetrize(&flows, m.scale, &extra)?;
    let gdp = match rows {
        Some(rows) => {
            let raw = align_gdp(&rows, graph.labels()).context("node without a GDP value")?;
            Some(gdpnet::graph::rescale_gdp_labeled(&raw, Some(graph.labels()))?)
        }
        None => None,
    };
    Ok(Inputs { graph, gdp })
}

fn fitness_path(dir: &Path, model: &str) -> PathBuf {
    dir.join(format!("fitness_{model}.csv"))
}

fn gdp_fit_path(dir: &Path) -> PathBuf {
    dir.join("gdp_fit.json")
}

/// Reads `fitness_<model>.csv` if present, checking it against the graph.
fn load_fitness(dir: &Path, kind: ModelKind, graph: &WeightedGraph) -> Result<Option<FitnessVectors>> {
    let path = fitness_path(dir, kind.name());
    if !path.exists() {
        return Ok(None);
    }
    let (labels, fit) =
        read_fitness(open(&path)?).with_context(|| format!("reading {}", path.display()))?;
    if fit.kind() != kind {
        return Err(CliError::StaleArtifact(format!(
            "{} holds {} vectors",
            path.display(),
            fit.kind().name()
        ))
        .into());
    }
    if labels != graph.labels() {
        return Err(CliError::StaleArtifact(format!(
            "{} was fitted on different nodes; rerun `gdpnet fit`",
            path.display()
        ))
        .into());
    }
    Ok(Some(fit))
}

fn require_fitness(dir: &Path, kind: ModelKind, graph: &WeightedGraph) -> Result<FitnessVectors> {
    load_fitness(dir, kind, graph)?.ok_or_else(|| {
        CliError::MissingArtifact {
            path: fitness_path(dir, kind.name()),
            command: "fit",
        }
        .into()
    })
}

#[derive(Deserialize)]
struct StoredParams {
    a: f64,
    b: f64,
    c: f64,
}

fn load_gdp_params(dir: &Path) -> Result<Option<MacroParams>> {
    let path = gdp_fit_path(dir);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let p: StoredParams =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(MacroParams::new(p.a, p.b, p.c)?))
}

fn require_gdp_params(dir: &Path) -> Result<MacroParams> {
    load_gdp_params(dir)?.ok_or_else(|| {
        CliError::MissingArtifact {
            path: gdp_fit_path(dir),
            command: "fit --models gdp_ts",
        }
        .into()
    })
}

#[derive(Serialize)]
struct FitSummary<'a> {
    nodes: usize,
    links: u64,
    total_strength: u64,
    isolated_nodes: Vec<&'a str>,
    models: Vec<&'static str>,
    reports: Vec<SolveReport>,
    warnings: Vec<String>,
}

pub fn fit(m: &RunManifest) -> Result<()> {
    let inputs = load_inputs(m)?;
    if m.wants(ModelChoice::GdpTs) {
        inputs.gdp("the gdp_ts model")?;
    }
    let g = &inputs.graph;
    let c = constraints(g);
    let dir = &m.output_dir;
    ensure_dir(dir)?;

    let isolated: Vec<&str> = (0..g.n()).filter(|&i| g.degree(i) == 0).map(|i| g.label(i)).collect();
    let mut warnings = Vec::new();
    if c.links() == 0 {
        warnings.push("edge file has no links; every fitted value is zero".to_owned());
    } else if !isolated.is_empty() {
        warnings.push(format!("{} isolated nodes have zero fitness", isolated.len()));
    }

    let mut reports = Vec::new();
    for &model in &m.models {
        let (fitted, report) = match model {
            ModelChoice::Bcm => solve_bcm(&c, &m.solver)?,
            ModelChoice::Ecm => solve_ecm(&c, &m.solver)?,
            ModelChoice::Ts => {
                let (fitted, mut report) = solve_ts(&c, &m.solver)?;
                report.log_likelihood = Some(log_likelihood(&fitted, g)?.value);
                (fitted, report)
            }
            ModelChoice::GdpTs => continue,
        };
        write_with(&fitness_path(dir, model.name()), |w| write_fitness(w, g.labels(), &fitted))?;
        write_json(&dir.join(format!("report_{}.json", model.name())), &report)?;
        reports.push(report);
    }

    if m.wants(ModelChoice::GdpTs) {
        if c.links() == 0 {
            warnings.push("gdp_ts skipped: no links to fit".to_owned());
        } else {
            let gdp = inputs.gdp("the gdp_ts model")?;
            let fitted = fit_gdp_model(&c, gdp, &m.solver, m.fitness_source)?;
            if !fitted.result.total_strength_gap.is_finite() {
                warnings.push("gdp_ts total strength gap is not finite".to_owned());
            }
            let vectors = gdp_fitness_vectors(&fitted.model.params, gdp);
            write_with(&fitness_path(dir, ModelChoice::GdpTs.name()), |w| {
                write_fitness(w, g.labels(), &vectors)
            })?;
            write_json(&gdp_fit_path(dir), &fitted.result)?;
        }
    }

    write_with(&dir.join("graph.csv"), |w| write_graph(w, g))?;
    write_json(&dir.join("run_manifest.json"), m)?;
    let summary = FitSummary {
        nodes: g.n(),
        links: c.links(),
        total_strength: c.total_strength(),
        isolated_nodes: isolated,
        models: m.models.iter().map(|model| model.name()).collect(),
        reports,
        warnings,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

pub fn metrics(m: &RunManifest) -> Result<()> {
    let inputs = load_inputs(m)?;
    ensure_dir(&m.output_dir)?;
    let table = property_table(&inputs.graph);
    write_with(&m.output_dir.join("metrics_observed.csv"), |w| {
        write_metrics(w, &table.labels, &table.rows)
    })
}

fn write_model_tables<M: Ensemble + ?Sized>(
    dir: &Path,
    labels: &[String],
    model: &M,
) -> Result<Vec<ExpectedProperties>> {
    let rows = ExpectedMetrics::new(model)?.table();
    write_with(&dir.join(format!("expected_{}.csv", model.name())), |w| {
        write_expected(w, model.name(), labels, &rows)
    })?;
    write_with(&dir.join(format!("pairs_{}.csv", model.name())), |w| {
        write_pairs(w, labels, model)
    })?;
    Ok(rows)
}

pub fn figdata(m: &RunManifest) -> Result<()> {
    let inputs = load_inputs(m)?;
    let g = &inputs.graph;
    let labels = g.labels();
    let dir = &m.output_dir;
    let bcm = require_fitness(dir, ModelKind::Bcm, g)?;
    let ecm = require_fitness(dir, ModelKind::Ecm, g)?;
    let ts = load_fitness(dir, ModelKind::Ts, g)?;
    ensure_dir(dir)?;

    let observed = property_table(g);
    write_with(&dir.join("metrics_observed.csv"), |w| {
        write_metrics(w, labels, &observed.rows)
    })?;
    let exp_bcm = write_model_tables(dir, labels, &bcm)?;
    let exp_ecm = write_model_tables(dir, labels, &ecm)?;
    if let Some(ts) = &ts {
        write_model_tables(dir, labels, ts)?;
    }

    let mut fig1 = Table::new(["node", "k", "annd_obs", "annd_bcm", "clustering_obs", "clustering_bcm"]);
    for (i, (o, e)) in observed.rows.iter().zip(&exp_bcm).enumerate() {
        fig1.push(vec![
            labels[i].clone(),
            o.k.to_string(),
            opt(o.annd),
            opt(e.annd),
            opt(o.clustering),
            opt(e.clustering),
        ]);
    }
    fig1.write(&dir.join("fig1.csv"))?;

    let mut fig3 = Table::new([
        "node",
        "k",
        "s",
        "annd_obs",
        "annd_ecm",
        "clustering_obs",
        "clustering_ecm",
        "anns_obs",
        "anns_ecm",
        "wclustering_obs",
        "wclustering_ecm",
    ]);
    for (i, (o, e)) in observed.rows.iter().zip(&exp_ecm).enumerate() {
        fig3.push(vec![
            labels[i].clone(),
            o.k.to_string(),
            o.s.to_string(),
            opt(o.annd),
            opt(e.annd),
            opt(o.clustering),
            opt(e.clustering),
            opt(o.anns),
            opt(e.anns),
            opt(o.wclustering),
            opt(e.wclustering),
        ]);
    }
    fig3.write(&dir.join("fig3.csv"))?;

    let mut fig5 = Table::new(["i", "j", "p_ecm", "p_bcm"]);
    for i in 0..g.n() {
        for j in (i + 1)..g.n() {
            fig5.push(vec![
                labels[i].clone(),
                labels[j].clone(),
                num(ecm.link_prob(i, j)),
                num(bcm.link_prob(i, j)),
            ]);
        }
    }
    fig5.write(&dir.join("fig5.csv"))?;

    let Some(gdp) = &inputs.gdp else {
        return Ok(());
    };
    let x_ecm = ecm.ecm_x().unwrap_or_default();
    let mut scatter = Table::new(["node", "gdp", "z_bcm", "x_ecm", "y_ecm", "z_ts", "y_ts"]);
    for i in 0..g.n() {
        scatter.push(vec![
            labels[i].clone(),
            num(gdp.get(i)),
            num(bcm.link_fitness()[i]),
            opt(x_ecm[i]),
            opt(ecm.y().map(|y| y[i])),
            opt(ts.as_ref().map(|t| t.link_fitness()[i])),
            opt(ts.as_ref().and_then(|t| t.y()).map(|y| y[i])),
        ]);
    }
    scatter.write(&dir.join("fitness_vs_gdp.csv"))?;

    let params = if m.wants(ModelChoice::GdpTs) {
        require_gdp_params(dir)?
    } else {
        match load_gdp_params(dir)? {
            Some(p) => p,
            None => return Ok(()),
        }
    };
    let gdp_ts = GdpModel::new(params, gdp.clone());
    let wcm = GravityBaseline {
        gdp: gdp.clone(),
        total_strength: constraints(g).total_strength() as f64,
    };
    let exp_gdp = write_model_tables(dir, labels, &gdp_ts)?;
    let exp_wcm = write_model_tables(dir, labels, &wcm)?;

    let mut header = vec!["node".to_owned(), "k".to_owned(), "s".to_owned()];
    for metric in ["annd", "clustering", "anns", "wclustering"] {
        for source in ["obs", "gdp_ts", "wcm"] {
            header.push(format!("{metric}_{source}"));
        }
    }
    let mut fig6 = Table::new(header);
    for i in 0..g.n() {
        let (o, t, w) = (&observed.rows[i], &exp_gdp[i], &exp_wcm[i]);
        fig6.push(vec![
            labels[i].clone(),
            o.k.to_string(),
            o.s.to_string(),
            opt(o.annd),
            opt(t.annd),
            opt(w.annd),
            opt(o.clustering),
            opt(t.clustering),
            opt(w.clustering),
            opt(o.anns),
            opt(t.anns),
            opt(w.anns),
            opt(o.wclustering),
            opt(t.wclustering),
            opt(w.wclustering),
        ]);
    }
    fig6.write(&dir.join("fig6.csv"))
}

fn sampled_kind(model: SampledModel) -> ModelKind {
    match model {
        SampledModel::Ecm => ModelKind::Ecm,
        SampledModel::Ts | SampledModel::GdpTs => ModelKind::Ts,
    }
}

fn sampled_ensemble(
    m: &RunManifest,
    inputs: &Inputs,
    model: SampledModel,
) -> Result<Box<dyn Ensemble>> {
    Ok(match model {
        SampledModel::GdpTs => {
            let gdp = inputs.gdp("sampling gdp_ts")?;
            Box::new(GdpModel::new(require_gdp_params(&m.output_dir)?, gdp.clone()))
        }
        other => Box::new(require_fitness(&m.output_dir, sampled_kind(other), &inputs.graph)?),
    })
}

pub fn sample(m: &RunManifest) -> Result<()> {
    let inputs = load_inputs(m)?;
    let labels = inputs.graph.labels().to_vec();
    let model = sampled_ensemble(m, &inputs, m.sample_model)?;
    let cfg = SampleConfig {
        seed: m.seed,
        n_samples: m.n_samples,
        model: m.sample_model,
    };
    let samples_dir = m.output_dir.join("samples");
    ensure_dir(&samples_dir)?;
    for entry in std::fs::read_dir(&samples_dir)? {
        let path = entry?.path();
        let stale = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("sample_") && n.ends_with(".csv"));
        if stale {
            std::fs::remove_file(&path)?;
        }
    }
    let mut sampler = EnsembleSampler::new(&*model, &cfg)?.with_labels(labels.clone())?;
    for idx in 0..cfg.n_samples {
        let graph = sampler.draw();
        write_with(&samples_dir.join(format!("sample_{idx:05}.csv")), |w| {
            write_graph(w, &graph)
        })?;
    }

    let stats = ensemble_statistics(&*model, &cfg)?;
    let expected = ExpectedMetrics::new(&*model)?;
    let mut table = Table::new([
        "node",
        "expected_k",
        "mean_k",
        "var_k",
        "expected_s",
        "mean_s",
        "var_s",
        "annd",
        "clustering",
        "anns",
        "wclustering",
    ]);
    for (i, s) in stats.nodes.iter().enumerate() {
        table.push(vec![
            labels[i].clone(),
            num(expected.degree(i)),
            num(s.mean_k),
            num(s.var_k),
            num(expected.strength(i)),
            num(s.mean_s),
            num(s.var_s),
            opt(s.annd.mean),
            opt(s.clustering.mean),
            opt(s.anns.mean),
            opt(s.wclustering.mean),
        ]);
    }
    table.write(&m.output_dir.join("sample_stats.csv"))
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

impl Check {
    fn at_most(name: String, value: f64, threshold: f64) -> Self {
        Self {
            name,
            passed: value <= threshold,
            value,
            threshold,
            detail: None,
        }
    }

    fn failed(name: String, threshold: f64, detail: String) -> Self {
        Self {
            name,
            passed: false,
            value: f64::NAN,
            threshold,
            detail: Some(detail),
        }
    }
}

#[derive(Serialize)]
struct Validation {
    passed: bool,
    checks: Vec<Check>,
}

fn constraint_check(model: &dyn Ensemble, expected: &ExpectedMetrics, c: &ConstraintSet) -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..c.n() {
        let k = c.degrees()[i] as f64;
        worst = worst.max((expected.degree(i) - k).abs() / k.max(1.0));
        if model.is_weighted() {
            let s = c.strengths()[i] as f64;
            worst = worst.max((expected.strength(i) - s).abs() / s.max(1.0));
        }
    }
    Check::at_most(format!("constraints_{}", model.name()), worst, CONSTRAINT_TOL)
}

fn moment_check(model: &dyn Ensemble) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for i in 0..model.n() {
        for j in (i + 1)..model.n() {
            let pair = model.pair(i, j);
            let zeroth = model.weight_moment(i, j, 0.0)?;
            let first = model.weight_moment(i, j, 1.0)?;
            worst = worst
                .max((zeroth - pair.p).abs())
                .max((first - pair.expected_w).abs() / pair.expected_w.max(1.0));
        }
    }
    Ok(Check::at_most(format!("moments_{}", model.name()), worst, MOMENT_TOL))
}

/// Largest z-score of the sampled mean degree and strength against the
/// analytic mean, with the analytic variance.
fn monte_carlo_check(model: &dyn Ensemble, sampled: SampledModel, m: &RunManifest) -> Result<Check> {
    let cfg = SampleConfig {
        seed: m.seed,
        n_samples: m.n_samples,
        model: sampled,
    };
    let stats = ensemble_statistics(model, &cfg)?;
    let n = model.n();
    let trials = cfg.n_samples as f64;
    let mut worst: f64 = 0.0;
    for (i, node) in stats.nodes.iter().enumerate() {
        let (mut mean_k, mut var_k, mut mean_s, mut var_s) = (0.0, 0.0, 0.0, 0.0);
        for j in (0..n).filter(|&j| j != i) {
            let pair = model.pair(i, j);
            let second = model.weight_moment(i, j, 2.0)?;
            mean_k += pair.p;
            var_k += pair.p * (1.0 - pair.p);
            mean_s += pair.expected_w;
            var_s += second - pair.expected_w * pair.expected_w;
        }
        for (sampled_mean, mean, var) in [(node.mean_k, mean_k, var_k), (node.mean_s, mean_s, var_s)] {
            let gap = (sampled_mean - mean).abs();
            let z = if var > 0.0 {
                gap / (var / trials).sqrt()
            } else if gap <= 1e-12 * mean.max(1.0) {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    let mut check = Check::at_most(format!("monte_carlo_{}", model.name()), worst, MONTE_CARLO_Z);
    check.detail = Some(format!("{} samples, seed {}", cfg.n_samples, cfg.seed));
    Ok(check)
}

fn planted_checks(planted: MacroParams, gdp: &GdpVector, m: &RunManifest) -> Vec<Check> {
    let names = ["planted_a", "planted_b", "planted_c"];
    let tols = [RECOVERY_TOL_A, RECOVERY_TOL_B, RECOVERY_TOL_C];
    let cfg = SampleConfig {
        seed: m.seed,
        n_samples: 1,
        model: SampledModel::GdpTs,
    };
    let recovered = sample_graph(&GdpModel::new(planted, gdp.clone()), &cfg)
        .and_then(|g| fit_gdp_model(&constraints(&g), gdp, &m.solver, m.fitness_source));
    match recovered {
        Ok(fit) => {
            let got = [fit.result.a, fit.result.b, fit.result.c];
            let want = [planted.a, planted.b, planted.c];
            (0..3)
                .map(|k| {
                    let rel = (got[k] - want[k]).abs() / want[k].abs().max(f64::MIN_POSITIVE);
                    let mut check = Check::at_most(names[k].to_owned(), rel, tols[k]);
                    check.detail = Some(format!("planted {}, recovered {}", want[k], got[k]));
                    check
                })
                .collect()
        }
        Err(e) => (0..3)
            .map(|k| Check::failed(names[k].to_owned(), tols[k], e.to_string()))
            .collect(),
    }
}

pub fn validate(m: &RunManifest) -> Result<()> {
    let inputs = load_inputs(m)?;
    let g = &inputs.graph;
    let c = constraints(g);
    let dir = &m.output_dir;
    let mut checks = Vec::new();

    for (kind, sampled) in [
        (ModelKind::Bcm, None),
        (ModelKind::Ecm, Some(SampledModel::Ecm)),
        (ModelKind::Ts, Some(SampledModel::Ts)),
    ] {
        let Some(fit) = load_fitness(dir, kind, g)? else {
            continue;
        };
        let expected = ExpectedMetrics::new(&fit)?;
        checks.push(constraint_check(&fit, &expected, &c));
        checks.push(moment_check(&fit)?);
        if let Some(sampled) = sampled {
            checks.push(monte_carlo_check(&fit, sampled, m)?);
        }
    }

    if let Some(params) = load_gdp_params(dir)? {
        let gdp = inputs.gdp("validating gdp_ts")?;
        let model = GdpModel::new(params, gdp.clone());
        let expected_links: f64 = (0..model.n())
            .flat_map(|i| ((i + 1)..model.n()).map(move |j| (i, j)))
            .map(|(i, j)| model.link_prob(i, j))
            .sum();
        let links = c.links() as f64;
        checks.push(Check::at_most(
            "link_count_gdp_ts".to_owned(),
            (expected_links - links).abs() / links.max(1.0),
            LINK_COUNT_TOL,
        ));
        checks.push(moment_check(&model)?);
    }

    if let Some(planted) = m.planted {
        let gdp = inputs.gdp("the planted recovery check")?;
        checks.extend(planted_checks(planted, gdp, m));
    }

    if checks.is_empty() {
        return Err(CliError::MissingArtifact {
            path: fitness_path(dir, "*"),
            command: "fit",
        }
        .into());
    }
    ensure_dir(dir)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let total = checks.len();
    write_json(
        &dir.join("validation.json"),
        &Validation {
            passed: failed == 0,
            checks,
        },
    )?;
    if failed > 0 {
        return Err(CliError::ValidationFailed { failed, total }.into());
    }
    Ok(())
}
