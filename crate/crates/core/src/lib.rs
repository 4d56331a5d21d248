//! Maximum-entropy ensembles of weighted undirected networks.
//!
//! The crate fits the binary configuration model (BCM), the enhanced
//! configuration model (ECM) and the two-step model (TS) to degree and
//! strength sequences, reduces the two-step model to three GDP-driven
//! parameters, computes observed and expected higher-order properties and
//! samples graphs from a fitted ensemble.
//!
//! ```
//! use gdpnet::{constraints, solve_bcm, Ensemble, SolverConfig, WeightedGraph};
//!
//! let g = WeightedGraph::unlabeled(5, [(0, 1, 3), (1, 2, 1), (2, 3, 2), (3, 4, 1), (4, 0, 5)])?;
//! let (fit, report) = solve_bcm(&constraints(&g), &SolverConfig::default())?;
//! assert!(report.converged);
//! assert!((fit.link_prob(0, 1) - 0.5).abs() < 1e-9);
//! # Ok::<(), gdpnet::Error>(())
//! ```

pub mod ensembles;
pub mod error;
pub mod gdp_fit;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod sampler;
pub mod solvers;

pub use ensembles::{
    compare_probs, Ensemble, ExpectedMetrics, ExpectedProperties, FitnessVectors, GdpModel,
    GravityBaseline, MacroParams, ModelKind, PairPrediction, ProbComparison, WeightLaw,
};
pub use error::{Error, Result};
pub use gdp_fit::{
    fit_a, fit_bc, fit_gdp_model, fit_sqrt_a_regression, gdp_fitness_vectors, FitnessSource,
    GdpFit, GdpFitResult,
};
pub use graph::{
    constraints, rescale_gdp, symmetrize, ConstraintSet, DirectedFlow, GdpVector, WeightedGraph,
};
pub use metrics::{property_table, NodeProperties, NodePropertyTable};
pub use sampler::{
    ensemble_statistics, sample_graph, EnsembleSampler, EnsembleStatistics, SampleConfig,
    SampledModel,
};
pub use solvers::{
    log_likelihood, solve_bcm, solve_ecm, solve_ts, Likelihood, SolveMode, SolveReport,
    SolverConfig,
};
