use std::io;

use thiserror::Error;

use crate::solvers::SolveReport;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate directed edge {from} -> {to}")]
    DuplicateEdge { from: String, to: String },

    #[error("self-loop on node {node}")]
    SelfLoop { node: String },

    #[error("invalid volume {volume} on edge {from} -> {to}")]
    InvalidVolume { from: String, to: String, volume: f64 },

    #[error("invalid weight scale {0}")]
    InvalidScale(f64),

    #[error("unknown node label {0:?}")]
    UnknownNode(String),

    #[error("node {node}: GDP value {value} must be finite and strictly positive")]
    InvalidGdp { node: String, value: f64 },

    #[error("node index {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible constraints at node {node}: {reason}")]
    Infeasible { node: usize, reason: String },

    /// The maximum-likelihood point lies at infinity for the listed nodes.
    #[error("boundary divergence: nodes {nodes:?} require infinite fitness")]
    BoundaryDivergence { nodes: Vec<usize> },

    #[error(
        "solver did not converge after {} iterations (residual {:e})",
        report.iterations,
        report.residual
    )]
    NotConverged { report: Box<SolveReport> },

    #[error("series did not converge within {terms} terms (gamma {gamma}, ratio {ratio})")]
    SeriesDivergence { gamma: f64, ratio: f64, terms: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
