use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building fields, roadmaps and plans.
#[derive(Debug, Error)]
pub enum Error {
    /// A flow or planner was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),

    /// A discretization would exceed the configured memory budget.
    #[error("grid of {requested} nodes exceeds the cap of {cap} nodes")]
    Resource { requested: usize, cap: usize },

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate edge: both endpoints are ({x}, {y})", x = .0.x, y = .0.y)]
    DegenerateEdge(crate::Vec2),

    /// Start/goal or other user input is unusable.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("free space too small: rejection sampling gave up after {attempts} attempts ({accepted} samples accepted)")]
    InfeasibleEnvironment { attempts: usize, accepted: usize },

    #[error("no path from start to goal ({0})")]
    NoPath(Box<NoPathDiagnostics>),

    /// Malformed scenario document. `pointer` is an RFC 6901 JSON pointer.
    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    /// Well-formed scenario document whose values violate an invariant.
    #[error("validation error at {pointer}: {message}")]
    Validation { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

/// Roadmap statistics attached to a failed plan.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoPathDiagnostics {
    pub nodes: usize,
    pub edges: usize,
    /// Nodes reachable from the start, including the start itself.
    pub reachable: usize,
    pub connection_radius: f64,
    pub seed: u64,
}

impl fmt::Display for NoPathDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} nodes reachable, {} edges, radius {:.3} m, seed {}",
            self.reachable, self.nodes, self.edges, self.connection_radius, self.seed
        )
    }
}
