use thiserror::Error;

/// Errors raised by graph construction, model conversions, inference and the
/// learnability tests.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameter `{param}`: {reason}")]
    GraphDimension { param: &'static str, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("local polytope violated at {location}: {constraint} (value {value:.3e})")]
    PolytopeViolation {
        location: String,
        constraint: &'static str,
        value: f64,
    },

    #[error("marginal on the polytope boundary at {location}: entry {value:.3e} is below {threshold:.0e}")]
    BoundaryMarginal {
        location: String,
        value: f64,
        threshold: f64,
    },

    #[error("non-finite parameter at {0}")]
    NonFinite(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no converged belief propagation fixed point in {runs} runs (smallest residual {best_residual:.3e}); try raising the damping")]
    NoFixedPoint { runs: usize, best_residual: f64 },

    #[error("power iteration did not converge after {0} steps")]
    PowerIteration(usize),

    #[error("exact inference limited to {max} nodes, got {nodes}")]
    TooLarge { nodes: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("belief propagation failed at ascent iteration {iteration}: {source}")]
    Ascent {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
