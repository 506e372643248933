use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-manifold topology: macro edge ({0}, {1}) is shared by {2} elements")]
    NonManifoldTopology(usize, usize, usize),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("inadmissible labeling: {0}")]
    InadmissibleLabeling(String),

    #[error("element {0} is not a leaf of the current mesh")]
    UnknownElement(usize),

    #[error("bisection depth exceeds the dyadic coordinate resolution")]
    DepthExceeded,

    #[error("degenerate element {element}: {reason}")]
    DegenerateElement { element: usize, reason: String },

    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),

    #[error("unsupported polynomial degree {0} (expected 1, 2 or 3)")]
    UnsupportedPolynomialDegree(usize),

    #[error("singular Gram matrix in local L2 projection")]
    SingularGram,

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("incompatible load on a closed surface: relative mean component {0:.3e}")]
    IncompatibleLoad(f64),

    #[error("problem has no exact solution")]
    MissingExactSolution,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("insufficient data for a rate fit: {0}")]
    InsufficientData(String),

    #[error("{path}:{line}:{col}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("value out of range for `{key}`: {msg}")]
    Range { key: String, msg: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("at outer step k={k}, inner step j={j}: {source}")]
    AtStep {
        k: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn degenerate(element: usize, reason: impl Into<String>) -> Self {
        Error::DegenerateElement {
            element,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, k: usize, j: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                k,
                j,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through step context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
