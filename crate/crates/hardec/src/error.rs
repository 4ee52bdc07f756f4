use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("stabilizer generators {0} and {1} do not commute")]
    NonCommutingGenerators(usize, usize),
    #[error("stabilizer group contains -I (generator mask {0:#b})")]
    MinusIdentity(u64),
    #[error("generators are dependent (symplectic rank {0} of {1})")]
    DependentGenerators(usize, usize),
    #[error("unknown code name: {0}")]
    UnknownCode(String),
    #[error("parameter {name} = {value} outside valid range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("Kraus set is not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),
    #[error("beta tables disagree between eta-product and symplectic forms (syndrome {syndrome}, element {element}, sigma {sigma})")]
    BetaInconsistency {
        syndrome: usize,
        element: usize,
        sigma: usize,
    },
    #[error("transversal closure exceeded bound {0}")]
    ClosureExceeded(usize),
    #[error("tie tuple count {0} exceeds cap {1}")]
    TieCapExceeded(usize, usize),
    #[error("empty error subset for biased decoder")]
    EmptyErrorSubset,
    #[error("code {0} cannot be concatenated")]
    NotConcatenable(String),
    #[error("dense oracle limited to n <= {limit}, got n = {n}")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("codespace projector has rank {0}, expected 2")]
    BadCodespaceRank(usize),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("code file parse error at line {line}: {reason}")]
    CodeParse { line: usize, reason: String },
    #[error("max_levels must be >= 1")]
    BadMaxLevels,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
