use thiserror::Error;

/// Failure modes shared by every module of the workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("table exhausted: index {index} requested from a table of length {len}")]
    TailUndefined { index: usize, len: usize },
    #[error("integer overflow while computing binomial({n}, {k})")]
    Overflow { n: u64, k: u64 },
    #[error("unsupported smooth function `{0}`")]
    UnsupportedFunction(String),
    #[error("bonsall monotone test requires a real sequence")]
    NotReal,
    #[error("matrix structure violated: {0}")]
    StructureViolation(String),
    #[error("vertex budget exceeded: {requested} > {limit}")]
    SizeLimit { requested: usize, limit: usize },
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("target radius {target} is smaller than twice the Cayley radius {radius}")]
    RadiusMismatch { radius: usize, target: usize },
    #[error("median property fails on triple ({0}, {1}, {2})")]
    NotMedian(usize, usize, usize),
    #[error("base ray too short: {0}")]
    RayTooShort(String),
    #[error("tail bound {bound:e} exceeds requested tolerance {tol:e}")]
    TailBoundExceeded { bound: f64, tol: f64 },
    #[error("SDP did not converge within {iterations} iterations; bracket [{lower}, {upper}]")]
    MaxIterExceeded { lower: f64, upper: f64, iterations: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("value at index {index} exceeds declared bound {bound}")]
    BoundViolated { index: usize, bound: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
