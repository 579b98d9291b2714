use thiserror::Error;

/// Errors produced by the solvers, the mesh tooling and the sweep harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("interval length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("radial problems (N = {0}) require a Neumann condition at r = 0")]
    RadialWithoutNeumannCore(u32),

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(&'static str),

    #[error("non-finite eigenvalue estimate ({0})")]
    NonFinite(f64),

    #[error("unsupported input: {0}")]
    Unsupported(&'static str),

    #[error("characteristic equation requested for the zero regime")]
    UnsupportedRegime,

    #[error("no sign change found while scanning [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("point {0} lies outside the eigenfunction domain")]
    OutOfDomain(f64),

    #[error("shooting overflowed at r = {0}")]
    Overflow(f64),

    #[error("could not bracket the principal eigenvalue: {0}")]
    BracketFailure(String),

    #[error("discretization too coarse: {0} cells, need at least {1}")]
    TooCoarse(usize, usize),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error on line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("shift protocol exhausted without a definite pencil")]
    IndefiniteShift,

    #[error("not enough usable data points for a fit")]
    InsufficientData,

    #[error("rate fit failed: {0}")]
    FitFailure(String),

    #[error("config error on line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("cannot parse boundary condition `{0}` (expected D, N, R(beta) or a number)")]
    InvalidBoundary(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SpectraError {
    fn from(e: std::io::Error) -> Self {
        SpectraError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SpectraError>;
