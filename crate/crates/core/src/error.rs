use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "invalid resolution {0}x{1}: both counts must be at least 8 (disc angular count even)"
    )]
    InvalidResolution(usize, usize),
    #[error("torus modulus must have positive imaginary part, got {0}")]
    InvalidModulus(String),
    #[error("disc radius must lie in (0,1), got {0}")]
    InvalidRadius(f64),
    #[error("invalid rectangle size {0}x{1}")]
    InvalidRectangle(f64, f64),
    #[error("field specification {spec} cannot be sampled on a {chart} chart")]
    IncompatibleSpec {
        spec: &'static str,
        chart: &'static str,
    },
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("Higgs field entry {entry} is not holomorphic (residual {residual:e})")]
    NonHolomorphicEntry { entry: String, residual: f64 },
    #[error("operation requires a {expected} bundle, got {found}")]
    WrongKind {
        expected: &'static str,
        found: String,
    },
    #[error("cyclic rank {rank} needs {expected} differentials, got {found}")]
    WrongDifferentialCount {
        rank: usize,
        expected: usize,
        found: usize,
    },
    #[error(
        "rank 4 cyclic data with both q3 and q4 nonzero has no diagonal harmonic metric ansatz"
    )]
    UnsupportedCoupling,
    #[error("symmetric power exponent must be odd and positive, got {0}")]
    EvenPower(usize),
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("input bundle is not polystable: {0}")]
    UnstableInput(String),
    #[error("Dirichlet boundary data: expected {expected} profiles, got {found}")]
    MissingBoundaryData { expected: usize, found: usize },
    #[error("harmonic metric is not converged")]
    NotConverged,
    #[error("bundle kind {0} has no real form")]
    NoRealForm(String),
    #[error("path point {0} lies outside the chart")]
    PathOutsideChart(String),
    #[error("operation is not available on a {0} chart")]
    UnsupportedChart(&'static str),
    #[error("section vanishes at node {0}")]
    SectionVanishes(usize),
    #[error("developing map requires a simply connected chart")]
    NotSimplyConnected,
    #[error("metric tensor is degenerate at {count} nodes")]
    DegenerateMetric { count: usize },
    #[error("section frame is degenerate at node {0}")]
    FrameDegenerate(usize),
    #[error("construction {construction} is incompatible with bundle kind {kind}")]
    IncompatibleConstruction { construction: String, kind: String },
    #[error("representative is not real: deviation {0:e}")]
    NonRealRepresentative(f64),
    #[error("no topology data for construction {0}")]
    UnsupportedConstruction(String),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("unknown construction {0:?}")]
    UnknownConstruction(String),
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
