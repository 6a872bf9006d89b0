use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent row {row} is not an integer combination of the lattice basis")]
    NonIntegralSolve { row: usize },

    #[error("generators are numerically Z-dependent: {0}")]
    DegenerateGenerators(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertex status of spectrum point {index} is numerically ambiguous (separation margin {margin:e})")]
    NumericallyAmbiguous { index: usize, margin: f64 },

    #[error("unsupported rank {0}")]
    UnsupportedRank(usize),

    #[error("unsupported ambient dimension {0}")]
    UnsupportedDimension(usize),

    #[error("lattice-point bounding box holds {volume} points, above the cap of {cap}")]
    BoxTooLarge { volume: u128, cap: u128 },

    #[error("quadrature node hit the zero set of P (|P| = {modulus:e}) at y = {y:?}")]
    SingularSample { y: Vec<f64>, modulus: f64 },

    #[error("component order unresolved at x = {point:?}: gradient {gradient:?}, residual {residual:.3}")]
    OrderUnresolved {
        point: Vec<f64>,
        gradient: Vec<f64>,
        residual: f64,
    },

    #[error("scan box misses the component of Newton vertex order {order:?}")]
    BoxTooSmall { order: Vec<i64> },

    #[error("bound chain violated: {0}")]
    BoundChainViolated(String),

    #[error("invalid exponential sum: {0}")]
    InvalidSum(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with context layers peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable name of the innermost variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::NonIntegralSolve { .. } => "NonIntegralSolve",
            Error::DegenerateGenerators(_) => "DegenerateGenerators",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NumericallyAmbiguous { .. } => "NumericallyAmbiguous",
            Error::UnsupportedRank(_) => "UnsupportedRank",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::BoxTooLarge { .. } => "BoxTooLarge",
            Error::SingularSample { .. } => "SingularSample",
            Error::OrderUnresolved { .. } => "OrderUnresolved",
            Error::BoxTooSmall { .. } => "BoxTooSmall",
            Error::BoundChainViolated(_) => "BoundChainViolated",
            Error::InvalidSum(_) => "InvalidSum",
            Error::Overflow(_) => "Overflow",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "Io",
            Error::Context { .. } => unreachable!("root strips context"),
        }
    }
}
