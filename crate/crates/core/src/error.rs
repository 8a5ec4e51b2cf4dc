use thiserror::Error;

/// Every failure the library can report. Residual-carrying variants record
/// the offending residual so callers can print it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("algebra must have at least one block")]
    EmptyBlocks,
    #[error("block sizes must be positive")]
    NonpositiveBlock,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("map is not a *-homomorphism (residual {residual:.3e})")]
    NotHomomorphism { residual: f64 },

    #[error("inner product is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("inner product is degenerate (rank {rank} < {dim})")]
    Degenerate { rank: usize, dim: usize },
    #[error("action and inner product are incompatible (residual {residual:.3e})")]
    NotLinear { residual: f64 },
    #[error("map is not adjointable (residual {residual:.3e})")]
    NotAdjointable { residual: f64 },
    #[error("modules live over different base algebras")]
    BaseMismatch,
    #[error("map is not a module map (residual {residual:.3e})")]
    NotModuleMap { residual: f64 },

    #[error("left action is not by adjointable module maps (residual {residual:.3e})")]
    NotAdjointableAction { residual: f64 },
    #[error("left action is degenerate (rank {rank} < {dim})")]
    DegenerateAction { rank: usize, dim: usize },
    #[error("left action does not respect the involution (residual {residual:.3e})")]
    NotStarAction { residual: f64 },
    #[error("map is not well defined on the quotient (residual {residual:.3e})")]
    NotWellDefined { residual: f64 },

    #[error("conjugate-linear map is not bijective")]
    NotBijective,
    #[error("bimodule twist violated (residual {residual:.3e})")]
    TwistViolation { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("map is not invertible")]
    NotInvertible,

    #[error("expectation is not an A-bimodule map (residual {residual:.3e})")]
    NotBimodule { residual: f64 },
    #[error("expectation is not completely positive (Choi min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },
    #[error("C is not nondegenerate over the range of the expectation (rank {rank} < {dim})")]
    NotNondegenerate { rank: usize, dim: usize },
    #[error("index element is not central (residual {residual:.3e})")]
    NotCentral { residual: f64 },
    #[error("index element is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveIndex { min_eigenvalue: f64 },
    #[error("no quasi-basis exists (identity residual {residual:.3e})")]
    NoQuasiBasis { residual: f64 },

    #[error("expectation is degenerate: <c|c> vanishes on a nonzero witness")]
    DegenerateEps { witness: Vec<[f64; 2]> },
    #[error("norm estimate violated at level {level} (ratio {ratio})")]
    EstimateViolated { level: usize, ratio: f64 },
    #[error("block decomposition failed: {0}")]
    Decomposition(String),

    #[error("correspondence is not a Morita equivalence: {0}")]
    NotMorita(String),
    #[error("map is not unitary (residual {residual})")]
    NotUnitary { residual: f64 },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("not a Frobenius isomorphism: {0}")]
    NotFrobeniusIso(String),

    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("subset is not a subgroup")]
    NotSubgroup,
    #[error("random instance generation exhausted {0} retries")]
    RetriesExhausted(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable short name used in reports and the negative test suite.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyBlocks => "EmptyBlocks",
            Error::NonpositiveBlock => "NonpositiveBlock",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NotHomomorphism { .. } => "NotHomomorphism",
            Error::NotPositive { .. } => "NotPositive",
            Error::Degenerate { .. } => "Degenerate",
            Error::NotLinear { .. } => "NotLinear",
            Error::NotAdjointable { .. } => "NotAdjointable",
            Error::BaseMismatch => "BaseMismatch",
            Error::NotModuleMap { .. } => "NotModuleMap",
            Error::NotAdjointableAction { .. } => "NotAdjointableAction",
            Error::DegenerateAction { .. } => "DegenerateAction",
            Error::NotStarAction { .. } => "NotStarAction",
            Error::NotWellDefined { .. } => "NotWellDefined",
            Error::NotBijective => "NotBijective",
            Error::TwistViolation { .. } => "TwistViolation",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotInvertible => "NotInvertible",
            Error::NotBimodule { .. } => "NotBimodule",
            Error::NotCompletelyPositive { .. } => "NotCompletelyPositive",
            Error::NotNondegenerate { .. } => "NotNondegenerate",
            Error::NotCentral { .. } => "NotCentral",
            Error::NotPositiveIndex { .. } => "NotPositive",
            Error::NoQuasiBasis { .. } => "NoQuasiBasis",
            Error::DegenerateEps { .. } => "DegenerateEps",
            Error::EstimateViolated { .. } => "EstimateViolated",
            Error::Decomposition(_) => "Decomposition",
            Error::NotMorita(_) => "NotMorita",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::TypeMismatch(_) => "TypeMismatch",
            Error::NotFrobeniusIso(_) => "NotFrobeniusIso",
            Error::BadParam(_) => "BadParam",
            Error::NotSubgroup => "NotSubgroup",
            Error::RetriesExhausted(_) => "RetriesExhausted",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
