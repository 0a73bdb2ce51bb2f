use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra must have at least one block")]
    EmptyAlgebra,
    #[error("block {block} has dimension zero")]
    DimensionZero { block: usize },
    #[error("weight {weight} of block {block} is not strictly positive")]
    NonPositiveWeight { block: usize, weight: f64 },
    #[error("length mismatch: {what} has {found}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("element is not hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("element is not positive (eigenvalue {eigenvalue:e} in block {block})")]
    NotPositive { block: usize, eigenvalue: f64 },
    #[error("element is not a projection (deviation {deviation:e})")]
    NotProjection { deviation: f64 },
    #[error("trace budget {0} is negative")]
    NegativeBudget(f64),
    #[error("exact projection-mass search infeasible: {0}")]
    ExactInfeasible(String),
    #[error("map carries no positivity certificate")]
    NotCertifiedPositive,
    #[error("map is not a certified positive contraction: {0}")]
    NotCertified(String),
    #[error("map does not send hermitian elements to hermitian elements (deviation {deviation:e})")]
    NotHermitianPreserving { deviation: f64 },
    #[error("eigenvalue of modulus {modulus} exceeds 1 + tol under a contraction certificate")]
    SpuriousExpansion { modulus: f64 },
    #[error("dichotomy failure: alpha = {alpha:e} but no positive fixed point was found")]
    DichotomyFailure { alpha: f64 },
    #[error("dimension {found} too small (need at least {min})")]
    DimensionTooSmall { found: usize, min: usize },
    #[error("element is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("unknown gallery construction `{0}`")]
    UnknownGallery(String),
    #[error("invalid parameter `{name}`: {reason}")]
    BadParam { name: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, e.g. `"NonPositiveWeight"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyAlgebra => "EmptyAlgebra",
            Error::DimensionZero { .. } => "DimensionZero",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotProjection { .. } => "NotProjection",
            Error::NegativeBudget(_) => "NegativeBudget",
            Error::ExactInfeasible(_) => "ExactInfeasible",
            Error::NotCertifiedPositive => "NotCertifiedPositive",
            Error::NotCertified(_) => "NotCertified",
            Error::NotHermitianPreserving { .. } => "NotHermitianPreserving",
            Error::SpuriousExpansion { .. } => "SpuriousExpansion",
            Error::DichotomyFailure { .. } => "DichotomyFailure",
            Error::DimensionTooSmall { .. } => "DimensionTooSmall",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::BadProbability(_) => "BadProbability",
            Error::UnknownGallery(_) => "UnknownGallery",
            Error::BadParam { .. } => "BadParam",
        }
    }
}
