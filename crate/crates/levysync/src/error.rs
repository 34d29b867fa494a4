use num_complex::Complex64;

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("constant polynomial")]
    ConstantPolynomial,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("improper rational function: numerator degree {num} >= denominator degree {den}")]
    Improper { num: usize, den: usize },
    #[error("evaluation at or near a pole (z = {0})")]
    NearPole(Complex64),
    #[error("unresolved multiple pole near {0}")]
    UnresolvedMultiplePole(Complex64),
    #[error("unstable transform: pole {0} is not in the open left half-plane")]
    UnstableTransform(Complex64),
    #[error("eigenvalue iteration failed for a degree {0} companion matrix")]
    EigenFailure(usize),
    #[error("analytics-only distribution")]
    AnalyticsOnly,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("multiple root: {0}")]
    MultipleRoot(String),
    #[error("no real root in the separation window: {0}")]
    NoSeparatedRoot(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invalid Levy process: {0}")]
    InvalidLevy(String),
    #[error("no known attraction target")]
    NoAttractionTarget,
    #[error("invalid configuration at {path}: {msg}")]
    Config { path: String, msg: String },
    #[error("V-estimator requires symmetric model")]
    NotSymmetric,
    #[error("enumeration too large")]
    EnumerationTooLarge,
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
