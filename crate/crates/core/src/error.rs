use thiserror::Error;

/// Bad user input: parameters, configuration files, grids.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("could not parse configuration: {0}")]
    Parse(String),
}

/// Failures of the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("omega = {re}{im:+}i lies on the cut; request a boundary side instead")]
    OnCut { re: f64, im: f64 },
    #[error("edge substitution requires equal bulks on both sides")]
    NonUniformBulk,
    #[error("zero pivot at index {index} of the {direction} elimination")]
    ZeroPivot { index: usize, direction: &'static str },
    #[error("frame is numerically singular (det = {det:e})")]
    Singular { det: f64 },
    #[error("minor index out of range: rows {j}..={k} of a block with N = {n}")]
    MinorRange { j: usize, k: usize, n: usize },
    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },
    #[error("chain has real spectral zeros at ±{omega_star}; poles must be requested explicitly")]
    RealPoles { omega_star: f64 },
    #[error("decay fit needs at least {needed} envelope points, found {found}")]
    TooFewPoints { found: usize, needed: usize },
    #[error("no classification criterion for {0}")]
    Unsupported(String),
    #[error("{0}")]
    Config(#[from] ConfigError),
}

impl NumericError {
    pub(crate) fn convergence(what: &'static str, detail: impl Into<String>) -> Self {
        NumericError::Convergence { what, detail: detail.into() }
    }
}
