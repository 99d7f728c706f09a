use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or unreadable input: files, cells, flags, specs.
    Input,
    /// A numerical procedure could not produce a valid result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as {expected}")]
    UnparseableCell {
        path: String,
        row: usize,
        column: usize,
        value: String,
        expected: &'static str,
    },
    #[error("{path}: row {row}, column {column} ({asset}): price {value} is not strictly positive")]
    NonPositivePrice {
        path: String,
        row: usize,
        column: usize,
        asset: String,
        value: f64,
    },
    #[error("{path}: row {row}, column {column} ({asset}): capitalization {value} is negative or not finite")]
    InvalidCapitalization {
        path: String,
        row: usize,
        column: usize,
        asset: String,
        value: f64,
    },
    #[error("{path}: row {row}: duplicate date {date}")]
    DuplicateDate { path: String, row: usize, date: String },
    #[error("{path}: column {column}: duplicate asset {asset:?}")]
    DuplicateAsset { path: String, column: usize, asset: String },
    #[error("{path}: row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid price table: {0}")]
    InvalidTable(String),
    #[error("capitalization table does not match prices: {0}")]
    CapsMismatch(String),
    #[error("incomplete series: {}", format_gaps(.0))]
    IncompleteSeries(Vec<(String, String)>),
    #[error("base asset {0:?} not found in table")]
    UnknownBase(String),
    #[error("non-finite rebased price for {asset} on {date}")]
    NonFiniteRatio { asset: String, date: String },
    #[error("series length must be at least 2, got {0}")]
    SeriesTooShort(usize),
    #[error("series {asset:?} is constant over the window (zero standard deviation)")]
    ConstantSeries { asset: String },
    #[error("lag tau={tau} is invalid for a panel of length {len}")]
    InvalidLag { tau: usize, len: usize },
    #[error("at least two series are required, got {0}")]
    TooFewSeries(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigendecomposition did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),
    #[error("matrix is not positive semidefinite: smallest eigenvalue {0:e}")]
    NotPositiveSemidefinite(f64),
    #[error("spectral identity violated: {0}")]
    IdentityViolated(String),
    #[error("invalid histogram binning: {0}")]
    InvalidBins(String),
    #[error("invalid Marchenko-Pastur parameters: {0}")]
    InvalidMpParameters(String),
    #[error("every eigenvalue lies above the unit-scale bulk edge; cannot fit sigma")]
    AllOutliers,
    #[error("regressor has zero variance")]
    ZeroVarianceRegressor,
    #[error("residual of series {asset:?} has zero variance (fully explained by the factor)")]
    ZeroVarianceResidual { asset: String },
    #[error("invalid surrogate spec: {0}")]
    InvalidSurrogate(String),
    #[error("invalid rolling configuration: {0}")]
    InvalidRolling(String),
    #[error("capitalization data required but absent")]
    MissingCaps,
    #[error("total capitalization is zero on {0}")]
    ZeroCapitalization(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot serialize output: {0}")]
    Serialize(String),
}

fn format_gaps(gaps: &[(String, String)]) -> String {
    const SHOWN: usize = 10;
    let mut out: Vec<String> = gaps
        .iter()
        .take(SHOWN)
        .map(|(asset, date)| format!("{asset} on {date}"))
        .collect();
    if gaps.len() > SHOWN {
        out.push(format!("and {} more", gaps.len() - SHOWN));
    }
    out.join(", ")
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoConvergence(_)
            | Error::NotPositiveSemidefinite(_)
            | Error::IdentityViolated(_)
            | Error::AllOutliers
            | Error::ZeroVarianceRegressor
            | Error::ZeroVarianceResidual { .. }
            | Error::ConstantSeries { .. }
            | Error::NonFiniteRatio { .. }
            | Error::ZeroCapitalization(_) => ErrorClass::Numeric,
            _ => ErrorClass::Input,
        }
    }
}
