use thiserror::Error;

/// Every failure the library reports.
///
/// Variants map one-to-one onto the machine-readable codes the CLI writes
/// into `meta.json` (see [`Error::code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid gluing: {0}")]
    InvalidGluing(String),
    #[error("unsupported angle: {0}")]
    UnsupportedAngle(String),
    #[error("unknown singular point {0}")]
    UnknownPoint(usize),
    #[error("bad holonomy cuts: {0}")]
    BadCuts(String),
    #[error("gauge transformation is not unitary at vertex {0}")]
    NonUnitaryGauge(usize),
    #[error("edge sequence is not a closed walk: {0}")]
    NotAClosedWalk(String),
    #[error("kernel dimension {found} does not match the expected {expected}")]
    KernelMismatch { found: usize, expected: usize },
    #[error("spectrum has no nonzero eigenvalues")]
    EmptySpectrum,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("Fourier support too wide: max index {max_index} must stay below {limit}")]
    SupportTooWide { max_index: usize, limit: usize },
    #[error("graph too large for brute-force enumeration: {0}")]
    TooLarge(String),
    #[error("rank {0} is not supported here")]
    RankUnsupported(usize),
    #[error("negative value {0} under the square root (connection is not special unitary?)")]
    NegativeUnderSqrt(f64),
    #[error("cycles cannot be classified: {0}")]
    NotClassifiable(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("bisection failed: {0}")]
    BisectionFailure(String),
    #[error("section is supported outside the interior vertex set (vertex {0})")]
    SupportViolation(usize),
    #[error("numerical budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGluing(_) => "invalid_gluing",
            Error::UnsupportedAngle(_) => "unsupported_angle",
            Error::UnknownPoint(_) => "unknown_point",
            Error::BadCuts(_) => "bad_cuts",
            Error::NonUnitaryGauge(_) => "non_unitary_gauge",
            Error::NotAClosedWalk(_) => "not_a_closed_walk",
            Error::KernelMismatch { .. } => "kernel_mismatch",
            Error::EmptySpectrum => "empty_spectrum",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::SupportTooWide { .. } => "support_too_wide",
            Error::TooLarge(_) => "too_large",
            Error::RankUnsupported(_) => "rank_unsupported",
            Error::NegativeUnderSqrt(_) => "negative_under_sqrt",
            Error::NotClassifiable(_) => "not_classifiable",
            Error::DomainError(_) => "domain_error",
            Error::BisectionFailure(_) => "bisection_failure",
            Error::SupportViolation(_) => "support_violation",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::HypothesisViolation(_) => "hypothesis_violation",
            Error::InvalidInput(_) => "invalid_input",
        }
    }

    /// True for refusals caused by size limits rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::TooLarge(_) | Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
