use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("index {index} outside the tabulated range of family `{family}` (max {max})")]
    IndexOutOfRange {
        family: String,
        index: usize,
        max: usize,
    },

    #[error("family `{family}` violates {constraint} at n = {index}")]
    InvariantViolated {
        family: String,
        constraint: &'static str,
        index: usize,
    },

    #[error("divergent parameters: {0}")]
    DivergentParameters(String),

    #[error("QR iteration did not converge after {iterations} sweeps (unreduced block {low}..={high})")]
    QrNoConvergence {
        iterations: usize,
        low: usize,
        high: usize,
    },

    #[error("classification inconsistency: {0}")]
    ClassificationInconsistency(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("family `{0}` declares no support hull")]
    NoHullDeclared(String),

    #[error("ill-conditioned fit: residual {0:e}")]
    IllConditionedFit(f64),

    #[error("realness never reached below the cap t = {cap:e}")]
    NoUpperBracket { cap: f64 },

    #[error("zeros stay real down to t = {floor:e}")]
    NoLowerBracket { floor: f64 },

    #[error("no double zero found for m = {0}")]
    NoDoubleZeroFound(usize),

    #[error("unsupported family `{0}` for this operation")]
    UnsupportedFamily(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::DegenerateParameter(_) => "degenerate-parameter",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::InvariantViolated { .. } => "invariant-violated",
            Error::DivergentParameters(_) => "divergent-parameters",
            Error::QrNoConvergence { .. } => "qr-no-convergence",
            Error::ClassificationInconsistency(_) => "classification-inconsistency",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::NoHullDeclared(_) => "no-hull-declared",
            Error::IllConditionedFit(_) => "ill-conditioned-fit",
            Error::NoUpperBracket { .. } => "no-upper-bracket",
            Error::NoLowerBracket { .. } => "no-lower-bracket",
            Error::NoDoubleZeroFound(_) => "no-double-zero-found",
            Error::UnsupportedFamily(_) => "unsupported-family",
            Error::VerificationFailed(_) => "verification-failed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DegenerateParameter(_)
                | Error::IndexOutOfRange { .. }
                | Error::DivergentParameters(_)
                | Error::LengthMismatch { .. }
                | Error::NoHullDeclared(_)
                | Error::UnsupportedFamily(_)
                | Error::InvariantViolated { .. }
        )
    }
}

pub(crate) fn require_nonzero_t(t: f64) -> Result<()> {
    if t == 0.0 {
        return Err(Error::DegenerateParameter("t = 0".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t = {t} is not finite")));
    }
    Ok(())
}
