use thiserror::Error;

pub type Result<T, E = LoanError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoanError {
    #[error("invalid loan specification: {0}")]
    InvalidSpec(String),

    #[error("loan does not terminate: residual debt {residual} after period {periods}")]
    NonTerminatingLoan { residual: f64, periods: usize },

    #[error("installments overpay the loan: debt {debt} at period {period} before maturity")]
    OverpaidLoan { period: usize, debt: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("ladder normalization N_{0} vanishes")]
    DegenerateNormalization(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("negative radicand {0} in the closed-form risk expression")]
    NegativeRadicand(f64),

    #[error("reference parametrization is singular at gamma = {0}")]
    SingularParametrization(f64),

    #[error("invalid sign pattern {0:?}: expected three of '+' or '-'")]
    InvalidPattern(String),

    #[error("target sum {target} differs from Tr(Q) = {trace}")]
    TraceMismatch { target: f64, trace: f64 },

    #[error("target {value} at period {period} outside [{min}, {max}]")]
    ConvexityViolation {
        period: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("invalid index model: {0}")]
    InvalidModel(String),

    #[error("density integrates to {0}, expected 1")]
    NonNormalizedDensity(f64),

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl LoanError {
    /// Stable machine-readable code used by the JSON error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            LoanError::InvalidSpec(_) => "invalid_spec",
            LoanError::NonTerminatingLoan { .. } => "non_terminating_loan",
            LoanError::OverpaidLoan { .. } => "overpaid_loan",
            LoanError::InvalidSchedule(_) => "invalid_schedule",
            LoanError::IndexOutOfRange { .. } => "index_out_of_range",
            LoanError::DegenerateNormalization(_) => "degenerate_normalization",
            LoanError::DimensionMismatch { .. } => "dimension_mismatch",
            LoanError::NegativeRadicand(_) => "negative_radicand",
            LoanError::SingularParametrization(_) => "singular_parametrization",
            LoanError::InvalidPattern(_) => "invalid_pattern",
            LoanError::TraceMismatch { .. } => "trace_mismatch",
            LoanError::ConvexityViolation { .. } => "convexity_violation",
            LoanError::Infeasible(_) => "infeasible",
            LoanError::InvalidModel(_) => "invalid_model",
            LoanError::NonNormalizedDensity(_) => "non_normalized_density",
            LoanError::InsufficientData { .. } => "insufficient_data",
            LoanError::Parse(_) => "parse_error",
        }
    }

    /// True for errors caused by malformed input rather than an
    /// infeasible (but well-formed) request.
    pub fn is_malformed_input(&self) -> bool {
        matches!(
            self,
            LoanError::InvalidSpec(_)
                | LoanError::InvalidPattern(_)
                | LoanError::InvalidModel(_)
                | LoanError::Parse(_)
                | LoanError::DimensionMismatch { .. }
                | LoanError::IndexOutOfRange { .. }
        )
    }
}
