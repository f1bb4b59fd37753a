//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Binary operation on elements of different fields.
    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    /// An approximate value lost all of its known digits, so the result
    /// (or its valuation) is not determined at any precision.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// `residue` applied to an element of negative valuation.
    #[error("not in valuation ring: valuation {0} is negative")]
    NotInValuationRing(i64),

    #[error("division by zero")]
    DivisionByZero,

    /// A rational with denominator divisible by p cannot be embedded
    /// into F_p((t)).
    #[error("not representable: denominator of {0} is divisible by {1}")]
    NotRepresentable(String, u64),

    /// The Hensel precondition v(f(a)) > 2 v(f'(a)) does not hold.
    #[error("hensel-condition-failed: {0}")]
    HenselConditionFailed(String),

    /// Cell constructor invariant violated.
    #[error("invalid cell: {0}")]
    InvalidCell(String),

    /// prepare/decompose input is not a split polynomial.
    #[error("unsupported-polynomial: {0}")]
    UnsupportedPolynomial(String),

    /// Valuation of an identically vanishing piece was requested.
    #[error("valuation-of-zero: {0}")]
    ValuationOfZero(String),

    /// Closed-form summation only covers v(t-gamma)^d for d <= 4.
    #[error("unsupported piece power d = {0}: closed forms implemented for d <= 4")]
    UnsupportedPiecePower(u32),

    /// igusa_zeta requires a finite-measure domain.
    #[error("domain has infinite measure")]
    InfiniteDomain,

    /// Parse error with a 1-based column position.
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    /// Catch-all for invalid CLI/API arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn syntax(column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            column,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for syntax errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } => 2,
            _ => 1,
        }
    }
}
