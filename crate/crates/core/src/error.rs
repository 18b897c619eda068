use alloc::string::String;
use alloc::vec::Vec;

/// Failure to turn source text into an expression tree.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: &'static str,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("exponent at byte {position} must be a numeric constant")]
    NonConstantExponent { position: usize },
    #[error("expression nested too deeply at byte {position}")]
    TooDeep { position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::NonConstantExponent { position }
            | ParseError::TooDeep { position } => *position,
        }
    }
}

/// Evaluation left the domain of one of the elementary functions.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("log of non-positive argument {0}")]
    LogDomain(f64),
    #[error("sqrt of non-positive argument {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-integer power {exponent} of non-positive base {base}")]
    PowDomain { base: f64, exponent: f64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("point has {got} coordinates, chart has {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Errors raised by the geometric engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("evaluation failed at sample {draw} {coords:?}: {source}")]
    EvalAt {
        draw: u64,
        coords: Vec<f64>,
        source: EvalError,
    },
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("invalid tensor field: {0}")]
    Tensor(String),
    #[error("metric is not positive definite at the evaluation point")]
    SingularMetric,
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cell `{0}` has no adapted coordinate")]
    NotAdapted(String),
    #[error("sewing consistency failure: {0}")]
    Sewing(String),
    #[error("degenerate nullity fit: {0}")]
    DegenerateFit(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
