use thiserror::Error;

/// Errors raised by lens, function-space, martingale and witness operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    #[error("root bracketing failed: {0}")]
    RootBracketing(String),

    #[error("envelope grid too coarse: {0}")]
    EnvelopeBracketing(String),

    #[error("fixed boundaries differ: {0}")]
    MismatchedFixedBoundary(String),

    #[error("value {value} at cell {index} is not positive")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("value at cell {index} is off the fixed boundary")]
    OffFixedBoundary { index: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("malformed step function: {0}")]
    MalformedStepFunction(String),

    #[error("atom budget exceeded: 2^{requested} atoms > 2^{limit}")]
    BudgetExceeded { requested: usize, limit: usize },

    #[error("incompatible depth: {0}")]
    IncompatibleDepth(String),

    #[error("function is not measurable with respect to the finest algebra (atom {atom})")]
    NotMeasurable { atom: usize },

    #[error("malformed filtration: {0}")]
    MalformedFiltration(String),

    #[error("function is outside the lens class at level {level}, atom {atom}")]
    NotInClass { level: usize, atom: usize },

    #[error("selection lemma violated at level {level}, atom {atom}")]
    SelectionLemma { level: usize, atom: usize },

    #[error("alpha = {0} is not admissible for the filtration")]
    NotAdmissible(f64),

    #[error("refine depth: {0}")]
    RefineDepth(String),

    #[error("rejection budget exceeded: {0}")]
    RejectionBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
