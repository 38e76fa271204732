use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("arm {arm} out of range at dimension {dim} (dimension has {arms} arms)")]
    ArmOutOfRange { dim: usize, arm: usize, arms: usize },

    #[error("matrix is not positive definite (pivot {pivot} failed after jitter {jitter:e})")]
    NotPositiveDefinite { pivot: usize, jitter: f64 },

    #[error("degenerate Sherman-Morrison denominator {0:e}")]
    DegenerateDenominator(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("observe called before select")]
    ObserveBeforeSelect,

    #[error("step {t}: {source}")]
    Step {
        t: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, t: usize) -> Self {
        Error::Step {
            t,
            source: Box::new(self),
        }
    }
}
