use thiserror::Error;

/// Errors raised by the engine. Every illegal move, malformed input and
/// violated precondition maps onto one of these variants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("outcome space must contain at least one label")]
    EmptySpace,

    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown outcome label {0:?}")]
    UnknownLabel(String),

    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("distributions live on different outcome spaces")]
    SpaceMismatch,

    #[error("invalid probability {value} for label {label:?}")]
    InvalidProbability { label: String, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("negative or undefined payoff {value} on label {label:?}")]
    NegativePayoff { label: String, value: f64 },

    #[error("bet is not fair: expectation under the forecast is {expectation}")]
    UnfairBet { expectation: f64 },

    #[error("additive stake too large for current capital: payoff {payoff} at value {value}")]
    ProducesNegativePayoff { value: f64, payoff: f64 },

    #[error("capital must be positive, got {0}")]
    NonPositiveCapital(f64),

    #[error("capital must be nonnegative, got {0}")]
    NegativeCapital(f64),

    #[error("device with {0} outcomes is not in the configured device set")]
    UnknownDevice(usize),

    #[error("conditioning prefix has zero probability")]
    ZeroProbabilityPrefix,

    #[error("prefix of length {len} does not fit horizon {horizon}")]
    PrefixTooLong { len: usize, horizon: usize },

    #[error("forecast stream exhausted at step {0}")]
    StreamExhausted(usize),

    #[error("forecast assigns zero probability to label {0:?}")]
    ZeroWeight(String),

    #[error("forecasts have disjoint supports (Hellinger integral is zero)")]
    DisjointForecasts,

    #[error("chi-squared integral is infinite")]
    InfiniteChiSquared,

    #[error("{what} {value} lies outside [0, 1]")]
    OutOfUnitInterval { what: &'static str, value: f64 },

    #[error("{0} announced out of turn")]
    OutOfTurn(&'static str),

    #[error("positions rejected by margin rule: worst-case capital {worst_case}")]
    MarginViolation { worst_case: f64 },

    #[error("loss value {0} lies outside [0, 1]")]
    LossOutOfRange(f64),

    #[error("horizon mismatch: expected {expected}, got {got}")]
    HorizonMismatch { expected: usize, got: usize },

    #[error("decision record {0} has an incomplete outcome window")]
    IncompleteWindow(usize),

    #[error("exhaustive enumeration limited to horizon {max}, got {got}")]
    HorizonTooLarge { max: usize, got: usize },

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
