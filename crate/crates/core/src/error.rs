use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Evaluation at a point where the quantity is undefined (K''' and K'''' at the origin).
    #[error("domain error: {0}")]
    Domain(String),

    /// Positions are not strictly increasing; the state has left the ordered cone.
    #[error("ordering violated between particles {index} and {next} (x = {left}, {right})", next = index + 1)]
    Ordering { index: usize, left: f64, right: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error(
        "integration failed at t = {time}: dt fell below {dt_min:e}; smallest gap {min_gap:e} \
         between particles {gap_index} and {next}, lower envelope there {envelope:e}",
        next = gap_index + 1
    )]
    IntegrationFailure {
        time: f64,
        dt_min: f64,
        min_gap: f64,
        gap_index: usize,
        envelope: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}
