use thiserror::Error;

/// Errors raised by the auction model and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function, e.g. a negative bid
    /// passed to a weight or a zero bid passed to a derivative.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every bid sits at a zero of the weight function, so the allocation is undefined.
    #[error("degenerate bid profile: total weight is zero")]
    DegenerateProfile,

    /// A bidder faces no competitor with positive weight.
    #[error("degenerate bid profile: bidder {0} has no opponent with positive weight")]
    NoOpponentWeight(usize),

    /// Input failed validation.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
