use thiserror::Error;

/// Errors produced by samplers, solvers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OsodError {
    /// An input probability lies outside `[0 - eps, 1 + eps]`.
    #[error("probability out of range at index {index}: {value}")]
    OutOfRange { index: usize, value: f64 },

    /// The capped-scaling equation has no solution for the requested target.
    #[error("infeasible scaling target {target}: reachable range is [{min}, {max}]")]
    Infeasible { target: f64, min: f64, max: f64 },

    /// A selection update drove a probability below zero. The window is too
    /// small for the current unit; widen it or add a phantom unit.
    #[error("selection update produced a negative probability at index {index}: {value}")]
    NegativeProbability { index: usize, value: f64 },

    /// The stream buffer hit its hard cap and the policy forbids a
    /// mid-stream phantom unit.
    #[error("window buffer overflow: {occupancy} undecided units held, cap is {max_buffer}")]
    BufferOverflow { occupancy: usize, max_buffer: usize },

    /// Exact enumeration was requested for a population above the cap.
    #[error("population of {n} units is too large to enumerate (cap {cap})")]
    TooLarge { n: usize, cap: usize },

    /// A unit with zero inclusion probability appeared in a sample.
    #[error("unit {index} was selected but has zero inclusion probability")]
    ZeroProbabilitySelected { index: usize },

    /// The variance estimator met a selected pair with zero joint
    /// inclusion probability.
    #[error("selected pair ({k}, {l}) has zero joint inclusion probability")]
    ZeroJointProbability { k: usize, l: usize },

    /// A fixed-size method was given probabilities with a non-integer sum.
    #[error("probabilities sum to {sum}, expected an integer sample size")]
    NonIntegerSize { sum: f64 },

    /// Mismatched input lengths.
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, OsodError>;
