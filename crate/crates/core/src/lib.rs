//! One-step one-decision unequal-probability sampling.
//!
//! A sequential sampling method: units are examined in order, each one's
//! fate is drawn from its current inclusion probability and made final on
//! the spot, and the probabilities of nearby units are rewritten so the
//! remaining mass is conserved. A windowed variant decides units from a
//! stream with bounded lookahead, with a phantom unit closing out windows
//! whose mass does not sum to an integer.
//!
//! The crate ships:
//! - [`probability`]: validated probability vectors and the capped
//!   proportional scaling solver,
//! - [`sampler`]: the one-step kernel and fixed-population sampler,
//! - [`stream`]: windowed stream sampling with phantom-unit finalization,
//! - [`oracle`]: exact design enumeration and Monte Carlo estimation,
//! - [`estimators`]: expansion estimator and design variance formulas,
//! - [`baselines`]: systematic and ordered pivotal reference samplers.
//!
//! ```
//! use osod_core::{stream_sample, Tolerance, WindowPolicy};
//!
//! let units = vec![("a", 0.5), ("b", 0.5), ("c", 0.3)];
//! let outcome =
//!     stream_sample(units, &WindowPolicy::smallest(), 42, &Tolerance::default()).unwrap();
//! assert_eq!(outcome.emissions.len(), 3);
//! // The first two units have integer mass: exactly one is selected.
//! assert_ne!(outcome.emissions[0].selected, outcome.emissions[1].selected);
//! ```

pub mod baselines;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod probability;
pub mod sampler;
pub mod stream;

pub use baselines::{pivotal_sample, systematic_sample};
pub use error::{OsodError, Result};
pub use estimators::{ht_estimate, true_variance, variance_estimate};
pub use oracle::{
    enumerate_design, enumerate_design_with_cap, joint_inclusion, monte_carlo_design, DesignSource,
    DesignTable, JointInclusionMatrix, DEFAULT_ENUMERATION_CAP,
};
pub use probability::{
    accept_branch_nonnegative, check_step_feasibility, inclusion_from_auxiliary,
    solve_scaling_constant, ProbabilityVector, ScalingSolution, Tolerance,
};
pub use sampler::{
    decide_step, sample_population, sample_population_with_rng, update_on_accept, update_on_reject,
    Decision, DecisionLedger, StepOutcome,
};
pub use stream::{
    stream_sample, stream_sample_probs, Emission, StreamOutcome, StreamSampler, WindowCheck,
    WindowPolicy, WindowReport, WindowSearch,
};
