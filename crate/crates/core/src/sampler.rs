//! The one-step one-decision kernel and the fixed-population sampler.
//!
//! At step `t` the unit's fate is drawn from its current probability and
//! becomes final. The probabilities of the units after it are then
//! rewritten so that the undecided mass is conserved: after a rejection
//! they are scaled up through the capped proportional map, after a
//! selection they are pushed down by the complementary formula. Both
//! branches share one scaling constant, solved before the draw.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OsodError, Result};
use crate::probability::{waterfill, ProbabilityVector, Tolerance};

/// Final or pending fate of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Selected,
    Rejected,
    Pending,
}

/// Per-unit final decisions plus running bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLedger {
    pub decisions: Vec<Decision>,
    /// Mass already decided; equals the number of selected units exactly.
    pub decided_mass: f64,
    /// Steps performed.
    pub step: usize,
}

impl DecisionLedger {
    pub fn realized_size(&self) -> usize {
        self.decisions
            .iter()
            .filter(|d| **d == Decision::Selected)
            .count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.decisions
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Decision::Selected)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.decisions.iter().all(|d| *d != Decision::Pending)
    }

    /// Sample membership as a 0/1 vector.
    pub fn as_mask(&self) -> Vec<bool> {
        self.decisions
            .iter()
            .map(|d| *d == Decision::Selected)
            .collect()
    }
}

/// Outcome of one decision step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub decision: Decision,
    /// Full vector with entry `t` pinned to 0/1 and entries after `t`
    /// rewritten.
    pub updated: ProbabilityVector,
    /// The scaling constant used by both branches.
    pub factor: f64,
}

/// Rejection branch over a window tail: scale `tail` so it absorbs
/// `target` mass, capping at 1. Returns the scaled tail and the factor.
pub(crate) fn reject_tail(tail: &[f64], target: f64, tol: &Tolerance) -> Result<(Vec<f64>, f64)> {
    let (factor, scaled) = waterfill(tail, target, tol)?;
    Ok((scaled, factor))
}

/// Selection branch over a window tail, derived from the rejection branch:
/// `updated_k = (p_k - rejected_k * (1 - head)) / head`.
///
/// Values below `-band` abort with [`OsodError::NegativeProbability`]
/// carrying the index *within the tail*; negatives inside the band are
/// conservation dust and are clamped, boundary values snapped. Callers
/// that pre-validated the step (an admitted window) widen the band by the
/// admission slack amplified through the formula; the public operations
/// use the plain `eps` band.
pub(crate) fn accept_tail(
    tail: &[f64],
    rejected: &[f64],
    head: f64,
    band: f64,
    tol: &Tolerance,
) -> Result<Vec<f64>> {
    debug_assert!(head > 0.0);
    debug_assert_eq!(tail.len(), rejected.len());
    let mut out = Vec::with_capacity(tail.len());
    for (k, (&p, &r)) in tail.iter().zip(rejected).enumerate() {
        let value = (p - r * (1.0 - head)) / head;
        if value < -band {
            return Err(OsodError::NegativeProbability { index: k, value });
        }
        out.push(tol.snap(value.max(0.0)).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Rewrite the vector for a rejection of unit `t`: entry `t` becomes 0 and
/// entries `t+1..` absorb `remaining_target` through capped scaling.
pub fn update_on_reject(
    probs: &ProbabilityVector,
    t: usize,
    remaining_target: f64,
    tol: &Tolerance,
) -> Result<(ProbabilityVector, f64)> {
    let (scaled, factor) = reject_tail(&probs[t + 1..], remaining_target, tol)?;
    let mut out = probs.to_vec();
    out[t] = 0.0;
    out[t + 1..].copy_from_slice(&scaled);
    Ok((ProbabilityVector::from_clamped(out), factor))
}

/// Rewrite the vector for a selection of unit `t`, given the rejection
/// update for the same step. Entry `t` becomes 1.
pub fn update_on_accept(
    probs: &ProbabilityVector,
    t: usize,
    reject_update: &ProbabilityVector,
    tol: &Tolerance,
) -> Result<ProbabilityVector> {
    let head = probs[t];
    let scaled = accept_tail(&probs[t + 1..], &reject_update[t + 1..], head, tol.eps, tol)
        .map_err(|e| match e {
            OsodError::NegativeProbability { index, value } => OsodError::NegativeProbability {
                index: t + 1 + index,
                value,
            },
            other => other,
        })?;
    let mut out = probs.to_vec();
    out[t] = 1.0;
    out[t + 1..].copy_from_slice(&scaled);
    Ok(ProbabilityVector::from_clamped(out))
}

/// Decide unit `t` with the uniform draw `u` in `[0, 1)` and rewrite the
/// tail. Selection happens iff `u < p_t`, so entries already at 0 or 1 are
/// forced regardless of `u`.
pub fn decide_step(
    probs: &ProbabilityVector,
    t: usize,
    u: f64,
    tol: &Tolerance,
) -> Result<StepOutcome> {
    let head = probs[t];
    let mut remaining_target: f64 = probs[t..].iter().sum();
    if tol.is_integer(remaining_target) {
        remaining_target = remaining_target.round();
    }
    let (rejected, factor) = reject_tail(&probs[t + 1..], remaining_target, tol)?;
    if u < head {
        let accepted =
            accept_tail(&probs[t + 1..], &rejected, head, tol.eps, tol).map_err(|e| match e {
                OsodError::NegativeProbability { index, value } => OsodError::NegativeProbability {
                    index: t + 1 + index,
                    value,
                },
                other => other,
            })?;
        let mut out = probs.to_vec();
        out[t] = 1.0;
        out[t + 1..].copy_from_slice(&accepted);
        Ok(StepOutcome {
            decision: Decision::Selected,
            updated: ProbabilityVector::from_clamped(out),
            factor,
        })
    } else {
        let mut out = probs.to_vec();
        out[t] = 0.0;
        out[t + 1..].copy_from_slice(&rejected);
        Ok(StepOutcome {
            decision: Decision::Rejected,
            updated: ProbabilityVector::from_clamped(out),
            factor,
        })
    }
}

/// Draw a full sample, deciding units in order with whole-tail updates.
///
/// Entries already at 0 or 1 are recorded without consuming a random draw
/// and without touching the rest of the vector, so seeded runs are
/// reproducible independently of degenerate entries. The undecided mass is
/// tracked incrementally and recomputed every 64 steps to bound drift.
pub fn sample_population_with_rng<R: Rng + ?Sized>(
    probs: &ProbabilityVector,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<DecisionLedger> {
    let n = probs.len();
    let mut work: Vec<f64> = probs.to_vec();
    let mut decisions = vec![Decision::Pending; n];
    let mut pending_mass: f64 = work.iter().sum();

    for t in 0..n {
        if t.is_multiple_of(64) {
            pending_mass = work[t..].iter().sum();
            if tol.is_integer(pending_mass) {
                pending_mass = pending_mass.round();
            }
        }
        let head = work[t];
        if head <= 0.0 {
            decisions[t] = Decision::Rejected;
            continue;
        }
        if head >= 1.0 {
            decisions[t] = Decision::Selected;
            pending_mass -= 1.0;
            continue;
        }

        let tail_is_last = t + 1 == n;
        if tail_is_last {
            // No unit left to absorb either branch; an isolated fractional
            // trailing entry is decided by a plain draw. Reachable only
            // for non-integer total mass.
            let u: f64 = rng.random();
            decisions[t] = if u < head {
                Decision::Selected
            } else {
                Decision::Rejected
            };
            continue;
        }

        let (rejected, _factor) = reject_tail(&work[t + 1..], pending_mass, tol)?;
        let u: f64 = rng.random();
        if u < head {
            let accepted = accept_tail(&work[t + 1..], &rejected, head, tol.eps, tol).map_err(
                |e| match e {
                    OsodError::NegativeProbability { index, value } => {
                        OsodError::NegativeProbability {
                            index: t + 1 + index,
                            value,
                        }
                    }
                    other => other,
                },
            )?;
            work[t + 1..].copy_from_slice(&accepted);
            decisions[t] = Decision::Selected;
            pending_mass -= 1.0;
        } else {
            work[t + 1..].copy_from_slice(&rejected);
            decisions[t] = Decision::Rejected;
        }
        work[t] = 0.0; // decided mass no longer tracked in the tail
    }

    let selected = decisions
        .iter()
        .filter(|d| **d == Decision::Selected)
        .count();
    Ok(DecisionLedger {
        decisions,
        decided_mass: selected as f64,
        step: n,
    })
}

/// Seeded wrapper around [`sample_population_with_rng`].
pub fn sample_population(
    probs: &ProbabilityVector,
    rng_seed: u64,
    tol: &Tolerance,
) -> Result<DecisionLedger> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_population_with_rng(probs, &mut rng, tol)
}
