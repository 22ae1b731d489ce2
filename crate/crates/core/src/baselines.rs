//! Reference unequal-probability samplers used for comparison runs:
//! random systematic selection and the ordered pivotal method.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{OsodError, Result};
use crate::probability::{ProbabilityVector, Tolerance};

/// Systematic unequal-probability sampling.
///
/// With cumulative sums `V_0 = 0, V_k = p_1 + … + p_k`, unit `k` is
/// selected iff some integer `j` satisfies `V_{k-1} <= u + j < V_k`.
/// With `permuted` a uniform random order is applied first and inverted
/// afterwards, which is the usual way to break the method's determinism.
pub fn systematic_sample<R: Rng + ?Sized>(
    probs: &ProbabilityVector,
    u: f64,
    permuted: bool,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<Vec<bool>> {
    assert!((0.0..1.0).contains(&u), "u must lie in [0, 1)");
    let total = probs.sum();
    if !tol.is_integer(total) || total.round() < 1.0 {
        return Err(OsodError::NonIntegerSize { sum: total });
    }
    let n = probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    if permuted {
        order.shuffle(rng);
    }

    let mut mask = vec![false; n];
    let mut cumulative = 0.0;
    let mut prev_ticks = (-u).ceil(); // integers j with j >= -u, i.e. ceil(V_0 - u)
    for &k in &order {
        cumulative += probs[k];
        let ticks = (cumulative - u).ceil();
        if ticks > prev_ticks {
            mask[k] = true;
        }
        prev_ticks = ticks;
    }
    Ok(mask)
}

/// One pivotal duel between probabilities `pa` and `pb`.
///
/// Returns the two possible updated pairs and the probability of the
/// first one. When the mass fits below 1 one unit takes all of it;
/// otherwise one unit is selected outright and the other keeps the excess.
pub(crate) fn pivotal_duel(pa: f64, pb: f64) -> ((f64, f64), (f64, f64), f64) {
    let s = pa + pb;
    if s <= 1.0 {
        ((s, 0.0), (0.0, s), pa / s)
    } else {
        ((1.0, s - 1.0), (s - 1.0, 1.0), (1.0 - pb) / (2.0 - s))
    }
}

/// Ordered pivotal sampling: the two first not-yet-decided units duel
/// until one of them is pinned at 0 or 1; the survivor carries the merged
/// mass forward. A trailing unit left with fractional mass (non-integer
/// total only) keeps it as a plain selection probability.
pub fn pivotal_sample<R: Rng + ?Sized>(
    probs: &ProbabilityVector,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<Vec<bool>> {
    let n = probs.len();
    let mut mask = vec![false; n];
    // The undecided unit carrying accumulated mass, if any.
    let mut carry: Option<(usize, f64)> = None;

    for k in 0..n {
        let p = probs[k];
        if tol.is_zero(p) {
            continue;
        }
        if tol.is_one(p) {
            mask[k] = true;
            continue;
        }
        let Some((idx, mass)) = carry else {
            carry = Some((k, p));
            continue;
        };
        let (first, second, p_first) = pivotal_duel(mass, p);
        let (new_a, new_b) = if rng.random::<f64>() < p_first {
            first
        } else {
            second
        };
        // Settle whichever side reached a boundary; at most one side stays
        // fractional and becomes the new carry.
        carry = None;
        for (unit, value) in [(idx, new_a), (k, new_b)] {
            if tol.is_one(value) {
                mask[unit] = true;
            } else if !tol.is_zero(value) {
                debug_assert!(carry.is_none(), "both duel outcomes fractional");
                carry = Some((unit, value));
            }
        }
    }

    if let Some((idx, mass)) = carry {
        // Residual mass from a non-integer total.
        if rng.random::<f64>() < mass {
            mask[idx] = true;
        }
    }
    Ok(mask)
}
