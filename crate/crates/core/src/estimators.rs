//! Expansion estimator, design variance, and the plug-in variance
//! estimator. Second-order inclusion probabilities come from a
//! [`JointInclusionMatrix`] (exact or Monte Carlo) since the windowed
//! design has no closed form for them.

use crate::error::{OsodError, Result};
use crate::oracle::{joint_inclusion, DesignTable, JointInclusionMatrix};
use crate::probability::ProbabilityVector;

/// Expansion estimator of the population total:
/// `sum over selected k of y_k / p_k`.
pub fn ht_estimate(sample: &[bool], y: &[f64], probs: &ProbabilityVector) -> Result<f64> {
    check_lengths(sample.len(), y.len())?;
    check_lengths(sample.len(), probs.len())?;
    let mut total = 0.0;
    for (k, &selected) in sample.iter().enumerate() {
        if !selected {
            continue;
        }
        if probs[k] <= 0.0 {
            return Err(OsodError::ZeroProbabilitySelected { index: k });
        }
        total += y[k] / probs[k];
    }
    Ok(total)
}

/// True design variance of the expansion estimator via the double sum
/// `sum_k sum_l (joint_kl - p_k p_l) (y_k/p_k)(y_l/p_l)`, with the joint
/// probabilities taken from the exact design table.
pub fn true_variance(design: &DesignTable, y: &[f64], probs: &ProbabilityVector) -> Result<f64> {
    check_lengths(design.n_units, y.len())?;
    check_lengths(design.n_units, probs.len())?;
    let joint = joint_inclusion(design);
    let n = design.n_units;
    let mut variance = 0.0;
    for k in 0..n {
        if probs[k] <= 0.0 {
            continue; // a never-selected unit contributes nothing
        }
        let wk = y[k] / probs[k];
        for l in 0..n {
            if probs[l] <= 0.0 {
                continue;
            }
            let wl = y[l] / probs[l];
            variance += (joint.get(k, l) - probs[k] * probs[l]) * wk * wl;
        }
    }
    Ok(variance)
}

/// Plug-in variance estimator evaluated on one sample:
/// `sum over selected k, l of (joint_kl - p_k p_l) / joint_kl * (y_k/p_k)(y_l/p_l)`.
///
/// Requires a strictly positive joint probability for every selected pair.
pub fn variance_estimate(
    sample: &[bool],
    joint: &JointInclusionMatrix,
    y: &[f64],
    probs: &ProbabilityVector,
) -> Result<f64> {
    check_lengths(sample.len(), y.len())?;
    check_lengths(sample.len(), probs.len())?;
    check_lengths(sample.len(), joint.n)?;
    let selected: Vec<usize> = sample
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(k, _)| k)
        .collect();
    for &k in &selected {
        if probs[k] <= 0.0 {
            return Err(OsodError::ZeroProbabilitySelected { index: k });
        }
    }
    let mut estimate = 0.0;
    for &k in &selected {
        let wk = y[k] / probs[k];
        for &l in &selected {
            let jkl = joint.get(k, l);
            if jkl <= 0.0 {
                return Err(OsodError::ZeroJointProbability { k, l });
            }
            estimate += (jkl - probs[k] * probs[l]) / jkl * wk * (y[l] / probs[l]);
        }
    }
    Ok(estimate)
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(OsodError::LengthMismatch { left, right })
    }
}
