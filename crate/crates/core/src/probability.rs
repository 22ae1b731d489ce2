//! Numeric foundation: validated probability vectors, the capped
//! proportional scaling solver, and the feasibility predicates the
//! samplers are built on.

use crate::error::{OsodError, Result};

/// Numeric tolerances shared across the crate.
///
/// `eps` is an absolute band: values within `eps` of 0 or 1 are snapped to
/// the boundary, and feasibility comparisons allow `eps` of slack.
/// `mc_sigma` is the width, in standard deviations, of the acceptance band
/// used by Monte Carlo checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
    pub mc_sigma: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: 1e-9,
            mc_sigma: 3,
        }
    }
}

impl Tolerance {
    pub fn new(eps: f64, mc_sigma: u32) -> Self {
        assert!(eps > 0.0 && eps < 1e-3, "eps must lie in (0, 1e-3)");
        Self { eps, mc_sigma }
    }

    /// Snap a value to 0 or 1 when it lies within `eps` of the boundary.
    #[inline]
    pub fn snap(&self, value: f64) -> f64 {
        if value.abs() <= self.eps {
            0.0
        } else if (value - 1.0).abs() <= self.eps {
            1.0
        } else {
            value
        }
    }

    #[inline]
    pub fn is_zero(&self, value: f64) -> bool {
        value.abs() <= self.eps
    }

    #[inline]
    pub fn is_one(&self, value: f64) -> bool {
        (value - 1.0).abs() <= self.eps
    }

    /// True when `value` is an integer up to `eps`.
    #[inline]
    pub fn is_integer(&self, value: f64) -> bool {
        (value - value.round()).abs() <= self.eps
    }
}

/// An ordered vector of first-order inclusion probabilities.
///
/// Every entry lies in `[0, 1]` exactly; values within `eps` of a boundary
/// are snapped onto it at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validate raw values into a probability vector.
    ///
    /// Values in `[-eps, 0)` and `(1, 1+eps]` are snapped onto the nearest
    /// boundary; anything further out is rejected.
    pub fn validate(values: &[f64], tol: &Tolerance) -> Result<Self> {
        let mut out = Vec::with_capacity(values.len());
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < -tol.eps || value > 1.0 + tol.eps {
                return Err(OsodError::OutOfRange { index, value });
            }
            out.push(tol.snap(value).clamp(0.0, 1.0));
        }
        Ok(Self(out))
    }

    /// Wrap values that are already known to lie in `[0, 1]`.
    pub(crate) fn from_clamped(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Deref for ProbabilityVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Solution of the capped proportional scaling equation
/// `sum_k min(factor * v_k, 1) = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSolution {
    /// The scaling constant.
    pub factor: f64,
    /// Indices whose scaled value saturated at 1.
    pub capped: Vec<usize>,
    /// The scaled vector, entries snapped per the tolerance.
    pub scaled: ProbabilityVector,
}

/// Solve `sum_k min(factor * values_k, 1) = target` for `factor >= 0` over
/// arbitrary non-negative values.
///
/// Sort-based water-filling: peel off the capped prefix in descending
/// order, solve the linear remainder, and verify consistency. Degenerate
/// tie layouts fall back to bisection. When the target equals the count of
/// positive entries the solution set is a half line; the smallest factor
/// is returned so that the non-negativity certificate stays exact.
pub(crate) fn waterfill(values: &[f64], target: f64, tol: &Tolerance) -> Result<(f64, Vec<f64>)> {
    let positive: usize = values.iter().filter(|&&v| v > 0.0).count();
    let max_mass = positive as f64;
    if target < -tol.eps || target > max_mass + tol.eps {
        return Err(OsodError::Infeasible {
            target,
            min: 0.0,
            max: max_mass,
        });
    }
    if target <= tol.eps {
        return Ok((0.0, vec![0.0; values.len()]));
    }

    // Descending positive entries; zeros never move.
    let mut sorted: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // All positive entries saturate.
    if target >= max_mass - tol.eps {
        let factor = 1.0 / sorted[positive - 1];
        return Ok((factor, scale(values, factor, tol)));
    }

    // Suffix sums of the sorted entries: tail_sum[j] = sum of sorted[j..].
    let mut tail_sum = vec![0.0; positive + 1];
    for j in (0..positive).rev() {
        tail_sum[j] = tail_sum[j + 1] + sorted[j];
    }

    let slack = 1e-12;
    for capped_count in 0..positive {
        let residual = target - capped_count as f64;
        if residual < -slack {
            break;
        }
        let uncapped_sum = tail_sum[capped_count];
        if uncapped_sum <= 0.0 {
            continue;
        }
        let factor = residual / uncapped_sum;
        let prefix_ok = capped_count == 0 || factor * sorted[capped_count - 1] >= 1.0 - slack;
        let suffix_ok = factor * sorted[capped_count] <= 1.0 + slack;
        if factor >= 0.0 && prefix_ok && suffix_ok {
            return Ok((factor, scale(values, factor, tol)));
        }
    }

    bisect(values, target, &sorted, tol)
}

fn scale(values: &[f64], factor: f64, tol: &Tolerance) -> Vec<f64> {
    values
        .iter()
        .map(|&v| tol.snap((factor * v).min(1.0)).clamp(0.0, 1.0))
        .collect()
}

/// Bisection fallback on the nondecreasing map `factor -> sum min(factor*v, 1)`.
fn bisect(values: &[f64], target: f64, sorted: &[f64], tol: &Tolerance) -> Result<(f64, Vec<f64>)> {
    let total: fn(&[f64], f64) -> f64 = |vs, c| vs.iter().map(|&v| (c * v).min(1.0)).sum();
    let mut lo = 0.0;
    let mut hi = 1.0 / sorted[sorted.len() - 1];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(values, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let factor = 0.5 * (lo + hi);
    Ok((factor, scale(values, factor, tol)))
}

/// Solve the scaling equation `sum_k min(factor * p_k, 1) = target` over a
/// probability vector.
///
/// Errors with [`OsodError::Infeasible`] when the target exceeds the count
/// of positive entries, or falls below the mass already pinned at 1.
pub fn solve_scaling_constant(
    probs: &ProbabilityVector,
    target: f64,
    tol: &Tolerance,
) -> Result<ScalingSolution> {
    let ones = probs.iter().filter(|&&p| p >= 1.0).count() as f64;
    if target < ones - tol.eps {
        let max = probs.iter().filter(|&&p| p > 0.0).count() as f64;
        return Err(OsodError::Infeasible {
            target,
            min: ones,
            max,
        });
    }
    let (factor, scaled) = waterfill(probs, target, tol)?;
    let capped = scaled
        .iter()
        .enumerate()
        .filter(|&(k, &v)| v >= 1.0 && probs[k] > 0.0)
        .map(|(k, _)| k)
        .collect();
    Ok(ScalingSolution {
        factor,
        capped,
        scaled: ProbabilityVector::from_clamped(scaled),
    })
}

/// Check that the units `t..` leave room to absorb either decision:
/// their probabilities must sum to at least 1, and so must their
/// complements (with `eps` slack).
pub fn check_step_feasibility(probs: &ProbabilityVector, t: usize, tol: &Tolerance) -> bool {
    let tail = &probs[t..];
    let sum: f64 = tail.iter().sum();
    let complement: f64 = tail.iter().map(|p| 1.0 - p).sum();
    sum >= 1.0 - tol.eps && complement >= 1.0 - tol.eps
}

/// The non-negativity certificate for the selection branch: with scaling
/// constant `factor`, every updated probability stays non-negative when a
/// unit with probability `head_prob` is selected iff
/// `head_prob >= 1 - 1/factor`.
pub fn accept_branch_nonnegative(head_prob: f64, factor: f64, tol: &Tolerance) -> bool {
    debug_assert!(factor > 0.0);
    head_prob >= 1.0 - 1.0 / factor - tol.eps
}

/// Derive inclusion probabilities proportional to a positive auxiliary
/// variable, capping at 1: `p_k = min(factor * x_k, 1)` with `sum p = n`.
pub fn inclusion_from_auxiliary(x: &[f64], n: f64, tol: &Tolerance) -> Result<ProbabilityVector> {
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(OsodError::OutOfRange { index, value });
        }
    }
    if n <= 0.0 || n > x.len() as f64 + tol.eps {
        return Err(OsodError::Infeasible {
            target: n,
            min: 0.0,
            max: x.len() as f64,
        });
    }
    let (_, scaled) = waterfill(x, n, tol)?;
    Ok(ProbabilityVector::from_clamped(scaled))
}
