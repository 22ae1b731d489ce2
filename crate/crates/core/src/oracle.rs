//! Design enumeration and verification backbone.
//!
//! `enumerate_design` expands both branches of every decision the window
//! engine would take, weighting them by the head probability, and
//! accumulates exact leaf probabilities per sample. It drives the same
//! `resolve_head` code path as live sampling — branch injection replaces
//! the random draw — so the table certifies the shipped kernel rather
//! than a re-implementation.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OsodError, Result};
use crate::probability::{ProbabilityVector, Tolerance};
use crate::stream::{StreamSampler, WindowCheck, WindowPolicy};

/// Exact-mode population cap: at most `2^20` leaves in the worst case.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Branches lighter than this are dropped and reported as pruned mass.
const PRUNE_THRESHOLD: f64 = 1e-15;

/// Where a design table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignSource {
    Exact,
    MonteCarlo(u64),
}

/// A sampling design: probability per sample, samples keyed by a bit mask
/// with bit `k` set when unit `k` is selected.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignTable {
    pub n_units: usize,
    pub entries: BTreeMap<u64, f64>,
    pub source: DesignSource,
    /// Probability mass dropped by branch pruning (exact mode only).
    pub pruned_mass: f64,
}

impl DesignTable {
    pub fn total_probability(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn probability_of(&self, mask: &[bool]) -> f64 {
        self.entries
            .get(&Self::mask_to_bits(mask))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn mask_to_bits(mask: &[bool]) -> u64 {
        mask.iter()
            .enumerate()
            .fold(0u64, |bits, (k, &b)| if b { bits | (1 << k) } else { bits })
    }

    pub fn bits_to_mask(&self, bits: u64) -> Vec<bool> {
        (0..self.n_units).map(|k| bits & (1 << k) != 0).collect()
    }

    /// Render a sample as a left-to-right 0/1 string in unit order.
    pub fn bits_string(&self, bits: u64) -> String {
        (0..self.n_units)
            .map(|k| if bits & (1 << k) != 0 { '1' } else { '0' })
            .collect()
    }

    /// First-order inclusion probabilities implied by the table.
    pub fn marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_units];
        for (&bits, &p) in &self.entries {
            for (k, slot) in out.iter_mut().enumerate() {
                if bits & (1 << k) != 0 {
                    *slot += p;
                }
            }
        }
        out
    }
}

/// Symmetric matrix of second-order inclusion probabilities, first-order
/// values on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct JointInclusionMatrix {
    pub n: usize,
    data: Vec<f64>,
}

impl JointInclusionMatrix {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.data[k * self.n + l]
    }

    pub fn marginal(&self, k: usize) -> f64 {
        self.get(k, k)
    }
}

/// Second-order inclusion probabilities of a design:
/// `joint(k, l) = sum of p(s) over samples containing both k and l`.
pub fn joint_inclusion(design: &DesignTable) -> JointInclusionMatrix {
    let n = design.n_units;
    let mut data = vec![0.0; n * n];
    for (&bits, &p) in &design.entries {
        let members: Vec<usize> = (0..n).filter(|k| bits & (1 << k) != 0).collect();
        for &k in &members {
            for &l in &members {
                data[k * n + l] += p;
            }
        }
    }
    JointInclusionMatrix { n, data }
}

struct Node {
    engine: StreamSampler<usize>,
    next_unit: usize,
    weight: f64,
    bits: u64,
}

/// Exactly enumerate the design realized by the window engine under
/// `policy` on a fixed population, by expanding both branches of every
/// stochastic decision.
pub fn enumerate_design(
    probs: &ProbabilityVector,
    policy: &WindowPolicy,
    tol: &Tolerance,
) -> Result<DesignTable> {
    enumerate_design_with_cap(probs, policy, tol, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_design_with_cap(
    probs: &ProbabilityVector,
    policy: &WindowPolicy,
    tol: &Tolerance,
    cap: usize,
) -> Result<DesignTable> {
    let n = probs.len();
    if n > cap || n > 63 {
        return Err(OsodError::TooLarge {
            n,
            cap: cap.min(63),
        });
    }

    let mut entries: BTreeMap<u64, f64> = BTreeMap::new();
    let mut pruned_mass = 0.0;
    let mut stack = vec![Node {
        engine: StreamSampler::new(*policy, *tol),
        next_unit: 0,
        weight: 1.0,
        bits: 0,
    }];

    while let Some(mut node) = stack.pop() {
        loop {
            match node.engine.find_window() {
                WindowCheck::NeedMoreUnits => {
                    if node.next_unit < n {
                        node.engine
                            .append_unit(node.next_unit, probs[node.next_unit])?;
                        node.next_unit += 1;
                    } else if node.engine.buffer_len() == 0 {
                        *entries.entry(node.bits).or_insert(0.0) += node.weight;
                        break;
                    } else {
                        node.engine.mark_ended();
                    }
                }
                WindowCheck::MustPhantom => node.engine.install_phantom(),
                WindowCheck::Admissible(m) => {
                    let head = node
                        .engine
                        .head_probability()
                        .expect("admissible, so non-empty");
                    if head <= 0.0 || head >= 1.0 {
                        let emission = node.engine.resolve_head(m, head >= 1.0)?;
                        if let Some(e) = emission {
                            if e.selected {
                                node.bits |= 1 << e.id;
                            }
                        }
                        continue;
                    }
                    let select_weight = node.weight * head;
                    let reject_weight = node.weight * (1.0 - head);
                    if select_weight >= PRUNE_THRESHOLD {
                        let mut engine = node.engine.clone();
                        let emission = engine.resolve_head(m, true)?;
                        let mut bits = node.bits;
                        if let Some(e) = emission {
                            if e.selected {
                                bits |= 1 << e.id;
                            }
                        }
                        stack.push(Node {
                            engine,
                            next_unit: node.next_unit,
                            weight: select_weight,
                            bits,
                        });
                    } else {
                        pruned_mass += select_weight;
                    }
                    if reject_weight >= PRUNE_THRESHOLD {
                        node.engine.resolve_head(m, false)?;
                        node.weight = reject_weight;
                    } else {
                        pruned_mass += reject_weight;
                        break;
                    }
                }
            }
        }
    }

    Ok(DesignTable {
        n_units: n,
        entries,
        source: DesignSource::Exact,
        pruned_mass,
    })
}

/// Empirical design over independent seeded runs. Replication `r` uses the
/// generator stream `(rng_seed, r)`, so parallel and serial runs agree.
pub fn monte_carlo_design(
    probs: &ProbabilityVector,
    policy: &WindowPolicy,
    replications: u64,
    rng_seed: u64,
    tol: &Tolerance,
) -> Result<DesignTable> {
    let n = probs.len();
    if n > 63 {
        return Err(OsodError::TooLarge { n, cap: 63 });
    }
    assert!(replications >= 1, "at least one replication");

    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for rep in 0..replications {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(rep);
        let mut engine: StreamSampler<usize> = StreamSampler::new(*policy, *tol);
        let mut bits = 0u64;
        let mut record = |emissions: Vec<crate::stream::Emission<usize>>| {
            for e in emissions {
                if e.selected {
                    bits |= 1 << e.id;
                }
            }
        };
        for (k, &p) in probs.iter().enumerate() {
            record(engine.push(k, p, &mut rng)?);
        }
        record(engine.finish(&mut rng)?);
        *counts.entry(bits).or_insert(0) += 1;
    }

    let entries = counts
        .into_iter()
        .map(|(bits, c)| (bits, c as f64 / replications as f64))
        .collect();
    Ok(DesignTable {
        n_units: n,
        entries,
        source: DesignSource::MonteCarlo(replications),
        pruned_mass: 0.0,
    })
}
