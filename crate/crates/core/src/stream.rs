//! Windowed stream sampling.
//!
//! Units arrive one at a time. The engine holds the undecided ones in a
//! buffer and decides the buffer head as soon as some window of upcoming
//! units can absorb the compensation: either the window mass is an integer,
//! or the scaling constant solved on the window satisfies the
//! non-negativity certificate. Window growth is the spread lever — small
//! windows force nearby units to compete, spreading the sample along the
//! arrival order.
//!
//! When the stream ends (or the buffer hits its cap) with no admissible
//! window, a phantom unit tops the buffer mass up to the next integer,
//! the residue is drained as one fixed-population run, and the phantom's
//! own decision is discarded.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OsodError, Result};
use crate::probability::{accept_branch_nonnegative, waterfill, ProbabilityVector, Tolerance};
use crate::sampler::{accept_tail, reject_tail, Decision, DecisionLedger};

/// Window search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSearch {
    /// Smallest window whose head can be decided: integer window mass or
    /// the non-negativity certificate, whichever is met first.
    SmallestAdmissible,
    /// Smallest window with integer mass; the certificate alone never
    /// opens a window. Maximizes the number of locally fixed-size blocks.
    IntegerSumFirst,
    /// Like `SmallestAdmissible`, but windows smaller than the given size
    /// are not considered. A larger floor trades spread for smoother
    /// updates.
    FixedSize(usize),
    /// Hold all units until the stream ends (or the buffer cap is hit),
    /// then decide each head on the smallest window with a solvable
    /// scaling constant when the certificate holds there strictly, and on
    /// the whole remaining buffer otherwise.
    FullBuffer,
}

/// Window policy: search strategy plus buffering limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPolicy {
    pub search: WindowSearch,
    /// Hard cap on undecided units held.
    pub max_buffer: usize,
    /// At the cap with no admissible window, append a mid-stream phantom
    /// unit (making the realized sample size random) instead of failing
    /// with `BufferOverflow`.
    pub phantom_on_overflow: bool,
}

pub const DEFAULT_MAX_BUFFER: usize = 1024;

impl Default for WindowPolicy {
    fn default() -> Self {
        Self::smallest()
    }
}

impl WindowPolicy {
    pub fn smallest() -> Self {
        Self {
            search: WindowSearch::SmallestAdmissible,
            max_buffer: DEFAULT_MAX_BUFFER,
            phantom_on_overflow: true,
        }
    }

    pub fn integer_sum() -> Self {
        Self {
            search: WindowSearch::IntegerSumFirst,
            ..Self::smallest()
        }
    }

    pub fn fixed(size: usize) -> Self {
        Self {
            search: WindowSearch::FixedSize(size.max(1)),
            ..Self::smallest()
        }
    }

    pub fn full_buffer() -> Self {
        Self {
            search: WindowSearch::FullBuffer,
            ..Self::smallest()
        }
    }

    pub fn with_max_buffer(mut self, max_buffer: usize) -> Self {
        self.max_buffer = max_buffer.max(1);
        self
    }

    pub fn with_phantom_on_overflow(mut self, allow: bool) -> Self {
        self.phantom_on_overflow = allow;
        self
    }
}

/// Result of a window search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowCheck {
    /// The buffer head can be decided with a window of this many units.
    Admissible(usize),
    /// No admissible window yet; more units are needed.
    NeedMoreUnits,
    /// The buffer is capped (or the stream has ended) with no admissible
    /// window; only a phantom unit can finish the job.
    MustPhantom,
}

/// A final decision for one unit, in arrival order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission<I = String> {
    pub id: I,
    pub selected: bool,
    /// Units that arrived between this unit and its decision.
    pub latency: usize,
}

/// Run statistics reported alongside the decisions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowReport {
    pub max_latency: usize,
    pub max_occupancy: usize,
    /// Probabilities of any phantom units appended.
    pub phantoms: Vec<f64>,
    /// True when a phantom was appended before the stream ended, which
    /// makes the realized sample size random.
    pub midstream_phantom: bool,
}

/// Decisions plus run statistics for a whole stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome<I = String> {
    pub emissions: Vec<Emission<I>>,
    pub report: WindowReport,
}

impl<I> StreamOutcome<I> {
    pub fn realized_size(&self) -> usize {
        self.emissions.iter().filter(|e| e.selected).count()
    }

    /// Positional ledger over the emitted decisions.
    pub fn ledger(&self) -> DecisionLedger {
        let decisions: Vec<Decision> = self
            .emissions
            .iter()
            .map(|e| {
                if e.selected {
                    Decision::Selected
                } else {
                    Decision::Rejected
                }
            })
            .collect();
        let mass = self.realized_size() as f64;
        let step = decisions.len();
        DecisionLedger {
            decisions,
            decided_mass: mass,
            step,
        }
    }
}

#[derive(Debug, Clone)]
struct BufferedUnit<I> {
    /// `None` marks a phantom unit.
    id: Option<I>,
    prob: f64,
    arrival: usize,
}

/// The live window engine: one per stream, single consumer.
#[derive(Debug, Clone)]
pub struct StreamSampler<I = String> {
    policy: WindowPolicy,
    tol: Tolerance,
    buffer: VecDeque<BufferedUnit<I>>,
    buffer_sum: f64,
    arrivals: usize,
    ended: bool,
    /// Set while a phantom-closed block is being drained with whole-buffer
    /// windows.
    phantom_mode: bool,
    decided: usize,
    report: WindowReport,
}

impl<I> StreamSampler<I> {
    pub fn new(policy: WindowPolicy, tol: Tolerance) -> Self {
        Self {
            policy,
            tol,
            buffer: VecDeque::new(),
            buffer_sum: 0.0,
            arrivals: 0,
            ended: false,
            phantom_mode: false,
            decided: 0,
            report: WindowReport::default(),
        }
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn buffer_sum(&self) -> f64 {
        self.buffer_sum
    }

    pub fn report(&self) -> &WindowReport {
        &self.report
    }

    pub(crate) fn head_probability(&self) -> Option<f64> {
        self.buffer.front().map(|u| u.prob)
    }

    pub(crate) fn mark_ended(&mut self) {
        self.ended = true;
    }

    /// Append a unit without deciding anything.
    pub(crate) fn append_unit(&mut self, id: I, prob: f64) -> Result<()> {
        if !prob.is_finite() || prob < -self.tol.eps || prob > 1.0 + self.tol.eps {
            return Err(OsodError::OutOfRange {
                index: self.arrivals,
                value: prob,
            });
        }
        let prob = self.tol.snap(prob).clamp(0.0, 1.0);
        self.buffer.push_back(BufferedUnit {
            id: Some(id),
            prob,
            arrival: self.arrivals,
        });
        self.arrivals += 1;
        self.buffer_sum += prob;
        self.report.max_occupancy = self.report.max_occupancy.max(self.buffer.len());
        Ok(())
    }

    fn fresh_buffer_sum(&self) -> f64 {
        self.buffer.iter().map(|u| u.prob).sum()
    }

    /// Top the buffer mass up to the next integer with a phantom unit and
    /// switch to whole-buffer draining. Nothing is appended when the mass
    /// is already integer.
    pub(crate) fn install_phantom(&mut self) {
        self.buffer_sum = self.fresh_buffer_sum();
        if !self.tol.is_integer(self.buffer_sum) {
            let prob = self.buffer_sum.ceil() - self.buffer_sum;
            self.buffer.push_back(BufferedUnit {
                id: None,
                prob,
                arrival: self.arrivals,
            });
            self.buffer_sum += prob;
            self.report.phantoms.push(prob);
            if !self.ended {
                self.report.midstream_phantom = true;
            }
        }
        self.phantom_mode = true;
    }

    /// Search for the smallest admissible window under the active policy.
    pub fn find_window(&self) -> WindowCheck {
        let len = self.buffer.len();
        if len == 0 {
            return WindowCheck::NeedMoreUnits;
        }
        if self.phantom_mode {
            return WindowCheck::Admissible(len);
        }
        let head = self.buffer[0].prob;
        if head <= 0.0 || head >= 1.0 {
            return WindowCheck::Admissible(1);
        }
        let saturated = self.ended || len >= self.policy.max_buffer;
        let found = match self.policy.search {
            WindowSearch::SmallestAdmissible => self.scan_admissible(1, true),
            WindowSearch::IntegerSumFirst => self.scan_admissible(1, false),
            WindowSearch::FixedSize(floor) => {
                let lo = if self.ended { floor.min(len) } else { floor };
                if len < lo {
                    None
                } else {
                    self.scan_admissible(lo, true)
                }
            }
            WindowSearch::FullBuffer => {
                if saturated {
                    self.scan_strict_certificate()
                } else {
                    None
                }
            }
        };
        match found {
            Some(m) => WindowCheck::Admissible(m),
            None if saturated => WindowCheck::MustPhantom,
            None => WindowCheck::NeedMoreUnits,
        }
    }

    fn window_tail(&self, m: usize) -> Vec<f64> {
        self.buffer.iter().take(m).skip(1).map(|u| u.prob).collect()
    }

    /// Smallest `m >= lo` whose window has integer mass or (when enabled)
    /// meets the non-negativity certificate, with eps slack.
    fn scan_admissible(&self, lo: usize, use_certificate: bool) -> Option<usize> {
        let len = self.buffer.len();
        let lo = lo.max(1);
        let mut sum: f64 = self.buffer.iter().take(lo - 1).map(|u| u.prob).sum();
        let mut tail_positive = self
            .buffer
            .iter()
            .take(lo - 1)
            .skip(1)
            .filter(|u| u.prob > 0.0)
            .count();
        for m in lo..=len {
            let unit = &self.buffer[m - 1];
            sum += unit.prob;
            if m >= 2 && unit.prob > 0.0 {
                tail_positive += 1;
            }
            if self.tol.is_integer(sum) {
                return Some(m);
            }
            if use_certificate && self.certificate_holds(m, sum, tail_positive) {
                return Some(m);
            }
        }
        None
    }

    fn certificate_holds(&self, m: usize, window_sum: f64, tail_positive: usize) -> bool {
        if (tail_positive as f64) < window_sum - self.tol.eps {
            return false; // the tail cannot absorb the head's rejection
        }
        let tail = self.window_tail(m);
        match waterfill(&tail, window_sum, &self.tol) {
            Ok((factor, _)) if factor > 0.0 => {
                accept_branch_nonnegative(self.buffer[0].prob, factor, &self.tol)
            }
            _ => false,
        }
    }

    /// Whole-buffer draining rule: find the smallest window whose scaling
    /// constant has an interior solution and check the certificate there,
    /// strictly. If the head wins, that window is used; if not, the whole
    /// remaining buffer is. Returns `None` when not even the full buffer
    /// can decide the head, i.e. a phantom unit is required.
    fn scan_strict_certificate(&self) -> Option<usize> {
        let len = self.buffer.len();
        let head = self.buffer[0].prob;
        let eps = self.tol.eps;
        let mut sum = head;
        let mut tail_positive = 0usize;
        for m in 2..=len {
            let unit = &self.buffer[m - 1];
            sum += unit.prob;
            if unit.prob > 0.0 {
                tail_positive += 1;
            }
            // Targets at or above the tail's reachable mass have no
            // interior scaling constant; keep growing.
            if (tail_positive as f64) <= sum + eps {
                continue;
            }
            let tail = self.window_tail(m);
            let Ok((factor, _)) = waterfill(&tail, sum, &self.tol) else {
                continue;
            };
            if head > 1.0 - 1.0 / factor + eps {
                return Some(m);
            }
            // The head cannot win in the smallest solvable window: decide
            // it over everything that is buffered instead.
            break;
        }
        // Full remaining buffer, when it is safe to decide there.
        let total = self.fresh_buffer_sum();
        if self.tol.is_integer(total) {
            return Some(len);
        }
        let tail = self.window_tail(len);
        if let Ok((factor, _)) = waterfill(&tail, total, &self.tol) {
            if accept_branch_nonnegative(head, factor, &self.tol) {
                return Some(len);
            }
        }
        None
    }

    /// Decide the buffer head with a window of `m` units and rewrite the
    /// window tail. `select` must match the forced branch for heads
    /// already at 0 or 1. Returns `None` for a phantom unit.
    pub(crate) fn resolve_head(&mut self, m: usize, select: bool) -> Result<Option<Emission<I>>> {
        debug_assert!(m >= 1 && m <= self.buffer.len());
        self.decided += 1;
        if self.decided.is_multiple_of(64) {
            self.buffer_sum = self.fresh_buffer_sum();
        }
        let head = self.buffer[0].prob;
        let tail_has_mass = self.buffer.iter().take(m).skip(1).any(|u| u.prob > 0.0);
        if head > 0.0 && head < 1.0 && tail_has_mass {
            // A window admitted for its integer mass must redistribute
            // exactly that integer, or the eps-level deficit gets
            // amplified by 1/head into a spurious negative value.
            let mut target: f64 = self.buffer.iter().take(m).map(|u| u.prob).sum();
            if self.tol.is_integer(target) {
                target = target.round();
            }
            let tail = self.window_tail(m);
            let (rejected, factor) = reject_tail(&tail, target, &self.tol)?;
            let updated = if select {
                // The window was admitted with eps slack on the
                // certificate; the selection formula amplifies that slack
                // by factor/head, so negatives inside the amplified band
                // are dust from the admission, not genuine violations.
                let band = self.tol.eps * (1.0 + factor.max(1.0) / head);
                accept_tail(&tail, &rejected, head, band, &self.tol).map_err(|e| match e {
                    OsodError::NegativeProbability { index, value } => {
                        OsodError::NegativeProbability {
                            index: self.buffer[index + 1].arrival,
                            value,
                        }
                    }
                    other => other,
                })?
            } else {
                rejected
            };
            for (unit, value) in self.buffer.iter_mut().skip(1).take(m - 1).zip(updated) {
                unit.prob = value;
            }
        } else if head <= 0.0 || head >= 1.0 {
            debug_assert_eq!(
                select,
                head >= 1.0,
                "degenerate head must take its forced branch"
            );
        }
        // A fractional head with no tail mass to absorb either branch is
        // decided by its plain probability with nothing to rewrite; this
        // is the trailing-residual case of non-integer totals.

        let unit = self
            .buffer
            .pop_front()
            .expect("resolve_head on empty buffer");
        if select {
            self.buffer_sum -= 1.0;
        }
        if self.buffer.is_empty() {
            self.phantom_mode = false;
            self.buffer_sum = 0.0;
        }
        Ok(unit.id.map(|id| {
            let latency = self.arrivals.saturating_sub(1).saturating_sub(unit.arrival);
            self.report.max_latency = self.report.max_latency.max(latency);
            Emission {
                id,
                selected: select,
                latency,
            }
        }))
    }

    fn drain<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Emission<I>>> {
        let mut out = Vec::new();
        loop {
            match self.find_window() {
                WindowCheck::NeedMoreUnits => break,
                WindowCheck::MustPhantom => {
                    if !self.ended && !self.policy.phantom_on_overflow {
                        return Err(OsodError::BufferOverflow {
                            occupancy: self.buffer.len(),
                            max_buffer: self.policy.max_buffer,
                        });
                    }
                    self.install_phantom();
                }
                WindowCheck::Admissible(m) => {
                    let head = self.buffer[0].prob;
                    let select = if head <= 0.0 {
                        false
                    } else if head >= 1.0 {
                        true
                    } else {
                        rng.random::<f64>() < head
                    };
                    if let Some(emission) = self.resolve_head(m, select)? {
                        out.push(emission);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Accept one unit and emit every decision that becomes final.
    /// Decisions are emitted in arrival order and are never revised.
    pub fn push<R: Rng + ?Sized>(
        &mut self,
        id: I,
        prob: f64,
        rng: &mut R,
    ) -> Result<Vec<Emission<I>>> {
        assert!(!self.ended, "push after the stream ended");
        self.append_unit(id, prob)?;
        self.drain(rng)
    }

    /// Close the stream and decide everything left in the buffer,
    /// appending a phantom unit if the residue cannot be decided directly.
    pub fn finish<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Emission<I>>> {
        self.ended = true;
        self.drain(rng)
    }

    /// Force phantom finalization of the current buffer: append a phantom
    /// unit raising the mass to the next integer, drain the buffer as one
    /// fixed-population run, and discard the phantom's decision.
    pub fn finalize_with_phantom<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<Vec<Emission<I>>> {
        self.ended = true;
        if self.buffer.is_empty() {
            return Ok(Vec::new());
        }
        self.install_phantom();
        self.drain(rng)
    }
}

/// Drain an entire stream of `(id, probability)` records through the
/// windowed engine with a seeded generator.
pub fn stream_sample<I, It>(
    units: It,
    policy: &WindowPolicy,
    rng_seed: u64,
    tol: &Tolerance,
) -> Result<StreamOutcome<I>>
where
    It: IntoIterator<Item = (I, f64)>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut engine = StreamSampler::new(*policy, *tol);
    let mut emissions = Vec::new();
    for (id, prob) in units {
        emissions.extend(engine.push(id, prob, &mut rng)?);
    }
    emissions.extend(engine.finish(&mut rng)?);
    Ok(StreamOutcome {
        emissions,
        report: engine.report.clone(),
    })
}

/// Convenience: stream a bare probability vector, ids are positions.
pub fn stream_sample_probs(
    probs: &ProbabilityVector,
    policy: &WindowPolicy,
    rng_seed: u64,
    tol: &Tolerance,
) -> Result<StreamOutcome<usize>> {
    stream_sample(probs.iter().copied().enumerate(), policy, rng_seed, tol)
}
