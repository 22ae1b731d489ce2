//! Randomized invariants tying the modules together: mass conservation,
//! the branch martingale, the non-negativity certificate, marginal
//! recovery by exact enumeration, and estimator unbiasedness.

use proptest::prelude::*;

use osod_core::{
    accept_branch_nonnegative, check_step_feasibility, enumerate_design, ht_estimate,
    inclusion_from_auxiliary, joint_inclusion, monte_carlo_design, pivotal_sample,
    sample_population, solve_scaling_constant, stream_sample_probs, systematic_sample,
    update_on_accept, update_on_reject, OsodError, ProbabilityVector, StreamSampler, Tolerance,
    WindowCheck, WindowPolicy,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: Tolerance = Tolerance {
    eps: 1e-9,
    mc_sigma: 3,
};

fn pv(values: &[f64]) -> ProbabilityVector {
    ProbabilityVector::validate(values, &TOL).unwrap()
}

/// Fractional probabilities bounded away from 0 and 1.
fn prob_vec(min_len: usize, max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, min_len..=max_len)
}

/// Positive auxiliary sizes with some skew.
fn aux_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, 2..12)
}

proptest! {
    #[test]
    fn scaling_map_is_monotone_and_exact(values in prob_vec(2, 12), frac in 0.0f64..1.0) {
        let probs = pv(&values);
        let reachable = values.iter().filter(|&&v| v > 0.0).count() as f64;
        let sum: f64 = values.iter().sum();
        let target = sum + frac * (reachable - sum);
        let sol = solve_scaling_constant(&probs, target, &TOL).unwrap();
        prop_assert!((sol.scaled.iter().sum::<f64>() - target).abs() <= 1e-9);
        // Monotonicity of the map at the solved point.
        let smaller: f64 = values.iter().map(|&v| (0.9 * sol.factor * v).min(1.0)).sum();
        prop_assert!(smaller <= target + 1e-9);
    }

    #[test]
    fn scaling_is_idempotent_at_current_sum(values in prob_vec(2, 12)) {
        let probs = pv(&values);
        let sum: f64 = values.iter().sum();
        let sol = solve_scaling_constant(&probs, sum, &TOL).unwrap();
        prop_assert!((sol.factor - 1.0).abs() <= 1e-9);
        for (got, want) in sol.scaled.iter().zip(&values) {
            prop_assert!((got - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn auxiliary_inclusions_sum_to_n_and_preserve_order(x in aux_vec(), n in 1usize..6) {
        prop_assume!(n < x.len());
        let probs = inclusion_from_auxiliary(&x, n as f64, &TOL).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - n as f64).abs() <= 1e-9);
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
        for pair in order.windows(2) {
            prop_assert!(probs[pair[0]] <= probs[pair[1]] + 1e-12);
        }
    }

    #[test]
    fn step_update_conserves_mass_and_martingale(values in prob_vec(3, 10)) {
        let probs = pv(&values);
        prop_assume!(check_step_feasibility(&probs, 0, &TOL));
        let total: f64 = values.iter().sum();
        let (rej, factor) = update_on_reject(&probs, 0, total, &TOL).unwrap();
        prop_assert!((rej.iter().sum::<f64>() - total).abs() <= 1e-9);
        prop_assert!(rej.iter().all(|&p| (0.0..=1.0).contains(&p)));

        let head = probs[0];
        match update_on_accept(&probs, 0, &rej, &TOL) {
            Ok(acc) => {
                prop_assert!(accept_branch_nonnegative(head, factor, &TOL));
                prop_assert!((acc.iter().sum::<f64>() - total).abs() <= 1e-9);
                prop_assert!(acc.iter().all(|&p| (0.0..=1.0).contains(&p)));
                for k in 0..values.len() {
                    let blended = head * acc[k] + (1.0 - head) * rej[k];
                    prop_assert!((blended - probs[k]).abs() <= 1e-9, "unit {k}");
                }
            }
            Err(OsodError::NegativeProbability { .. }) => {
                // The certificate must agree that the branch is unsafe.
                prop_assert!(!accept_branch_nonnegative(head, factor, &TOL));
            }
            Err(other) => prop_assert!(false, "unexpected error {other:?}"),
        }
    }

    #[test]
    fn certificate_is_exactly_the_nonnegativity_condition(values in prob_vec(2, 10)) {
        // Cross-module: the certificate evaluated on the solved constant
        // predicts the sign outcome of the selection branch, both ways.
        let probs = pv(&values);
        let total: f64 = values.iter().sum();
        let tail_room = values.len() as f64 - 1.0;
        prop_assume!(total < tail_room - 1e-6);
        let (rej, factor) = update_on_reject(&probs, 0, total, &TOL).unwrap();
        let safe = accept_branch_nonnegative(probs[0], factor, &TOL);
        let accepted = update_on_accept(&probs, 0, &rej, &TOL);
        prop_assert_eq!(safe, accepted.is_ok());
    }

    #[test]
    fn integer_sum_population_completes_with_fixed_size(
        x in aux_vec(),
        n in 1usize..6,
        seed in 0u64..1_000_000,
    ) {
        prop_assume!(n < x.len());
        let probs = inclusion_from_auxiliary(&x, n as f64, &TOL).unwrap();
        let ledger = sample_population(&probs, seed, &TOL).unwrap();
        prop_assert!(ledger.is_complete());
        prop_assert_eq!(ledger.realized_size(), n);
    }

    #[test]
    fn enumeration_recovers_marginals_for_every_policy(values in prob_vec(2, 7)) {
        let probs = pv(&values);
        for policy in [
            WindowPolicy::smallest(),
            WindowPolicy::integer_sum(),
            WindowPolicy::fixed(2),
            WindowPolicy::full_buffer(),
        ] {
            let design = enumerate_design(&probs, &policy, &TOL).unwrap();
            prop_assert!((design.total_probability() - 1.0).abs() <= 1e-9);
            for (k, (got, want)) in design.marginals().iter().zip(&values).enumerate() {
                prop_assert!(
                    (got - want).abs() <= 1e-9,
                    "policy {:?} unit {}: {} vs {}", policy.search, k, got, want
                );
            }
        }
    }

    #[test]
    fn expansion_estimator_is_unbiased_by_enumeration(
        values in prob_vec(2, 7),
        y_raw in prop::collection::vec(-5.0f64..5.0, 7),
    ) {
        let probs = pv(&values);
        let y = &y_raw[..values.len()];
        let design = enumerate_design(&probs, &WindowPolicy::smallest(), &TOL).unwrap();
        let total: f64 = y.iter().sum();
        let mut expectation = 0.0;
        for (&bits, &p) in &design.entries {
            let mask = design.bits_to_mask(bits);
            expectation += p * ht_estimate(&mask, y, &probs).unwrap();
        }
        prop_assert!((expectation - total).abs() <= 1e-9, "{} vs {}", expectation, total);
    }

    #[test]
    fn smallest_window_never_leaves_an_admissible_head_waiting(
        values in prob_vec(2, 20),
        seed in 0u64..1_000_000,
    ) {
        // After every push returns, nothing in the buffer is decidable.
        let mut engine: StreamSampler<usize> =
            StreamSampler::new(WindowPolicy::smallest(), TOL);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (k, &p) in values.iter().enumerate() {
            engine.push(k, p, &mut rng).unwrap();
            prop_assert_eq!(engine.find_window(), WindowCheck::NeedMoreUnits);
        }
    }

    #[test]
    fn stream_decisions_cover_every_unit_once(
        values in prob_vec(1, 25),
        seed in 0u64..1_000_000,
    ) {
        let probs = pv(&values);
        let outcome = stream_sample_probs(&probs, &WindowPolicy::smallest(), seed, &TOL).unwrap();
        prop_assert_eq!(outcome.emissions.len(), values.len());
        let ids: Vec<usize> = outcome.emissions.iter().map(|e| e.id).collect();
        let sorted = { let mut v = ids.clone(); v.sort_unstable(); v };
        prop_assert_eq!(&ids, &sorted);
        prop_assert_eq!(*sorted.last().unwrap(), values.len() - 1);
    }

    #[test]
    fn baseline_samplers_have_fixed_size(x in aux_vec(), n in 1usize..6, seed in 0u64..100_000) {
        prop_assume!(n < x.len());
        let probs = inclusion_from_auxiliary(&x, n as f64, &TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: f64 = rand::Rng::random(&mut rng);
        let sys = systematic_sample(&probs, u, true, &mut rng, &TOL).unwrap();
        prop_assert_eq!(sys.iter().filter(|&&b| b).count(), n);
        let piv = pivotal_sample(&probs, &mut rng, &TOL).unwrap();
        prop_assert_eq!(piv.iter().filter(|&&b| b).count(), n);
    }
}

/// Phantom finalization keeps exact marginals: enumerate small buffers
/// with non-integer mass and compare against the inputs.
#[test]
fn phantom_finalization_preserves_marginals_exactly() {
    let cases: Vec<Vec<f64>> = vec![
        vec![0.3],
        vec![0.85, 0.9, 0.02],
        vec![0.45, 0.33, 0.71, 0.62],
        vec![0.9, 0.95, 0.9, 0.93, 0.91],
        vec![0.05, 0.1, 0.2, 0.15, 0.12, 0.08],
    ];
    for values in cases {
        let probs = pv(&values);
        let design = enumerate_design(&probs, &WindowPolicy::full_buffer(), &TOL).unwrap();
        assert!((design.total_probability() - 1.0).abs() <= 1e-9);
        for (k, (got, want)) in design.marginals().iter().zip(&values).enumerate() {
            assert!((got - want).abs() <= 1e-9, "unit {k}: {got} vs {want}");
        }
    }
}

/// Integer-mass windows behave like fixed-size designs inside the window.
#[test]
fn integer_windows_select_exactly_their_mass() {
    // Integer windows with masses 1, 2, 1 closing at units 2, 5 and 7.
    let values = [0.5, 0.5, 0.7, 0.8, 0.5, 0.2, 0.8];
    let probs = pv(&values);
    for seed in 0..300 {
        let outcome = stream_sample_probs(&probs, &WindowPolicy::smallest(), seed, &TOL).unwrap();
        let mut mask = vec![false; values.len()];
        for e in &outcome.emissions {
            mask[e.id] = e.selected;
        }
        let w1: usize = mask[0..2].iter().filter(|&&b| b).count();
        let w2: usize = mask[2..5].iter().filter(|&&b| b).count();
        let w3: usize = mask[5..7].iter().filter(|&&b| b).count();
        assert_eq!(w1, 1, "seed {seed}");
        assert_eq!(w2, 2, "seed {seed}");
        assert_eq!(w3, 1, "seed {seed}");
        assert_eq!(outcome.realized_size(), 4, "seed {seed}");
    }
}

/// Exact and Monte Carlo design tables agree in total variation.
#[test]
fn exact_and_monte_carlo_designs_agree() {
    let cases: Vec<Vec<f64>> = vec![
        vec![0.5, 0.5, 0.3, 0.1, 0.6],
        vec![0.2, 0.8, 0.5, 0.5],
        vec![0.35, 0.45, 0.6, 0.4, 0.7, 0.5],
    ];
    for (i, values) in cases.into_iter().enumerate() {
        let policy = if i == 0 {
            WindowPolicy::full_buffer()
        } else {
            WindowPolicy::smallest()
        };
        let probs = pv(&values);
        let exact = enumerate_design(&probs, &policy, &TOL).unwrap();
        let mc = monte_carlo_design(&probs, &policy, 100_000, 2024, &TOL).unwrap();
        let mut keys: std::collections::BTreeSet<u64> = exact.entries.keys().copied().collect();
        keys.extend(mc.entries.keys());
        let tv: f64 = keys
            .into_iter()
            .map(|bits| {
                let a = exact.entries.get(&bits).copied().unwrap_or(0.0);
                let b = mc.entries.get(&bits).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.01, "total variation {tv}");
    }
}

/// The plug-in variance estimator is unbiased over the exact design when
/// every pair of units can be co-selected. Pairs with zero joint
/// probability break the identity, which is the formula's classical
/// applicability condition.
#[test]
fn variance_estimator_unbiased_on_random_small_designs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for _ in 0..40 {
        let n = 4 + (rand::Rng::random::<f64>(&mut rng) * 3.0) as usize;
        let values: Vec<f64> = (0..n)
            .map(|_| 0.2 + 0.6 * rand::Rng::random::<f64>(&mut rng))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| rand::Rng::random::<f64>(&mut rng) * 10.0)
            .collect();
        let probs = pv(&values);
        let design = enumerate_design(&probs, &WindowPolicy::full_buffer(), &TOL).unwrap();
        let joint = joint_inclusion(&design);
        let all_pairs_positive = (0..n).all(|k| (0..n).all(|l| k == l || joint.get(k, l) > 0.0));
        if !all_pairs_positive {
            continue;
        }
        checked += 1;
        let var = osod_core::true_variance(&design, &y, &probs).unwrap();
        let mut expectation = 0.0;
        for (&bits, &p) in &design.entries {
            let mask = design.bits_to_mask(bits);
            expectation += p * osod_core::variance_estimate(&mask, &joint, &y, &probs).unwrap();
        }
        assert!((expectation - var).abs() <= 1e-9, "{expectation} vs {var}");
    }
    assert!(
        checked >= 5,
        "only {checked} designs had fully positive joints"
    );
}

/// Empirical inclusion frequencies of the fixed-population sampler match
/// the input probabilities within the Monte Carlo band.
#[test]
fn sampler_hits_empirical_marginals() {
    let values = [0.5, 0.5, 0.3, 0.1, 0.6, 0.7, 0.3];
    let probs = pv(&values);
    let reps = 100_000u64;
    let mut counts = [0u64; 7];
    for seed in 0..reps {
        let ledger = sample_population(&probs, seed, &TOL).unwrap();
        for k in ledger.selected_indices() {
            counts[k] += 1;
        }
    }
    for (k, (&c, &p)) in counts.iter().zip(&values).enumerate() {
        let freq = c as f64 / reps as f64;
        let band = TOL.mc_sigma as f64 * (p * (1.0 - p) / reps as f64).sqrt();
        assert!(
            (freq - p).abs() < band,
            "unit {k}: freq {freq} prob {p} band {band}"
        );
    }
}
