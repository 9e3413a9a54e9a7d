use std::collections::BTreeSet;

use jigsaw_core::noise_sim::{
    best_qubit_assignment, expected_distribution, ideal_distribution, sample_counts, spatial_profile,
    stream_rng, ChannelError, Crosstalk, IdealSpec, NoiseProfile, QubitAssignment,
};
use jigsaw_core::subsetting::{estimate_trials, multilayer_plan, sliding_window_plan, split_trials};
use jigsaw_core::{Outcome, SparsePmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of `reps` runs of `trials` uniform draws over `outcomes`
/// values that hit every value at least once.
fn coupon_coverage(outcomes: usize, trials: u64, reps: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = 0;
    for _ in 0..reps {
        let mut seen = vec![false; outcomes];
        let mut left = outcomes;
        for _ in 0..trials {
            let v = rng.random_range(0..outcomes);
            if !seen[v] {
                seen[v] = true;
                left -= 1;
                if left == 0 {
                    break;
                }
            }
        }
        covered += usize::from(left == 0);
    }
    covered as f64 / reps as f64
}

#[test]
fn trial_estimate_covers_every_outcome() {
    let t2 = estimate_trials(2, 0.9999).unwrap();
    assert_eq!(t2, 148);
    assert!(coupon_coverage(4, t2, 10_000, 1) >= 0.999);

    let t5 = estimate_trials(5, 0.9999).unwrap();
    assert_eq!(t5, (-(1e-4f64).ln() * 1024.0).ceil() as u64);
    assert!(coupon_coverage(32, t5, 2_000, 2) >= 0.999);
}

#[test]
fn trial_estimate_is_monotone_and_small_confidence_is_linear() {
    for s in 1..8 {
        assert!(estimate_trials(s + 1, 0.99).unwrap() > estimate_trials(s, 0.99).unwrap());
    }
    assert!(estimate_trials(3, 0.999).unwrap() > estimate_trials(3, 0.99).unwrap());
    // -ln(1 - P) ~ P for small P
    assert_eq!(estimate_trials(2, 1e-3).unwrap(), 1);
    assert!(estimate_trials(2, 0.0).is_err());
    assert!(estimate_trials(2, 1.0).is_err());
}

#[test]
fn plan_examples() {
    let p = sliding_window_plan(4, 2).unwrap();
    let sets: BTreeSet<Vec<usize>> = p.cpms().map(|c| c.to_vec()).collect();
    assert_eq!(sets, [vec![1, 0], vec![2, 1], vec![3, 2], vec![3, 0]].into());
    assert_eq!(sliding_window_plan(2, 2).unwrap().cpm_count(), 1);
    assert_eq!(sliding_window_plan(5, 3).unwrap().cpm_count(), 5);
    assert_eq!(multilayer_plan(10, 2, 5).unwrap().cpm_count(), 40);
    let m = multilayer_plan(4, 2, 4).unwrap();
    assert_eq!(m.sizes(), vec![4, 3, 2]);
    assert_eq!(m.layers[0].subsets.len(), 1);
    assert!(sliding_window_plan(4, 1).is_err());
    assert!(sliding_window_plan(4, 5).is_err());

    let b = split_trials(1000, &sliding_window_plan(3, 2).unwrap(), 0.5).unwrap();
    assert_eq!((b.global, b.per_cpm.clone()), (500, vec![167, 167, 166]));
    let two = jigsaw_core::subsetting::random_plan(4, 2, 2, 0).unwrap();
    let b = split_trials(1000, &two, 0.25).unwrap();
    assert_eq!((b.global, b.per_cpm), (250, vec![375, 375]));
}

fn symmetric(rates: &[f64], crosstalk: Crosstalk) -> NoiseProfile {
    NoiseProfile::new(rates.iter().map(|&r| ChannelError::symmetric(r)).collect(), crosstalk).unwrap()
}

#[test]
fn exact_readout_is_a_stochastic_map() {
    let profile = spatial_profile(8, 0.03, 0.2, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ideal = ideal_distribution(&IdealSpec::planted_random(6, 0.4, 10, &mut rng).unwrap()).unwrap();
    let measured = [5, 3, 0];
    let exact = expected_distribution(&ideal, &profile, &QubitAssignment::identity(6), &measured).unwrap();
    let total: f64 = exact.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(exact.len(), 8);
}

#[test]
fn sampling_agrees_with_exact_readout() {
    let profile = spatial_profile(8, 0.03, 0.2, 6).unwrap();
    let ideal = ideal_distribution(&IdealSpec::Ghz { width: 4 }).unwrap();
    let measured = [3, 1, 0];
    let assignment = best_qubit_assignment(&profile, &measured).unwrap();
    let exact = expected_distribution(&ideal, &profile, &assignment, &measured).unwrap();
    let counts = sample_counts(&ideal, &profile, &assignment, &measured, 200_000, &mut stream_rng(7, 0)).unwrap();
    let sampled = counts.to_pmf().unwrap();
    // 8 cells at 200k trials: TVD sampling noise is well under 0.01
    assert!(jigsaw_core::metrics::tvd(&sampled, &exact).unwrap() < 0.01);
}

#[test]
fn binomial_flip_rate() {
    let profile = NoiseProfile::new(vec![ChannelError { p01: 0.1, p10: 0.0 }], Crosstalk::None).unwrap();
    let ideal = SparsePmf::delta("0".parse().unwrap());
    let counts =
        sample_counts(&ideal, &profile, &QubitAssignment::identity(1), &[0], 10_000, &mut stream_rng(8, 0)).unwrap();
    let ones = counts.get(&"1".parse().unwrap()) as f64;
    let sigma = (10_000.0f64 * 0.1 * 0.9).sqrt();
    assert!((ones - 1000.0).abs() < 3.0 * sigma, "{ones}");
}

#[test]
fn noiseless_channel_reproduces_the_ideal_marginal() {
    let ideal = ideal_distribution(&IdealSpec::Ghz { width: 5 }).unwrap();
    let profile = NoiseProfile::noiseless(5);
    let exact = expected_distribution(&ideal, &profile, &QubitAssignment::identity(5), &[4, 2]).unwrap();
    assert_eq!(exact, ideal.marginalize(&[4, 2]).unwrap().pmf().clone());
}

#[test]
fn crosstalk_inflates_at_ten_measurements() {
    let profile = symmetric(&[0.05; 10], Crosstalk::default());
    assert_eq!(profile.flip_probability(0, false, 1), 0.05);
    assert!((profile.flip_probability(0, false, 10) / 0.05 - 1.26).abs() < 1e-12);
}

#[test]
fn success_drops_as_more_qubits_are_read() {
    // all-zero input on identical channels: the chance of reading all zeros
    // falls with every extra simultaneous measurement
    let profile = symmetric(&[0.03; 10], Crosstalk::default());
    let ideal = SparsePmf::delta(Outcome::zeros(10));
    let mut last = 1.0;
    for k in 1..=10 {
        let measured: Vec<usize> = (0..k).collect();
        let exact = expected_distribution(&ideal, &profile, &QubitAssignment::identity(10), &measured).unwrap();
        let success = exact.get(&Outcome::zeros(k));
        assert!(success < last);
        last = success;
    }
}

#[test]
fn best_assignment_prefers_quiet_channels() {
    let profile = symmetric(&[0.01, 0.20, 0.03, 0.05], Crosstalk::None);
    let a = best_qubit_assignment(&profile, &[7, 3]).unwrap();
    assert_eq!(a.channels(), [0, 2].into());
    let uniform = symmetric(&[0.02; 4], Crosstalk::None);
    let a = best_qubit_assignment(&uniform, &[1, 0]).unwrap();
    assert_eq!(a.channels(), [0, 1].into());
    let all = best_qubit_assignment(&profile, &[0, 1, 2, 3]).unwrap();
    assert_eq!(all.channels().len(), 4);
}

#[test]
fn toronto_like_profile() {
    for seed in 0..20 {
        let p = spatial_profile(27, 0.027, 0.222, seed).unwrap();
        let means: Vec<f64> = p.channels.iter().map(ChannelError::mean).collect();
        let median = jigsaw_core::noise_sim::sample_median(&means);
        assert!((median / 0.027 - 1.0).abs() <= 0.2, "median {median}");
        let max = means.iter().cloned().fold(0.0, f64::max);
        assert!((max - 0.222).abs() < 1e-12);
        assert_eq!(p, spatial_profile(27, 0.027, 0.222, seed).unwrap());
    }
    let flat = spatial_profile(5, 0.05, 0.05, 1).unwrap();
    assert!(flat.channels.iter().all(|c| (c.mean() - 0.05).abs() < 1e-12));
}

#[test]
fn ideal_examples() {
    let ghz = ideal_distribution(&IdealSpec::Ghz { width: 4 }).unwrap();
    assert_eq!(ghz.get(&"0000".parse().unwrap()), 0.5);
    assert_eq!(ghz.get(&"1111".parse().unwrap()), 0.5);
    let support: Vec<Outcome> = (0..8).map(|v| Outcome::from_u64(v, 3).unwrap()).collect();
    let planted = IdealSpec::Planted { correct: support[5].clone(), lambda: 0.6, support };
    let p = ideal_distribution(&planted).unwrap();
    assert!((p.get(&"101".parse().unwrap()) - (0.6 + 0.4 / 8.0)).abs() < 1e-12);
}
