//! Synthetic readout channel.
//!
//! Each physical readout channel misreads a `0` as `1` with probability
//! `p01` and a `1` as `0` with probability `p10`. Both rates are inflated by
//! a crosstalk factor that grows with the number of qubits read out in the
//! same shot. Gate and decoherence errors are not modeled.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::pmf::{validate_qubits, Counts, Outcome, SparsePmf};

/// Flip probabilities are clamped strictly below one half.
pub const MAX_FLIP_PROBABILITY: f64 = 0.499;

/// Crosstalk slope giving a 1.26x inflation when ten qubits are read together.
pub const DEFAULT_CROSSTALK_SLOPE: f64 = 0.26 / 9.0;

/// Relative weight of state-0 and state-1 readout errors.
pub const DEFAULT_ASYMMETRY: (f64, f64) = (2.3, 3.6);

/// Widest measurement the exhaustive expectation mode will enumerate.
pub const MAX_EXACT_BITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ChannelError {
    /// P(read 1 | true 0)
    pub p01: f64,
    /// P(read 0 | true 1)
    pub p10: f64,
}

impl ChannelError {
    pub fn symmetric(rate: f64) -> Self {
        ChannelError { p01: rate, p10: rate }
    }

    pub fn mean(&self) -> f64 {
        (self.p01 + self.p10) / 2.0
    }
}

impl From<[f64; 2]> for ChannelError {
    fn from([p01, p10]: [f64; 2]) -> Self {
        ChannelError { p01, p10 }
    }
}

impl From<ChannelError> for [f64; 2] {
    fn from(e: ChannelError) -> Self {
        [e.p01, e.p10]
    }
}

/// Multiplier on error rates as a function of simultaneous measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Crosstalk {
    None,
    /// `1 + slope * (k - 1)`
    Linear { slope: f64 },
    /// Factor for `k = 1, 2, ...`; the last entry holds for larger `k`.
    Table(Vec<f64>),
}

impl Default for Crosstalk {
    fn default() -> Self {
        Crosstalk::Linear {
            slope: DEFAULT_CROSSTALK_SLOPE,
        }
    }
}

impl Crosstalk {
    pub fn factor(&self, k: usize) -> f64 {
        let k = k.max(1);
        match self {
            Crosstalk::None => 1.0,
            Crosstalk::Linear { slope } => 1.0 + slope * (k - 1) as f64,
            Crosstalk::Table(t) => t.get(k - 1).or(t.last()).copied().unwrap_or(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Crosstalk::None => Ok(()),
            Crosstalk::Linear { slope } if *slope >= 0.0 && slope.is_finite() => Ok(()),
            Crosstalk::Linear { slope } => Err(Error::argument(format!(
                "crosstalk slope {slope} must be a nonnegative number"
            ))),
            Crosstalk::Table(t) => {
                if t.first() != Some(&1.0) {
                    return Err(Error::argument("crosstalk table must start at 1.0"));
                }
                if t.windows(2).any(|w| !(w[1] >= w[0])) {
                    return Err(Error::argument("crosstalk table must be non-decreasing"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub channels: Vec<ChannelError>,
    pub crosstalk: Crosstalk,
    /// Probability that a shot's readout is replaced by a uniformly random
    /// bitstring. Zero unless stress-testing.
    #[serde(default)]
    pub output_depolarizing: f64,
}

impl NoiseProfile {
    pub fn new(channels: Vec<ChannelError>, crosstalk: Crosstalk) -> Result<Self> {
        let profile = NoiseProfile {
            channels,
            crosstalk,
            output_depolarizing: 0.0,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn noiseless(n_channels: usize) -> Self {
        NoiseProfile {
            channels: vec![ChannelError::symmetric(0.0); n_channels],
            crosstalk: Crosstalk::None,
            output_depolarizing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::argument("noise profile has no channels"));
        }
        for (i, c) in self.channels.iter().enumerate() {
            for rate in [c.p01, c.p10] {
                if !(0.0..0.5).contains(&rate) {
                    return Err(Error::argument(format!(
                        "channel {i}: error rate {rate} outside [0, 0.5)"
                    )));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.output_depolarizing) {
            return Err(Error::argument("output depolarizing must lie in [0, 1]"));
        }
        self.crosstalk.validate()
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Flip probability for a bit whose true value is `bit`, read on
    /// `channel` while `k` qubits are measured in total.
    pub fn flip_probability(&self, channel: usize, bit: bool, k: usize) -> f64 {
        let c = &self.channels[channel];
        let base = if bit { c.p10 } else { c.p01 };
        (base * self.crosstalk.factor(k)).min(MAX_FLIP_PROBABILITY)
    }
}

/// Error profile with spatial variation: log-normal base rates scaled to the
/// requested median, the worst channel pinned at `max_err`, and each rate
/// split into state-0/state-1 parts with the default asymmetry.
pub fn spatial_profile(n_channels: usize, median_err: f64, max_err: f64, seed: u64) -> Result<NoiseProfile> {
    spatial_profile_with(n_channels, median_err, max_err, DEFAULT_ASYMMETRY, seed)
}

pub fn spatial_profile_with(
    n_channels: usize,
    median_err: f64,
    max_err: f64,
    asymmetry: (f64, f64),
    seed: u64,
) -> Result<NoiseProfile> {
    if n_channels == 0 {
        return Err(Error::argument("need at least one channel"));
    }
    if !(median_err > 0.0 && median_err <= max_err) {
        return Err(Error::argument("require 0 < median_err <= max_err"));
    }
    let (a0, a1) = asymmetry;
    if !(a0 > 0.0 && a1 > 0.0) {
        return Err(Error::argument("asymmetry weights must be positive"));
    }
    let split0 = 2.0 * a0 / (a0 + a1);
    let split1 = 2.0 * a1 / (a0 + a1);
    if max_err * split0.max(split1) >= 0.5 {
        return Err(Error::argument(format!(
            "max_err {max_err} exceeds 0.5 once split by the asymmetry"
        )));
    }

    // spread chosen so the expected sample maximum lands near max_err
    let quantile = 1.0 - 1.0 / (2.0 * n_channels as f64);
    let z_max = Normal::standard().inverse_cdf(quantile).max(1.0);
    let sigma = (max_err / median_err).ln() / z_max;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base: Vec<f64> = (0..n_channels)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (sigma * z).exp()
        })
        .collect();
    let scale = median_err / sample_median(&base);
    base.iter_mut().for_each(|b| *b = (*b * scale).min(max_err));
    let worst = base
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    if n_channels >= 3 || median_err == max_err {
        base[worst] = max_err;
    }

    let channels = base
        .into_iter()
        .map(|b| ChannelError {
            p01: b * split0,
            p10: b * split1,
        })
        .collect();
    NoiseProfile::new(channels, Crosstalk::default())
}

/// Median with the even-length convention of averaging the middle pair.
pub fn sample_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Which physical readout channel each logical qubit is measured on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitAssignment(BTreeMap<usize, usize>);

impl QubitAssignment {
    pub fn new(map: BTreeMap<usize, usize>) -> Result<Self> {
        let channels: BTreeSet<usize> = map.values().copied().collect();
        if channels.len() != map.len() {
            return Err(Error::argument("qubit assignment maps two qubits to one channel"));
        }
        Ok(QubitAssignment(map))
    }

    /// Logical qubit `q` on channel `q`.
    pub fn identity(n: usize) -> Self {
        QubitAssignment((0..n).map(|q| (q, q)).collect())
    }

    pub fn channel(&self, qubit: usize) -> Option<usize> {
        self.0.get(&qubit).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&q, &c)| (q, c))
    }

    pub fn channels(&self) -> BTreeSet<usize> {
        self.0.values().copied().collect()
    }
}

/// The `k` channels with the lowest mean error, best first. Ties go to the
/// lower channel index.
pub fn best_channels(profile: &NoiseProfile, k: usize) -> Result<Vec<usize>> {
    if k > profile.len() {
        return Err(Error::argument(format!(
            "asked for {k} channels but the profile has {}",
            profile.len()
        )));
    }
    let mut order: Vec<usize> = (0..profile.len()).collect();
    order.sort_by(|&a, &b| {
        profile.channels[a]
            .mean()
            .total_cmp(&profile.channels[b].mean())
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(order)
}

/// Map `measured[i]` to the `i`-th best channel.
pub fn best_qubit_assignment(profile: &NoiseProfile, measured: &[usize]) -> Result<QubitAssignment> {
    let channels = best_channels(profile, measured.len())?;
    QubitAssignment::new(measured.iter().copied().zip(channels).collect())
}

/// Ideal (noise-free) output distribution of a benchmark.
#[derive(Clone, Debug, PartialEq)]
pub enum IdealSpec {
    /// Equal superposition of all-zeros and all-ones.
    Ghz { width: usize },
    /// Deterministic output equal to the secret string.
    BernsteinVazirani { secret: Outcome },
    /// `(1 - lambda)` spread uniformly over `support`, plus `lambda` on
    /// `correct`.
    Planted {
        correct: Outcome,
        lambda: f64,
        support: Vec<Outcome>,
    },
    Custom(SparsePmf),
}

impl IdealSpec {
    /// Planted signal over `support_size` random distinct outcomes, the
    /// correct one among them.
    pub fn planted_random<R: Rng + ?Sized>(
        width: usize,
        lambda: f64,
        support_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if width == 0 || width > 63 {
            return Err(Error::argument("planted workloads support widths 1..=63"));
        }
        let space = 1u64 << width;
        if support_size == 0 || support_size as u64 > space {
            return Err(Error::argument(format!(
                "support size {support_size} invalid for width {width}"
            )));
        }
        let mut support = BTreeSet::new();
        while support.len() < support_size {
            support.insert(rng.random_range(0..space));
        }
        let support: Vec<Outcome> = support
            .into_iter()
            .map(|v| Outcome::from_u64(v, width))
            .collect::<Result<_>>()?;
        let correct = support[rng.random_range(0..support.len())].clone();
        Ok(IdealSpec::Planted {
            correct,
            lambda,
            support,
        })
    }

    pub fn width(&self) -> usize {
        match self {
            IdealSpec::Ghz { width } => *width,
            IdealSpec::BernsteinVazirani { secret } => secret.width(),
            IdealSpec::Planted { correct, .. } => correct.width(),
            IdealSpec::Custom(p) => p.width(),
        }
    }

    /// Outcomes counted as successful trials.
    pub fn correct_outcomes(&self) -> Result<BTreeSet<Outcome>> {
        Ok(match self {
            IdealSpec::Ghz { width } => [Outcome::zeros(*width), Outcome::ones(*width)].into(),
            IdealSpec::BernsteinVazirani { secret } => [secret.clone()].into(),
            IdealSpec::Planted { correct, .. } => [correct.clone()].into(),
            IdealSpec::Custom(p) => {
                let top = p.mode().1;
                p.iter()
                    .filter(|&(_, v)| v == top)
                    .map(|(o, _)| o.clone())
                    .collect()
            }
        })
    }
}

pub fn ideal_distribution(spec: &IdealSpec) -> Result<SparsePmf> {
    match spec {
        IdealSpec::Ghz { width } => {
            if *width == 0 {
                return Err(Error::argument("GHZ width must be positive"));
            }
            SparsePmf::from_weights(
                *width,
                [(Outcome::zeros(*width), 0.5), (Outcome::ones(*width), 0.5)],
            )
        }
        IdealSpec::BernsteinVazirani { secret } => Ok(SparsePmf::delta(secret.clone())),
        IdealSpec::Planted {
            correct,
            lambda,
            support,
        } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::argument(format!("lambda {lambda} outside [0, 1]")));
            }
            let width = correct.width();
            let floor = if support.is_empty() {
                0.0
            } else {
                (1.0 - lambda) / support.len() as f64
            };
            let weights = support
                .iter()
                .map(|o| (o.clone(), floor))
                .chain(std::iter::once((correct.clone(), *lambda)));
            SparsePmf::from_weights(width, weights)
        }
        IdealSpec::Custom(p) => Ok(p.clone()),
    }
}

/// Per-position flip probabilities `[if true 0, if true 1]` for a
/// measurement of `measured` (position `j` of the read string is
/// `measured[j]`).
fn channel_table(
    ideal: &SparsePmf,
    profile: &NoiseProfile,
    assignment: &QubitAssignment,
    measured: &[usize],
) -> Result<Vec<[f64; 2]>> {
    validate_qubits(measured, ideal.width())?;
    let k = measured.len();
    let mut table = vec![[0.0; 2]; k];
    for (j, &q) in measured.iter().enumerate() {
        let channel = assignment
            .channel(q)
            .ok_or_else(|| Error::argument(format!("qubit {q} has no readout channel assigned")))?;
        if channel >= profile.len() {
            return Err(Error::argument(format!(
                "channel {channel} not in a {}-channel profile",
                profile.len()
            )));
        }
        // string position j is bit k-1-j
        table[k - 1 - j] = [
            profile.flip_probability(channel, false, k),
            profile.flip_probability(channel, true, k),
        ];
    }
    Ok(table)
}

/// Draw `trials` noisy readouts of `measured` from `ideal`.
pub fn sample_counts<R: Rng + ?Sized>(
    ideal: &SparsePmf,
    profile: &NoiseProfile,
    assignment: &QubitAssignment,
    measured: &[usize],
    trials: u64,
    rng: &mut R,
) -> Result<Counts> {
    if trials == 0 {
        return Err(Error::argument("trial count must be positive"));
    }
    let flips = channel_table(ideal, profile, assignment, measured)?;
    let k = measured.len();
    let reduced: Vec<Outcome> = ideal
        .outcomes()
        .iter()
        .map(|o| o.reduce_unchecked(measured))
        .collect();
    let picker = WeightedIndex::new(ideal.probabilities())
        .map_err(|e| Error::argument(format!("ideal distribution: {e}")))?;
    let depolarizing = profile.output_depolarizing;

    let mut tally: BTreeMap<Outcome, u64> = BTreeMap::new();
    for _ in 0..trials {
        let mut read = reduced[picker.sample(rng)].clone();
        for (bit, probs) in flips.iter().enumerate() {
            let p = probs[usize::from(read.bit(bit))];
            if p > 0.0 && rng.random::<f64>() < p {
                read.flip(bit);
            }
        }
        if depolarizing > 0.0 && rng.random::<f64>() < depolarizing {
            for bit in 0..k {
                read.set_bit(bit, rng.random::<bool>());
            }
        }
        *tally.entry(read).or_insert(0) += 1;
    }
    let mut counts = Counts::new(k);
    for (o, n) in tally {
        counts.add(o, n)?;
    }
    Ok(counts)
}

/// Exact distribution of noisy readouts of `measured`, by enumerating every
/// read string. Limited to [`MAX_EXACT_BITS`] measured qubits.
pub fn expected_distribution(
    ideal: &SparsePmf,
    profile: &NoiseProfile,
    assignment: &QubitAssignment,
    measured: &[usize],
) -> Result<SparsePmf> {
    let flips = channel_table(ideal, profile, assignment, measured)?;
    let k = measured.len();
    if k > MAX_EXACT_BITS {
        return Err(Error::argument(format!(
            "exact mode supports at most {MAX_EXACT_BITS} measured qubits"
        )));
    }
    let mut true_mass: BTreeMap<u64, f64> = BTreeMap::new();
    for (o, p) in ideal.iter() {
        let r = o.reduce_unchecked(measured).to_u64().expect("k <= 12");
        *true_mass.entry(r).or_insert(0.0) += p;
    }
    let size = 1usize << k;
    let mut dist = vec![0.0; size];
    for (&truth, &mass) in &true_mass {
        for read in 0..size as u64 {
            let mut p = mass;
            for (bit, probs) in flips.iter().enumerate() {
                let t = (truth >> bit) & 1;
                let flip = probs[t as usize];
                p *= if (read >> bit) & 1 == t { 1.0 - flip } else { flip };
            }
            dist[read as usize] += p;
        }
    }
    let d = profile.output_depolarizing;
    let uniform = 1.0 / size as f64;
    let weights = dist
        .into_iter()
        .enumerate()
        .map(|(v, p)| (Outcome::from_u64(v as u64, k).expect("fits"), (1.0 - d) * p + d * uniform));
    SparsePmf::from_weights(k, weights)
}

/// Fresh generator for an independent sub-stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
