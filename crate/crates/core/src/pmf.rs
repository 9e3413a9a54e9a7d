//! Sparse probability-mass functions over fixed-width measurement bitstrings.
//!
//! Outcomes render with the highest qubit index leftmost, so the string
//! `"100"` on a three-qubit register means `Q2 = 1, Q1 = 0, Q0 = 0`.
//! Only observed (strictly positive) outcomes are stored, sorted by their
//! numeric value; that ordering is what every distance below merge-joins on.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

/// One measured bitstring of a known width.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    width: usize,
    // bit `q` lives in word `q / 64`, position `q % 64`
    words: SmallVec<[u64; 2]>,
}

impl Outcome {
    pub fn zeros(width: usize) -> Self {
        Outcome {
            width,
            words: smallvec![0; words_for(width)],
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut out = Self::zeros(width);
        for q in 0..width {
            out.set_bit(q, true);
        }
        out
    }

    /// Build from an integer whose bit `q` is qubit `q`.
    pub fn from_u64(value: u64, width: usize) -> Result<Self> {
        if width < WORD_BITS && value >> width != 0 {
            return Err(Error::argument(format!(
                "value {value} does not fit in {width} bits"
            )));
        }
        let mut out = Self::zeros(width);
        if width > 0 {
            out.words[0] = value;
        }
        Ok(out)
    }

    /// Parse a bitstring and check it has exactly `width` characters.
    pub fn parse(text: &str, width: usize) -> Result<Self> {
        let out: Outcome = text.parse()?;
        if out.width != width {
            return Err(Error::Format {
                input: text.to_owned(),
                reason: format!("expected {width} characters, found {}", out.width),
            });
        }
        Ok(out)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Value of qubit `q`. Panics if `q >= width`.
    #[inline]
    pub fn bit(&self, q: usize) -> bool {
        assert!(q < self.width, "qubit {q} out of range for width {}", self.width);
        (self.words[q / WORD_BITS] >> (q % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, q: usize, value: bool) {
        assert!(q < self.width, "qubit {q} out of range for width {}", self.width);
        let mask = 1u64 << (q % WORD_BITS);
        if value {
            self.words[q / WORD_BITS] |= mask;
        } else {
            self.words[q / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        assert!(q < self.width, "qubit {q} out of range for width {}", self.width);
        self.words[q / WORD_BITS] ^= 1u64 << (q % WORD_BITS);
    }

    /// Complement of every bit.
    pub fn inverted(&self) -> Self {
        let mut out = self.clone();
        for q in 0..self.width {
            out.flip(q);
        }
        out
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Integer value, if the outcome fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.width > WORD_BITS {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    /// Sub-bitstring at `qubits`, in the given order: `qubits[0]` becomes the
    /// leftmost character of the result.
    pub fn reduce(&self, qubits: &[usize]) -> Result<Outcome> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.width) {
            return Err(Error::argument(format!(
                "qubit index {q} out of range for width {}",
                self.width
            )));
        }
        Ok(self.reduce_unchecked(qubits))
    }

    #[inline]
    pub(crate) fn reduce_unchecked(&self, qubits: &[usize]) -> Outcome {
        let k = qubits.len();
        let mut out = Outcome::zeros(k);
        for (j, &q) in qubits.iter().enumerate() {
            if self.bit(q) {
                out.set_bit(k - 1 - j, true);
            }
        }
        out
    }
}

impl Ord for Outcome {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Outcome {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Format {
                input: s.to_owned(),
                reason: "empty bitstring".into(),
            });
        }
        let width = s.len();
        let mut out = Outcome::zeros(width);
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => out.set_bit(width - 1 - i, true),
                _ => {
                    return Err(Error::Format {
                        input: s.to_owned(),
                        reason: format!("unexpected character {:?}", c as char),
                    })
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.width)
            .rev()
            .map(|q| if self.bit(q) { '1' } else { '0' })
            .collect();
        f.pad(&s)
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Outcome({self})")
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Integer histogram of outcomes, as produced by a run of trials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    width: usize,
    entries: BTreeMap<Outcome, u64>,
}

impl Counts {
    pub fn new(width: usize) -> Self {
        Counts {
            width,
            entries: BTreeMap::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn add(&mut self, outcome: Outcome, n: u64) -> Result<()> {
        if outcome.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: outcome.width(),
            });
        }
        if n > 0 {
            *self.entries.entry(outcome).or_insert(0) += n;
        }
        Ok(())
    }

    pub fn get(&self, outcome: &Outcome) -> u64 {
        self.entries.get(outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, u64)> {
        self.entries.iter().map(|(o, &n)| (o, n))
    }

    pub fn to_pmf(&self) -> Result<SparsePmf> {
        SparsePmf::from_outcome_counts(self.iter().map(|(o, n)| (o.clone(), n)), self.width)
    }
}

/// A normalized distribution over the observed outcomes of a `width`-qubit
/// register.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePmf {
    width: usize,
    outcomes: Vec<Outcome>,
    probs: Vec<f64>,
    total_trials: Option<u64>,
}

impl SparsePmf {
    /// Normalize a bitstring histogram. Zero-count keys are dropped.
    pub fn from_counts<I, S>(counts: I, width: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let parsed = counts
            .into_iter()
            .map(|(key, n)| Ok((Outcome::parse(key.as_ref(), width)?, n)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_outcome_counts(parsed, width)
    }

    pub fn from_outcome_counts<I>(counts: I, width: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (Outcome, u64)>,
    {
        let mut merged: BTreeMap<Outcome, u64> = BTreeMap::new();
        for (outcome, n) in counts {
            if outcome.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: outcome.width(),
                });
            }
            if n > 0 {
                *merged.entry(outcome).or_insert(0) += n;
            }
        }
        let total: u64 = merged.values().sum();
        if total == 0 {
            return Err(Error::EmptyInput("histogram has no trials".into()));
        }
        let denom = total as f64;
        let (outcomes, probs) = merged
            .into_iter()
            .map(|(o, n)| (o, n as f64 / denom))
            .unzip();
        Ok(SparsePmf {
            width,
            outcomes,
            probs,
            total_trials: Some(total),
        })
    }

    /// Normalize arbitrary nonnegative weights. Duplicate outcomes are summed,
    /// negative weights are clamped to zero and zero weights dropped.
    pub fn from_weights<I>(width: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Outcome, f64)>,
    {
        let mut merged: BTreeMap<Outcome, f64> = BTreeMap::new();
        for (outcome, w) in weights {
            if outcome.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: outcome.width(),
                });
            }
            if !w.is_finite() {
                return Err(Error::argument(format!("non-finite weight {w} for {outcome}")));
            }
            *merged.entry(outcome).or_insert(0.0) += w;
        }
        let (outcomes, probs): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
        Self::from_sorted_parts(width, outcomes, probs)
    }

    /// Like [`from_weights`](Self::from_weights) but keeps the values
    /// untouched when they already sum to one within `1e-12`, so written
    /// distributions read back bit for bit. Negative entries are rejected.
    pub fn from_probabilities<I>(width: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Outcome, f64)>,
    {
        let mut merged: BTreeMap<Outcome, f64> = BTreeMap::new();
        for (outcome, p) in entries {
            if outcome.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: outcome.width(),
                });
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::argument(format!("invalid probability {p} for {outcome}")));
            }
            *merged.entry(outcome).or_insert(0.0) += p;
        }
        merged.retain(|_, p| *p > 0.0);
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            let (outcomes, probs): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
            return Self::from_sorted_parts(width, outcomes, probs);
        }
        let (outcomes, probs) = merged.into_iter().unzip();
        Ok(SparsePmf {
            width,
            outcomes,
            probs,
            total_trials: None,
        })
    }

    pub fn delta(outcome: Outcome) -> Self {
        SparsePmf {
            width: outcome.width(),
            outcomes: vec![outcome],
            probs: vec![1.0],
            total_trials: None,
        }
    }

    /// `outcomes` must be strictly increasing; weights are clamped, filtered
    /// and normalized.
    pub(crate) fn from_sorted_parts(
        width: usize,
        outcomes: Vec<Outcome>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        debug_assert_eq!(outcomes.len(), probs.len());
        debug_assert!(outcomes.windows(2).all(|w| w[0] < w[1]));
        let (outcomes, probs): (Vec<_>, Vec<_>) = outcomes
            .into_iter()
            .zip(probs)
            .filter(|&(_, p)| p > 0.0)
            .unzip();
        let total: f64 = probs.iter().sum();
        if outcomes.is_empty() || total <= 0.0 {
            return Err(Error::EmptyInput("distribution has no positive mass".into()));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(SparsePmf {
            width,
            outcomes,
            probs,
            total_trials: None,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored (observed) outcomes.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    /// Always false for a constructed value; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total_trials(&self) -> Option<u64> {
        self.total_trials
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&Outcome, f64)> + '_ {
        self.outcomes.iter().zip(self.probs.iter().copied())
    }

    pub fn index_of(&self, outcome: &Outcome) -> Option<usize> {
        self.outcomes.binary_search(outcome).ok()
    }

    /// Probability of `outcome`, zero when it was never observed.
    pub fn get(&self, outcome: &Outcome) -> f64 {
        self.index_of(outcome).map_or(0.0, |i| self.probs[i])
    }

    /// The most probable outcome; ties go to the smallest bitstring.
    pub fn mode(&self) -> (&Outcome, f64) {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        (&self.outcomes[best], self.probs[best])
    }

    /// Distribution of the bits at `qubits`, in that order.
    pub fn marginalize(&self, qubits: &[usize]) -> Result<Marginal> {
        validate_qubits(qubits, self.width)?;
        let mut acc: BTreeMap<Outcome, f64> = BTreeMap::new();
        for (outcome, p) in self.iter() {
            *acc.entry(outcome.reduce_unchecked(qubits)).or_insert(0.0) += p;
        }
        let (outcomes, probs): (Vec<_>, Vec<_>) = acc.into_iter().unzip();
        let mut pmf = Self::from_sorted_parts(qubits.len(), outcomes, probs)?;
        pmf.total_trials = self.total_trials;
        Marginal::new(qubits.to_vec(), pmf)
    }
}

/// Check that `qubits` is a non-empty list of distinct indices below `width`.
pub fn validate_qubits(qubits: &[usize], width: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::argument("qubit list is empty"));
    }
    let mut seen = vec![false; width];
    for &q in qubits {
        if q >= width {
            return Err(Error::argument(format!(
                "qubit index {q} out of range for width {width}"
            )));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::argument(format!("duplicate qubit index {q}")));
        }
    }
    Ok(())
}

/// A local distribution together with the program qubits it was measured on.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    qubits: Vec<usize>,
    pmf: SparsePmf,
}

impl Marginal {
    pub fn new(qubits: Vec<usize>, pmf: SparsePmf) -> Result<Self> {
        if pmf.width() != qubits.len() {
            return Err(Error::WidthMismatch {
                expected: qubits.len(),
                found: pmf.width(),
            });
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::argument(format!("duplicate qubit index {}", w[0])));
        }
        Ok(Marginal { qubits, pmf })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn pmf(&self) -> &SparsePmf {
        &self.pmf
    }

    pub fn size(&self) -> usize {
        self.qubits.len()
    }

    /// Same distribution with the qubit list in descending order, bits
    /// permuted to match. This is the order used in files.
    pub fn canonical(&self) -> Marginal {
        let mut order: Vec<usize> = (0..self.qubits.len()).collect();
        order.sort_by(|&a, &b| self.qubits[b].cmp(&self.qubits[a]));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return self.clone();
        }
        let k = self.qubits.len();
        // position j in the string is bit k-1-j of the outcome
        let bit_positions: Vec<usize> = order.iter().map(|&j| k - 1 - j).collect();
        let weights = self
            .pmf
            .iter()
            .map(|(o, p)| (o.reduce_unchecked(&bit_positions), p));
        let mut pmf = SparsePmf::from_weights(k, weights).expect("permutation preserves mass");
        pmf.total_trials = self.pmf.total_trials;
        Marginal {
            qubits: order.iter().map(|&j| self.qubits[j]).collect(),
            pmf,
        }
    }
}

/// Visit the union of two supports in order, yielding `(p_x, q_x)` pairs with
/// zeros filled in for missing entries.
pub(crate) fn merge_join<F: FnMut(f64, f64)>(p: &SparsePmf, q: &SparsePmf, mut f: F) {
    let (a, b) = (&p.outcomes, &q.outcomes);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.cmp(y),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                f(p.probs[i], 0.0);
                i += 1;
            }
            Ordering::Greater => {
                f(0.0, q.probs[j]);
                j += 1;
            }
            Ordering::Equal => {
                f(p.probs[i], q.probs[j]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub(crate) fn check_widths(p: &SparsePmf, q: &SparsePmf) -> Result<()> {
    if p.width != q.width {
        return Err(Error::WidthMismatch {
            expected: p.width,
            found: q.width,
        });
    }
    Ok(())
}

/// Hellinger distance `sqrt(sum (sqrt p - sqrt q)^2 / 2)`, in `[0, 1]`.
pub fn hellinger(p: &SparsePmf, q: &SparsePmf) -> Result<f64> {
    check_widths(p, q)?;
    let mut acc = 0.0;
    merge_join(p, q, |a, b| {
        let d = a.sqrt() - b.sqrt();
        acc += d * d;
    });
    Ok((acc / 2.0).sqrt().min(1.0))
}

/// Hellinger distance between two probability vectors over the same support.
pub(crate) fn hellinger_aligned(p: &[f64], q: &[f64]) -> f64 {
    let acc: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    (acc / 2.0).sqrt().min(1.0)
}
