//! Which qubits each partial-measurement circuit measures, and how many
//! trials each circuit gets.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the trial budget spent in global mode by default.
pub const DEFAULT_GLOBAL_FRACTION: f64 = 0.5;

/// Confidence used when estimating per-circuit trial counts.
pub const DEFAULT_CONFIDENCE: f64 = 0.9999;

/// Upper bound on rejection rounds when drawing a covering random plan.
const MAX_COVERAGE_ATTEMPTS: usize = 100_000;

/// Subsets of one size. Each subset lists qubit indices in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetLayer {
    pub size: usize,
    pub subsets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetPlan {
    pub width: usize,
    /// Ordered by descending subset size.
    pub layers: Vec<SubsetLayer>,
}

impl SubsetPlan {
    /// Validate and normalize a plan: canonical qubit order, no repeated
    /// index sets, every program qubit covered, layers largest first.
    pub fn new(width: usize, layers: Vec<SubsetLayer>) -> Result<Self> {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::with_capacity(layers.len());
        for layer in layers {
            if layer.size == 0 || layer.size > width {
                return Err(Error::argument(format!(
                    "subset size {} invalid for width {width}",
                    layer.size
                )));
            }
            let mut subsets = Vec::with_capacity(layer.subsets.len());
            for subset in layer.subsets {
                let canon = canonical_subset(&subset);
                if canon.len() != layer.size {
                    return Err(Error::argument(format!(
                        "subset {subset:?} does not have {} distinct qubits",
                        layer.size
                    )));
                }
                if canon[0] >= width {
                    return Err(Error::argument(format!(
                        "subset {subset:?} exceeds program width {width}"
                    )));
                }
                if seen.insert(canon.clone()) {
                    subsets.push(canon);
                }
            }
            out.push(SubsetLayer {
                size: layer.size,
                subsets,
            });
        }
        out.sort_by(|a, b| b.size.cmp(&a.size));
        if out.windows(2).any(|w| w[0].size == w[1].size) {
            return Err(Error::argument("layer subset sizes must be distinct"));
        }
        let plan = SubsetPlan { width, layers: out };
        if let Some(q) = plan.uncovered().first() {
            return Err(Error::argument(format!("qubit {q} is not measured by any subset")));
        }
        Ok(plan)
    }

    /// All subsets in layer order.
    pub fn cpms(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.subsets.iter().map(Vec::as_slice))
    }

    pub fn cpm_count(&self) -> usize {
        self.layers.iter().map(|l| l.subsets.len()).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.size).collect()
    }

    /// Program qubits not measured by any subset.
    pub fn uncovered(&self) -> Vec<usize> {
        let mut covered = vec![false; self.width];
        for q in self.cpms().flatten() {
            covered[*q] = true;
        }
        (0..self.width).filter(|&q| !covered[q]).collect()
    }
}

fn canonical_subset(subset: &[usize]) -> Vec<usize> {
    let mut v = subset.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.dedup();
    v
}

fn window_layer(n: usize, s: usize) -> SubsetLayer {
    let mut seen = BTreeSet::new();
    let mut subsets = Vec::new();
    for i in 0..n {
        let window: Vec<usize> = (0..s).map(|j| (i + j) % n).collect();
        let canon = canonical_subset(&window);
        if seen.insert(canon.clone()) {
            subsets.push(canon);
        }
    }
    SubsetLayer { size: s, subsets }
}

/// `n` contiguous windows of `s` qubits, wrapping around the register.
/// Windows that coincide as sets (small `n`) are kept once.
pub fn sliding_window_plan(n: usize, s: usize) -> Result<SubsetPlan> {
    if s < 2 {
        return Err(Error::argument(
            "subset size must be at least 2: single-qubit subsets carry no correlation",
        ));
    }
    if s > n {
        return Err(Error::argument(format!(
            "subset size {s} exceeds program width {n}"
        )));
    }
    SubsetPlan::new(n, vec![window_layer(n, s)])
}

/// Sliding windows for every size in `s_min..=s_max`.
pub fn multilayer_plan(n: usize, s_min: usize, s_max: usize) -> Result<SubsetPlan> {
    if s_min < 2 || s_min > s_max {
        return Err(Error::argument(format!(
            "invalid subset size range {s_min}..={s_max}"
        )));
    }
    if s_max > n {
        return Err(Error::argument(format!(
            "largest subset size {s_max} exceeds program width {n}"
        )));
    }
    let layers = (s_min..=s_max).rev().map(|s| window_layer(n, s)).collect();
    SubsetPlan::new(n, layers)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `count` distinct random subsets of size `s` that together cover every
/// qubit. Draws are repeated until coverage holds; the result depends only
/// on `seed`.
pub fn random_plan(n: usize, s: usize, count: usize, seed: u64) -> Result<SubsetPlan> {
    if s < 2 || s > n {
        return Err(Error::argument(format!(
            "subset size {s} invalid for width {n}"
        )));
    }
    if count as u128 > binomial(n, s) {
        return Err(Error::argument(format!(
            "cannot draw {count} distinct subsets of size {s} from {n} qubits"
        )));
    }
    if count * s < n {
        return Err(Error::argument(format!(
            "{count} subsets of size {s} cannot cover {n} qubits"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_COVERAGE_ATTEMPTS {
        let mut chosen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut subsets = Vec::with_capacity(count);
        while subsets.len() < count {
            let canon = canonical_subset(&index::sample(&mut rng, n, s).into_vec());
            if chosen.insert(canon.clone()) {
                subsets.push(canon);
            }
        }
        let layer = SubsetLayer { size: s, subsets };
        if let Ok(plan) = SubsetPlan::new(n, vec![layer]) {
            return Ok(plan);
        }
    }
    Err(Error::argument(format!(
        "no covering plan found after {MAX_COVERAGE_ATTEMPTS} draws"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialBudget {
    pub total: u64,
    pub global: u64,
    /// Aligned with [`SubsetPlan::cpms`].
    pub per_cpm: Vec<u64>,
}

impl TrialBudget {
    pub fn subset_trials(&self) -> u64 {
        self.per_cpm.iter().sum()
    }
}

/// Give `floor(total * global_fraction)` trials to global mode and spread the
/// rest evenly over the plan's circuits, earlier circuits taking the
/// remainder.
pub fn split_trials(total: u64, plan: &SubsetPlan, global_fraction: f64) -> Result<TrialBudget> {
    if !(0.0..1.0).contains(&global_fraction) || global_fraction == 0.0 {
        return Err(Error::argument(format!(
            "global fraction {global_fraction} must lie in (0, 1)"
        )));
    }
    let cpms = plan.cpm_count() as u64;
    if cpms == 0 {
        return Err(Error::argument("plan has no subsets"));
    }
    let global = (total as f64 * global_fraction).floor() as u64;
    let subset = total - global;
    let (base, extra) = (subset / cpms, subset % cpms);
    let per_cpm = (0..cpms).map(|i| base + u64::from(i < extra)).collect();
    Ok(TrialBudget {
        total,
        global,
        per_cpm,
    })
}

/// Trials needed to see every outcome of an `s`-qubit measurement at least
/// once with probability `confidence`, for uniformly likely outcomes:
/// `ceil(-ln(1 - confidence) * (2^s)^2)`.
pub fn estimate_trials(s: u32, confidence: f64) -> Result<u64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::argument(format!(
            "confidence {confidence} must lie in (0, 1)"
        )));
    }
    if s > 31 {
        return Err(Error::argument(format!("subset size {s} too large")));
    }
    let outcomes = (1u64 << s) as f64;
    Ok((-(-confidence).ln_1p() * outcomes * outcomes).ceil() as u64)
}
