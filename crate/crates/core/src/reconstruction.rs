//! Bayesian reconstruction of a global histogram from marginal histograms.
//!
//! One update rescales every prior outcome by how strongly the marginal
//! supports its reduced bitstring:
//!
//! ```text
//! C[x]  = p[x] / sum{ p[x'] : reduce(x') == reduce(x) }
//! w[x]  = C[x] * f(m[reduce(x)])        f(y) = y / (1 - y)  (odds, default)
//! post  = w / sum(w)
//! ```
//!
//! A round applies every marginal to the same prior and averages the
//! posteriors into it: `out = normalize(p + sum_j post_j)`. Rounds repeat on
//! their own output until the Hellinger distance between successive rounds
//! settles. Outcomes never enter the support, they only lose or gain weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{hellinger_aligned, validate_qubits, Marginal, Outcome, SparsePmf};

/// How a marginal probability `y` scales its candidate group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateWeighting {
    /// `y / (1 - y)`, with `y` clamped to `1 - odds_clamp`.
    #[default]
    Odds,
    /// `y` itself.
    Probability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub hellinger_tolerance: f64,
    pub max_rounds: usize,
    pub odds_clamp: f64,
    pub weighting: UpdateWeighting,
    /// Compute the per-marginal posteriors of a round on the rayon pool.
    pub parallel: bool,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            hellinger_tolerance: 1e-4,
            max_rounds: 100,
            odds_clamp: 1e-9,
            weighting: UpdateWeighting::Odds,
            parallel: true,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hellinger_tolerance > 0.0) {
            return Err(Error::argument("hellinger tolerance must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(Error::argument("max_rounds must be at least 1"));
        }
        if !(self.odds_clamp > 0.0 && self.odds_clamp < 1.0) {
            return Err(Error::argument("odds clamp must lie in (0, 1)"));
        }
        Ok(())
    }

    fn factor(&self, y: f64) -> f64 {
        match self.weighting {
            UpdateWeighting::Odds => {
                let y = y.clamp(0.0, 1.0 - self.odds_clamp);
                y / (1.0 - y)
            }
            UpdateWeighting::Probability => y,
        }
    }
}

/// Per-layer convergence record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// Subset size of the layer, when all its marginals share one.
    pub subset_size: Option<usize>,
    pub marginals: usize,
    /// Hellinger distance between the input and output of each round.
    pub hellinger: Vec<f64>,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn rounds(&self) -> usize {
        self.hellinger.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub pmf: SparsePmf,
    pub traces: Vec<ConvergenceTrace>,
}

impl Reconstruction {
    pub fn rounds(&self) -> usize {
        self.traces.iter().map(ConvergenceTrace::rounds).sum()
    }
}

/// For each prior entry, the index of its reduced outcome in the marginal.
fn group_indices(prior: &SparsePmf, marginal: &Marginal) -> Vec<Option<usize>> {
    let qubits = marginal.qubits();
    let local = marginal.pmf();
    prior
        .outcomes()
        .iter()
        .map(|x| local.index_of(&x.reduce_unchecked(qubits)))
        .collect()
}

/// Posterior for one marginal, aligned with the prior's entries.
fn posterior(
    prior: &[f64],
    groups: &[Option<usize>],
    marginal: &Marginal,
    cfg: &ReconstructionConfig,
) -> Vec<f64> {
    let local = marginal.pmf().probabilities();
    let mut group_mass = vec![0.0; local.len()];
    for (&p, g) in prior.iter().zip(groups) {
        if let Some(g) = *g {
            group_mass[g] += p;
        }
    }
    let scale: Vec<f64> = local
        .iter()
        .zip(&group_mass)
        .map(|(&y, &mass)| if mass > 0.0 { cfg.factor(y) / mass } else { 0.0 })
        .collect();
    let mut weights: Vec<f64> = prior
        .iter()
        .zip(groups)
        .map(|(&p, g)| g.map_or(0.0, |g| p * scale[g]))
        .collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    weights
}

fn check_marginal(prior: &SparsePmf, marginal: &Marginal, index: usize) -> Result<Vec<Option<usize>>> {
    validate_qubits(marginal.qubits(), prior.width())?;
    let groups = group_indices(prior, marginal);
    if groups.iter().all(Option::is_none) {
        return Err(Error::DegenerateUpdate {
            index,
            qubits: marginal.qubits().to_vec(),
        });
    }
    Ok(groups)
}

/// Update `prior` with a single marginal.
pub fn bayesian_update(
    prior: &SparsePmf,
    marginal: &Marginal,
    cfg: &ReconstructionConfig,
) -> Result<SparsePmf> {
    cfg.validate()?;
    let groups = check_marginal(prior, marginal, 0)?;
    let weights = posterior(prior.probabilities(), &groups, marginal, cfg);
    SparsePmf::from_sorted_parts(prior.width(), prior.outcomes().to_vec(), weights)
}

fn round(
    current: &[f64],
    marginals: &[Marginal],
    groups: &[Vec<Option<usize>>],
    cfg: &ReconstructionConfig,
) -> Vec<f64> {
    let mut next = current.to_vec();
    let mut accumulate = |post: &[f64]| {
        for (acc, &w) in next.iter_mut().zip(post) {
            *acc += w;
        }
    };
    if cfg.parallel && marginals.len() > 1 {
        let posteriors: Vec<Vec<f64>> = marginals
            .par_iter()
            .zip(groups.par_iter())
            .map(|(m, g)| posterior(current, g, m, cfg))
            .collect();
        // merged in list order so results do not depend on scheduling
        posteriors.iter().for_each(|post| accumulate(post));
    } else {
        for (m, g) in marginals.iter().zip(groups) {
            accumulate(&posterior(current, g, m, cfg));
        }
    }
    let total: f64 = next.iter().sum();
    next.iter_mut().for_each(|v| *v /= total);
    next
}

fn reconstruct_layer(
    prior: &SparsePmf,
    marginals: &[Marginal],
    cfg: &ReconstructionConfig,
) -> Result<(SparsePmf, ConvergenceTrace)> {
    let subset_size = marginals.first().map(Marginal::size).filter(|&s| {
        marginals.iter().all(|m| m.size() == s)
    });
    let mut trace = ConvergenceTrace {
        subset_size,
        marginals: marginals.len(),
        hellinger: Vec::new(),
        converged: true,
    };
    if marginals.is_empty() {
        return Ok((prior.clone(), trace));
    }
    let groups = marginals
        .iter()
        .enumerate()
        .map(|(i, m)| check_marginal(prior, m, i))
        .collect::<Result<Vec<_>>>()?;

    trace.converged = false;
    let mut current = prior.probabilities().to_vec();
    for _ in 0..cfg.max_rounds {
        let next = round(&current, marginals, &groups, cfg);
        let distance = hellinger_aligned(&current, &next);
        let settled = distance < cfg.hellinger_tolerance
            || trace
                .hellinger
                .last()
                .is_some_and(|&prev| (distance - prev).abs() < cfg.hellinger_tolerance);
        trace.hellinger.push(distance);
        current = next;
        if settled {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged && cfg.max_rounds > 1 {
        log::warn!(
            "reconstruction stopped after {} rounds without converging (last change {:.3e})",
            cfg.max_rounds,
            trace.hellinger.last().copied().unwrap_or(f64::NAN)
        );
    }
    let pmf = SparsePmf::from_sorted_parts(prior.width(), prior.outcomes().to_vec(), current)?;
    Ok((pmf, trace))
}

/// Iterate rounds of updates with every marginal until the output settles.
pub fn bayesian_reconstruction(
    prior: &SparsePmf,
    marginals: &[Marginal],
    cfg: &ReconstructionConfig,
) -> Result<Reconstruction> {
    cfg.validate()?;
    let (pmf, trace) = reconstruct_layer(prior, marginals, cfg)?;
    Ok(Reconstruction {
        pmf,
        traces: vec![trace],
    })
}

/// Marginals grouped by subset size, largest size first.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSet {
    layers: Vec<(usize, Vec<Marginal>)>,
}

impl LayerSet {
    /// Layers given out of order are sorted (with a warning). Every marginal
    /// must measure exactly its layer's number of qubits.
    pub fn new(mut layers: Vec<(usize, Vec<Marginal>)>) -> Result<Self> {
        for (size, marginals) in &layers {
            if let Some(m) = marginals.iter().find(|m| m.size() != *size) {
                return Err(Error::argument(format!(
                    "marginal over {:?} placed in the size-{size} layer",
                    m.qubits()
                )));
            }
        }
        if layers.windows(2).any(|w| w[0].0 <= w[1].0) {
            let mut sizes: Vec<usize> = layers.iter().map(|l| l.0).collect();
            sizes.sort_unstable();
            if sizes.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::argument("layer subset sizes must be distinct"));
            }
            log::warn!("layers were not ordered by descending subset size; sorting");
            layers.sort_by(|a, b| b.0.cmp(&a.0));
        }
        Ok(LayerSet { layers })
    }

    /// Group marginals by their number of measured qubits.
    pub fn from_marginals(marginals: impl IntoIterator<Item = Marginal>) -> Self {
        let mut by_size: std::collections::BTreeMap<usize, Vec<Marginal>> = Default::default();
        for m in marginals {
            by_size.entry(m.size()).or_default().push(m);
        }
        LayerSet {
            layers: by_size.into_iter().rev().collect(),
        }
    }

    pub fn layers(&self) -> &[(usize, Vec<Marginal>)] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

/// Reconstruct layer by layer, from the largest subset size down, each
/// layer starting from the previous layer's output.
pub fn reconstruct_multilayer(
    prior: &SparsePmf,
    layers: &LayerSet,
    cfg: &ReconstructionConfig,
) -> Result<Reconstruction> {
    cfg.validate()?;
    let mut current = prior.clone();
    let mut traces = Vec::with_capacity(layers.len());
    for (_, marginals) in layers.layers() {
        let (next, trace) = reconstruct_layer(&current, marginals, cfg)?;
        current = next;
        traces.push(trace);
    }
    Ok(Reconstruction {
        pmf: current,
        traces,
    })
}

/// Reduced outcomes of `prior` that a marginal never observed.
pub fn unmatched_outcomes(prior: &SparsePmf, marginal: &Marginal) -> Vec<Outcome> {
    let local = marginal.pmf();
    let mut missing: Vec<Outcome> = prior
        .outcomes()
        .iter()
        .map(|x| x.reduce_unchecked(marginal.qubits()))
        .filter(|r| local.index_of(r).is_none())
        .collect();
    missing.sort();
    missing.dedup();
    missing
}
