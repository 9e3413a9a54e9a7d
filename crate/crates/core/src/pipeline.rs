//! Simulated end-to-end run: baseline, global mode, subset mode,
//! reconstruction and scoring.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate, MaxCutInstance, MetricReport};
use crate::noise_sim::{
    best_qubit_assignment, ideal_distribution, sample_counts, stream_rng, IdealSpec, NoiseProfile,
    QubitAssignment,
};
use crate::pmf::{Counts, Marginal, Outcome, SparsePmf};
use crate::reconstruction::{reconstruct_multilayer, LayerSet, Reconstruction, ReconstructionConfig};
use crate::subsetting::{SubsetPlan, TrialBudget};

const BASELINE_STREAM: u64 = 0;
const GLOBAL_STREAM: u64 = 1;
const FIRST_CPM_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub reconstruction: ReconstructionConfig,
    /// Simulate the subset-mode circuits on the rayon pool.
    pub parallel: bool,
    #[serde(skip)]
    pub graph: Option<MaxCutInstance>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            reconstruction: ReconstructionConfig::default(),
            parallel: true,
            graph: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginalCounts {
    pub qubits: Vec<usize>,
    pub counts: Counts,
}

impl MarginalCounts {
    pub fn to_marginal(&self) -> Result<Marginal> {
        Marginal::new(self.qubits.clone(), self.counts.to_pmf()?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub ideal: SparsePmf,
    pub correct: BTreeSet<Outcome>,
    /// Every trial spent in global mode on the default assignment.
    pub baseline: Counts,
    /// The global-mode share of the budget.
    pub global: Counts,
    pub marginals: Vec<MarginalCounts>,
    pub reconstruction: Reconstruction,
    pub baseline_report: MetricReport,
    pub global_report: MetricReport,
    pub jigsaw_report: MetricReport,
}

impl PipelineRun {
    /// Reconstructed PST over baseline PST.
    pub fn pst_gain(&self) -> f64 {
        self.jigsaw_report.pst / self.baseline_report.pst
    }
}

/// Counts from one simulated experiment, before any reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedCounts {
    pub ideal: SparsePmf,
    pub correct: BTreeSet<Outcome>,
    /// Every trial spent in global mode on the default assignment, when
    /// requested.
    pub baseline: Option<Counts>,
    pub global: Counts,
    pub marginals: Vec<MarginalCounts>,
}

/// Sample the global-mode and subset-mode histograms of an experiment. The
/// subset-mode circuits run on their best channels; every run draws from
/// its own stream of `seed`, so results do not depend on scheduling.
pub fn simulate_counts(
    spec: &IdealSpec,
    profile: &NoiseProfile,
    plan: &SubsetPlan,
    budget: &TrialBudget,
    seed: u64,
    parallel: bool,
    with_baseline: bool,
) -> Result<SimulatedCounts> {
    profile.validate()?;
    let ideal = ideal_distribution(spec)?;
    let n = ideal.width();
    if plan.width != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: plan.width,
        });
    }
    if budget.per_cpm.len() != plan.cpm_count() {
        return Err(Error::argument(format!(
            "budget covers {} circuits, plan has {}",
            budget.per_cpm.len(),
            plan.cpm_count()
        )));
    }
    if profile.len() < n {
        return Err(Error::argument(format!(
            "profile has {} channels, program needs {n}",
            profile.len()
        )));
    }
    let correct = spec.correct_outcomes()?;
    let all: Vec<usize> = (0..n).rev().collect();
    let identity = QubitAssignment::identity(n);

    let baseline = with_baseline
        .then(|| {
            let mut rng = stream_rng(seed, BASELINE_STREAM);
            sample_counts(&ideal, profile, &identity, &all, budget.total, &mut rng)
        })
        .transpose()?;
    let global = sample_counts(
        &ideal,
        profile,
        &identity,
        &all,
        budget.global,
        &mut stream_rng(seed, GLOBAL_STREAM),
    )?;

    let jobs: Vec<(usize, &[usize], u64)> = plan
        .cpms()
        .zip(&budget.per_cpm)
        .enumerate()
        .map(|(i, (q, &t))| (i, q, t))
        .collect();
    let simulate = |&(i, qubits, trials): &(usize, &[usize], u64)| -> Result<MarginalCounts> {
        let assignment = best_qubit_assignment(profile, qubits)?;
        let mut rng = stream_rng(seed, FIRST_CPM_STREAM + i as u64);
        let counts = sample_counts(&ideal, profile, &assignment, qubits, trials, &mut rng)?;
        Ok(MarginalCounts {
            qubits: qubits.to_vec(),
            counts,
        })
    };
    let marginals: Vec<MarginalCounts> = if parallel {
        jobs.par_iter().map(simulate).collect::<Vec<_>>()
    } else {
        jobs.iter().map(simulate).collect::<Vec<_>>()
    }
    .into_iter()
    .collect::<Result<_>>()?;

    Ok(SimulatedCounts {
        ideal,
        correct,
        baseline,
        global,
        marginals,
    })
}

/// Simulate, reconstruct and score one experiment. The baseline spends the
/// whole budget in global mode.
pub fn run_pipeline(
    spec: &IdealSpec,
    profile: &NoiseProfile,
    plan: &SubsetPlan,
    budget: &TrialBudget,
    cfg: &PipelineConfig,
) -> Result<PipelineRun> {
    let sim = simulate_counts(spec, profile, plan, budget, cfg.seed, cfg.parallel, true)?;
    let baseline = sim.baseline.expect("baseline requested");
    let layers = LayerSet::from_marginals(
        sim.marginals
            .iter()
            .map(MarginalCounts::to_marginal)
            .collect::<Result<Vec<_>>>()?,
    );
    let prior = sim.global.to_pmf()?;
    let reconstruction = reconstruct_multilayer(&prior, &layers, &cfg.reconstruction)?;

    let graph = cfg.graph.as_ref();
    let baseline_report = evaluate(&baseline.to_pmf()?, &sim.ideal, &sim.correct, graph)?;
    let global_report = evaluate(&prior, &sim.ideal, &sim.correct, graph)?;
    let jigsaw_report = evaluate(&reconstruction.pmf, &sim.ideal, &sim.correct, graph)?;
    Ok(PipelineRun {
        ideal: sim.ideal,
        correct: sim.correct,
        baseline,
        global: sim.global,
        marginals: sim.marginals,
        reconstruction,
        baseline_report,
        global_report,
        jigsaw_report,
    })
}
