//! Command implementations behind the `jigsaw` binary. Each `cmd_*` writes
//! its files and returns the text to print on stdout.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Serialize, Serializer};
use serde_json::json;

use jigsaw_core::complexity::{fit_slope, measure_scaling, write_csv, ScalingSweep};
use jigsaw_core::io::{
    read_graph, read_json, read_profile, write_json, write_profile, write_text,
    CountFile, PlanFile, PmfFile,
};
use jigsaw_core::metrics::{evaluate, MaxCutInstance, MetricReport};
use jigsaw_core::noise_sim::{
    spatial_profile, stream_rng, Crosstalk, IdealSpec, NoiseProfile,
    DEFAULT_CROSSTALK_SLOPE,
};
use jigsaw_core::pipeline::{run_pipeline, simulate_counts, MarginalCounts, PipelineConfig};
use jigsaw_core::reconstruction::ConvergenceTrace;
use jigsaw_core::subsetting::{
    estimate_trials, multilayer_plan, random_plan, sliding_window_plan, split_trials, SubsetPlan,
    TrialBudget, DEFAULT_CONFIDENCE, DEFAULT_GLOBAL_FRACTION,
};
use jigsaw_core::{
    reconstruct_multilayer, Counts, LayerSet, Marginal, Outcome, ReconstructionConfig, SparsePmf,
    UpdateWeighting,
};

/// Stream of the run seed reserved for drawing planted workloads.
const WORKLOAD_STREAM: u64 = u64::MAX;
/// Mixed into the run seed before drawing random plans.
const PLAN_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Parser, Debug)]
#[command(name = "jigsaw", version, about = "Measurement subsetting and Bayesian reconstruction of noisy readout histograms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a global-mode histogram and one histogram per subset circuit.
    Simulate(SimulateArgs),
    /// Reconstruct a global histogram from marginal histograms.
    Reconstruct(ReconstructArgs),
    /// Score a distribution against a reference.
    Metrics(MetricsArgs),
    /// Trials a subset circuit needs to see every outcome.
    EstimateTrials(EstimateArgs),
    /// Simulate, reconstruct and compare against the all-global baseline.
    Pipeline(PipelineArgs),
    /// Generate a readout-error profile with spatial variation.
    Profile(ProfileArgs),
    /// Time reconstruction against the complexity model.
    Scaling(ScalingArgs),
}

/// Benchmark whose ideal output is simulated.
///
/// `ghz:N`, `bv:SECRET`, `planted:N:LAMBDA:SUPPORT` (support drawn from the
/// run seed) or `custom:PATH` (a distribution or count file).
#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    Ghz(usize),
    Bv(String),
    Planted {
        width: usize,
        lambda: f64,
        support: usize,
    },
    Custom(PathBuf),
}

impl FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or("expected KIND:ARGS")?;
        let num = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        match kind {
            "ghz" => Ok(Workload::Ghz(num(rest)?)),
            "bv" => Ok(Workload::Bv(rest.to_string())),
            "planted" => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [w, l, k] = parts[..] else {
                    return Err("planted takes WIDTH:LAMBDA:SUPPORT".into());
                };
                Ok(Workload::Planted {
                    width: num(w)?,
                    lambda: l.parse().map_err(|e| format!("{l:?}: {e}"))?,
                    support: num(k)?,
                })
            }
            "custom" => Ok(Workload::Custom(PathBuf::from(rest))),
            other => Err(format!("unknown workload kind {other:?}")),
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::Ghz(n) => write!(f, "ghz:{n}"),
            Workload::Bv(s) => write!(f, "bv:{s}"),
            Workload::Planted {
                width,
                lambda,
                support,
            } => write!(f, "planted:{width}:{lambda}:{support}"),
            Workload::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl Serialize for Workload {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Workload {
    pub fn to_spec(&self, seed: u64) -> Result<IdealSpec> {
        Ok(match self {
            Workload::Ghz(n) => IdealSpec::Ghz { width: *n },
            Workload::Bv(secret) => IdealSpec::BernsteinVazirani {
                secret: secret.parse()?,
            },
            Workload::Planted {
                width,
                lambda,
                support,
            } => IdealSpec::planted_random(
                *width,
                *lambda,
                *support,
                &mut stream_rng(seed, WORKLOAD_STREAM),
            )?,
            Workload::Custom(path) => IdealSpec::Custom(read_distribution(path)?.pmf),
        })
    }
}

/// Inclusive range of subset sizes, written `MIN:MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layers {
    pub min: usize,
    pub max: usize,
}

impl FromStr for Layers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').unwrap_or((s, s));
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (min, max) = (parse(a)?, parse(b)?);
        if min > max {
            return Err(format!("empty range {min}:{max}"));
        }
        Ok(Layers { min, max })
    }
}

impl fmt::Display for Layers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

impl Serialize for Layers {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct NoiseArgs {
    /// JSON array of per-channel `[p01, p10]` pairs. Generated when absent.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Channels in a generated profile.
    #[arg(long, default_value_t = 27)]
    pub channels: usize,
    #[arg(long, default_value_t = 0.027)]
    pub median_error: f64,
    #[arg(long, default_value_t = 0.222)]
    pub max_error: f64,
    /// Seed of a generated profile. Defaults to `--seed`.
    #[arg(long)]
    pub profile_seed: Option<u64>,
    /// Error inflation per extra simultaneous measurement.
    #[arg(long, default_value_t = DEFAULT_CROSSTALK_SLOPE)]
    pub crosstalk_slope: f64,
    /// Probability that a shot reads out uniformly random bits.
    #[arg(long, default_value_t = 0.0)]
    pub output_depolarizing: f64,
}

impl NoiseArgs {
    fn crosstalk(&self) -> Crosstalk {
        if self.crosstalk_slope == 0.0 {
            Crosstalk::None
        } else {
            Crosstalk::Linear {
                slope: self.crosstalk_slope,
            }
        }
    }

    pub fn load(&self, seed: u64) -> Result<NoiseProfile> {
        let mut profile = match &self.profile {
            Some(path) => read_profile(path, self.crosstalk())?,
            None => {
                let seed = self.profile_seed.unwrap_or(seed);
                let mut p = spatial_profile(self.channels, self.median_error, self.max_error, seed)?;
                p.crosstalk = self.crosstalk();
                p
            }
        };
        profile.output_depolarizing = self.output_depolarizing;
        profile.validate()?;
        Ok(profile)
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct PlanArgs {
    #[arg(long, default_value_t = 2)]
    pub subset_size: usize,
    /// Subset sizes `MIN:MAX` for the multi-layer variant. Overrides
    /// `--subset-size`.
    #[arg(long)]
    pub layers: Option<Layers>,
    /// Draw this many random subsets instead of sliding windows.
    #[arg(long, conflicts_with = "layers")]
    pub random_cpms: Option<usize>,
    /// Use an existing plan file.
    #[arg(long, conflicts_with_all = ["layers", "random_cpms"])]
    pub plan: Option<PathBuf>,
    /// Total trial budget, baseline included.
    #[arg(long, default_value_t = 65536)]
    pub trials: u64,
    /// Share of the budget spent in global mode.
    #[arg(long, default_value_t = DEFAULT_GLOBAL_FRACTION)]
    pub split_fraction: f64,
}

impl PlanArgs {
    pub fn build(&self, width: usize, seed: u64) -> Result<(SubsetPlan, TrialBudget)> {
        let plan = if let Some(path) = &self.plan {
            let file: PlanFile = read_json(path)?;
            let plan = file.to_plan().map_err(|e| e.in_file(path.display().to_string()))?;
            ensure!(
                plan.width == width,
                "{}: plan is for {} qubits, workload has {width}",
                path.display(),
                plan.width
            );
            plan
        } else if let Some(layers) = self.layers {
            multilayer_plan(width, layers.min, layers.max)?
        } else if let Some(count) = self.random_cpms {
            random_plan(width, self.subset_size, count, seed ^ PLAN_SEED_MIX)?
        } else {
            sliding_window_plan(width, self.subset_size)?
        };
        let budget = split_trials(self.trials, &plan, self.split_fraction)?;
        Ok((plan, budget))
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ReconArgs {
    /// Stop once the Hellinger distance between rounds, or its change,
    /// drops below this.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
    /// Scale candidate groups by the marginal probability instead of its
    /// odds.
    #[arg(long)]
    pub plain_probability_weight: bool,
}

impl ReconArgs {
    pub fn config(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            hellinger_tolerance: self.tolerance,
            max_rounds: self.max_rounds,
            weighting: if self.plain_probability_weight {
                UpdateWeighting::Probability
            } else {
                UpdateWeighting::Odds
            },
            ..Default::default()
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub workload: Workload,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct ReconstructArgs {
    /// Global-mode count (or distribution) file.
    #[arg(long)]
    pub global: PathBuf,
    /// Marginal count files, any number, any subset sizes.
    pub marginals: Vec<PathBuf>,
    #[command(flatten)]
    pub recon: ReconArgs,
    /// Output distribution file.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-round convergence log. Defaults to `<out>.convergence.json`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct MetricsArgs {
    /// Distribution (or count) file to score.
    #[arg(long)]
    pub pmf: PathBuf,
    /// Reference distribution (or count) file.
    #[arg(long)]
    pub ideal: PathBuf,
    /// Comma-separated correct outcomes. Defaults to the reference's most
    /// likely outcomes.
    #[arg(long)]
    pub correct: Option<String>,
    /// MaxCut edge list; adds the approximation ratio gap.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 2)]
    pub subset_size: u32,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    pub confidence: f64,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub workload: Workload,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub recon: ReconArgs,
    /// MaxCut edge list; adds the approximation ratio gap to the report.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 27)]
    pub channels: usize,
    #[arg(long, default_value_t = 0.027)]
    pub median_error: f64,
    #[arg(long, default_value_t = 0.222)]
    pub max_error: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = 32)]
    pub width: usize,
    /// Comma-separated global support sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [4096, 8192, 16384, 32768])]
    pub supports: Vec<usize>,
    /// Comma-separated marginal counts.
    #[arg(long, value_delimiter = ',', default_values_t = [16])]
    pub cpms: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub subset_size: usize,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output. Printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for a failed command: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<jigsaw_core::Error>())
        .any(jigsaw_core::Error::is_numerical);
    if numerical {
        3
    } else {
        2
    }
}

pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::EstimateTrials(a) => cmd_estimate_trials(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
        Command::Profile(a) => cmd_profile(&a),
        Command::Scaling(a) => cmd_scaling(&a),
    }
}

/// A count or distribution file, whichever `path` holds.
pub struct Distribution {
    pub width: usize,
    pub qubits: Option<Vec<usize>>,
    pub pmf: SparsePmf,
}

pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let value: serde_json::Value = read_json(path)?;
    let name = path.display().to_string();
    let (width, qubits, pmf) = if value.get("counts").is_some() {
        let file: CountFile =
            serde_json::from_value(value).with_context(|| format!("{name}: not a count file"))?;
        let pmf = file.to_pmf().map_err(|e| e.in_file(&name))?;
        (file.width, file.qubits, pmf)
    } else {
        let file: PmfFile = serde_json::from_value(value)
            .with_context(|| format!("{name}: neither a count nor a distribution file"))?;
        let pmf = file.to_pmf().map_err(|e| e.in_file(&name))?;
        (file.width, file.qubits, pmf)
    };
    Ok(Distribution { width, qubits, pmf })
}

fn count_file_name(index: usize) -> String {
    format!("cpm_{index:03}.json")
}

fn write_marginal_counts(dir: &Path, width: usize, marginals: &[MarginalCounts]) -> Result<()> {
    for (i, m) in marginals.iter().enumerate() {
        let file = CountFile::marginal(width, &m.qubits, &m.counts)?;
        write_json(&dir.join(count_file_name(i)), &file)?;
    }
    Ok(())
}

fn write_global_counts(path: &Path, counts: &Counts) -> Result<()> {
    Ok(write_json(path, &CountFile::global(counts))?)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let spec = args.workload.to_spec(args.seed)?;
    let width = spec.width();
    let profile = args.noise.load(args.seed)?;
    let (plan, budget) = args.plan.build(width, args.seed)?;
    let sim = simulate_counts(&spec, &profile, &plan, &budget, args.seed, true, false)?;

    let dir = &args.out_dir;
    write_json(&dir.join("run_config.json"), args)?;
    write_json(&dir.join("ideal.json"), &PmfFile::from_pmf(&sim.ideal))?;
    write_profile(&dir.join("profile.json"), &profile)?;
    write_json(&dir.join("plan.json"), &PlanFile::new(&plan, Some(&budget)))?;
    write_global_counts(&dir.join("global.json"), &sim.global)?;
    write_marginal_counts(dir, width, &sim.marginals)?;
    Ok(format!(
        "wrote global histogram ({} trials) and {} subset histograms to {}\n",
        budget.global,
        sim.marginals.len(),
        dir.display()
    ))
}

#[derive(Serialize)]
struct ConvergenceLog<'a> {
    rounds: usize,
    layers: &'a [ConvergenceTrace],
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> Result<String> {
    let cfg = args.recon.config();
    cfg.validate()?;
    let global = read_distribution(&args.global)?;
    ensure!(
        global.qubits.is_none(),
        "{}: global histogram must not list measured qubits",
        args.global.display()
    );
    let mut marginals = Vec::with_capacity(args.marginals.len());
    for path in &args.marginals {
        let d = read_distribution(path)?;
        let name = path.display();
        if d.width != global.width {
            bail!(
                "{name}: marginal of a {}-qubit program, global histogram has {} qubits",
                d.width,
                global.width
            );
        }
        let qubits = d
            .qubits
            .with_context(|| format!("{name}: marginal file lacks `qubits`"))?;
        marginals.push(Marginal::new(qubits, d.pmf).map_err(|e| e.in_file(name.to_string()))?);
    }
    let result = reconstruct_multilayer(&global.pmf, &LayerSet::from_marginals(marginals), &cfg)?;

    write_json(&args.out, &PmfFile::from_pmf(&result.pmf))?;
    let log = args
        .log
        .clone()
        .unwrap_or_else(|| args.out.with_extension("convergence.json"));
    write_json(
        &log,
        &ConvergenceLog {
            rounds: result.rounds(),
            layers: &result.traces,
        },
    )?;
    Ok(format!(
        "reconstructed {} outcomes in {} rounds; wrote {}\n",
        result.pmf.len(),
        result.rounds(),
        args.out.display()
    ))
}

fn parse_correct(text: &str, width: usize) -> Result<BTreeSet<Outcome>> {
    text.split(',')
        .map(|s| Ok(Outcome::parse(s.trim(), width)?))
        .collect()
}

fn most_likely(p: &SparsePmf) -> BTreeSet<Outcome> {
    let top = p.mode().1;
    p.iter().filter(|&(_, v)| v == top).map(|(o, _)| o.clone()).collect()
}

fn load_graph(path: Option<&PathBuf>, width: usize) -> Result<Option<MaxCutInstance>> {
    let Some(path) = path else { return Ok(None) };
    let g = read_graph(path)?;
    ensure!(
        g.vertices() == width,
        "{}: graph has {} vertices, distribution has {width} bits",
        path.display(),
        g.vertices()
    );
    Ok(Some(g))
}

pub fn metric_table(columns: &[(&str, &MetricReport)]) -> String {
    let mut out = format!("{:<10}", "metric");
    for (name, _) in columns {
        write!(out, "{name:>12}").unwrap();
    }
    out.push('\n');
    let rows: [(&str, fn(&MetricReport) -> Option<f64>); 7] = [
        ("pst", |r| Some(r.pst)),
        ("ist", |r| Some(r.ist)),
        ("tvd", |r| Some(r.tvd)),
        ("raw_tvd", |r| Some(r.raw_tvd)),
        ("fidelity", |r| Some(r.fidelity)),
        ("hellinger", |r| Some(r.hellinger)),
        ("arg_pct", |r| r.arg),
    ];
    for (label, get) in rows {
        if columns.iter().all(|(_, r)| get(r).is_none()) {
            continue;
        }
        write!(out, "{label:<10}").unwrap();
        for (_, r) in columns {
            match get(r) {
                Some(v) => write!(out, "{v:>12.6}").unwrap(),
                None => write!(out, "{:>12}", "-").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<String> {
    let p = read_distribution(&args.pmf)?;
    let ideal = read_distribution(&args.ideal)?;
    ensure!(
        p.pmf.width() == ideal.pmf.width(),
        "{} has {} bits, {} has {}",
        args.pmf.display(),
        p.pmf.width(),
        args.ideal.display(),
        ideal.pmf.width()
    );
    let correct = match &args.correct {
        Some(text) => parse_correct(text, p.pmf.width())?,
        None => most_likely(&ideal.pmf),
    };
    let graph = load_graph(args.graph.as_ref(), p.pmf.width())?;
    let report = evaluate(&p.pmf, &ideal.pmf, &correct, graph.as_ref())?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(metric_table(&[("value", &report)]))
}

pub fn cmd_estimate_trials(args: &EstimateArgs) -> Result<String> {
    Ok(format!("{}\n", estimate_trials(args.subset_size, args.confidence)?))
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<String> {
    let profile = spatial_profile(args.channels, args.median_error, args.max_error, args.seed)?;
    write_profile(&args.out, &profile)?;
    Ok(format!("wrote {} channels to {}\n", profile.len(), args.out.display()))
}

pub fn cmd_scaling(args: &ScalingArgs) -> Result<String> {
    let sweep = ScalingSweep {
        width: args.width,
        supports: args.supports.clone(),
        cpm_counts: args.cpms.clone(),
        subset_size: args.subset_size,
        repetitions: args.repetitions,
        seed: args.seed,
    };
    let samples = measure_scaling(&sweep)?;
    let mut csv = Vec::new();
    write_csv(&samples, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");
    let slope = fit_slope(&samples)
        .map(|s| format!("fitted seconds per (entry x marginal): {s:.3e}\n"))
        .unwrap_or_default();
    match &args.out {
        Some(path) => {
            write_text(path, &csv)?;
            Ok(slope)
        }
        None => Ok(csv + &slope),
    }
}

/// Runs the whole experiment and writes a directory that depends only on
/// the arguments:
///
/// ```text
/// run_config.json  ideal.json  profile.json  plan.json
/// counts/baseline.json  counts/global.json  counts/cpm_NNN.json
/// reconstruction.json  convergence.json  report.json  comparison.txt
/// ```
pub fn cmd_pipeline(args: &PipelineArgs) -> Result<String> {
    let spec = args.workload.to_spec(args.seed)?;
    let width = spec.width();
    let profile = args.noise.load(args.seed)?;
    let (plan, budget) = args.plan.build(width, args.seed)?;
    let cfg = PipelineConfig {
        seed: args.seed,
        reconstruction: args.recon.config(),
        parallel: true,
        graph: load_graph(args.graph.as_ref(), width)?,
    };
    let run = run_pipeline(&spec, &profile, &plan, &budget, &cfg)?;

    let dir = &args.out_dir;
    let counts = dir.join("counts");
    write_json(&dir.join("run_config.json"), args)?;
    write_json(&dir.join("ideal.json"), &PmfFile::from_pmf(&run.ideal))?;
    write_profile(&dir.join("profile.json"), &profile)?;
    write_json(&dir.join("plan.json"), &PlanFile::new(&plan, Some(&budget)))?;
    write_global_counts(&counts.join("baseline.json"), &run.baseline)?;
    write_global_counts(&counts.join("global.json"), &run.global)?;
    write_marginal_counts(&counts, width, &run.marginals)?;
    write_json(&dir.join("reconstruction.json"), &PmfFile::from_pmf(&run.reconstruction.pmf))?;
    write_json(
        &dir.join("convergence.json"),
        &ConvergenceLog {
            rounds: run.reconstruction.rounds(),
            layers: &run.reconstruction.traces,
        },
    )?;
    let correct: Vec<String> = run.correct.iter().map(Outcome::to_string).collect();
    write_json(
        &dir.join("report.json"),
        &json!({
            "correct": correct,
            "baseline": run.baseline_report,
            "global": run.global_report,
            "jigsaw": run.jigsaw_report,
            "pst_gain": run.pst_gain(),
        }),
    )?;
    let mut table = metric_table(&[
        ("baseline", &run.baseline_report),
        ("global", &run.global_report),
        ("jigsaw", &run.jigsaw_report),
    ]);
    writeln!(table, "pst gain over baseline: {:.4}x", run.pst_gain()).unwrap();
    write_text(&dir.join("comparison.txt"), &table)?;
    Ok(table)
}
