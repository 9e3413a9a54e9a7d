//! Memory and operation-count model of reconstruction, and a harness that
//! measures the engine against it.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{Marginal, Outcome, SparsePmf};
use crate::reconstruction::{bayesian_reconstruction, ReconstructionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    /// Program width `n`.
    pub qubits: u64,
    /// Circuits per layer `N`.
    pub cpms: u64,
    /// Global-mode trials `T`.
    pub trials: u64,
    /// Fraction of trials that produce distinct global outcomes (epsilon).
    pub global_fraction: f64,
    /// Same for the local histograms (delta).
    pub local_fraction: f64,
    pub subset_size: u32,
    /// Number of subset sizes in use; 1 for a single layer.
    pub layers: u64,
}

impl ComplexityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.global_fraction), ("delta", self.local_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::argument(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.subset_size >= 64 {
            return Err(Error::argument("subset size too large"));
        }
        Ok(())
    }

    /// Entries per local histogram, `min(2^s, delta T)`.
    pub fn local_entries(&self) -> f64 {
        ((1u64 << self.subset_size) as f64).min(self.local_fraction * self.trials as f64)
    }

    pub fn global_entries(&self) -> f64 {
        self.global_fraction * self.trials as f64
    }
}

/// Bytes held during reconstruction: the global histogram (`n + 8` bytes per
/// entry), `N` intermediate and one output probability vector (8 bytes per
/// entry each), and `layers * N` local histograms of `L (s + 8)` bytes.
/// The real-valued total is rounded to the nearest byte.
pub fn memory_bytes(p: &ComplexityParams) -> Result<u64> {
    p.validate()?;
    let n = p.qubits as f64;
    let cpms = p.cpms as f64;
    let global = (n + 8.0 * (2.0 + cpms)) * p.global_entries();
    let local = p.local_entries() * (p.subset_size as f64 + 8.0) * p.layers as f64 * cpms;
    Ok((global + local).round() as u64)
}

/// `4 epsilon layers N T`: one pass for the update coefficients and three
/// for the update, per global entry per local histogram.
pub fn operation_count(p: &ComplexityParams) -> Result<u64> {
    p.validate()?;
    Ok((4.0 * p.global_fraction * p.layers as f64 * p.cpms as f64 * p.trials as f64).round() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSweep {
    pub width: usize,
    /// Global support sizes to test.
    pub supports: Vec<usize>,
    /// Marginal counts to test.
    pub cpm_counts: Vec<usize>,
    pub subset_size: usize,
    /// Timed repetitions per point; the fastest is kept.
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ScalingSweep {
    fn default() -> Self {
        ScalingSweep {
            width: 32,
            supports: vec![4096, 8192, 16384, 32768],
            cpm_counts: vec![16],
            subset_size: 2,
            repetitions: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub width: usize,
    pub cpms: usize,
    pub support: usize,
    pub predicted_bytes: u64,
    pub predicted_ops: u64,
    pub seconds: f64,
    pub entries: usize,
}

/// Supports this small only measure timer overhead.
pub const TIMING_FLOOR_SUPPORT: usize = 1;

/// Random distribution over `support` distinct outcomes of `width` bits.
pub fn synthetic_pmf<R: Rng + ?Sized>(width: usize, support: usize, rng: &mut R) -> Result<SparsePmf> {
    if width == 0 || width > 63 || (support as u128) > (1u128 << width) || support == 0 {
        return Err(Error::argument(format!(
            "cannot draw {support} distinct outcomes of width {width}"
        )));
    }
    let mut seen = BTreeSet::new();
    while seen.len() < support {
        seen.insert(rng.random_range(0..1u64 << width));
    }
    SparsePmf::from_weights(
        width,
        seen.into_iter()
            .map(|v| Ok((Outcome::from_u64(v, width)?, rng.random_range(0.5..1.5))))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// `count` random marginals of `size` wrapping windows, each a full random
/// distribution over its `2^size` outcomes.
pub fn synthetic_marginals<R: Rng + ?Sized>(
    width: usize,
    size: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Marginal>> {
    if size == 0 || size > width || size > 16 {
        return Err(Error::argument(format!("bad marginal size {size}")));
    }
    (0..count)
        .map(|i| {
            let qubits: Vec<usize> = (0..size).map(|j| (i + j) % width).collect();
            let weights = (0..1u64 << size)
                .map(|v| Ok((Outcome::from_u64(v, size)?, rng.random_range(0.1..1.0))))
                .collect::<Result<Vec<_>>>()?;
            Marginal::new(qubits, SparsePmf::from_weights(size, weights)?)
        })
        .collect()
}

/// Time one reconstruction round, single-threaded, at every sweep point.
/// Repetitions cycle through the supports so that a burst of background load
/// hits every point rather than one; the fastest repetition is kept.
pub fn measure_scaling(sweep: &ScalingSweep) -> Result<Vec<ScalingSample>> {
    let cfg = ReconstructionConfig {
        max_rounds: 1,
        parallel: false,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
    let mut out = Vec::new();
    for &cpms in &sweep.cpm_counts {
        let marginals = synthetic_marginals(sweep.width, sweep.subset_size, cpms, &mut rng)?;
        let priors = sweep
            .supports
            .iter()
            .map(|&support| synthetic_pmf(sweep.width, support, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let mut best = vec![f64::INFINITY; priors.len()];
        let mut entries = vec![0; priors.len()];
        for _ in 0..sweep.repetitions.max(1) {
            for (i, prior) in priors.iter().enumerate() {
                let start = Instant::now();
                let result = bayesian_reconstruction(prior, &marginals, &cfg)?;
                best[i] = best[i].min(start.elapsed().as_secs_f64());
                entries[i] = result.pmf.len();
            }
        }
        for (i, &support) in sweep.supports.iter().enumerate() {
            let params = ComplexityParams {
                qubits: sweep.width as u64,
                cpms: cpms as u64,
                trials: support as u64,
                global_fraction: 1.0,
                local_fraction: 1.0,
                subset_size: sweep.subset_size as u32,
                layers: 1,
            };
            out.push(ScalingSample {
                width: sweep.width,
                cpms,
                support,
                predicted_bytes: memory_bytes(&params)?,
                predicted_ops: operation_count(&params)?,
                seconds: best[i],
                entries: entries[i],
            });
        }
    }
    Ok(out)
}

/// Least-squares slope of seconds against `support * cpms`, through the
/// origin, skipping timer-floor samples.
pub fn fit_slope(samples: &[ScalingSample]) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in samples.iter().filter(|s| s.support > TIMING_FLOOR_SUPPORT) {
        let x = (s.support * s.cpms) as f64;
        sxy += x * s.seconds;
        sxx += x * x;
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_csv<W: Write>(samples: &[ScalingSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let wrap = |e: csv::Error| Error::argument(format!("csv: {e}"));
    for s in samples {
        w.serialize(s).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}
