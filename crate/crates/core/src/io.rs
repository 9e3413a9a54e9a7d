//! On-disk formats.
//!
//! * count file: `{"width": n, "qubits": [..], "shots": t, "counts": {"0101": 12, ..}}`,
//!   `qubits` present only for marginals and always in descending order;
//! * distribution file: the same shape with `"probabilities"` instead of counts;
//! * plan file: `{"width": n, "layers": [{"size": s, "subsets": [[..], ..]}], "trials": {..}}`;
//! * profile file: a JSON array of per-channel `[p01, p10]` pairs;
//! * graph file: the edge-list text read by [`MaxCutInstance`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MaxCutInstance;
use crate::noise_sim::{ChannelError, Crosstalk, NoiseProfile};
use crate::pmf::{validate_qubits, Counts, Marginal, Outcome, SparsePmf};
use crate::subsetting::{SubsetLayer, SubsetPlan, TrialBudget};

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path_str(path),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path_str(path),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: path_str(dir),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path_str(path),
        source,
    })
}

/// Permutation putting `qubits` in descending order, as string positions.
fn descending_order(qubits: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..qubits.len()).collect();
    order.sort_by(|&a, &b| qubits[b].cmp(&qubits[a]));
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountFile {
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountFile {
    /// Global-mode histogram over all `counts.width()` qubits.
    pub fn global(counts: &Counts) -> Self {
        CountFile {
            width: counts.width(),
            qubits: None,
            shots: counts.total(),
            counts: counts.iter().map(|(o, n)| (o.to_string(), n)).collect(),
        }
    }

    /// Histogram of a partial measurement of `qubits` (string position `j`
    /// is `qubits[j]`) on a `width`-qubit program. Written in descending
    /// qubit order.
    pub fn marginal(width: usize, qubits: &[usize], counts: &Counts) -> Result<Self> {
        validate_qubits(qubits, width)?;
        if counts.width() != qubits.len() {
            return Err(Error::WidthMismatch {
                expected: qubits.len(),
                found: counts.width(),
            });
        }
        let k = qubits.len();
        let order = descending_order(qubits);
        let positions: Vec<usize> = order.iter().map(|&j| k - 1 - j).collect();
        let mut map = BTreeMap::new();
        for (o, n) in counts.iter() {
            *map.entry(o.reduce_unchecked(&positions).to_string()).or_insert(0) += n;
        }
        Ok(CountFile {
            width,
            qubits: Some(order.iter().map(|&j| qubits[j]).collect()),
            shots: counts.total(),
            counts: map,
        })
    }

    fn key_width(&self) -> usize {
        self.qubits.as_ref().map_or(self.width, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = &self.qubits {
            validate_qubits(q, self.width)?;
        }
        let k = self.key_width();
        for key in self.counts.keys() {
            Outcome::parse(key, k)?;
        }
        let sum: u64 = self.counts.values().sum();
        if sum != self.shots {
            return Err(Error::argument(format!(
                "counts sum to {sum} but shots = {}",
                self.shots
            )));
        }
        Ok(())
    }

    pub fn to_counts(&self) -> Result<Counts> {
        self.validate()?;
        let k = self.key_width();
        let mut counts = Counts::new(k);
        for (key, &n) in &self.counts {
            counts.add(Outcome::parse(key, k)?, n)?;
        }
        Ok(counts)
    }

    pub fn to_pmf(&self) -> Result<SparsePmf> {
        self.validate()?;
        SparsePmf::from_counts(self.counts.iter().map(|(k, &n)| (k, n)), self.key_width())
    }

    pub fn to_marginal(&self) -> Result<Marginal> {
        let qubits = self
            .qubits
            .clone()
            .ok_or_else(|| Error::argument("count file has no `qubits` field"))?;
        Marginal::new(qubits, self.to_pmf()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file: CountFile = read_json(path)?;
        file.validate().map_err(|e| e.in_file(path_str(path)))?;
        Ok(file)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfFile {
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    pub probabilities: BTreeMap<String, f64>,
}

impl PmfFile {
    pub fn from_pmf(pmf: &SparsePmf) -> Self {
        PmfFile {
            width: pmf.width(),
            qubits: None,
            probabilities: pmf.iter().map(|(o, p)| (o.to_string(), p)).collect(),
        }
    }

    pub fn from_marginal(width: usize, marginal: &Marginal) -> Self {
        let canon = marginal.canonical();
        PmfFile {
            width,
            qubits: Some(canon.qubits().to_vec()),
            probabilities: canon.pmf().iter().map(|(o, p)| (o.to_string(), p)).collect(),
        }
    }

    pub fn to_pmf(&self) -> Result<SparsePmf> {
        let k = self.qubits.as_ref().map_or(self.width, Vec::len);
        if let Some(q) = &self.qubits {
            validate_qubits(q, self.width)?;
        }
        let entries = self
            .probabilities
            .iter()
            .map(|(key, &p)| Ok((Outcome::parse(key, k)?, p)))
            .collect::<Result<Vec<_>>>()?;
        SparsePmf::from_probabilities(k, entries)
    }

    pub fn to_marginal(&self) -> Result<Marginal> {
        let qubits = self
            .qubits
            .clone()
            .ok_or_else(|| Error::argument("distribution file has no `qubits` field"))?;
        Marginal::new(qubits, self.to_pmf()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub width: usize,
    pub layers: Vec<SubsetLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<TrialBudget>,
}

impl PlanFile {
    pub fn new(plan: &SubsetPlan, trials: Option<&TrialBudget>) -> Self {
        PlanFile {
            width: plan.width,
            layers: plan.layers.clone(),
            trials: trials.cloned(),
        }
    }

    pub fn to_plan(&self) -> Result<SubsetPlan> {
        SubsetPlan::new(self.width, self.layers.clone())
    }
}

pub fn read_profile(path: &Path, crosstalk: Crosstalk) -> Result<NoiseProfile> {
    let channels: Vec<ChannelError> = read_json(path)?;
    NoiseProfile::new(channels, crosstalk).map_err(|e| e.in_file(path_str(path)))
}

pub fn write_profile(path: &Path, profile: &NoiseProfile) -> Result<()> {
    write_json(path, &profile.channels)
}

pub fn read_graph(path: &Path) -> Result<MaxCutInstance> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path_str(path),
        source,
    })?;
    text.parse().map_err(|e: Error| e.in_file(path_str(path)))
}
