//! Figures of merit for comparing an output distribution against the ideal
//! one, plus the MaxCut cost used to score QAOA runs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{check_widths, hellinger, merge_join, Outcome, SparsePmf};

/// Probability mass on the correct outcomes.
pub fn pst(p: &SparsePmf, correct: &BTreeSet<Outcome>) -> f64 {
    correct.iter().map(|o| p.get(o)).sum::<f64>().min(1.0)
}

/// Mass of the strongest correct outcome over the mass of the strongest
/// incorrect one. Infinite when every observed outcome is correct.
pub fn ist(p: &SparsePmf, correct: &BTreeSet<Outcome>) -> f64 {
    let mut best_correct = 0.0f64;
    let mut best_wrong = 0.0f64;
    for (o, v) in p.iter() {
        if correct.contains(o) {
            best_correct = best_correct.max(v);
        } else {
            best_wrong = best_wrong.max(v);
        }
    }
    if best_wrong == 0.0 {
        f64::INFINITY
    } else {
        best_correct / best_wrong
    }
}

/// Total variation distance `1/2 sum |p - q|`.
pub fn tvd(p: &SparsePmf, q: &SparsePmf) -> Result<f64> {
    Ok(raw_tvd(p, q)? / 2.0)
}

/// Unhalved `sum |p - q|`, in `[0, 2]`.
pub fn raw_tvd(p: &SparsePmf, q: &SparsePmf) -> Result<f64> {
    check_widths(p, q)?;
    let mut acc = 0.0;
    merge_join(p, q, |a, b| acc += (a - b).abs());
    Ok(acc.min(2.0))
}

/// `(tvd, 1 - tvd)`.
pub fn fidelity(p: &SparsePmf, q: &SparsePmf) -> Result<(f64, f64)> {
    let d = tvd(p, q)?;
    Ok((d, 1.0 - d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCutInstance {
    vertices: usize,
    edges: Vec<Edge>,
    optimum: f64,
}

impl MaxCutInstance {
    pub fn new(vertices: usize, edges: Vec<Edge>, optimum: f64) -> Result<Self> {
        for e in &edges {
            if e.u >= vertices || e.v >= vertices {
                return Err(Error::argument(format!(
                    "edge ({}, {}) references a vertex outside 0..{vertices}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::argument(format!("self-loop on vertex {}", e.u)));
            }
        }
        if !(optimum > 0.0) {
            return Err(Error::argument("optimum cut value must be positive"));
        }
        Ok(MaxCutInstance {
            vertices,
            edges,
            optimum,
        })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    /// Weight of edges whose endpoints disagree in `x`.
    pub fn cut_value(&self, x: &Outcome) -> f64 {
        self.edges
            .iter()
            .filter(|e| x.bit(e.u) != x.bit(e.v))
            .map(|e| e.weight)
            .sum()
    }

    /// Best cut by exhaustive search, for small graphs.
    pub fn brute_force_optimum(vertices: usize, edges: &[Edge]) -> Result<f64> {
        if vertices == 0 || vertices > 24 {
            return Err(Error::argument("brute force needs 1..=24 vertices"));
        }
        let mut best = 0.0f64;
        for v in 0..1u64 << (vertices - 1) {
            let x = Outcome::from_u64(v, vertices)?;
            let cut: f64 = edges
                .iter()
                .filter(|e| x.bit(e.u) != x.bit(e.v))
                .map(|e| e.weight)
                .sum();
            best = best.max(cut);
        }
        Ok(best)
    }
}

/// Edge-list text: a header line `n m opt`, then `m` lines `u v [w]`.
/// Blank lines and `#` comments are ignored.
impl FromStr for MaxCutInstance {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("graph file has no header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, m, opt] = fields.as_slice() else {
            return Err(Error::argument(format!("bad graph header {header:?}")));
        };
        let n: usize = parse_field(n)?;
        let m: usize = parse_field(m)?;
        let optimum: f64 = parse_field(opt)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let edge = match f.as_slice() {
                [u, v] => Edge {
                    u: parse_field(u)?,
                    v: parse_field(v)?,
                    weight: 1.0,
                },
                [u, v, w] => Edge {
                    u: parse_field(u)?,
                    v: parse_field(v)?,
                    weight: parse_field(w)?,
                },
                _ => return Err(Error::argument(format!("bad edge line {line:?}"))),
            };
            edges.push(edge);
        }
        if edges.len() != m {
            return Err(Error::argument(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        MaxCutInstance::new(n, edges, optimum)
    }
}

fn parse_field<T: FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::argument(format!("cannot parse {s:?}")))
}

impl fmt::Display for MaxCutInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.vertices, self.edges.len(), self.optimum)?;
        for e in &self.edges {
            writeln!(f, "{} {} {}", e.u, e.v, e.weight)?;
        }
        Ok(())
    }
}

/// Expected cut value of outcomes drawn from `p`.
pub fn maxcut_expectation(p: &SparsePmf, g: &MaxCutInstance) -> Result<f64> {
    if p.width() != g.vertices() {
        return Err(Error::WidthMismatch {
            expected: g.vertices(),
            found: p.width(),
        });
    }
    Ok(p.iter().map(|(x, v)| v * g.cut_value(x)).sum())
}

pub fn approximation_ratio(p: &SparsePmf, g: &MaxCutInstance) -> Result<f64> {
    Ok(maxcut_expectation(p, g)? / g.optimum())
}

/// Approximation ratio gap in percent: `100 (AR_ideal - AR_real) / AR_ideal`.
/// Negative when the real distribution outperforms the ideal one.
pub fn arg(ideal: &SparsePmf, real: &SparsePmf, g: &MaxCutInstance) -> Result<f64> {
    let ar_ideal = approximation_ratio(ideal, g)?;
    let ar_real = approximation_ratio(real, g)?;
    arg_from_ratios(ar_ideal, ar_real)
}

pub fn arg_from_ratios(ar_ideal: f64, ar_real: f64) -> Result<f64> {
    if ar_ideal == 0.0 {
        return Err(Error::argument("ideal approximation ratio is zero"));
    }
    Ok(100.0 * (ar_ideal - ar_real) / ar_ideal)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub pst: f64,
    #[serde(with = "extended_float")]
    pub ist: f64,
    pub tvd: f64,
    /// `sum |p - q|` without the 1/2 factor.
    pub raw_tvd: f64,
    pub fidelity: f64,
    pub hellinger: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arg: Option<f64>,
}

/// Score `p` against the ideal distribution.
pub fn evaluate(
    p: &SparsePmf,
    ideal: &SparsePmf,
    correct: &BTreeSet<Outcome>,
    graph: Option<&MaxCutInstance>,
) -> Result<MetricReport> {
    let raw = raw_tvd(p, ideal)?;
    let arg = graph.map(|g| arg(ideal, p, g)).transpose()?;
    Ok(MetricReport {
        pst: pst(p, correct),
        ist: ist(p, correct),
        tvd: raw / 2.0,
        raw_tvd: raw,
        fidelity: 1.0 - raw / 2.0,
        hellinger: hellinger(p, ideal)?,
        arg,
    })
}

/// JSON has no infinity; write it as the string `"inf"`.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad float {t:?}"))),
        }
    }
}
