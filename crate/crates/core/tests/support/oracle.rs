//! Straight transcription of the reconstruction algorithm over bitstring
//! maps, sharing no code with the library. Used as a reference.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

pub type Dist = BTreeMap<String, f64>;

pub const CLAMP: f64 = 1e-9;

/// Characters of `x` at `qubits`; qubit 0 is the last character.
pub fn reduce(x: &str, qubits: &[usize]) -> String {
    let bytes = x.as_bytes();
    qubits.iter().map(|&q| bytes[bytes.len() - 1 - q] as char).collect()
}

fn normalize(d: &mut Dist) {
    d.retain(|_, v| *v > 0.0);
    let total: f64 = d.values().sum();
    for v in d.values_mut() {
        *v /= total;
    }
}

/// One update, walking the marginal entry by entry.
pub fn update(p: &Dist, qubits: &[usize], m: &Dist, odds: bool) -> Dist {
    let mut out = Dist::new();
    for (y, &pr_y) in m {
        let candidates: Vec<(&String, f64)> = p
            .iter()
            .filter(|(x, _)| reduce(x, qubits) == *y)
            .map(|(x, &v)| (x, v))
            .collect();
        let total: f64 = candidates.iter().map(|c| c.1).sum();
        let factor = if odds {
            let y = pr_y.min(1.0 - CLAMP);
            y / (1.0 - y)
        } else {
            pr_y
        };
        for (x, v) in candidates {
            out.insert(x.clone(), v / total * factor);
        }
    }
    normalize(&mut out);
    out
}

pub fn hellinger(p: &Dist, q: &Dist) -> f64 {
    let mut keys: Vec<&String> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    let acc: f64 = keys
        .into_iter()
        .map(|k| {
            let d = p.get(k).copied().unwrap_or(0.0).sqrt() - q.get(k).copied().unwrap_or(0.0).sqrt();
            d * d
        })
        .sum();
    (acc / 2.0).sqrt()
}

/// Rounds of `P + sum of updates`, all taken from the round's prior.
pub fn reconstruct(p: &Dist, marginals: &[(Vec<usize>, Dist)], odds: bool, tol: f64, max_rounds: usize) -> Dist {
    let mut current = p.clone();
    let mut previous: Option<f64> = None;
    for _ in 0..max_rounds {
        let mut out = current.clone();
        for (qubits, m) in marginals {
            for (x, w) in update(&current, qubits, m, odds) {
                *out.entry(x).or_insert(0.0) += w;
            }
        }
        normalize(&mut out);
        let hd = hellinger(&current, &out);
        current = out;
        if hd < tol || previous.is_some_and(|prev| (hd - prev).abs() < tol) {
            break;
        }
        previous = Some(hd);
    }
    current
}

fn bits(v: usize, width: usize) -> String {
    format!("{v:0width$b}")
}

/// Random distribution over a random nonempty subset of `width`-bit strings.
pub fn random_dist<R: Rng>(width: usize, rng: &mut R) -> Dist {
    let mut d = Dist::new();
    while d.is_empty() {
        for v in 0..1usize << width {
            if rng.random_bool(0.6) {
                d.insert(bits(v, width), rng.random_range(0.05..1.0));
            }
        }
    }
    normalize(&mut d);
    d
}

/// A prior of width 2 or 3 and one to three marginals over random ordered
/// qubit subsets, each sharing at least one reduced outcome with the prior.
pub fn random_instance<R: Rng>(rng: &mut R) -> (usize, Dist, Vec<(Vec<usize>, Dist)>) {
    let width = rng.random_range(2..=3);
    let p = random_dist(width, rng);
    let count = rng.random_range(1..=3);
    let mut marginals = Vec::new();
    for _ in 0..count {
        let k = rng.random_range(1..=width);
        let mut qubits: Vec<usize> = (0..width).collect();
        for i in (1..qubits.len()).rev() {
            qubits.swap(i, rng.random_range(0..=i));
        }
        qubits.truncate(k);
        let mut m = random_dist(k, rng);
        let anchor = reduce(p.keys().next().unwrap(), &qubits);
        m.entry(anchor).or_insert(0.1);
        normalize(&mut m);
        marginals.push((qubits, m));
    }
    (width, p, marginals)
}
