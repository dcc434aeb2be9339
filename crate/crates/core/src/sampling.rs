//! Born-rule snapshots, post-selection and jackknife statistics.
//!
//! Snapshot file format: each block starts with one JSON line holding the
//! [`SnapshotMeta`], followed by `n_retained` lines of bitstrings. Character
//! j of a bitstring is site j (0-based), `1` meaning up.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Basis, SectorBasis, StateVector};

pub const DEFAULT_SHOTS: usize = 1500;

/// Seed for sub-stream `index` of `stream`, independent of scheduling.
pub fn derive_seed(root: u64, stream: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update((stream.len() as u64).to_le_bytes());
    h.update(stream.as_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub l: usize,
    pub seed: u64,
    pub n_total: usize,
    pub n_retained: usize,
    #[serde(default)]
    pub time: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Excitation count kept by post-selection, if any.
    #[serde(default)]
    pub postselected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub meta: SnapshotMeta,
    /// Bit j set = site j up.
    pub shots: Vec<u64>,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn with_context(mut self, time: f64, delta: f64, alpha: f64) -> Self {
        self.meta.time = Some(time);
        self.meta.delta = Some(delta);
        self.meta.alpha = Some(alpha);
        self
    }

    pub fn retention(&self) -> f64 {
        self.meta.n_retained as f64 / self.meta.n_total as f64
    }

    pub fn bitstring(&self, i: usize) -> String {
        (0..self.meta.l)
            .map(|j| if (self.shots[i] >> j) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Estimated ⟨P↑_j⟩.
    pub fn up_density(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.meta.l];
        for &s in &self.shots {
            for (j, v) in d.iter_mut().enumerate() {
                *v += ((s >> j) & 1) as f64;
            }
        }
        d.iter_mut().for_each(|v| *v /= self.len() as f64);
        d
    }

    /// Estimated ⟨P↑↑_{j,j+1}⟩, j = 0..L−2.
    pub fn pair_density(&self) -> Vec<f64> {
        let l = self.meta.l;
        let mut d = vec![0.0; l.saturating_sub(1)];
        for &s in &self.shots {
            for (j, v) in d.iter_mut().enumerate() {
                *v += ((s >> j) & 3 == 3) as u8 as f64;
            }
        }
        d.iter_mut().for_each(|v| *v /= self.len() as f64);
        d
    }

    /// Number of adjacent up-pairs in each shot.
    pub fn pair_counts(&self) -> Vec<f64> {
        let l = self.meta.l;
        let inner = if l >= 2 { (1u64 << (l - 1)) - 1 } else { 0 };
        self.shots
            .iter()
            .map(|&s| (s & (s >> 1) & inner).count_ones() as f64)
            .collect()
    }
}

fn config_probabilities(psi: &StateVector) -> Result<(Vec<u64>, Vec<f64>)> {
    let probs = psi.probabilities();
    let masks = match psi.basis {
        Basis::Full { .. } => (0..probs.len() as u64).collect(),
        Basis::Sector { l, n } => {
            let b = SectorBasis::new(l, n)?;
            (0..b.dim()).map(|r| b.mask(r)).collect()
        }
    };
    Ok((masks, probs))
}

/// N i.i.d. z-basis configurations drawn with probability |amplitude|².
pub fn sample_snapshots(psi: &StateVector, n: usize, seed: u64) -> Result<SnapshotSet> {
    let (masks, probs) = config_probabilities(psi)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    if (acc - 1.0).abs() > 1e-8 {
        return Err(Error::Statistics(format!("state norm² is {acc}, expected 1")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let shots = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(masks.len() - 1);
            masks[i]
        })
        .collect();
    Ok(SnapshotSet {
        meta: SnapshotMeta {
            l: psi.basis.l(),
            seed,
            n_total: n,
            n_retained: n,
            time: None,
            delta: None,
            alpha: None,
            postselected: None,
        },
        shots,
    })
}

/// Samples each state with seed `derive_seed(root, stream, index)`.
pub fn sample_series(states: &[StateVector], n: usize, root: u64, stream: &str) -> Result<Vec<SnapshotSet>> {
    states
        .par_iter()
        .enumerate()
        .map(|(i, s)| sample_snapshots(s, n, derive_seed(root, stream, i as u64)))
        .collect()
}

/// Keeps shots with exactly `n` up spins.
pub fn postselect(set: &SnapshotSet, n: usize) -> Result<SnapshotSet> {
    let shots: Vec<u64> = set.shots.iter().copied().filter(|s| s.count_ones() as usize == n).collect();
    if shots.is_empty() {
        return Err(Error::Statistics(format!("no snapshots with {n} excitations")));
    }
    let mut meta = set.meta.clone();
    meta.n_retained = shots.len();
    meta.postselected = Some(n);
    Ok(SnapshotSet { meta, shots })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JackknifeEstimate {
    /// Estimator on the full set.
    pub value: f64,
    /// Mean of the leave-one-out estimates.
    pub mean: f64,
    pub error: f64,
}

fn jackknife_from(value: f64, loo: &[f64]) -> JackknifeEstimate {
    let n = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / n;
    let var = loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (n - 1.0) / n;
    JackknifeEstimate {
        value,
        mean,
        error: var.sqrt(),
    }
}

/// Delete-one jackknife of an arbitrary estimator over the shots.
pub fn jackknife<F>(set: &SnapshotSet, estimator: F) -> Result<JackknifeEstimate>
where
    F: Fn(&[u64]) -> f64 + Sync,
{
    if set.len() < 2 {
        return Err(Error::Statistics("jackknife needs at least 2 snapshots".into()));
    }
    let value = estimator(&set.shots);
    let loo: Vec<f64> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut rest = Vec::with_capacity(set.len() - 1);
            rest.extend_from_slice(&set.shots[..i]);
            rest.extend_from_slice(&set.shots[i + 1..]);
            estimator(&rest)
        })
        .collect();
    Ok(jackknife_from(value, &loo))
}

/// Jackknife of f(mean of per-shot values) in O(N).
pub fn jackknife_mean<F>(values: &[f64], f: F) -> Result<JackknifeEstimate>
where
    F: Fn(f64) -> f64,
{
    let n = values.len();
    if n < 2 {
        return Err(Error::Statistics("jackknife needs at least 2 snapshots".into()));
    }
    let total: f64 = values.iter().sum();
    let loo: Vec<f64> = values.iter().map(|x| f((total - x) / (n - 1) as f64)).collect();
    Ok(jackknife_from(f(total / n as f64), &loo))
}

/// Bound-pair participation with its jackknife error from post-selected two-magnon shots.
pub fn participation_estimate(set: &SnapshotSet) -> Result<JackknifeEstimate> {
    let l = set.meta.l;
    jackknife_mean(&set.pair_counts(), |m| crate::probes::bs_participation(&[m], l))
}

pub fn write_snapshots<W: Write>(mut w: W, sets: &[SnapshotSet]) -> Result<()> {
    let io = |e: std::io::Error| Error::Format(e.to_string());
    for s in sets {
        let meta = serde_json::to_string(&s.meta).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(w, "{meta}").map_err(io)?;
        for i in 0..s.len() {
            writeln!(w, "{}", s.bitstring(i)).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<SnapshotSet>> {
    let mut out: Vec<SnapshotSet> = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('{') {
            let meta: SnapshotMeta = serde_json::from_str(line)
                .map_err(|e| Error::Format(format!("line {}: {e}", no + 1)))?;
            out.push(SnapshotSet {
                meta,
                shots: Vec::new(),
            });
            continue;
        }
        let set = out
            .last_mut()
            .ok_or_else(|| Error::Format(format!("line {}: bitstring before metadata", no + 1)))?;
        if line.len() != set.meta.l {
            return Err(Error::Format(format!("line {}: expected {} sites", no + 1, set.meta.l)));
        }
        let mut m = 0u64;
        for (j, c) in line.chars().enumerate() {
            match c {
                '1' => m |= 1 << j,
                '0' => {}
                _ => return Err(Error::Format(format!("line {}: bad character '{c}'", no + 1))),
            }
        }
        set.shots.push(m);
    }
    for s in &out {
        if s.shots.len() != s.meta.n_retained {
            return Err(Error::Format(format!(
                "block has {} shots, metadata says {}",
                s.shots.len(),
                s.meta.n_retained
            )));
        }
        if let Some(n) = s.meta.postselected {
            if s.shots.iter().any(|x| x.count_ones() as usize != n) {
                return Err(Error::Format("post-selected block has wrong excitation count".into()));
            }
        }
    }
    Ok(out)
}
