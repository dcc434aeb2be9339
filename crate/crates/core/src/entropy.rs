//! Sector-resolved entanglement entropies and the snapshot-based
//! configurational mutual-information proxy. Natural logarithms throughout.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::herm_eigenvalues;
use crate::model::{Basis, SectorBasis, StateVector};
use crate::sampling::SnapshotSet;
use crate::C64;

/// Ordered list of 0-based sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(mut sites: Vec<usize>, l: usize) -> Result<Self> {
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() || sites.iter().any(|&s| s >= l) {
            return Err(Error::Region(format!("sites {sites:?} invalid for L = {l}")));
        }
        Ok(Self { sites })
    }

    /// From 1-based site labels.
    pub fn one_based(sites: &[usize], l: usize) -> Result<Self> {
        if sites.contains(&0) {
            return Err(Error::Region("1-based sites start at 1".into()));
        }
        Self::new(sites.iter().map(|s| s - 1).collect(), l)
    }

    /// Consecutive sites start..start+len.
    pub fn segment(start: usize, len: usize, l: usize) -> Result<Self> {
        Self::new((start..start + len).collect(), l)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn mask(&self) -> u64 {
        self.sites.iter().fold(0, |m, s| m | (1 << s))
    }

    pub fn overlaps(&self, other: &Region) -> bool {
        self.mask() & other.mask() != 0
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut s = self.sites.clone();
        s.extend_from_slice(&other.sites);
        s.sort_unstable();
        s.dedup();
        Region { sites: s }
    }
}

#[derive(Debug, Clone)]
pub struct DensityBlock {
    /// Local magnon number in the region.
    pub n: usize,
    pub p: f64,
    /// Region configurations (global masks restricted to the region) labelling rows.
    pub configs: Vec<u64>,
    /// Unit-trace block.
    pub rho: DMatrix<C64>,
}

#[derive(Debug, Clone)]
pub struct SectorResolvedDensity {
    pub region: Region,
    pub blocks: Vec<DensityBlock>,
}

fn config_amplitudes(psi: &StateVector) -> Result<Vec<(u64, C64)>> {
    match psi.basis {
        Basis::Full { .. } => Ok(psi.amps.iter().enumerate().map(|(i, a)| (i as u64, *a)).collect()),
        Basis::Sector { l, n } => {
            let b = SectorBasis::new(l, n)?;
            if b.dim() != psi.amps.len() {
                return Err(Error::Basis("amplitude count does not match sector".into()));
            }
            Ok(psi.amps.iter().enumerate().map(|(r, a)| (b.mask(r), *a)).collect())
        }
    }
}

/// Exact ρ_A organised by local magnon number.
pub fn reduced_density(psi: &StateVector, region: &Region) -> Result<SectorResolvedDensity> {
    if region.sites.iter().any(|&s| s >= psi.basis.l()) {
        return Err(Error::Region("region exceeds the chain".into()));
    }
    let rm = region.mask();
    let mut index: HashMap<u64, (usize, usize)> = HashMap::new();
    let mut per_n: Vec<Vec<u64>> = Vec::new();
    // group amplitudes by the complement configuration
    let mut groups: HashMap<u64, Vec<(u64, C64)>> = HashMap::new();
    for (m, a) in config_amplitudes(psi)? {
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        let inner = m & rm;
        if !index.contains_key(&inner) {
            let n = inner.count_ones() as usize;
            if per_n.len() <= n {
                per_n.resize(n + 1, Vec::new());
            }
            index.insert(inner, (n, per_n[n].len()));
            per_n[n].push(inner);
        }
        groups.entry(m & !rm).or_default().push((inner, a));
    }
    let mut rhos: Vec<DMatrix<C64>> = per_n.iter().map(|c| DMatrix::zeros(c.len(), c.len())).collect();
    for g in groups.values() {
        for &(x, ax) in g {
            let (n, i) = index[&x];
            for &(y, ay) in g {
                let (ny, j) = index[&y];
                if ny == n {
                    rhos[n][(i, j)] += ax * ay.conj();
                }
            }
        }
    }
    let total: f64 = rhos.iter().map(|r| r.trace().re).sum();
    if total <= 0.0 {
        return Err(Error::Basis("zero state".into()));
    }
    let blocks = rhos
        .into_iter()
        .zip(per_n)
        .enumerate()
        .filter(|(_, (r, _))| r.nrows() > 0)
        .map(|(n, (r, configs))| {
            let p = r.trace().re;
            DensityBlock {
                n,
                p: p / total,
                configs,
                rho: r / C64::new(p, 0.0),
            }
        })
        .collect();
    Ok(SectorResolvedDensity {
        region: region.clone(),
        blocks,
    })
}

fn von_neumann(rho: &DMatrix<C64>) -> f64 {
    herm_eigenvalues(rho.clone())
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.ln())
        .sum()
}

fn shannon(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Entropies {
    pub total: f64,
    pub number: f64,
    pub config: f64,
}

pub fn entropies(rho: &SectorResolvedDensity) -> Entropies {
    let number = shannon(rho.blocks.iter().map(|b| b.p));
    let config = rho.blocks.iter().map(|b| b.p * von_neumann(&b.rho)).sum();
    Entropies {
        total: number + config,
        number,
        config,
    }
}

/// S_A from the full 2^|A| reduced density matrix, without number blocking.
pub fn entanglement_entropy(psi: &StateVector, region: &Region) -> Result<f64> {
    let k = region.sites.len();
    if k > 12 || region.sites.iter().any(|&s| s >= psi.basis.l()) {
        return Err(Error::Region("region too large or outside the chain".into()));
    }
    let rm = region.mask();
    let local = |m: u64| -> usize {
        region.sites.iter().enumerate().map(|(i, &j)| (((m >> j) & 1) as usize) << i).sum()
    };
    let mut groups: HashMap<u64, Vec<(usize, C64)>> = HashMap::new();
    for (m, a) in config_amplitudes(psi)? {
        groups.entry(m & !rm).or_default().push((local(m), a));
    }
    let mut rho = DMatrix::<C64>::zeros(1 << k, 1 << k);
    for g in groups.values() {
        for &(x, ax) in g {
            for &(y, ay) in g {
                rho[(x, y)] += ax * ay.conj();
            }
        }
    }
    Ok(von_neumann(&rho))
}

/// I = S_A + S_B − S_{A∪B}.
pub fn mutual_information(psi: &StateVector, a: &Region, b: &Region) -> Result<f64> {
    if a.overlaps(b) {
        return Err(Error::Region("regions overlap".into()));
    }
    let s = |r: &Region| reduced_density(psi, r).map(|d| entropies(&d).total);
    Ok(s(a)? + s(b)? - s(&a.union(b))?)
}

/// Number entropy and the covariance surrogate of the configurational entropy
/// for one region, Σ_n p(n) Σ |p(A_n, Ā_n | n) − p(A_n | n) p(Ā_n | n)|.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegionProxy {
    pub number: f64,
    pub config: f64,
    /// Smallest weight behind any p(n): a count for snapshots, a probability for exact input.
    pub min_count: f64,
}

fn region_proxy(dist: &HashMap<u64, f64>, region: &Region, total: f64) -> RegionProxy {
    let rm = region.mask();
    // per n: joint (inner, outer), marginals
    let mut pn: HashMap<usize, f64> = HashMap::new();
    let mut inner_m: HashMap<(usize, u64), f64> = HashMap::new();
    let mut outer_m: HashMap<(usize, u64), f64> = HashMap::new();
    for (&m, &w) in dist {
        let n = (m & rm).count_ones() as usize;
        *pn.entry(n).or_default() += w;
        *inner_m.entry((n, m & rm)).or_default() += w;
        *outer_m.entry((n, m & !rm)).or_default() += w;
    }
    let mut config = 0.0;
    for (&n, &wn) in &pn {
        let mut s = 0.0;
        let inners: Vec<(u64, f64)> = inner_m.iter().filter(|((k, _), _)| *k == n).map(|((_, c), w)| (*c, *w)).collect();
        let outers: Vec<(u64, f64)> = outer_m.iter().filter(|((k, _), _)| *k == n).map(|((_, c), w)| (*c, *w)).collect();
        for &(a, wa) in &inners {
            for &(b, wb) in &outers {
                let joint = dist.get(&(a | b)).copied().unwrap_or(0.0) / wn;
                s += (joint - (wa / wn) * (wb / wn)).abs();
            }
        }
        config += wn / total * s;
    }
    let number = shannon(pn.values().map(|w| w / total));
    let min_count = pn.values().cloned().fold(f64::INFINITY, f64::min);
    RegionProxy {
        number,
        config,
        min_count,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigProxy {
    pub a: RegionProxy,
    pub b: RegionProxy,
    pub ab: RegionProxy,
    /// Number parts included alongside the configurational surrogates.
    pub with_number: f64,
    /// Configurational surrogates only.
    pub config_only: f64,
    /// Some p(n) rests on fewer than the minimum count.
    pub insufficient: bool,
}

pub const MIN_SECTOR_COUNT: f64 = 10.0;

fn combine(a: RegionProxy, b: RegionProxy, ab: RegionProxy, counted: bool) -> ConfigProxy {
    let with_number = a.number + a.config + b.number + b.config - ab.number - ab.config;
    let config_only = a.config + b.config - ab.config;
    let insufficient = counted && [a, b, ab].iter().any(|r| r.min_count < MIN_SECTOR_COUNT);
    ConfigProxy {
        a,
        b,
        ab,
        with_number,
        config_only,
        insufficient,
    }
}

fn check_regions(a: &Region, b: &Region, l: usize) -> Result<()> {
    if a.overlaps(b) {
        return Err(Error::Region("regions overlap".into()));
    }
    if a.union(b).sites.iter().any(|&s| s >= l) {
        return Err(Error::Region("region exceeds the chain".into()));
    }
    Ok(())
}

/// I_c from empirical configuration frequencies.
pub fn config_mutual_proxy(set: &SnapshotSet, a: &Region, b: &Region) -> Result<ConfigProxy> {
    check_regions(a, b, set.meta.l)?;
    if set.is_empty() {
        return Err(Error::Statistics("empty snapshot set".into()));
    }
    let mut dist: HashMap<u64, f64> = HashMap::new();
    for &s in &set.shots {
        *dist.entry(s).or_default() += 1.0;
    }
    let total = set.len() as f64;
    let ab = a.union(b);
    Ok(combine(
        region_proxy(&dist, a, total),
        region_proxy(&dist, b, total),
        region_proxy(&dist, &ab, total),
        true,
    ))
}

/// I_c from exact probabilities |amplitude|².
pub fn config_mutual_proxy_exact(psi: &StateVector, a: &Region, b: &Region) -> Result<ConfigProxy> {
    check_regions(a, b, psi.basis.l())?;
    let mut dist: HashMap<u64, f64> = HashMap::new();
    for (m, amp) in config_amplitudes(psi)? {
        let p = amp.norm_sqr();
        if p > 0.0 {
            dist.insert(m, p);
        }
    }
    let total: f64 = dist.values().sum();
    let ab = a.union(b);
    Ok(combine(
        region_proxy(&dist, a, total),
        region_proxy(&dist, b, total),
        region_proxy(&dist, &ab, total),
        false,
    ))
}
