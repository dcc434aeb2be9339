//! Measurement protocols: plane-wave spectroscopy, quench maps, bound-pair
//! participation and light-cone velocities.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Eigensystem;
use crate::linalg::walsh_hadamard;
use crate::model::{
    vacuum_energy, zz_energies, Basis, ModelParams, SectorBasis, SectorOperator, StateVector,
};
use crate::C64;

/// Magnitude spectrum on an ascending angular-frequency grid.
///
/// A component e^{−iωt} in the input shows up at +ω.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub mags: Vec<f64>,
    /// Resolution 2π/(N dt) of the unpadded grid.
    pub bin: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Peak {
    pub freq: f64,
    pub mag: f64,
    /// Height over the second highest local maximum.
    pub dominance: f64,
}

/// Checks the grid is uniform and returns its step.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 4 {
        return Err(Error::Signal(format!("need at least 4 samples, got {}", times.len())));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if dt <= 0.0 {
        return Err(Error::Signal("time grid must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::Signal("time grid is not uniform".into()));
        }
    }
    Ok(dt)
}

/// n uniform samples on [0, t_max].
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Incoherent average of Hann-windowed, ×4 zero-padded magnitude spectra.
pub fn spectrum(series: &[Vec<C64>], dt: f64) -> Result<Spectrum> {
    let n = series.first().map(|s| s.len()).unwrap_or(0);
    if n < 4 || series.iter().any(|s| s.len() != n) {
        return Err(Error::Signal("series must be non-empty and of equal length".into()));
    }
    let padded = 4 * n;
    let fft = FftPlanner::new().plan_fft_forward(padded);
    let win = hann(n);
    let mut mags = vec![0.0; padded];
    for s in series {
        let mut buf = vec![C64::new(0.0, 0.0); padded];
        for ((b, x), w) in buf.iter_mut().zip(s).zip(&win) {
            *b = x * *w;
        }
        fft.process(&mut buf);
        for (m, b) in mags.iter_mut().zip(&buf) {
            *m += b.norm() / series.len() as f64;
        }
    }
    // bin i has frequency −2π fftfreq(i)
    let df = 2.0 * std::f64::consts::PI / (padded as f64 * dt);
    let mut pairs: Vec<(f64, f64)> = (0..padded)
        .map(|i| {
            let f = if i < padded.div_ceil(2) { i as f64 } else { i as f64 - padded as f64 };
            (-f * df, mags[i])
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Spectrum {
        freqs: pairs.iter().map(|p| p.0).collect(),
        mags: pairs.iter().map(|p| p.1).collect(),
        bin: 2.0 * std::f64::consts::PI / (n as f64 * dt),
    })
}

impl Spectrum {
    fn step(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    fn local_maxima(&self, lo: f64) -> Vec<usize> {
        let m = &self.mags;
        let mut idx: Vec<usize> = (1..m.len() - 1)
            .filter(|&i| self.freqs[i] > lo && m[i] >= m[i - 1] && m[i] > m[i + 1])
            .collect();
        idx.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        idx
    }

    fn refine(&self, i: usize) -> f64 {
        let (y0, y1, y2) = (self.mags[i - 1], self.mags[i], self.mags[i + 1]);
        let den = y0 - 2.0 * y1 + y2;
        let p = if den != 0.0 { 0.5 * (y0 - y2) / den } else { 0.0 };
        self.freqs[i] + p * self.step()
    }

    /// Highest local maximum, parabolically refined.
    pub fn dominant(&self) -> Result<Peak> {
        self.dominant_above(f64::NEG_INFINITY)
    }

    /// Highest local maximum strictly above frequency `lo`.
    pub fn dominant_above(&self, lo: f64) -> Result<Peak> {
        let lm = self.local_maxima(lo);
        let &i = lm.first().ok_or_else(|| Error::Signal("no spectral peak".into()))?;
        let second = lm.get(1).map(|&j| self.mags[j]).unwrap_or(0.0);
        Ok(Peak {
            freq: self.refine(i),
            mag: self.mags[i],
            dominance: if second > 0.0 { self.mags[i] / second } else { f64::INFINITY },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectroscopySignal {
    pub times: Vec<f64>,
    /// values[site][time]
    pub values: Vec<Vec<C64>>,
    pub spectrum: Spectrum,
}

fn check_quantized(k: f64, l: usize) -> Result<usize> {
    let n = k * (l + 1) as f64 / std::f64::consts::PI;
    let r = n.round();
    if (n - r).abs() > 1e-9 || r < 1.0 || r > l as f64 {
        return Err(Error::Momentum { k });
    }
    Ok(r as usize)
}

/// Open-chain standing-wave momenta πn/(L+1), n = 1..L.
pub fn standing_wave_momenta(l: usize) -> Vec<f64> {
    (1..=l).map(|n| std::f64::consts::PI * n as f64 / (l + 1) as f64).collect()
}

#[derive(Debug, Clone)]
pub struct Prepared {
    /// Post-selected, renormalized state.
    pub state: StateVector,
    /// Probability of landing in that sector.
    pub weight: f64,
}

/// Projects ⊗_j exp(iγA_jσˣ_j)|↓…↓⟩ onto one magnon, A_j = √(2/L) Σ s·sin(kj).
pub fn prepare_planewave_one(l: usize, gamma: f64, components: &[(f64, f64)]) -> Result<Prepared> {
    if !(gamma > 0.0 && gamma < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParams(format!("gamma {gamma} outside (0, π/2)")));
    }
    if l == 0 || components.is_empty() {
        return Err(Error::InvalidParams("need L ≥ 1 and at least one component".into()));
    }
    for &(k, _) in components {
        check_quantized(k, l)?;
    }
    let norm = (2.0 / l as f64).sqrt();
    let a: Vec<f64> = (1..=l)
        .map(|j| norm * components.iter().map(|&(k, s)| s * (k * j as f64).sin()).sum::<f64>())
        .collect();
    let cos: Vec<f64> = a.iter().map(|x| (gamma * x).cos()).collect();
    let amps: Vec<C64> = (0..l)
        .map(|j| {
            let rest: f64 = cos.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, c)| c).product();
            C64::new(0.0, (gamma * a[j]).sin() * rest)
        })
        .collect();
    let mut state = StateVector::new(Basis::Sector { l, n: 1 }, amps);
    let w = state.normalize();
    if w == 0.0 {
        return Err(Error::Signal("state has no one-magnon component".into()));
    }
    Ok(Prepared { state, weight: w * w })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneMagnonSpectroscopy {
    pub k: f64,
    pub q: f64,
    /// Dominant beat |ε1(k) − ε1(q)|.
    pub frequency: f64,
    pub bin: f64,
    pub dominance: f64,
    pub postselection_weight: f64,
    pub signal: SpectroscopySignal,
}

/// Beat frequency of ⟨P↑_j(t)⟩ after preparing the k, q standing-wave superposition.
pub fn spectroscopy_one(
    k: f64,
    q: f64,
    params: &ModelParams,
    times: &[f64],
    gamma: f64,
) -> Result<OneMagnonSpectroscopy> {
    params.validate()?;
    let dt = uniform_step(times)?;
    let l = params.l;
    let prep = prepare_planewave_one(l, gamma, &[(k, 1.0), (q, 1.0)])?;
    let basis = SectorBasis::new(l, 1)?;
    let es = Eigensystem::new(&SectorOperator::xxz(params, &basis)?)?;
    let coeffs = es.coefficients(&prep.state.amps);
    let frames: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| es.state_at(&coeffs, t).iter().map(|a| a.norm_sqr()).collect())
        .collect();
    // non-oscillating part dropped per site
    let values: Vec<Vec<C64>> = (0..l)
        .map(|j| {
            let mean = frames.iter().map(|f| f[j]).sum::<f64>() / frames.len() as f64;
            frames.iter().map(|f| C64::new(f[j] - mean, 0.0)).collect()
        })
        .collect();
    let spec = spectrum(&values, dt)?;
    let peak = spec.dominant_above(0.0)?;
    Ok(OneMagnonSpectroscopy {
        k,
        q,
        frequency: peak.freq,
        bin: spec.bin,
        dominance: peak.dominance,
        postselection_weight: prep.weight,
        signal: SpectroscopySignal {
            times: times.to_vec(),
            values,
            spectrum: spec,
        },
    })
}

/// exp(−i t H_XX)|↓…↓⟩ on the full space, via Walsh–Hadamard.
pub fn ising_prep(params: &ModelParams, t: f64) -> Result<StateVector> {
    let zz = zz_energies(params)?;
    let l = params.l;
    let dim = 1usize << l;
    let scale = 1.0 / dim as f64;
    // Hadamard of |0⟩ is uniform, so only one transform is needed
    let mut psi: Vec<C64> = zz.par_iter().map(|e| C64::from_polar(scale, -t * e)).collect();
    walsh_hadamard(&mut psi);
    Ok(StateVector::new(Basis::Full { l }, psi))
}

/// Applies exp(−i Σ_j φ_j σᶻ_j / 2) to a full-space state.
pub fn imprint_phases(state: &mut StateVector, phases: &[f64]) -> Result<()> {
    let l = match state.basis {
        Basis::Full { l } => l,
        _ => return Err(Error::Basis("phase imprint needs a full-space state".into())),
    };
    if phases.len() != l {
        return Err(Error::InvalidParams(format!("{} phases for L = {l}", phases.len())));
    }
    let total: f64 = phases.iter().sum();
    state.amps.par_iter_mut().enumerate().for_each(|(x, a)| {
        let up: f64 = (0..l).filter(|&j| (x >> j) & 1 == 1).map(|j| phases[j]).sum();
        *a *= C64::from_polar(1.0, -(2.0 * up - total) / 2.0);
    });
    Ok(())
}

/// Phase profile φ_j = kj/2 with 1-based j, so φ_j + φ_{j+1} = kj + k/2.
pub fn pair_phases(k: f64, l: usize) -> Vec<f64> {
    (1..=l).map(|j| k * j as f64 / 2.0).collect()
}

/// Ising-pulse preparation followed by phase imprinting, post-selected on two magnons.
pub fn prepare_two_magnon(params: &ModelParams, t_prep: f64, phases: &[f64]) -> Result<Prepared> {
    let mut full = ising_prep(params, t_prep)?;
    imprint_phases(&mut full, phases)?;
    let basis = SectorBasis::new(params.l, 2)?;
    let (state, weight) = full.project(&basis)?;
    Ok(Prepared { state, weight })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoMagnonResult {
    pub k: f64,
    /// Peak estimate of ε2(k) − ε0.
    pub frequency: f64,
    pub bin: f64,
    pub dominance: f64,
    /// Dominant peak magnitude.
    pub contrast: f64,
    /// No dominant peak: weight spread over a wide window.
    pub broad: bool,
    pub signal: SpectroscopySignal,
}

/// Reusable two-magnon spectroscopy setup: the sector eigensystem and the
/// Ising-prepared state are shared across momenta.
pub struct TwoMagnonSpectroscopy {
    params: ModelParams,
    basis: SectorBasis,
    eig: Eigensystem,
    e0: f64,
    carrier: f64,
    vacuum_amp: C64,
    prep: StateVector,
    /// Sites (0-based j, pairing j with j+1) averaged incoherently.
    pub sites: Vec<usize>,
    /// Peaks below this dominance are flagged broad.
    pub dominance_threshold: f64,
}

impl TwoMagnonSpectroscopy {
    pub fn new(params: &ModelParams, t_prep: f64) -> Result<Self> {
        params.validate()?;
        let l = params.l;
        if l < 3 {
            return Err(Error::InvalidParams("need L ≥ 3".into()));
        }
        let basis = SectorBasis::new(l, 2)?;
        let h = SectorOperator::xxz(params, &basis)?;
        let e0 = vacuum_energy(params);
        let carrier = h.trace() / h.dim() as f64 - e0;
        let eig = Eigensystem::new(&h)?;
        let prep = ising_prep(params, t_prep)?;
        let vacuum_amp = prep.amps[0];
        // central window, 1-based sites 8..13 at L = 20
        let lo = (l / 2).saturating_sub(3);
        let sites = (lo..(lo + 6).min(l - 1)).collect();
        Ok(Self {
            params: params.clone(),
            basis,
            eig,
            e0,
            carrier,
            vacuum_amp,
            prep,
            sites,
            dominance_threshold: 3.0,
        })
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn run(&self, k: f64, times: &[f64]) -> Result<TwoMagnonResult> {
        let dt = uniform_step(times)?;
        let l = self.params.l;
        if self.sites.iter().any(|&j| j + 1 >= l) {
            return Err(Error::InvalidParams("pair site out of range".into()));
        }
        let phases = pair_phases(k, l);
        // imprint relative to the vacuum: each pair picks up e^{−i(φ_a+φ_b)}
        let amps: Vec<C64> = (0..self.basis.dim())
            .map(|r| {
                let c = self.basis.config(r);
                let ph = phases[c[0] as usize] + phases[c[1] as usize];
                self.prep.amps[self.basis.mask(r) as usize] * C64::from_polar(1.0, -ph)
            })
            .collect();
        let coeffs = self.eig.coefficients(&amps);
        let ranks: Vec<usize> = self
            .sites
            .iter()
            .map(|&j| self.basis.rank(&[j, j + 1]).expect("adjacent pair in sector"))
            .collect();
        let frames: Vec<Vec<C64>> = times
            .par_iter()
            .map(|&t| {
                let psi = self.eig.state_at(&coeffs, t);
                let vac = (self.vacuum_amp * C64::from_polar(1.0, -self.e0 * t)).conj();
                let demod = C64::from_polar(1.0, self.carrier * t);
                ranks.iter().map(|&r| vac * psi[r] * demod).collect()
            })
            .collect();
        let values: Vec<Vec<C64>> = (0..ranks.len())
            .map(|s| frames.iter().map(|f| f[s]).collect())
            .collect();
        let spec = spectrum(&values, dt)?;
        let peak = spec.dominant()?;
        Ok(TwoMagnonResult {
            k,
            frequency: peak.freq + self.carrier,
            bin: spec.bin,
            dominance: peak.dominance,
            contrast: peak.mag,
            broad: peak.dominance < self.dominance_threshold,
            signal: SpectroscopySignal {
                times: times.to_vec(),
                values,
                spectrum: spec,
            },
        })
    }
}

/// One-shot wrapper around [`TwoMagnonSpectroscopy`].
pub fn spectroscopy_two(k: f64, params: &ModelParams, times: &[f64], t_prep: f64) -> Result<TwoMagnonResult> {
    TwoMagnonSpectroscopy::new(params, t_prep)?.run(k, times)
}

/// times × sites array of projector expectation values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacetimeMap {
    pub times: Vec<f64>,
    pub sites: usize,
    /// values[time][site]
    pub values: Vec<Vec<f64>>,
}

impl SpacetimeMap {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() {
            return Err(Error::Signal("row count does not match time grid".into()));
        }
        for row in &self.values {
            if row.len() != self.sites {
                return Err(Error::Signal("ragged map".into()));
            }
            if row.iter().any(|v| !(-1e-9..=1.0 + 1e-9).contains(v)) {
                return Err(Error::Signal("projector value outside [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }
}

/// P↑_j and P↑↑_{j,j+1} (j = 0..L−2) maps under exact sector evolution.
pub fn quench_projectors(
    params: &ModelParams,
    psi0: &StateVector,
    times: &[f64],
) -> Result<(SpacetimeMap, SpacetimeMap)> {
    let (l, n) = match psi0.basis {
        Basis::Sector { l, n } if l == params.l => (l, n),
        _ => return Err(Error::Basis("quench needs a sector state on the model's chain".into())),
    };
    let basis = SectorBasis::new(l, n)?;
    let eig = Eigensystem::new(&SectorOperator::xxz(params, &basis)?)?;
    let coeffs = eig.coefficients(&psi0.amps);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = times
        .par_iter()
        .map(|&t| {
            let psi = eig.state_at(&coeffs, t);
            projector_profiles(&basis, &psi)
        })
        .collect();
    let (up, pair): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok((
        SpacetimeMap {
            times: times.to_vec(),
            sites: l,
            values: up,
        },
        SpacetimeMap {
            times: times.to_vec(),
            sites: l.saturating_sub(1),
            values: pair,
        },
    ))
}

/// (⟨P↑_j⟩, ⟨P↑↑_{j,j+1}⟩) for a sector state.
pub fn projector_profiles(basis: &SectorBasis, psi: &[C64]) -> (Vec<f64>, Vec<f64>) {
    let l = basis.l();
    let mut up = vec![0.0; l];
    let mut pair = vec![0.0; l.saturating_sub(1)];
    for (r, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        let m = basis.mask(r);
        for (j, u) in up.iter_mut().enumerate() {
            if (m >> j) & 1 == 1 {
                *u += p;
            }
        }
        for (j, q) in pair.iter_mut().enumerate() {
            if (m >> j) & 3 == 3 {
                *q += p;
            }
        }
    }
    (up, pair)
}

/// (Σ_j P↑↑_{j,j+1} − 2/L) / (1 − 2/L).
pub fn bs_participation(pair_profile: &[f64], l: usize) -> f64 {
    let base = 2.0 / l as f64;
    (pair_profile.iter().sum::<f64>() - base) / (1.0 - base)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossoverCurve {
    pub l: usize,
    pub t: f64,
    pub deltas: Vec<f64>,
    pub participation: Vec<f64>,
}

impl CrossoverCurve {
    /// Midpoint Δ of the steepest finite-difference segment.
    pub fn steepest(&self) -> Option<f64> {
        self.deltas
            .windows(2)
            .zip(self.participation.windows(2))
            .map(|(d, p)| ((p[1] - p[0]) / (d[1] - d[0]), 0.5 * (d[0] + d[1])))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|x| x.1)
    }
}

/// Participation at time `t` starting from the central adjacent pair, for each L and Δ.
pub fn participation_crossover(
    params: &ModelParams,
    deltas: &[f64],
    ls: &[usize],
    t: f64,
) -> Result<Vec<CrossoverCurve>> {
    ls.iter()
        .map(|&l| {
            let base = params.with_l(l);
            base.validate()?;
            let basis = SectorBasis::new(l, 2)?;
            let c = l / 2;
            let psi0 = StateVector::sector_config(&basis, &[c - 1, c])?;
            let participation = deltas
                .par_iter()
                .map(|&d| {
                    let p = base.with_delta(d);
                    let h = SectorOperator::xxz(&p, &basis)?;
                    let psi = Eigensystem::new(&h)?.evolve(&psi0.amps, t);
                    Ok(bs_participation(&projector_profiles(&basis, &psi).1, l))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(CrossoverCurve {
                l,
                t,
                deltas: deltas.to_vec(),
                participation,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrontOptions {
    /// Fraction of the spatial maximum that defines the front.
    pub level: f64,
    /// Stop the fit once the front is this close to an edge.
    pub edge: f64,
    /// Ignore times where the half-width is still within the initial pair.
    pub min_halfwidth: f64,
    /// Rows whose maximum is below this are excluded.
    pub noise_floor: f64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self {
            level: 0.5,
            edge: 2.0,
            min_halfwidth: 1.0,
            noise_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontFit {
    /// Half-width growth rate in sites per unit time.
    pub velocity: f64,
    pub intercept: f64,
    /// RMS deviation of the fitted points, in sites.
    pub residual: f64,
    pub times: Vec<f64>,
    pub halfwidths: Vec<f64>,
    /// Times dropped because the row was below the noise floor.
    pub excluded: Vec<f64>,
}

fn front_edges(row: &[f64], level: f64) -> (f64, f64) {
    let thr = level * row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = row.len();
    let l = row.iter().position(|&v| v >= thr).unwrap_or(0);
    let r = row.iter().rposition(|&v| v >= thr).unwrap_or(n - 1);
    let xr = if r + 1 < n {
        r as f64 + (row[r] - thr) / (row[r] - row[r + 1])
    } else {
        r as f64
    };
    let xl = if l > 0 {
        l as f64 - (row[l] - thr) / (row[l] - row[l - 1])
    } else {
        l as f64
    };
    (xl, xr)
}

/// Least-squares growth rate of the level-crossing half-width.
pub fn front_velocity(map: &SpacetimeMap, opts: &FrontOptions) -> Result<FrontFit> {
    if map.sites < 2 {
        return Err(Error::Region("map needs at least two sites".into()));
    }
    let n = map.sites as f64;
    let (mut ts, mut hs, mut excluded) = (Vec::new(), Vec::new(), Vec::new());
    for (&t, row) in map.times.iter().zip(&map.values) {
        if row.iter().cloned().fold(0.0, f64::max) < opts.noise_floor {
            excluded.push(t);
            continue;
        }
        let (xl, xr) = front_edges(row, opts.level);
        let hw = 0.5 * (xr - xl);
        if hw <= opts.min_halfwidth {
            continue;
        }
        if xr > n - 1.0 - opts.edge || xl < opts.edge {
            break;
        }
        ts.push(t);
        hs.push(hw);
    }
    if ts.len() < 2 {
        return Err(Error::Signal(format!("only {} usable front points", ts.len())));
    }
    let m = ts.len() as f64;
    let (tm, hm) = (ts.iter().sum::<f64>() / m, hs.iter().sum::<f64>() / m);
    let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&hs).map(|(t, h)| (t - tm) * (h - hm)).sum();
    let velocity = sxy / sxx;
    let intercept = hm - velocity * tm;
    let residual = (ts
        .iter()
        .zip(&hs)
        .map(|(t, h)| (intercept + velocity * t - h).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(FrontFit {
        velocity,
        intercept,
        residual,
        times: ts,
        halfwidths: hs,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dispersion_one;
    use std::f64::consts::PI;

    #[test]
    fn spectrum_locates_a_pure_tone() {
        let times = time_grid(20.0, 64);
        let dt = uniform_step(&times).unwrap();
        let w = 1.37;
        let s: Vec<C64> = times.iter().map(|t| C64::from_polar(1.0, -w * t)).collect();
        let spec = spectrum(&[s], dt).unwrap();
        let p = spec.dominant().unwrap();
        assert!((p.freq - w).abs() < 0.1 * spec.bin, "{} vs {w}", p.freq);
        assert!(p.dominance > 3.0);
    }

    #[test]
    fn nonuniform_grid_is_rejected() {
        assert!(uniform_step(&[0.0, 1.0, 2.5, 3.0]).is_err());
        assert!(uniform_step(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn planewave_small_gamma_is_first_order() {
        let l = 10;
        let k = 3.0 * PI / 11.0;
        let p = prepare_planewave_one(l, 1e-4, &[(k, 1.0)]).unwrap();
        let norm = (2.0 / l as f64).sqrt();
        let a: Vec<f64> = (1..=l).map(|j| norm * (k * j as f64).sin()).collect();
        let an = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (amp, x) in p.state.amps.iter().zip(&a) {
            assert!((amp - C64::new(0.0, x / an)).norm() < 1e-7);
        }
        assert!(p.weight < 1e-6);
        assert!(prepare_planewave_one(l, 0.7, &[(0.3, 1.0)]).is_err());
        assert!(prepare_planewave_one(l, 2.0, &[(k, 1.0)]).is_err());
    }

    #[test]
    fn planewave_matches_full_product_state() {
        let l = 6;
        let (k, q) = (2.0 * PI / 7.0, PI / 7.0);
        let gamma = 0.7;
        let p = prepare_planewave_one(l, gamma, &[(k, 1.0), (q, -1.0)]).unwrap();
        // brute force: product of single-site rotations on the full space
        let norm = (2.0 / l as f64).sqrt();
        let mut full = vec![C64::new(1.0, 0.0); 1 << l];
        for j in 0..l {
            let a = norm * ((k * (j + 1) as f64).sin() - (q * (j + 1) as f64).sin());
            for (x, v) in full.iter_mut().enumerate() {
                *v *= if (x >> j) & 1 == 1 {
                    C64::new(0.0, (gamma * a).sin())
                } else {
                    C64::new((gamma * a).cos(), 0.0)
                };
            }
        }
        let b = SectorBasis::new(l, 1).unwrap();
        let (proj, w) = StateVector::new(Basis::Full { l }, full).project(&b).unwrap();
        assert!((w - p.weight).abs() < 1e-12);
        for (x, y) in proj.amps.iter().zip(&p.state.amps) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn one_magnon_beat_matches_ring_dispersion() {
        let l = 12;
        let p = ModelParams::open(l, 1.4, 0.0).unwrap();
        let ring = ModelParams::ring(l, 1.4, 0.0).unwrap();
        let times = time_grid(31.5, 64);
        let q = PI / (l + 1) as f64;
        let k = 6.0 * PI / (l + 1) as f64;
        let r = spectroscopy_one(k, q, &p, &times, 0.7).unwrap();
        let want = (dispersion_one(k, &ring).unwrap() - dispersion_one(q, &ring).unwrap()).abs();
        assert!((r.frequency - want).abs() < r.bin, "{} vs {want}", r.frequency);
        // γ-independence in the perturbative regime
        let r3 = spectroscopy_one(k, q, &p, &times, 0.3).unwrap();
        assert!((r3.frequency - r.frequency).abs() < r.bin);
    }

    #[test]
    fn ising_prep_matches_krylov() {
        use crate::linalg::lanczos_expm;
        use crate::model::{FullKind, FullOperator};
        let p = ModelParams::ring(8, 1.4, 3.0).unwrap();
        let a = ising_prep(&p, 0.19).unwrap();
        let xx = FullOperator::new(FullKind::XX, &p).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 256];
        v[0] = C64::new(1.0, 0.0);
        let b = lanczos_expm(|x, y| xx.apply(x, y), &v, 0.19, 1e-14, 60).unwrap();
        for (x, y) in a.amps.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_profile_and_imprint() {
        let k = 0.9;
        let ph = pair_phases(k, 10);
        for j in 0..9 {
            // φ_j + φ_{j+1} = kj + k/2 with 1-based j
            assert!((ph[j] + ph[j + 1] - (k * (j + 1) as f64 + k / 2.0)).abs() < 1e-14);
        }
        let mut s = StateVector::new(Basis::Full { l: 3 }, vec![C64::new(1.0, 0.0); 8]);
        imprint_phases(&mut s, &[0.1, 0.2, 0.4]).unwrap();
        // relative phase of |↑↑↓⟩ (bits 0, 1) to vacuum is e^{−i(φ0+φ1)}
        let rel = s.amps[3] / s.amps[0];
        assert!((rel - C64::from_polar(1.0, -0.3)).norm() < 1e-14);
    }

    #[test]
    fn adjacent_pairs_dominate_two_magnon_prep() {
        let l = 12;
        let alpha = 1.4;
        let p = ModelParams::ring(l, alpha, 3.0).unwrap();
        let prep = prepare_two_magnon(&p, 0.05, &vec![0.0; l]).unwrap();
        let b = SectorBasis::new(l, 2).unwrap();
        let near = prep.state.amps[b.rank(&[4, 5]).unwrap()].norm();
        for d in 2..5 {
            let far = prep.state.amps[b.rank(&[4, 4 + d]).unwrap()].norm();
            let ratio = near / far;
            let want = (d as f64).powf(alpha);
            assert!((ratio / want - 1.0).abs() < 0.05, "d = {d}: {ratio} vs {want}");
        }
    }

    #[test]
    fn two_magnon_peak_tracks_top_block_state() {
        use crate::spectral::candidate_state;
        let l = 14;
        let p = ModelParams::ring(l, 1.4, 3.0).unwrap();
        let sp = TwoMagnonSpectroscopy::new(&p, 0.19).unwrap();
        let times = time_grid(15.75, 64);
        let m = 5;
        let k = 2.0 * PI * m as f64 / l as f64;
        let r = sp.run(k, &times).unwrap();
        let want = candidate_state(m, &p).unwrap().energy - vacuum_energy(&p);
        assert!((r.frequency - want).abs() < r.bin, "{} vs {want}", r.frequency);
        assert!(!r.broad);
    }

    #[test]
    fn quench_initial_frame_and_number() {
        let l = 12;
        let p = ModelParams::open(l, 1.4, 1.0).unwrap();
        let b = SectorBasis::new(l, 2).unwrap();
        let psi = StateVector::sector_config(&b, &[5, 6]).unwrap();
        let times = time_grid(3.0, 16);
        let (up, pair) = quench_projectors(&p, &psi, &times).unwrap();
        up.validate().unwrap();
        pair.validate().unwrap();
        for (j, v) in pair.values[0].iter().enumerate() {
            assert!((v - if j == 5 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        for s in up.row_sums() {
            assert!((s - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn participation_limits() {
        let l = 20;
        let mut all = vec![0.0; l - 1];
        all[3] = 1.0;
        assert!((bs_participation(&all, l) - 1.0).abs() < 1e-15);
        let random = vec![2.0 / l as f64 / (l - 1) as f64; l - 1];
        assert!(bs_participation(&random, l).abs() < 1e-15);
    }

    #[test]
    fn crossover_increases_with_delta() {
        let p = ModelParams::open(12, 1.4, 0.0).unwrap();
        let deltas: Vec<f64> = (0..9).map(|i| 0.5 + 0.5 * i as f64).collect();
        let c = participation_crossover(&p, &deltas, &[12], 2.0).unwrap();
        let v = &c[0].participation;
        assert!(v.first().unwrap() < &0.3 && v.last().unwrap() > &0.6);
        assert!(c[0].steepest().unwrap() > 1.0);
    }

    #[test]
    fn front_velocity_recovers_synthetic_cone() {
        let v = 1.3;
        let c = 20.0;
        let times = time_grid(10.0, 41);
        let values: Vec<Vec<f64>> = times
            .iter()
            .map(|t| {
                let hw = 1.5 + v * t;
                (0..41)
                    .map(|j| (0.5 + (hw - (j as f64 - c).abs()) / 3.0).clamp(0.0, 1.0))
                    .collect()
            })
            .collect();
        let map = SpacetimeMap {
            times,
            sites: 41,
            values,
        };
        let fit = front_velocity(&map, &FrontOptions::default()).unwrap();
        assert!((fit.velocity - v).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit.halfwidths.iter().all(|h| *h <= c - 2.0));
    }

    #[test]
    fn front_needs_points() {
        let map = SpacetimeMap {
            times: vec![0.0, 1.0],
            sites: 5,
            values: vec![vec![0.0; 5]; 2],
        };
        let fit = front_velocity(&map, &FrontOptions::default());
        assert!(fit.is_err());
    }
}
