//! Single-magnon dispersion, two-magnon momentum blocks and bound-state detection.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::model::{build_couplings, Boundary, ModelParams};
use crate::special::{polylog_unit, zeta};
use crate::C64;

fn wrap_momentum(k: f64) -> f64 {
    k.rem_euclid(2.0 * PI)
}

/// Single-magnon energy above the ferromagnet,
/// ε1(k) = (4J/3) Σ_{ℓ≥1} (cos kℓ − Δ)/ℓ^α.
///
/// Open boundary selects the infinite chain, evaluated in closed form through
/// Re Li_α(e^{ik}) − Δ ζ(α). Ring boundary sums ℓ = 1..⌊L/2⌋ with the
/// antipodal term counted once, which is exact for the finite ring.
pub fn dispersion_one(k: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (j, a, d) = (params.j, params.alpha, params.delta);
    match params.boundary {
        Boundary::Open => {
            let mu = wrap_momentum(k);
            let cos_part = if mu == 0.0 {
                zeta(a)
            } else {
                polylog_unit(a, mu).re
            };
            Ok(4.0 * j / 3.0 * (cos_part - d * zeta(a)))
        }
        Boundary::Ring => Ok(ring_sum(params, |l| (k * l as f64).cos() - d, 0.0)),
    }
}

// (4J/3) Σ_{ℓ<L/2} f(ℓ) ℓ^{−(α−shift)} plus half the antipodal term on even rings
fn ring_sum(params: &ModelParams, f: impl Fn(usize) -> f64, shift: f64) -> f64 {
    let l = params.l;
    let pw = params.alpha - shift;
    let mut s = 0.0;
    for ell in 1..=l / 2 {
        let w = if 2 * ell == l { 0.5 } else { 1.0 };
        s += w * f(ell) * (ell as f64).powf(-pw);
    }
    4.0 * params.j / 3.0 * s
}

/// Group velocity v(k) = ∂ε1/∂k = −(4J/3) Σ sin(kℓ) ℓ^{1−α}.
///
/// Diverges as k → 0 for 1 < α ≤ 2 on the infinite chain; k = 0 is rejected.
pub fn group_velocity_one(k: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let mu = wrap_momentum(k);
    if mu == 0.0 {
        return Err(Error::Momentum { k });
    }
    match params.boundary {
        Boundary::Open => Ok(-4.0 * params.j / 3.0 * polylog_unit(params.alpha - 1.0, mu).im),
        Boundary::Ring => Ok(-ring_sum(params, |l| (k * l as f64).sin(), 1.0)),
    }
}

/// Momentum index m for k = 2πm/L on a ring.
pub fn momentum_index(k: f64, l: usize) -> Result<i64> {
    let x = k * l as f64 / (2.0 * PI);
    let m = x.round();
    if (x - m).abs() > 1e-9 {
        return Err(Error::Momentum { k });
    }
    Ok(m as i64)
}

/// Two-magnon Hamiltonian at total momentum k = 2πm/L, in the relative
/// coordinate basis |k; d⟩ ∝ Σ_j e^{ik(j + d/2)} |↑_j ↑_{j+d}⟩.
#[derive(Debug, Clone)]
pub struct TwoMagnonBlock {
    pub m: i64,
    pub k: f64,
    pub l: usize,
    pub ds: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

pub fn two_magnon_block(m: i64, params: &ModelParams, d_max: Option<usize>) -> Result<TwoMagnonBlock> {
    params.validate()?;
    if params.boundary != Boundary::Ring {
        return Err(Error::InvalidParams("two-magnon blocks need ring boundary".into()));
    }
    let l = params.l;
    if l < 3 {
        return Err(Error::InvalidParams("two-magnon blocks need L >= 3".into()));
    }
    let half = l / 2;
    let d_max = d_max.unwrap_or(half).min(half);
    let k = 2.0 * PI * m as f64 / l as f64;
    let even = l % 2 == 0;
    // the d = L/2 state survives only when e^{ikL/2} = 1
    let has_half = even && m.rem_euclid(2) == 0;
    let ds: Vec<usize> = (1..=d_max)
        .filter(|&d| !(even && d == half && !has_half))
        .collect();
    let mut index = vec![usize::MAX; half + 1];
    for (i, &d) in ds.iter().enumerate() {
        index[d] = i;
    }

    let cm = build_couplings(params);
    let s_tot = cm.pair_sum();
    let r = cm.row_sum(0);
    let hop = 2.0 / 3.0;
    let zz = params.delta / 3.0;
    let lf = l as f64;

    let norm = |d: usize| if even && d == half { (lf / 2.0).sqrt() } else { lf.sqrt() };
    let amp = |left: usize, d: usize| C64::from_polar(1.0 / norm(d), k * (left as f64 + d as f64 / 2.0));
    let canon = |a: usize, b: usize| {
        let r = (b + l - a) % l;
        if r <= half {
            (a, r)
        } else {
            (b, l - r)
        }
    };

    let n = ds.len();
    let mut mat = DMatrix::<C64>::zeros(n, n);
    for (row, &dp) in ds.iter().enumerate() {
        let a_p = amp(0, dp);
        mat[(row, row)] += C64::new(zz * (s_tot - 4.0 * r + 4.0 * params.coupling_at(dp)), 0.0);
        for s in 0..l {
            if s == 0 || s == dp {
                continue;
            }
            // move the magnon at 0 to s, then the one at dp to s
            for (fixed, from) in [(dp, 0usize), (0usize, dp)] {
                let (left, dq) = canon(s, fixed);
                if dq > d_max || index[dq] == usize::MAX {
                    continue;
                }
                let val = hop * cm.get(from, s);
                mat[(row, index[dq])] += amp(left, dq) / a_p * val;
            }
        }
    }
    let worst_im = mat.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    debug_assert!(worst_im < 1e-10, "block has imaginary part {worst_im}");
    let matrix = mat.map(|z| z.re);
    Ok(TwoMagnonBlock {
        m,
        k,
        l,
        ds,
        matrix,
    })
}

/// Eigenstate of a two-magnon block with its relative wave function on the folded d grid.
#[derive(Debug, Clone, Serialize)]
pub struct TwoMagnonEigenstate {
    pub m: i64,
    pub k: f64,
    pub l: usize,
    pub energy: f64,
    pub ds: Vec<usize>,
    pub psi: Vec<f64>,
}

impl TwoMagnonEigenstate {
    /// ψ on d = 1..L−1, splitting the weight of d and L−d evenly.
    pub fn unfolded(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.l - 1];
        for (&d, &p) in self.ds.iter().zip(&self.psi) {
            if 2 * d == self.l {
                out[d - 1] = p;
            } else {
                let v = p / 2f64.sqrt();
                out[d - 1] = v;
                out[self.l - d - 1] = v;
            }
        }
        out
    }

    pub fn l4(&self) -> f64 {
        l4_norm(&self.unfolded())
    }
}

/// Σ_d |ψ(d)|⁴ of a normalized wave function.
pub fn l4_norm(psi: &[f64]) -> f64 {
    psi.iter().map(|p| p.powi(4)).sum()
}

/// Highest (Δ ≥ 0) or lowest (Δ < 0) eigenstate of the block, the bound-state candidate.
pub fn candidate_state(m: i64, params: &ModelParams) -> Result<TwoMagnonEigenstate> {
    let block = two_magnon_block(m, params, None)?;
    let (vals, vecs) = sym_eigen(block.matrix);
    let idx = if params.delta >= 0.0 { vals.len() - 1 } else { 0 };
    let mut psi: Vec<f64> = vecs.column(idx).iter().copied().collect();
    if psi[0] < 0.0 {
        psi.iter_mut().for_each(|p| *p = -*p);
    }
    Ok(TwoMagnonEigenstate {
        m,
        k: block.k,
        l: block.l,
        energy: vals[idx],
        ds: block.ds,
        psi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionPoint {
    pub m: i64,
    pub k: f64,
    /// ε2(k) − ε0
    pub energy: f64,
    pub l4: f64,
    /// Upper (Δ ≥ 0) or lower edge of the free two-magnon continuum, relative to ε0.
    pub continuum_edge: f64,
    /// Candidate lies outside the continuum.
    pub separated: bool,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionCurve {
    pub l: usize,
    pub alpha: f64,
    pub delta: f64,
    pub threshold: f64,
    pub points: Vec<DispersionPoint>,
}

fn continuum_edge(m: i64, params: &ModelParams) -> Result<f64> {
    let l = params.l as i64;
    let e: Vec<f64> = (0..l)
        .map(|p| dispersion_one(2.0 * PI * p as f64 / l as f64, params))
        .collect::<Result<_>>()?;
    let sums = (0..l).map(|p| e[p as usize] + e[(m - p).rem_euclid(l) as usize]);
    Ok(if params.delta >= 0.0 {
        sums.fold(f64::NEG_INFINITY, f64::max)
    } else {
        sums.fold(f64::INFINITY, f64::min)
    })
}

pub fn dispersion_two(params: &ModelParams, ms: &[i64], criterion: &BoundCriterion) -> Result<DispersionCurve> {
    let e0 = crate::model::vacuum_energy(params);
    let points = ms
        .par_iter()
        .map(|&m| {
            let st = candidate_state(m, params)?;
            let edge = continuum_edge(m, params)?;
            let energy = st.energy - e0;
            let separated = if params.delta >= 0.0 {
                energy > edge + 1e-9
            } else {
                energy < edge - 1e-9
            };
            let l4 = st.l4();
            Ok(DispersionPoint {
                m,
                k: st.k,
                energy,
                l4,
                continuum_edge: edge,
                separated,
                above_threshold: l4 > criterion.threshold(params.l),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DispersionCurve {
        l: params.l,
        alpha: params.alpha,
        delta: params.delta,
        threshold: criterion.threshold(params.l),
        points,
    })
}

/// Bound-state decision rule for L4 maps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCriterion {
    /// L4 must exceed factor/(L−1).
    pub threshold_factor: f64,
    /// If set, L4 must also decay slower than L^(−exponent) between L and a partner size.
    pub scaling_exponent: Option<f64>,
}

impl Default for BoundCriterion {
    fn default() -> Self {
        Self {
            threshold_factor: 5.0,
            scaling_exponent: Some(0.5),
        }
    }
}

impl BoundCriterion {
    pub fn threshold_only() -> Self {
        Self {
            threshold_factor: 5.0,
            scaling_exponent: None,
        }
    }

    pub fn threshold(&self, l: usize) -> f64 {
        self.threshold_factor / (l as f64 - 1.0)
    }
}

/// Partner ring with the same momentum: L/2 for even m, otherwise 2L.
pub fn partner_size(m: i64, l: usize) -> (usize, i64) {
    if l % 2 == 0 && m % 2 == 0 && l / 2 >= 8 {
        (l / 2, m / 2)
    } else {
        (2 * l, 2 * m)
    }
}

/// Finite-size decay exponent β with L4 ∝ L^(−β) between two sizes.
pub fn decay_exponent(l4_a: f64, l_a: usize, l4_b: f64, l_b: usize) -> f64 {
    -(l4_a / l4_b).ln() / (l_a as f64 / l_b as f64).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct PhasePoint {
    pub delta: f64,
    pub m: i64,
    pub k: f64,
    pub energy: f64,
    pub l4: f64,
    pub partner_l: usize,
    pub l4_partner: f64,
    pub exponent: f64,
    pub above_threshold: bool,
    pub bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub l: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub criterion: BoundCriterion,
    pub points: Vec<PhasePoint>,
}

impl PhaseDiagram {
    /// Smallest Δ with at least one bound momentum.
    pub fn onset(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.bound)
            .map(|p| p.delta)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.min(d))))
    }

    pub fn bound_at(&self, m: i64) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.m == m && p.bound)
            .map(|p| p.delta)
            .collect()
    }
}

/// k = 2πm/L from 0 to π with even m, `n` points.
pub fn even_momentum_grid(l: usize, n: usize) -> Vec<i64> {
    let top = (l / 4) as f64;
    (0..n)
        .map(|i| {
            let x = if n > 1 { top * i as f64 / (n - 1) as f64 } else { 0.0 };
            2 * x.round() as i64
        })
        .collect()
}

pub fn phase_diagram(params: &ModelParams, deltas: &[f64], ms: &[i64], criterion: BoundCriterion) -> Result<PhaseDiagram> {
    if params.boundary != Boundary::Ring {
        return Err(Error::InvalidParams("phase diagram needs ring boundary".into()));
    }
    let grid: Vec<(f64, i64)> = deltas
        .iter()
        .flat_map(|&d| ms.iter().map(move |&m| (d, m)))
        .collect();
    let threshold = criterion.threshold(params.l);
    let e0_of = |p: &ModelParams| crate::model::vacuum_energy(p);
    let points = grid
        .par_iter()
        .map(|&(delta, m)| {
            let p = params.with_delta(delta);
            let st = candidate_state(m, &p)?;
            let l4 = st.l4();
            let (pl, pm) = partner_size(m, p.l);
            let above = l4 > threshold;
            let (l4_partner, exponent) = match criterion.scaling_exponent {
                Some(_) if above => {
                    let q = p.with_l(pl);
                    let other = candidate_state(pm, &q)?.l4();
                    (other, decay_exponent(l4, p.l, other, pl))
                }
                _ => (f64::NAN, f64::NAN),
            };
            let bound = above && criterion.scaling_exponent.is_none_or(|b| exponent < b);
            Ok(PhasePoint {
                delta,
                m,
                k: st.k,
                energy: st.energy - e0_of(&p),
                l4,
                partner_l: pl,
                l4_partner,
                exponent,
                above_threshold: above,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram {
        l: params.l,
        alpha: params.alpha,
        threshold,
        criterion,
        points,
    })
}

/// |ψ(k,d)|²/|ψ(k,1)|² for the bound-state candidate.
pub fn wavefunction_tails(params: &ModelParams, m: i64) -> Result<Vec<(usize, f64)>> {
    let st = candidate_state(m, params)?;
    let p1 = st.psi[0].powi(2);
    Ok(st
        .ds
        .iter()
        .zip(&st.psi)
        .map(|(&d, &p)| (d, p * p / p1))
        .collect())
}
