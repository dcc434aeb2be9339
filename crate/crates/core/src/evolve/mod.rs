//! Exact and Krylov time evolution, Floquet protocol simulation.

mod floquet;

pub use floquet::{
    floquet_evolve, Axis, FloquetOptions, Op, PulseKind, PulseSequence, Rotation, SequenceSpec,
};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{krylov_propagate, sym_eigen};
use crate::model::{Basis, SectorOperator, StateVector};
use crate::C64;

/// Largest sector handled by full diagonalization.
pub const DENSE_MAX_DIM: usize = 20_000;

/// Eigen-decomposition of a sector Hamiltonian, reusable across times.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    pub fn new(h: &SectorOperator) -> Result<Self> {
        if h.dim() > DENSE_MAX_DIM {
            return Err(Error::DenseGuard {
                dim: h.dim(),
                max: DENSE_MAX_DIM,
            });
        }
        let (values, vectors) = sym_eigen(h.to_dense());
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenbasis coefficients c = Vᵀ ψ.
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .into_par_iter()
            .map(|k| {
                let col = self.vectors.column(k);
                col.iter().zip(psi).map(|(v, p)| p * *v).sum()
            })
            .collect()
    }

    /// ψ(t) = V e^{−iEt} c.
    pub fn state_at(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let phased: Vec<C64> = coeffs
            .iter()
            .zip(&self.values)
            .map(|(c, e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|r| {
                let row = self.vectors.row(r);
                row.iter().zip(&phased).map(|(v, c)| c * *v).sum()
            })
            .collect()
    }

    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        self.state_at(&self.coefficients(psi), t)
    }
}

fn check_sector(h: &SectorOperator, psi0: &StateVector) -> Result<()> {
    match psi0.basis {
        Basis::Sector { .. } if psi0.amps.len() == h.dim() => Ok(()),
        _ => Err(Error::Basis(format!(
            "state with {} amplitudes in {:?} does not match sector dimension {}",
            psi0.amps.len(),
            psi0.basis,
            h.dim()
        ))),
    }
}

/// ψ(t) = exp(−iHt) ψ0 by full diagonalization.
pub fn exact_evolve(h: &SectorOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    check_sector(h, psi0)?;
    let es = Eigensystem::new(h)?;
    Ok(StateVector::new(psi0.basis, es.evolve(&psi0.amps, t)))
}

/// Lanczos propagation with substeps of length `step`.
pub fn krylov_evolve(h: &SectorOperator, psi0: &StateVector, t: f64, step: f64, tol: f64) -> Result<StateVector> {
    check_sector(h, psi0)?;
    let amps = krylov_propagate(|x, y| h.apply(x, y), &psi0.amps, t, step, tol, 60)?;
    Ok(StateVector::new(psi0.basis, amps))
}

/// |⟨ψ|φ⟩|².
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lanczos_expm;
    use crate::model::{build_full_hamiltonian, FullKind, ModelParams, SectorBasis};

    fn two_magnon(l: usize, delta: f64, sites: &[usize]) -> (SectorOperator, StateVector, SectorBasis, ModelParams) {
        let p = ModelParams::open(l, 1.4, delta).unwrap();
        let b = SectorBasis::new(l, 2).unwrap();
        let h = SectorOperator::xxz(&p, &b).unwrap();
        let s = StateVector::sector_config(&b, sites).unwrap();
        (h, s, b, p)
    }

    #[test]
    fn zero_time_is_identity() {
        let (h, s, _, _) = two_magnon(8, 1.0, &[3, 4]);
        let out = exact_evolve(&h, &s, 0.0).unwrap();
        for (a, b) in out.amps.iter().zip(&s.amps) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn eigenstate_only_acquires_phase() {
        let (h, _, b, _) = two_magnon(8, 2.0, &[3, 4]);
        let es = Eigensystem::new(&h).unwrap();
        let v: Vec<C64> = es.vectors.column(5).iter().map(|&x| C64::new(x, 0.0)).collect();
        let s = StateVector::new(Basis::Sector { l: 8, n: 2 }, v.clone());
        let out = exact_evolve(&h, &s, 1.7).unwrap();
        let phase = C64::from_polar(1.0, -es.values[5] * 1.7);
        for (a, x) in out.amps.iter().zip(&v) {
            assert!((a - x * phase).norm() < 1e-12);
        }
        let _ = b;
    }

    #[test]
    fn sector_evolution_matches_full_space() {
        let (h, s, b, p) = two_magnon(8, 1.3, &[2, 5]);
        let t = 1.9;
        let out = exact_evolve(&h, &s, t).unwrap();
        let full = build_full_hamiltonian(FullKind::XXZ, &p).unwrap();
        let psi_full = s.to_full(&b).unwrap();
        let dense = full.to_dense();
        let brute = lanczos_expm(
            |x, y| {
                for r in 0..256 {
                    y[r] = (0..256).map(|c| dense[(r, c)] * x[c]).sum();
                }
            },
            &psi_full.amps,
            t,
            1e-14,
            256,
        )
        .unwrap();
        for r in 0..b.dim() {
            assert!((brute[b.mask(r) as usize] - out.amps[r]).norm() < 1e-10);
        }
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn krylov_matches_exact() {
        let p = ModelParams::open(12, 1.4, 2.0).unwrap();
        let b = SectorBasis::new(12, 2).unwrap();
        let h = SectorOperator::xxz(&p, &b).unwrap();
        let s = StateVector::sector_config(&b, &[5, 6]).unwrap();
        let a = exact_evolve(&h, &s, 2.5).unwrap();
        let k = krylov_evolve(&h, &s, 2.5, 0.25, 1e-12).unwrap();
        for (x, y) in a.amps.iter().zip(&k.amps) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn krylov_zero_hamiltonian() {
        let p = ModelParams::open(6, 1.4, 0.0).unwrap();
        let b = SectorBasis::new(6, 0).unwrap();
        let h = SectorOperator::xxz(&p, &b).unwrap();
        let s = StateVector::sector_config(&b, &[]).unwrap();
        let out = krylov_evolve(&h, &s, 3.0, 0.5, 1e-12).unwrap();
        assert_eq!(out.amps, s.amps);
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let (h, _, _, _) = two_magnon(6, 1.0, &[0, 1]);
        let s = StateVector::full_config(6, 3).unwrap();
        assert!(exact_evolve(&h, &s, 1.0).is_err());
        let a = StateVector::full_config(3, 1).unwrap();
        let b = StateVector::full_config(4, 1).unwrap();
        assert!(fidelity(&a, &b).is_err());
    }

    #[test]
    fn fidelity_limits() {
        let a = StateVector::full_config(3, 1).unwrap();
        let b = StateVector::full_config(3, 2).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
    }
}
