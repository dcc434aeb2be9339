//! Model parameters, couplings, magnon-number sectors and Hamiltonians.

mod full;
mod sector;
mod state;

pub use full::{FullKind, FullOperator, FULL_SPACE_MAX_L};
pub(crate) use full::zz_energies;
pub use sector::{binomial, SectorBasis, SectorOperator};
pub use state::{Basis, StateVector};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub l: usize,
    pub j: f64,
    pub alpha: f64,
    pub delta: f64,
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn new(l: usize, j: f64, alpha: f64, delta: f64, boundary: Boundary) -> Result<Self> {
        let p = Self {
            l,
            j,
            alpha,
            delta,
            boundary,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit coupling open chain, the experimental geometry.
    pub fn open(l: usize, alpha: f64, delta: f64) -> Result<Self> {
        Self::new(l, 1.0, alpha, delta, Boundary::Open)
    }

    pub fn ring(l: usize, alpha: f64, delta: f64) -> Result<Self> {
        Self::new(l, 1.0, alpha, delta, Boundary::Ring)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidParams(format!("L must be >= 2, got {}", self.l)));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::InvalidParams(format!("J must be positive, got {}", self.j)));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParams("delta must be finite".into()));
        }
        Ok(())
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            delta,
            ..self.clone()
        }
    }

    pub fn with_l(&self, l: usize) -> Self {
        Self { l, ..self.clone() }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self {
            boundary,
            ..self.clone()
        }
    }

    /// Site distance entering the power law (minimal cyclic distance on the ring).
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Ring => d.min(self.l - d),
        }
    }

    pub fn coupling_at(&self, d: usize) -> f64 {
        if d == 0 {
            0.0
        } else {
            self.j * (d as f64).powf(-self.alpha)
        }
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling_at(self.distance(i, j))
    }
}

/// Dense symmetric coupling matrix J_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    l: usize,
    data: Vec<f64>,
}

impl CouplingMatrix {
    pub fn size(&self) -> usize {
        self.l
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.l + j]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.data[i * self.l..(i + 1) * self.l].iter().sum()
    }

    /// Σ_{i<j} J_ij.
    pub fn pair_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.l {
            for j in i + 1..self.l {
                s += self.get(i, j);
            }
        }
        s
    }

    /// All pairs i < j with their coupling.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.l * (self.l - 1) / 2);
        for i in 0..self.l {
            for j in i + 1..self.l {
                out.push((i, j, self.get(i, j)));
            }
        }
        out
    }
}

pub fn build_couplings(params: &ModelParams) -> CouplingMatrix {
    let l = params.l;
    let mut data = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            if i != j {
                data[i * l + j] = params.coupling(i, j);
            }
        }
    }
    CouplingMatrix { l, data }
}

/// Energy of the fully polarized state, ε0 = (Δ/3) Σ_{i<j} J_ij.
pub fn vacuum_energy(params: &ModelParams) -> f64 {
    params.delta / 3.0 * build_couplings(params).pair_sum()
}

pub fn enumerate_sector(l: usize, n: usize) -> Result<SectorBasis> {
    SectorBasis::new(l, n)
}

pub fn build_sector_hamiltonian(params: &ModelParams, basis: &SectorBasis) -> Result<SectorOperator> {
    SectorOperator::xxz(params, basis)
}

pub fn build_full_hamiltonian(kind: FullKind, params: &ModelParams) -> Result<FullOperator> {
    FullOperator::new(kind, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::open(1, 1.4, 0.0).is_err());
        assert!(ModelParams::open(4, 1.0, 0.0).is_err());
        assert!(ModelParams::new(4, -1.0, 1.4, 0.0, Boundary::Open).is_err());
        assert!(ModelParams::open(4, 1.4, f64::NAN).is_err());
    }

    #[test]
    fn three_site_couplings() {
        let p = ModelParams::open(3, 1.4, 0.0).unwrap();
        let c = build_couplings(&p);
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(1, 2), 1.0);
        assert!((c.get(0, 2) - 0.378_929_141_627_599_6).abs() < 1e-15);
        assert_eq!(c.get(1, 1), 0.0);

        let steep = ModelParams::open(3, 60.0, 0.0).unwrap();
        let c = build_couplings(&steep);
        assert!(c.get(0, 2) < 1e-17);
    }

    #[test]
    fn ring_uses_cyclic_distance() {
        let p = ModelParams::ring(6, 1.4, 0.0).unwrap();
        let c = build_couplings(&p);
        assert_eq!(c.get(0, 5), 1.0);
        assert_eq!(c.get(0, 4), c.get(0, 2));
        for i in 0..6 {
            assert!((c.row_sum(i) - c.row_sum(0)).abs() < 1e-14);
        }
    }

    #[test]
    fn experimental_scale() {
        let p = ModelParams::new(20, 369.0, 1.4, 0.0, Boundary::Open).unwrap();
        let c = build_couplings(&p);
        assert_eq!(c.get(4, 5), 369.0);
        assert!((c.get(0, 19) - 369.0 * 19f64.powf(-1.4)).abs() < 1e-12);
    }

    #[test]
    fn vacuum_energy_matches_sector_zero() {
        let p = ModelParams::open(7, 1.4, 2.5).unwrap();
        let basis = enumerate_sector(7, 0).unwrap();
        let h = build_sector_hamiltonian(&p, &basis).unwrap();
        assert_eq!(h.dim(), 1);
        assert!((h.diagonal()[0] - vacuum_energy(&p)).abs() < 1e-13);
    }
}
