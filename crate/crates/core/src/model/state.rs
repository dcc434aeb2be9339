use super::full::check_full_l;
use super::SectorBasis;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Sector { l: usize, n: usize },
    Full { l: usize },
}

impl Basis {
    pub fn l(&self) -> usize {
        match *self {
            Basis::Sector { l, .. } | Basis::Full { l } => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: Basis,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new(basis: Basis, amps: Vec<C64>) -> Self {
        Self { basis, amps }
    }

    /// Basis state of a sector, given by its 0-based occupied sites.
    pub fn sector_config(basis: &SectorBasis, sites: &[usize]) -> Result<Self> {
        let r = basis
            .rank(sites)
            .ok_or_else(|| Error::Basis(format!("{sites:?} is not a valid configuration")))?;
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[r] = C64::new(1.0, 0.0);
        Ok(Self::new(
            Basis::Sector {
                l: basis.l(),
                n: basis.n(),
            },
            amps,
        ))
    }

    /// Full-space basis state with the given bitmask.
    pub fn full_config(l: usize, mask: u64) -> Result<Self> {
        check_full_l(l)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << l];
        amps[mask as usize] = C64::new(1.0, 0.0);
        Ok(Self::new(Basis::Full { l }, amps))
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        n
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::Basis(format!("{:?} vs {:?}", self.basis, other.basis)));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Embed a sector state into the full 2^L space.
    pub fn to_full(&self, basis: &SectorBasis) -> Result<Self> {
        match self.basis {
            Basis::Full { .. } => Ok(self.clone()),
            Basis::Sector { l, n } => {
                if l != basis.l() || n != basis.n() {
                    return Err(Error::Basis("sector basis does not match state".into()));
                }
                check_full_l(l)?;
                let mut amps = vec![C64::new(0.0, 0.0); 1 << l];
                for (r, a) in self.amps.iter().enumerate() {
                    amps[basis.mask(r) as usize] = *a;
                }
                Ok(Self::new(Basis::Full { l }, amps))
            }
        }
    }

    /// Project a full-space state onto a sector; returns the normalized
    /// projection and its weight (post-selection probability).
    pub fn project(&self, basis: &SectorBasis) -> Result<(Self, f64)> {
        let l = match self.basis {
            Basis::Full { l } => l,
            Basis::Sector { .. } => return Err(Error::Basis("state is already sector-restricted".into())),
        };
        if l != basis.l() {
            return Err(Error::Basis("sector basis has a different L".into()));
        }
        let amps: Vec<C64> = (0..basis.dim())
            .map(|r| self.amps[basis.mask(r) as usize])
            .collect();
        let mut out = Self::new(
            Basis::Sector {
                l,
                n: basis.n(),
            },
            amps,
        );
        let w = out.normalize().powi(2);
        Ok((out, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_and_project_round_trip() {
        let b = SectorBasis::new(6, 2).unwrap();
        let amps: Vec<C64> = (0..b.dim()).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut s = StateVector::new(Basis::Sector { l: 6, n: 2 }, amps);
        s.normalize();
        let f = s.to_full(&b).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-14);
        let (back, w) = f.project(&b).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        assert!((back.inner(&s).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_inner_product() {
        let a = StateVector::full_config(3, 0).unwrap();
        let b = SectorBasis::new(3, 0).unwrap();
        let s = StateVector::sector_config(&b, &[]).unwrap();
        assert!(a.inner(&s).is_err());
    }
}
