use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{build_couplings, ModelParams};
use crate::error::{Error, Result};
use crate::C64;

/// Largest chain handled in the full 2^L space (16M amplitudes).
pub const FULL_SPACE_MAX_L: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullKind {
    XX,
    YY,
    ZZ,
    /// (1/3)(XX + YY + Δ ZZ)
    XXZ,
}

/// Matrix-free Pauli-pair operator on the full space, bit i set = site i up.
#[derive(Debug, Clone)]
pub struct FullOperator {
    kind: FullKind,
    l: usize,
    delta: f64,
    pairs: Vec<(u64, f64)>,
    zz_diag: Vec<f64>,
}

pub(crate) fn check_full_l(l: usize) -> Result<()> {
    if l > FULL_SPACE_MAX_L {
        Err(Error::FullSpaceGuard {
            l,
            max: FULL_SPACE_MAX_L,
        })
    } else {
        Ok(())
    }
}

/// Σ_{i<j} J_ij s_i s_j for every basis state.
pub(crate) fn zz_energies(params: &ModelParams) -> Result<Vec<f64>> {
    check_full_l(params.l)?;
    let l = params.l;
    let cm = build_couplings(params);
    let pairs = cm.pairs();
    let dim = 1usize << l;
    let mut e = vec![0.0; dim];
    e.par_chunks_mut(1 << 12.min(l))
        .enumerate()
        .for_each(|(chunk, out)| {
            let base = chunk << 12.min(l);
            for (o, v) in out.iter_mut().enumerate() {
                let x = (base + o) as u64;
                let mut acc = 0.0;
                for &(i, j, c) in &pairs {
                    let same = ((x >> i) ^ (x >> j)) & 1 == 0;
                    acc += if same { c } else { -c };
                }
                *v = acc;
            }
        });
    Ok(e)
}

impl FullOperator {
    pub fn new(kind: FullKind, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        check_full_l(params.l)?;
        let cm = build_couplings(params);
        let pairs = cm
            .pairs()
            .into_iter()
            .map(|(i, j, c)| ((1u64 << i) | (1u64 << j), c))
            .collect();
        let zz_diag = match kind {
            FullKind::ZZ | FullKind::XXZ => zz_energies(params)?,
            _ => Vec::new(),
        };
        Ok(Self {
            kind,
            l: params.l,
            delta: params.delta,
            pairs,
            zz_diag,
        })
    }

    pub fn kind(&self) -> FullKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        1 << self.l
    }

    fn element_row(&self, x: u64, input: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        match self.kind {
            FullKind::XX => {
                for &(m, c) in &self.pairs {
                    acc += input[(x ^ m) as usize] * c;
                }
            }
            FullKind::YY => {
                // σʸσʸ flips both spins with sign −1 if they are aligned, +1 otherwise
                for &(m, c) in &self.pairs {
                    let aligned = (x & m).count_ones() != 1;
                    let v = input[(x ^ m) as usize] * c;
                    acc += if aligned { -v } else { v };
                }
            }
            FullKind::ZZ => {
                acc = input[x as usize] * self.zz_diag[x as usize];
            }
            FullKind::XXZ => {
                for &(m, c) in &self.pairs {
                    if (x & m).count_ones() == 1 {
                        acc += input[(x ^ m) as usize] * (2.0 * c);
                    }
                }
                acc += input[x as usize] * (self.delta * self.zz_diag[x as usize]);
                acc /= 3.0;
            }
        }
        acc
    }

    /// y = H x.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        y.par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(i, yi)| *yi = self.element_row(i as u64, x));
    }

    /// Dense matrix, intended for small L checks.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for b in 0..n {
            e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            e[b] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for a in 0..n {
                m[(a, b)] = col[a];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, SectorBasis, SectorOperator};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn two_site_xx_is_antidiagonal() {
        let p = ModelParams::open(2, 1.4, 0.0).unwrap();
        let h = FullOperator::new(FullKind::XX, &p).unwrap().to_dense();
        for a in 0..4 {
            for b in 0..4 {
                let want = if a + b == 3 { 1.0 } else { 0.0 };
                assert_eq!(h[(a, b)], c(want));
            }
        }
    }

    #[test]
    fn xx_does_not_commute_with_number() {
        let p = ModelParams::open(2, 1.4, 0.0).unwrap();
        let h = FullOperator::new(FullKind::XX, &p).unwrap().to_dense();
        let n = DMatrix::from_fn(4, 4, |a, b| {
            if a == b {
                c((a as u32).count_ones() as f64)
            } else {
                c(0.0)
            }
        });
        let comm = &h * &n - &n * &h;
        assert!(comm.norm() > 1.0);
    }

    #[test]
    fn xxz_is_definition_and_conserves_number() {
        let p = ModelParams::new(6, 1.0, 1.4, 2.3, Boundary::Open).unwrap();
        let xx = FullOperator::new(FullKind::XX, &p).unwrap().to_dense();
        let yy = FullOperator::new(FullKind::YY, &p).unwrap().to_dense();
        let zz = FullOperator::new(FullKind::ZZ, &p).unwrap().to_dense();
        let xxz = FullOperator::new(FullKind::XXZ, &p).unwrap().to_dense();
        let combo = (xx + yy + zz * c(2.3)) * c(1.0 / 3.0);
        assert!((&combo - &xxz).camax() < 1e-13);
        let n = DMatrix::from_fn(64, 64, |a, b| {
            if a == b {
                c((a as u32).count_ones() as f64)
            } else {
                c(0.0)
            }
        });
        assert_eq!((&xxz * &n - &n * &xxz).camax(), 0.0);
        for a in 0..64usize {
            for b in 0..64usize {
                if a.count_ones() != b.count_ones() {
                    assert_eq!(xxz[(a, b)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn sector_blocks_match_full_space() {
        for boundary in [Boundary::Open, Boundary::Ring] {
            let p = ModelParams::new(8, 1.0, 1.4, 1.3, boundary).unwrap();
            let full = FullOperator::new(FullKind::XXZ, &p).unwrap().to_dense();
            for n in 0..=8 {
                let b = SectorBasis::new(8, n).unwrap();
                let h = SectorOperator::xxz(&p, &b).unwrap().to_dense();
                for r in 0..b.dim() {
                    for s in 0..b.dim() {
                        let f = full[(b.mask(r) as usize, b.mask(s) as usize)];
                        assert!((f - c(h[(r, s)])).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn guard() {
        let p = ModelParams::open(25, 1.4, 0.0).unwrap();
        assert!(matches!(
            FullOperator::new(FullKind::XX, &p),
            Err(Error::FullSpaceGuard { .. })
        ));
    }
}
