use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{build_couplings, ModelParams};
use crate::error::{Error, Result};
use crate::C64;

/// Binomial coefficient, saturating at u64::MAX.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographically ordered n-magnon configurations of an L-site chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    l: usize,
    n: usize,
    sites: Vec<u32>,
    // binom[a][b] = C(a, b) for a <= L, b <= n
    binom: Vec<Vec<u64>>,
}

const MAX_SECTOR_DIM: u64 = 50_000_000;

impl SectorBasis {
    pub fn new(l: usize, n: usize) -> Result<Self> {
        if n > l {
            return Err(Error::SectorRange { l, n });
        }
        let dim = binomial(l, n);
        if dim > MAX_SECTOR_DIM {
            return Err(Error::SectorRange { l, n });
        }
        let binom = (0..=l)
            .map(|a| (0..=n).map(|b| binomial(a, b)).collect())
            .collect();
        let dim = dim as usize;
        let mut sites = Vec::with_capacity(dim * n);
        let mut c: Vec<usize> = (0..n).collect();
        for _ in 0..dim {
            sites.extend(c.iter().map(|&s| s as u32));
            // advance to the next combination in lexicographic order
            let mut i = n;
            while i > 0 {
                i -= 1;
                if c[i] < l - n + i {
                    c[i] += 1;
                    for t in i + 1..n {
                        c[t] = c[t - 1] + 1;
                    }
                    break;
                }
            }
        }
        Ok(Self { l, n, sites, binom })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        if self.n == 0 {
            1
        } else {
            self.sites.len() / self.n
        }
    }

    pub fn config(&self, rank: usize) -> &[u32] {
        &self.sites[rank * self.n..(rank + 1) * self.n]
    }

    /// Rank of a strictly increasing site list.
    pub fn rank(&self, config: &[usize]) -> Option<usize> {
        if config.len() != self.n {
            return None;
        }
        let total = self.binom[self.l][self.n];
        let mut acc = 0u64;
        let mut prev: Option<usize> = None;
        for (i, &c) in config.iter().enumerate() {
            if c >= self.l || prev.is_some_and(|p| c <= p) {
                return None;
            }
            prev = Some(c);
            acc += self.binom[self.l - 1 - c][self.n - i];
        }
        Some((total - 1 - acc) as usize)
    }

    /// Bitmask (bit i = site i up) of a configuration; needs L <= 64.
    pub fn mask(&self, rank: usize) -> u64 {
        debug_assert!(self.l <= 64);
        self.config(rank).iter().fold(0u64, |m, &s| m | (1u64 << s))
    }

    pub fn rank_of_mask(&self, mask: u64) -> Option<usize> {
        if mask.count_ones() as usize != self.n {
            return None;
        }
        let sites: Vec<usize> = (0..self.l).filter(|&i| mask >> i & 1 == 1).collect();
        self.rank(&sites)
    }
}

/// Real symmetric sector Hamiltonian in CSR form, diagonal kept separately.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SectorOperator {
    pub fn xxz(params: &ModelParams, basis: &SectorBasis) -> Result<Self> {
        params.validate()?;
        if basis.l() != params.l {
            return Err(Error::Basis(format!(
                "basis built for L = {}, params have L = {}",
                basis.l(),
                params.l
            )));
        }
        let l = params.l;
        let n = basis.n();
        let cm = build_couplings(params);
        let s_tot = cm.pair_sum();
        let rows: Vec<f64> = (0..l).map(|i| cm.row_sum(i)).collect();
        let hop = 2.0 / 3.0;
        let zz = params.delta / 3.0;

        let dim = basis.dim();
        let built: Vec<(f64, Vec<(u32, f64)>)> = (0..dim)
            .into_par_iter()
            .map(|r| {
                let c: Vec<usize> = basis.config(r).iter().map(|&s| s as usize).collect();
                let mut d = s_tot;
                for (a, &sa) in c.iter().enumerate() {
                    d -= 2.0 * rows[sa];
                    for &sb in &c[a + 1..] {
                        d += 4.0 * cm.get(sa, sb);
                    }
                }
                let mut off = Vec::with_capacity(n * (l - n));
                let mut occupied = vec![false; l];
                for &s in &c {
                    occupied[s] = true;
                }
                let mut moved = c.clone();
                for p in 0..n {
                    for t in 0..l {
                        if occupied[t] {
                            continue;
                        }
                        moved.copy_from_slice(&c);
                        moved[p] = t;
                        moved.sort_unstable();
                        let q = basis.rank(&moved).expect("valid configuration");
                        off.push((q as u32, hop * cm.get(c[p], t)));
                    }
                }
                off.sort_unstable_by_key(|e| e.0);
                (zz * d, off)
            })
            .collect();

        let mut diag = Vec::with_capacity(dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (d, off) in built {
            diag.push(d);
            for (c, v) in off {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            diag,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn element(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.diag[a];
        }
        let (lo, hi) = (self.row_ptr[a], self.row_ptr[a + 1]);
        self.cols[lo..hi]
            .binary_search(&(b as u32))
            .map(|i| self.vals[lo + i])
            .unwrap_or(0.0)
    }

    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[a], self.row_ptr[a + 1]);
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// y = H x.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let body = |(a, ya): (usize, &mut C64)| {
            let mut acc = x[a] * self.diag[a];
            for (c, v) in self.row(a) {
                acc += x[c] * v;
            }
            *ya = acc;
        };
        if self.dim() > 4096 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = self.diag[a];
            for (c, v) in self.row(a) {
                m[(a, c)] += v;
            }
        }
        m
    }

    /// Largest |H_ab − H_ba| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim() {
            for (c, v) in self.row(a) {
                worst = worst.max((v - self.element(c, a)).abs());
            }
        }
        worst
    }

    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, ModelParams};
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(SectorBasis::new(20, 2).unwrap().dim(), 190);
        assert_eq!(SectorBasis::new(9, 0).unwrap().dim(), 1);
        let one = SectorBasis::new(20, 1).unwrap();
        assert_eq!(one.dim(), 20);
        for r in 0..20 {
            assert_eq!(one.config(r), &[r as u32]);
        }
        assert!(SectorBasis::new(3, 4).is_err());
    }

    #[test]
    fn lexicographic_order() {
        let b = SectorBasis::new(4, 2).unwrap();
        let got: Vec<Vec<u32>> = (0..b.dim()).map(|r| b.config(r).to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(20, 2), 190);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(600, 2), 179_700);
    }

    proptest! {
        #[test]
        fn rank_round_trip(l in 1usize..14, frac in 0.0f64..1.0) {
            let n = ((l as f64) * frac).floor() as usize;
            let b = SectorBasis::new(l, n).unwrap();
            for r in 0..b.dim() {
                let c: Vec<usize> = b.config(r).iter().map(|&s| s as usize).collect();
                prop_assert_eq!(b.rank(&c), Some(r));
                prop_assert_eq!(b.rank_of_mask(b.mask(r)), Some(r));
            }
        }

        #[test]
        fn sector_operator_is_symmetric(l in 2usize..9, n in 0usize..5, alpha in 1.05f64..4.0,
                                        delta in -3.0f64..5.0, ring in any::<bool>()) {
            prop_assume!(n <= l);
            let boundary = if ring { Boundary::Ring } else { Boundary::Open };
            let p = ModelParams::new(l, 1.0, alpha, delta, boundary).unwrap();
            let b = SectorBasis::new(l, n).unwrap();
            let h = SectorOperator::xxz(&p, &b).unwrap();
            prop_assert!(h.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn reflection_symmetric_spectrum() {
        use crate::linalg::sym_eigenvalues;
        let p = ModelParams::open(9, 1.4, 1.7).unwrap();
        let b = SectorBasis::new(9, 3).unwrap();
        let h = SectorOperator::xxz(&p, &b).unwrap();
        let dense = h.to_dense();
        let mut reflected = DMatrix::zeros(b.dim(), b.dim());
        let mirror = |r: usize| {
            let mut c: Vec<usize> = b.config(r).iter().map(|&s| 8 - s as usize).collect();
            c.sort_unstable();
            b.rank(&c).unwrap()
        };
        for a in 0..b.dim() {
            for c in 0..b.dim() {
                reflected[(mirror(a), mirror(c))] = dense[(a, c)];
            }
        }
        assert!((&reflected - &dense).amax() < 1e-14);
        let e1 = sym_eigenvalues(dense);
        let e2 = sym_eigenvalues(reflected);
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_matches_dense() {
        let p = ModelParams::ring(10, 1.4, 0.8).unwrap();
        let b = SectorBasis::new(10, 3).unwrap();
        let h = SectorOperator::xxz(&p, &b).unwrap();
        let x: Vec<C64> = (0..b.dim())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); b.dim()];
        h.apply(&x, &mut y);
        let d = h.to_dense();
        for a in 0..b.dim() {
            let want: C64 = (0..b.dim()).map(|c| x[c] * d[(a, c)]).sum();
            assert!((want - y[a]).norm() < 1e-12);
        }
    }
}
