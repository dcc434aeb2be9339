//! Dense eigensolvers, Lanczos exponentials and the Walsh–Hadamard transform.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn sym_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub fn herm_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    if a.len() > 1 << 14 {
        a.par_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

fn norm(a: &[C64]) -> f64 {
    dot(a, a).re.sqrt()
}

/// exp(−i H dt) v for Hermitian H given as a matrix-free action, via a
/// Lanczos basis with full reorthogonalization. Converges when the standard
/// a-posteriori estimate β_m |[exp(−i T dt) e₁]_m| drops below `tol`.
pub fn lanczos_expm<F>(apply: F, v: &[C64], dt: f64, tol: f64, max_dim: usize) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 || dt == 0.0 {
        return Ok(v.to_vec());
    }
    let max_dim = max_dim.min(n).max(1);
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];

    loop {
        let m = basis.len();
        apply(&basis[m - 1], &mut w);
        let a = dot(&basis[m - 1], &w).re;
        alpha.push(a);
        for q in &basis {
            let c = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= qi * c);
        }
        // second pass keeps orthogonality at machine precision
        for q in &basis {
            let c = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= qi * c);
        }
        let b = norm(&w);

        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (vals, vecs) = sym_eigen(t);
        // y = exp(−i T dt) e₁
        let y: Vec<C64> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| C64::from_polar(vecs[(r, k)] * vecs[(0, k)], -vals[k] * dt))
                    .sum()
            })
            .collect();
        let err = b * y[m - 1].norm();
        let breakdown = b < 1e-14 * (1.0 + alpha.iter().map(|x| x.abs()).fold(0.0, f64::max));
        if err < tol || breakdown || m == n {
            let mut out = vec![ZERO; n];
            for (q, yk) in basis.iter().zip(&y) {
                out.iter_mut().zip(q).for_each(|(o, qi)| *o += qi * yk * beta0);
            }
            return Ok(out);
        }
        if m >= max_dim {
            return Err(Error::Krylov(format!(
                "no convergence within {max_dim} vectors (estimate {err:.3e})"
            )));
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Propagate over `t` in steps of at most `step`, halving on Krylov failure.
pub fn krylov_propagate<F>(apply: F, v: &[C64], t: f64, step: f64, tol: f64, max_dim: usize) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    if !(step > 0.0) {
        return Err(Error::Krylov("step must be positive".into()));
    }
    let mut psi = v.to_vec();
    let mut done = 0.0;
    let mut h = step.min(t.abs());
    let sign = t.signum();
    while done < t.abs() - 1e-15 {
        let dt = h.min(t.abs() - done);
        match lanczos_expm(&apply, &psi, sign * dt, tol, max_dim) {
            Ok(next) => {
                psi = next;
                done += dt;
            }
            Err(e) => {
                h /= 2.0;
                if h < 1e-10 * step {
                    return Err(e);
                }
            }
        }
    }
    Ok(psi)
}

/// In-place unnormalized Walsh–Hadamard transform.
pub fn walsh_hadamard(a: &mut [C64]) {
    let n = a.len();
    assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        a.par_chunks_mut(2 * h).for_each(|chunk| {
            let (lo, hi) = chunk.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        });
        h *= 2;
    }
}
