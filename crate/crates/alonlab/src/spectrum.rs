//! Adjacency spectra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::models::stream_rng;

/// Largest vertex count handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;

/// Adjacency eigenvalues in descending order. When `complete` is false only
/// `lambda_1`, `lambda_2` and `lambda_n` are present (in that order).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub complete: bool,
}

impl Spectrum {
    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn lambda_min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    /// `max(|lambda_2|, |lambda_n|)`.
    pub fn abs_max_nontrivial(&self) -> f64 {
        if self.values.len() < 2 {
            return 0.0;
        }
        self.lambda2().abs().max(self.lambda_min().abs())
    }
}

pub fn spectrum(g: &LabeledGraph) -> Result<Spectrum> {
    if g.n() == 0 {
        return Err(Error::Invalid("empty graph has no spectrum".into()));
    }
    if g.n() <= DENSE_LIMIT {
        Ok(Spectrum { values: dense_eigenvalues(&g.adjacency()), complete: true })
    } else {
        extreme_eigenvalues(g, 300)
    }
}

pub fn dense_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    v
}

/// Lanczos with full reorthogonalisation on the sparse adjacency, returning
/// `lambda_1`, `lambda_2`, `lambda_n`.
pub fn extreme_eigenvalues(g: &LabeledGraph, steps: usize) -> Result<Spectrum> {
    let n = g.n();
    let rows = g.adjacency_lists();
    let apply = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(n, rows.iter().map(|row| row.iter().map(|&(w, m)| m as f64 * x[w]).sum::<f64>()))
    };
    let m = steps.min(n);
    let mut rng = stream_rng(0x5eed, n as u64);
    let mut q = DVector::from_iterator(n, (0..n).map(|_| rng.gen::<f64>() - 0.5));
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = vec![q.clone()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    for j in 0..m {
        let mut w = apply(&basis[j]);
        let a = w.dot(&basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w.axpy(-c, b, 1.0);
            }
        }
        let nb = w.norm();
        if j + 1 == m || nb < 1e-12 {
            break;
        }
        beta.push(nb);
        basis.push(w / nb);
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let mut ritz: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    ritz.sort_by(|x, y| y.partial_cmp(x).expect("finite Ritz values"));
    if ritz.len() < 2 {
        return Err(Error::NonConvergence("Lanczos produced fewer than two Ritz values".into()));
    }
    Ok(Spectrum { values: vec![ritz[0], ritz[1], *ritz.last().unwrap()], complete: false })
}
