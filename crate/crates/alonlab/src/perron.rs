//! Perron values of nonnegative matrices.

use nalgebra::{Complex, DMatrix};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 100_000;
/// Iteration cap for the dense Schur route before falling back to power iteration.
pub const SCHUR_MAX_ITERS: usize = 10_000;
/// Convergence threshold for the dense Schur route.
pub const SCHUR_EPS: f64 = 1e-14;

/// Strongly connected components of the digraph given by successor lists.
pub fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(succ.len(), succ.iter().map(Vec::len).sum());
    let nodes: Vec<_> = (0..succ.len()).map(|_| g.add_node(())).collect();
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Perron value of a 0/1-with-multiplicity digraph: the maximum over strongly
/// connected components of the spectral radius, found by power iteration on
/// `M + I` with a Collatz–Wielandt stopping rule. Acyclic input gives 0.
pub fn perron_of_digraph(succ: &[Vec<usize>]) -> Result<f64> {
    let comps = strongly_connected_components(succ);
    let mut best = 0.0f64;
    let mut local = vec![usize::MAX; succ.len()];
    for comp in &comps {
        for (i, &x) in comp.iter().enumerate() {
            local[x] = i;
        }
        let inner: Vec<Vec<usize>> = comp
            .iter()
            .map(|&x| succ[x].iter().filter(|&&y| local[y] != usize::MAX).map(|&y| local[y]).collect())
            .collect();
        if inner.iter().any(|s| !s.is_empty()) {
            best = best.max(perron_strongly_connected(&inner)?);
        }
        for &x in comp {
            local[x] = usize::MAX;
        }
    }
    Ok(best)
}

fn perron_strongly_connected(succ: &[Vec<usize>]) -> Result<f64> {
    let n = succ.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    for _ in 0..POWER_MAX_ITERS {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let s: f64 = succ[i].iter().map(|&j| x[j]).sum::<f64>() + x[i];
            y[i] = s;
            let r = s / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= POWER_TOL * hi {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
        let m = y.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..n {
            x[i] = (y[i] / m).max(f64::MIN_POSITIVE);
        }
    }
    Err(Error::NonConvergence(format!("power iteration on a {n}-node component did not settle in {POWER_MAX_ITERS} steps")))
}

/// Spectral radius of a dense nonnegative matrix (equal to its Perron value),
/// taken as the maximum over the diagonal blocks of its strongly connected
/// components so that each block has a simple Perron root.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    let succ: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| m[(i, j)] > 0.0).collect()).collect();
    let mut best = 0.0f64;
    for comp in strongly_connected_components(&succ) {
        let k = comp.len();
        let sub = DMatrix::from_fn(k, k, |a, b| m[(comp[a], comp[b])]);
        if sub.iter().all(|&v| v == 0.0) {
            continue;
        }
        best = best.max(block_radius(sub)?);
    }
    Ok(best)
}

fn block_radius(sub: DMatrix<f64>) -> Result<f64> {
    if sub.nrows() <= 96 {
        if let Some(ev) = general_eigenvalues(&sub) {
            return Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    power_radius(&sub)
}

/// Diagonal shifts tried in turn when the Schur iteration stalls.
const SCHUR_SHIFTS: [f64; 5] = [0.0, 0.371, -0.613, 1.129, -1.877];

/// Eigenvalues of a general square matrix through a capped Schur iteration,
/// retried on shifted copies when the iteration stalls.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    SCHUR_SHIFTS.iter().find_map(|&s| {
        let shifted = m + DMatrix::<f64>::identity(n, n) * (s * scale);
        let schur = shifted.try_schur(SCHUR_EPS, SCHUR_MAX_ITERS)?;
        Some(schur.complex_eigenvalues().iter().map(|z| z - s * scale).collect())
    })
}

/// Perron value of an irreducible nonnegative matrix by shifted power iteration.
fn power_radius(sub: &DMatrix<f64>) -> Result<f64> {
    let k = sub.nrows();
    let mut x = nalgebra::DVector::from_element(k, 1.0);
    for _ in 0..POWER_MAX_ITERS {
        let y = sub * &x + &x;
        let ratios = y.iter().zip(x.iter()).map(|(a, b)| a / b);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
        if hi - lo <= POWER_TOL * hi {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
        let mx = y.max();
        x = y.map(|v| (v / mx).max(f64::MIN_POSITIVE));
    }
    Err(Error::NonConvergence(format!("weighted power iteration on {k} nodes")))
}
