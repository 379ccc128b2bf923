//! Exact irreducible and strongly irreducible trace counts and the polynomial
//! identities tying them to the adjacency spectrum.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::LabeledGraph;
use crate::nonbacktracking::NonBacktrackingGraph;
use crate::spectrum::spectrum;

/// Default cap on `start states x length x arcs` for the trace dynamic programs.
pub const DEFAULT_TRACE_BUDGET: u64 = 40_000_000_000;

/// Exact integer coefficients of `q_k`, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePolynomial {
    pub k: usize,
    pub d: i64,
    pub coeffs: Vec<i128>,
}

impl TracePolynomial {
    pub fn new(k: usize, d: i64) -> Result<TracePolynomial> {
        if k == 0 {
            return invalid("q_k is defined for k >= 1");
        }
        let mut prev: Vec<i128> = vec![0, 1];
        if k == 1 {
            return Ok(TracePolynomial { k, d, coeffs: prev });
        }
        let mut cur: Vec<i128> = vec![-(d as i128), 0, 1];
        for _ in 3..=k {
            let mut next = vec![0i128; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= (d as i128 - 1) * c;
            }
            prev = cur;
            cur = next;
        }
        Ok(TracePolynomial { k, d, coeffs: cur })
    }

    pub fn eval_exact(&self, x: i128) -> i128 {
        self.coeffs.iter().rev().fold(0i128, |acc, &c| acc * x + c)
    }
}

/// `q_k(x)` by the three-term recurrence.
pub fn q_value(k: usize, d: f64, x: f64) -> f64 {
    let (mut a, mut b) = (x, x * x - d);
    match k {
        0 => return 1.0,
        1 => return a,
        2 => return b,
        _ => {}
    }
    for _ in 3..=k {
        let c = x * b - (d - 1.0) * a;
        a = b;
        b = c;
    }
    b
}

/// `sum_i q_k(lambda_i)`.
pub fn q_eval(k: usize, d: f64, spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|&x| q_value(k, d, x)).sum()
}

/// Roots of `mu^2 - lambda mu + (d-1)` and the associated strong-trace polynomials.
#[derive(Clone, Copy, Debug)]
pub struct SitEvaluator {
    pub d: f64,
    pub lambda: f64,
    pub mu1: nalgebra::Complex<f64>,
    pub mu2: nalgebra::Complex<f64>,
}

impl SitEvaluator {
    pub fn new(d: f64, lambda: f64) -> SitEvaluator {
        let disc = nalgebra::Complex::new(lambda * lambda - 4.0 * (d - 1.0), 0.0).sqrt();
        let half = nalgebra::Complex::new(lambda / 2.0, 0.0);
        SitEvaluator { d, lambda, mu1: half + disc / 2.0, mu2: half - disc / 2.0 }
    }

    /// `mu1^k + mu2^k + (1 + (-1)^k)(d-2)/2` from the complex roots.
    pub fn q_tilde_complex(&self, k: usize) -> f64 {
        let p = self.mu1.powu(k as u32) + self.mu2.powu(k as u32);
        p.re + if k % 2 == 0 { self.d - 2.0 } else { 0.0 }
    }

    /// Same value through the real recurrence `p_k = lambda p_{k-1} - (d-1) p_{k-2}`.
    pub fn q_tilde(&self, k: usize) -> f64 {
        let (mut a, mut b) = (2.0, self.lambda);
        for _ in 0..k {
            let c = self.lambda * b - (self.d - 1.0) * a;
            a = b;
            b = c;
        }
        a + if k % 2 == 0 { self.d - 2.0 } else { 0.0 }
    }

    /// Variant for graphs with half-loops (and no whole-loops).
    pub fn q_hat(&self, k: usize) -> f64 {
        let t = self.q_tilde(k);
        if k >= 3 && k % 2 == 1 {
            t - self.lambda
        } else {
            t
        }
    }
}

/// `sum_i` of the strong-trace polynomial over the spectrum. Graphs mixing
/// whole-loops and half-loops are rejected.
pub fn sit_eval(k: usize, d: f64, spectrum: &[f64], half_loops: usize, whole_loops_present: bool) -> Result<f64> {
    if half_loops > 0 && whole_loops_present {
        return invalid("no spectral formula for graphs with both whole-loops and half-loops");
    }
    Ok(spectrum
        .iter()
        .map(|&x| {
            let s = SitEvaluator::new(d, x);
            if half_loops > 0 {
                s.q_hat(k)
            } else {
                s.q_tilde(k)
            }
        })
        .sum())
}

/// Irreducible (`irred[k]`) and strongly irreducible (`strong[k]`) closed-walk
/// counts for `k = 0..=kmax`; index 0 holds `n` and 0 respectively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCounts {
    pub irred: Vec<u128>,
    pub strong: Vec<u128>,
}

pub fn trace_counts(g: &LabeledGraph, kmax: usize) -> Result<TraceCounts> {
    trace_counts_with_budget(g, kmax, DEFAULT_TRACE_BUDGET)
}

pub fn trace_counts_with_budget(g: &LabeledGraph, kmax: usize, budget: u64) -> Result<TraceCounts> {
    let nb = NonBacktrackingGraph::new(g);
    let states = nb.node_count();
    let work = (states as u64).saturating_mul(kmax as u64).saturating_mul(nb.arc_count().max(1) as u64);
    if work > budget {
        return Err(Error::Budget(format!("trace DP needs {work} steps, budget is {budget}")));
    }
    let growth = (g.max_degree().max(2) as f64).powi(kmax as i32) * states.max(1) as f64;
    if growth > 1.0e18 {
        return Err(Error::Budget(format!("walk counts for k={kmax} could exceed 64-bit range")));
    }
    let mut irred = vec![0u128; kmax + 1];
    let mut strong = vec![0u128; kmax + 1];
    irred[0] = g.n() as u128;
    let into: Vec<Vec<usize>> = (0..g.n()).map(|v| g.out_edges(v).iter().map(|&e| g.opp(e)).collect()).collect();
    let mut x = vec![0u64; states];
    let mut y = vec![0u64; states];
    let mut support: Vec<usize> = Vec::new();
    let mut marked = vec![false; states];
    for e0 in 0..states {
        let v = g.dir_edge(e0).tail;
        let back = g.opp(e0);
        for &s in &support {
            x[s] = 0;
        }
        support.clear();
        x[e0] = 1;
        support.push(e0);
        for len in 1..=kmax {
            let closing: u64 = into[v].iter().map(|&e| x[e]).sum();
            irred[len] += closing as u128;
            strong[len] += (closing - x[back]) as u128;
            if len == kmax {
                break;
            }
            let mut next_support = Vec::with_capacity(support.len() * 2);
            for &e in &support {
                let c = x[e];
                if c == 0 {
                    continue;
                }
                for &f in nb.successors(e) {
                    if !marked[f] {
                        marked[f] = true;
                        next_support.push(f);
                    }
                    y[f] += c;
                }
            }
            for &s in &support {
                x[s] = 0;
            }
            for &f in &next_support {
                x[f] = y[f];
                y[f] = 0;
                marked[f] = false;
            }
            support = next_support;
        }
    }
    if kmax >= 1 {
        strong[1] += g.half_loop_count() as u128;
    }
    Ok(TraceCounts { irred, strong })
}

/// Number of irreducible closed walks of length `k`.
pub fn irred_trace(g: &LabeledGraph, k: usize) -> Result<u128> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    Ok(trace_counts(g, k)?.irred[k])
}

/// Trace of the `k`-th power of the non-backtracking matrix (plus one per half-loop when `k = 1`).
pub fn strongly_irred_trace(g: &LabeledGraph, k: usize) -> Result<u128> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    Ok(trace_counts(g, k)?.strong[k])
}

/// `Tr(A^k)` for `k = 0..=kmax`, exactly.
pub fn adjacency_power_traces(g: &LabeledGraph, kmax: usize) -> Vec<u128> {
    let rows = g.adjacency_lists();
    let n = g.n();
    let mut tr = vec![0u128; kmax + 1];
    tr[0] = n as u128;
    let mut x = vec![0u128; n];
    let mut y = vec![0u128; n];
    for s in 0..n {
        x.iter_mut().for_each(|c| *c = 0);
        x[s] = 1;
        for t in tr.iter_mut().skip(1) {
            y.iter_mut().for_each(|c| *c = 0);
            for (u, row) in rows.iter().enumerate() {
                if x[u] == 0 {
                    continue;
                }
                for &(w, m) in row {
                    y[w] += x[u] * m as u128;
                }
            }
            std::mem::swap(&mut x, &mut y);
            *t += x[s];
        }
    }
    tr
}

/// Number of words of length `k` reducing to a fixed irreducible word of length `i`
/// in a free group-like alphabet of size `d`.
pub fn n_reduced(k: usize, i: usize, d: u64) -> u128 {
    if i > k || (k - i) % 2 != 0 {
        return 0;
    }
    let mut walks = vec![0u128; k + 2];
    walks[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u128; k + 2];
        for j in 0..=k {
            let c = walks[j];
            if c == 0 {
                continue;
            }
            if j == 0 {
                next[1] += c * d as u128;
            } else {
                next[j + 1] += c * (d as u128 - 1);
                next[j - 1] += c;
            }
        }
        walks = next;
    }
    let sphere: u128 = if i == 0 { 1 } else { d as u128 * (d as u128 - 1).pow(i as u32 - 1) };
    walks[i] / sphere
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub identity: String,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&IdentityRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Relative tolerance for the spectral side of the identities.
pub const SPECTRAL_RTOL: f64 = 1e-6;

/// Checks the four trace identities for `k = 1..=kmax` on a regular graph.
pub fn verify_identities(g: &LabeledGraph, kmax: usize) -> Result<IdentityReport> {
    let d = g.regular_degree().ok_or_else(|| Error::Invalid("identities need a regular graph".into()))?;
    let spec = spectrum(g)?.values;
    let counts = trace_counts(g, kmax)?;
    let tr = adjacency_power_traces(g, kmax);
    verify_with(g, d, &spec, &counts, &tr, kmax)
}

/// Same as [`verify_identities`] with precomputed inputs.
pub fn verify_with(g: &LabeledGraph, d: u32, spec: &[f64], counts: &TraceCounts, tr: &[u128], kmax: usize) -> Result<IdentityReport> {
    let df = d as f64;
    let h = g.half_loop_count() as i128;
    let mixed = g.half_loop_count() > 0 && g.whole_loop_count() > 0;
    let mut report = IdentityReport::default();
    let scale = |k: usize, lhs: f64| lhs.abs().max((df - 1.0).powi(k as i32)).max(1.0);
    for k in 1..=kmax {
        let lhs = counts.irred[k] as f64;
        let rhs = q_eval(k, df, spec);
        let err = (lhs - rhs).abs();
        report.rows.push(IdentityRow { identity: "irred_spectral".into(), k, lhs, rhs, abs_err: err, pass: err <= SPECTRAL_RTOL * scale(k, lhs) });

        let mut sum: u128 = 0;
        let mut i = k % 2;
        while i <= k {
            sum += n_reduced(k, i, d as u64) * counts.irred[i];
            i += 2;
        }
        report.rows.push(exact_row("power_reduction", k, tr[k] as i128, sum as i128));

        let mut rhs_c: i128 = counts.strong[k] as i128;
        if k >= 2 {
            for i in 1..=(k - 1) / 2 {
                rhs_c += (d as i128 - 2) * (d as i128 - 1).pow(i as u32 - 1) * counts.strong[k - 2 * i] as i128;
            }
            if k % 2 == 1 && k >= 3 {
                rhs_c += (d as i128 - 1).pow((k as u32 - 3) / 2) * h;
            }
        }
        report.rows.push(exact_row("main_sit", k, counts.irred[k] as i128, rhs_c));

        if mixed {
            continue;
        }
        let lhs = counts.strong[k] as f64;
        let rhs = sit_eval(k, df, spec, g.half_loop_count(), g.whole_loop_count() > 0)?;
        let err = (lhs - rhs).abs();
        report.rows.push(IdentityRow { identity: "strong_spectral".into(), k, lhs, rhs, abs_err: err, pass: err <= SPECTRAL_RTOL * scale(k, lhs) });
    }
    if mixed {
        report.notes.push("strong_spectral skipped: graph has both whole-loops and half-loops".into());
    }
    Ok(report)
}

fn exact_row(name: &str, k: usize, lhs: i128, rhs: i128) -> IdentityRow {
    IdentityRow { identity: name.into(), k, lhs: lhs as f64, rhs: rhs as f64, abs_err: (lhs - rhs).abs() as f64, pass: lhs == rhs }
}
