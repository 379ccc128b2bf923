//! The non-backtracking graph of a labeled multigraph and its Perron value.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::graph::LabeledGraph;
use crate::perron::{perron_of_digraph, strongly_connected_components};

/// Digraph on the directed edges of a graph with an arc `e1 -> e2` whenever
/// `e1 e2` is a two-step walk that does not immediately reverse.
#[derive(Clone, Debug)]
pub struct NonBacktrackingGraph {
    succ: Vec<Vec<usize>>,
}

impl NonBacktrackingGraph {
    pub fn new(g: &LabeledGraph) -> NonBacktrackingGraph {
        let succ = (0..g.dir_edges().len())
            .map(|e| {
                let head = g.dir_edge(e).head;
                g.out_edges(head).iter().copied().filter(|&f| f != g.opp(e)).collect()
            })
            .collect();
        NonBacktrackingGraph { succ }
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, e: usize) -> &[usize] {
        &self.succ[e]
    }

    pub fn successor_lists(&self) -> &[Vec<usize>] {
        &self.succ
    }

    /// Strongly connected in the sense that every node reaches every node,
    /// itself included, by a nonempty path.
    pub fn is_strongly_connected(&self) -> bool {
        if self.succ.is_empty() {
            return false;
        }
        let comps = strongly_connected_components(&self.succ);
        comps.len() == 1 && self.arc_count() > 0
    }
}

/// Largest irreducible eigenvalue: the Perron value of the non-backtracking graph.
pub fn lambda_irred(g: &LabeledGraph) -> Result<f64> {
    perron_of_digraph(NonBacktrackingGraph::new(g).successor_lists())
}

/// The exact value of `lambda_irred` when every cyclic strongly connected
/// component of the non-backtracking graph has constant internal out-degree.
pub fn lambda_irred_exact(g: &LabeledGraph) -> Option<u64> {
    let nb = NonBacktrackingGraph::new(g);
    let comps = strongly_connected_components(nb.successor_lists());
    let mut comp_of = vec![0usize; nb.node_count()];
    for (c, comp) in comps.iter().enumerate() {
        for &x in comp {
            comp_of[x] = c;
        }
    }
    let mut best = 0u64;
    for (c, comp) in comps.iter().enumerate() {
        let degs: Vec<u64> = comp
            .iter()
            .map(|&x| nb.successors(x).iter().filter(|&&y| comp_of[y] == c).count() as u64)
            .collect();
        if degs.iter().all(|&k| k == 0) {
            continue;
        }
        if degs.iter().any(|&k| k != degs[0]) {
            return None;
        }
        best = best.max(degs[0]);
    }
    Some(best)
}

/// `lambda_irred` through the quadratic identity `det(I - yA + y^2(D - I)) = 0`:
/// the largest real eigenvalue of the companion matrix `[[A, -(D-I)], [I, 0]]`.
pub fn lambda_irred_ihara(g: &LabeledGraph) -> Result<f64> {
    if g.has_loops() {
        return invalid("the determinant cross-check is restricted to loopless graphs");
    }
    if !g.is_connected() {
        return invalid("graph is not connected");
    }
    if !is_one_loopy(g)?.0 {
        return invalid("graph is not 1-loopy");
    }
    let n = g.n();
    let a = g.adjacency();
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = a[(i, j)];
        }
        c[(i, n + i)] = -(g.degree(i) as f64 - 1.0);
        c[(n + i, i)] = 1.0;
    }
    let ev = crate::perron::general_eigenvalues(&c)
        .ok_or_else(|| crate::error::Error::NonConvergence("Schur iteration on the companion matrix did not settle".into()))?;
    ev.iter()
        .filter(|z| z.im.abs() <= 1e-6 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        .ok_or_else(|| crate::error::Error::NonConvergence("companion matrix has no real eigenvalue".into()))
}

/// Whether a connected graph with at least one edge is a cycle: 2-regular with `|E| = |V|`.
fn is_cycle(g: &LabeledGraph) -> bool {
    g.half_loop_count() == 0 && (0..g.n()).all(|v| g.degree(v) == 2)
}

/// The three equivalent conditions for a connected graph: (1-loopy,
/// non-backtracking graph strongly connected, not a cycle with minimum degree at least 2).
pub fn is_one_loopy(g: &LabeledGraph) -> Result<(bool, bool, bool)> {
    if !g.is_connected() {
        return invalid("graph is not connected");
    }
    let one_loopy = (0..g.pairs().len()).all(|p| {
        let h = g.without_pairs(&[p]);
        h.components().iter().all(|comp| {
            let edges = h.pairs().iter().filter(|e| comp.binary_search(&e.u).is_ok()).count();
            edges >= comp.len()
        })
    });
    let strongly = NonBacktrackingGraph::new(g).is_strongly_connected();
    let degree_rule = !is_cycle(g) && g.min_degree() >= 2;
    Ok((one_loopy, strongly, degree_rule))
}
