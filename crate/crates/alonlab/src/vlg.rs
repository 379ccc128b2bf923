//! Variable-length graphs: subdivision, realization, Shannon's threshold for
//! the growth rate of walk counts, and spectral radii of trees attached to a tangle.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{EdgePair, Label, LabeledGraph, LoopKind};
use crate::perron::{spectral_radius, strongly_connected_components};

/// Edge weight as a function of the formal variable `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// `z^len`
    Monomial(u64),
    /// `c * S_d(z)`
    TreeSeries { c: f64, d: f64 },
}

impl Weight {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Weight::Monomial(l) => z.powf(l as f64),
            Weight::TreeSeries { c, d } => c * tree_series(d, z),
        }
    }

    pub fn length(&self) -> Option<u64> {
        match *self {
            Weight::Monomial(l) => Some(l),
            Weight::TreeSeries { .. } => None,
        }
    }
}

/// `S_d(z) = (1 - sqrt(1 - 4(d-1)z^2)) / 2`, with the radicand clamped at 0.
pub fn tree_series(d: f64, z: f64) -> f64 {
    let t = 2.0 * (d - 1.0).sqrt() * z;
    let r = ((1.0 - t) * (1.0 + t)).max(0.0);
    (1.0 - r.sqrt()) / 2.0
}

/// Branch point `1 / (2 sqrt(d-1))` of `S_d`.
pub fn tree_branch_point(d: f64) -> f64 {
    1.0 / (2.0 * (d - 1.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlgEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Weight,
    /// Undirected self-loop paired with itself (contributes once to the diagonal).
    pub half: bool,
}

impl VlgEdge {
    pub fn new(u: usize, v: usize, len: u64) -> VlgEdge {
        VlgEdge { u, v, weight: Weight::Monomial(len), half: false }
    }

    pub fn half_loop(v: usize) -> VlgEdge {
        VlgEdge { u: v, v, weight: Weight::Monomial(1), half: true }
    }

    pub fn series(u: usize, v: usize, c: f64, d: f64) -> VlgEdge {
        VlgEdge { u, v, weight: Weight::TreeSeries { c, d }, half: false }
    }
}

/// A directed arc of a VLG; undirected edges contribute two opposite arcs
/// (one for a half-loop).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub weight: Weight,
    pub edge: usize,
    pub opp: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vlg {
    pub directed: bool,
    pub n: usize,
    pub edges: Vec<VlgEdge>,
}

impl Vlg {
    pub fn new(directed: bool, n: usize, edges: Vec<VlgEdge>) -> Result<Vlg> {
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return invalid(format!("edge {i} has an endpoint outside the vertex range"));
            }
            match e.weight {
                Weight::Monomial(0) => return invalid(format!("edge {i} has length 0")),
                Weight::TreeSeries { c, d } if !(c >= 0.0 && d > 2.0) => {
                    return invalid(format!("edge {i}: tree series needs c >= 0 and d > 2"))
                }
                _ => {}
            }
            if e.half && (directed || e.u != e.v) {
                return invalid(format!("edge {i}: half-loops exist only as undirected self-loops"));
            }
            if e.half && e.weight != Weight::Monomial(1) {
                return invalid(format!("edge {i}: half-loops must have length 1"));
            }
        }
        Ok(Vlg { directed, n, edges })
    }

    /// Unit-length undirected VLG of a labeled graph.
    pub fn from_graph(g: &LabeledGraph) -> Vlg {
        let edges = g
            .pairs()
            .iter()
            .map(|p| match p.kind {
                LoopKind::Half => VlgEdge::half_loop(p.u),
                _ => VlgEdge::new(p.u, p.v, 1),
            })
            .collect();
        Vlg { directed: false, n: g.n(), edges }
    }

    pub fn all_monomial(&self) -> bool {
        self.edges.iter().all(|e| matches!(e.weight, Weight::Monomial(_)))
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs = Vec::with_capacity(2 * self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let series = matches!(e.weight, Weight::TreeSeries { .. });
            if self.directed || e.half || (series && e.u == e.v) {
                let a = arcs.len();
                arcs.push(Arc { tail: e.u, head: e.v, weight: e.weight, edge: i, opp: if e.half { Some(a) } else { None } });
            } else {
                let a = arcs.len();
                arcs.push(Arc { tail: e.u, head: e.v, weight: e.weight, edge: i, opp: Some(a + 1) });
                arcs.push(Arc { tail: e.v, head: e.u, weight: e.weight, edge: i, opp: Some(a) });
            }
        }
        arcs
    }

    /// `Z(z)`: entry `(u, v)` sums the weights of arcs from `u` to `v`.
    pub fn z_matrix(&self, z: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for a in self.arcs() {
            m[(a.tail, a.head)] += a.weight.eval(z);
        }
        m
    }

    /// Upper end of the domain on which every weight is defined and `Z` is finite.
    pub fn z_max(&self) -> f64 {
        self.edges
            .iter()
            .filter_map(|e| match e.weight {
                Weight::TreeSeries { d, .. } => Some(tree_branch_point(d)),
                _ => None,
            })
            .fold(1.0, f64::min)
    }

    pub fn has_tree_series(&self) -> bool {
        !self.all_monomial()
    }

    /// Support digraph of `Z` (arcs with a weight that is not identically zero).
    fn support(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.n];
        for a in self.arcs() {
            let zero = matches!(a.weight, Weight::TreeSeries { c, .. } if c == 0.0);
            if !zero {
                succ[a.tail].push(a.head);
            }
        }
        succ
    }

    pub fn from_json_str(s: &str) -> Result<Vlg> {
        let f: VlgFile = serde_json::from_str(s)?;
        let mut edges = Vec::with_capacity(f.edges.len());
        for (i, e) in f.edges.iter().enumerate() {
            if e.u == 0 || e.v == 0 {
                return invalid(format!("edge {i}: vertices are 1-based"));
            }
            let weight = match (e.len, e.tree_series) {
                (Some(l), None) => Weight::Monomial(l),
                (None, Some(t)) => Weight::TreeSeries { c: t.c, d: t.d },
                _ => return invalid(format!("edge {i} needs exactly one of len and tree_series")),
            };
            edges.push(VlgEdge { u: e.u - 1, v: e.v - 1, weight, half: e.half });
        }
        Vlg::new(f.directed, f.vertices, edges)
    }

    pub fn to_json_string(&self) -> String {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let (len, tree_series) = match e.weight {
                    Weight::Monomial(l) => (Some(l), None),
                    Weight::TreeSeries { c, d } => (None, Some(SeriesFile { c, d })),
                };
                VlgEdgeFile { u: e.u + 1, v: e.v + 1, len, tree_series, half: e.half }
            })
            .collect();
        serde_json::to_string_pretty(&VlgFile { directed: self.directed, vertices: self.n, edges }).expect("vlg serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vlg> {
        Vlg::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct SeriesFile {
    c: f64,
    d: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VlgEdgeFile {
    u: usize,
    v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    len: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree_series: Option<SeriesFile>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    half: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VlgFile {
    directed: bool,
    vertices: usize,
    edges: Vec<VlgEdgeFile>,
}

/// Result of Shannon's threshold search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda1 {
    pub value: f64,
    /// Location of the threshold in `z` (0 when the walk count never grows).
    pub z_star: f64,
    /// Bound on the error in `value` implied by the bisection width.
    pub error: f64,
}

/// Width at which the bisection in `z` stops.
pub const Z_TOL: f64 = 1e-13;

/// Slack below 1 within which `Perron(Z(z_max))` counts as reaching the threshold.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// `1/z*` with `z* = sup{z : Perron(Z(z)) < 1}`.
pub fn lambda1_vlg(g: &Vlg) -> Result<Lambda1> {
    let zmax = g.z_max();
    let perron = |z: f64| spectral_radius(&g.z_matrix(z));
    if perron(zmax)? < 1.0 - BOUNDARY_TOL {
        if g.has_tree_series() {
            return Ok(Lambda1 { value: 1.0 / zmax, z_star: zmax, error: 0.0 });
        }
        return Ok(Lambda1 { value: 0.0, z_star: 0.0, error: 0.0 });
    }
    let (mut lo, mut hi) = (0.0f64, zmax);
    while hi - lo > Z_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if perron(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    if z <= 0.0 {
        return Err(Error::NonConvergence("walk counts grow faster than any exponential".into()));
    }
    Ok(Lambda1 { value: 1.0 / z, z_star: z, error: (hi - lo) / (z * z) })
}

/// `1/z*` with `z*` the smallest positive root of `det(I - Z(z))`, found
/// separately on each irreducible diagonal block.
pub fn lambda1_by_determinant(g: &Vlg) -> Result<f64> {
    const GRID: usize = 4096;
    let zmax = g.z_max();
    let mut best: Option<f64> = None;
    for comp in strongly_connected_components(&g.support()) {
        let block = |z: f64| -> f64 {
            let full = g.z_matrix(z);
            let k = comp.len();
            let m = DMatrix::from_fn(k, k, |a, b| if a == b { 1.0 } else { 0.0 } - full[(comp[a], comp[b])]);
            m.determinant()
        };
        if comp.len() == 1 && !g.support()[comp[0]].contains(&comp[0]) {
            continue;
        }
        let mut prev = 0.0;
        let mut root = None;
        for i in 1..=GRID {
            let z = zmax * i as f64 / GRID as f64;
            if block(z) <= 0.0 {
                let (mut lo, mut hi) = (prev, z);
                while hi - lo > Z_TOL {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if block(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                root = Some(0.5 * (lo + hi));
                break;
            }
            prev = z;
        }
        if let Some(r) = root {
            best = Some(best.map_or(r, |b: f64| b.min(r)));
        }
    }
    match best {
        Some(z) => Ok(1.0 / z),
        None if g.has_tree_series() => Ok(1.0 / zmax),
        None => Ok(0.0),
    }
}

/// Replaces every edge of length `l` by a path through `l - 1` fresh beads.
pub fn subdivide(g: &Vlg) -> Result<Vlg> {
    let mut n = g.n;
    let mut edges = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        let Weight::Monomial(len) = e.weight else {
            return invalid(format!("edge {i} carries a tree series and cannot be subdivided"));
        };
        if e.half {
            edges.push(*e);
            continue;
        }
        let mut prev = e.u;
        for _ in 1..len {
            edges.push(VlgEdge::new(prev, n, 1));
            prev = n;
            n += 1;
        }
        edges.push(VlgEdge::new(prev, e.v, 1));
    }
    Vlg::new(g.directed, n, edges)
}

/// Unit-length undirected VLG as a labeled graph; each edge gets its own generator.
pub fn to_labeled_graph(g: &Vlg) -> Result<LabeledGraph> {
    if g.directed {
        return invalid("directed VLGs have no labeled-graph form");
    }
    let mut pairs = Vec::with_capacity(g.edges.len());
    for (i, e) in g.edges.iter().enumerate() {
        if e.weight != Weight::Monomial(1) {
            return invalid(format!("edge {i} is not of unit length"));
        }
        let j = i as u32 + 1;
        pairs.push(if e.half {
            EdgePair::half(e.u, Label::Match(j))
        } else if e.u == e.v {
            EdgePair::whole(e.u, Label::Perm(j))
        } else {
            EdgePair::new(e.u, e.v, Label::Perm(j))
        });
    }
    LabeledGraph::from_pairs(g.n, pairs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub vlg: Vlg,
    /// Vertices of the result, as indices into the input graph.
    pub kept: Vec<usize>,
    pub truncated: bool,
}

/// Default truncation length for realizations over cyclic complements.
pub const DEFAULT_REALIZE_LIMIT: u64 = 64;

/// The VLG on `keep` whose edges are the walks between kept vertices that avoid
/// `keep` internally (non-backtracking walks, taken up to reversal, for
/// undirected input). Walks longer than `max_len` are dropped and flagged.
pub fn realize(g: &Vlg, keep: &[usize], max_len: u64) -> Result<Realization> {
    if !g.all_monomial() {
        return invalid("realization needs integer edge lengths");
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&v| v >= g.n) {
        return invalid("kept vertex outside the vertex range");
    }
    let mut index = vec![usize::MAX; g.n];
    for (i, &v) in kept.iter().enumerate() {
        index[v] = i;
    }
    let arcs = g.arcs();
    let mut out = vec![Vec::new(); g.n];
    for (a, arc) in arcs.iter().enumerate() {
        out[arc.tail].push(a);
    }
    let mut state = RealizeState { arcs: &arcs, out: &out, index: &index, directed: g.directed, max_len, truncated: false, found: Vec::new(), walk: Vec::new() };
    for &u in &kept {
        for &a in &out[u] {
            state.walk.push(a);
            state.explore(arcs[a].weight.length().unwrap_or(1));
            state.walk.pop();
        }
    }
    let edges = state.found;
    let truncated = state.truncated;
    Ok(Realization { vlg: Vlg::new(g.directed, kept.len(), edges)?, kept, truncated })
}

struct RealizeState<'a> {
    arcs: &'a [Arc],
    out: &'a [Vec<usize>],
    index: &'a [usize],
    directed: bool,
    max_len: u64,
    truncated: bool,
    found: Vec<VlgEdge>,
    walk: Vec<usize>,
}

impl RealizeState<'_> {
    fn explore(&mut self, len: u64) {
        let last = *self.walk.last().expect("nonempty walk");
        let here = self.arcs[last].head;
        if self.index[here] != usize::MAX {
            self.emit(len);
            return;
        }
        for i in 0..self.out[here].len() {
            let a = self.out[here][i];
            if !self.directed && self.arcs[last].opp == Some(a) {
                continue;
            }
            let next_len = len + self.arcs[a].weight.length().unwrap_or(1);
            if next_len > self.max_len {
                self.truncated = true;
                continue;
            }
            self.walk.push(a);
            self.explore(next_len);
            self.walk.pop();
        }
    }

    fn emit(&mut self, len: u64) {
        let first = self.walk[0];
        let last = *self.walk.last().expect("nonempty walk");
        let (u, v) = (self.index[self.arcs[first].tail], self.index[self.arcs[last].head]);
        if self.directed {
            self.found.push(VlgEdge::new(u, v, len));
            return;
        }
        let reverse: Vec<usize> = self.walk.iter().rev().map(|&a| self.arcs[a].opp.expect("undirected arcs are paired")).collect();
        match self.walk.as_slice().cmp(reverse.as_slice()) {
            std::cmp::Ordering::Less => self.found.push(VlgEdge::new(u, v, len)),
            std::cmp::Ordering::Equal => {
                if len == 1 {
                    self.found.push(VlgEdge::half_loop(u));
                } else {
                    self.found.push(VlgEdge { u, v, weight: Weight::Monomial(len), half: true });
                }
            }
            std::cmp::Ordering::Greater => {}
        }
    }
}

/// Non-backtracking graph of an undirected VLG as a directed VLG: one vertex per
/// arc, and an arc `a -> b` of `b`'s length whenever `b` may follow `a`.
pub fn irreducible_vlg(g: &Vlg) -> Result<Vlg> {
    if g.directed {
        return invalid("the non-backtracking graph is defined for undirected VLGs");
    }
    if !g.all_monomial() {
        return invalid("the non-backtracking graph needs integer edge lengths");
    }
    let arcs = g.arcs();
    let mut edges = Vec::new();
    for (a, x) in arcs.iter().enumerate() {
        for (b, y) in arcs.iter().enumerate() {
            if x.head == y.tail && x.opp != Some(b) {
                edges.push(VlgEdge { u: a, v: b, weight: y.weight, half: false });
            }
        }
    }
    Vlg::new(true, arcs.len(), edges)
}

/// `lambda_irred` of an undirected VLG with integer lengths.
pub fn lambda_irred_vlg(g: &Vlg) -> Result<f64> {
    Ok(lambda1_vlg(&irreducible_vlg(g)?)?.value)
}

/// Spectral radius of the d-regular completion `Tree_d(x)` of a connected graph
/// whose degrees are at most `d` (real `d > 2` allowed).
pub fn tree_d_norm(x: &LabeledGraph, d: f64) -> Result<f64> {
    if !(d > 2.0) {
        return invalid("d must exceed 2");
    }
    if !x.is_connected() {
        return invalid("graph is not connected");
    }
    let mut vlg = Vlg::from_graph(x);
    for v in 0..x.n() {
        let deg = x.degree(v) as f64;
        if deg > d + 1e-12 {
            return invalid(format!("vertex {} has degree {deg} > d = {d}", v + 1));
        }
        if d - deg > 0.0 {
            vlg.edges.push(VlgEdge::series(v, v, (d - deg) / (d - 1.0), d));
        }
    }
    Ok(lambda1_vlg(&vlg)?.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub lengths: Vec<u64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub monotone: bool,
    pub final_gap: f64,
    pub pass: bool,
}

/// Tolerance on the final gap in [`limit_convergence_check`].
pub const LIMIT_TOL: f64 = 1e-6;

/// `lambda1` with the `growing` edges set to each length in turn, compared with
/// the graph in which those edges are deleted.
pub fn limit_convergence_check(base: &Vlg, growing: &[usize], lengths: &[u64]) -> Result<ConvergenceReport> {
    if growing.iter().any(|&e| e >= base.edges.len()) {
        return invalid("growing edge index out of range");
    }
    let mut values = Vec::with_capacity(lengths.len());
    for &l in lengths {
        let mut g = base.clone();
        for &e in growing {
            g.edges[e].weight = Weight::Monomial(l);
        }
        values.push(lambda1_vlg(&g)?.value);
    }
    let limit_graph = Vlg {
        directed: base.directed,
        n: base.n,
        edges: base.edges.iter().enumerate().filter(|(i, _)| !growing.contains(i)).map(|(_, e)| *e).collect(),
    };
    let limit = if growing.is_empty() { lambda1_vlg(base)?.value } else { lambda1_vlg(&limit_graph)?.value };
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-12) && values.iter().all(|&v| v >= limit - 1e-9);
    let final_gap = values.last().map_or(0.0, |&v| (v - limit).abs());
    Ok(ConvergenceReport { lengths: lengths.to_vec(), values, limit, monotone, final_gap, pass: monotone && final_gap <= LIMIT_TOL })
}
