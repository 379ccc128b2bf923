//! Labeled multigraphs with whole-loops and half-loops.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Label carried by a directed edge. Generator indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Perm(u32),
    PermInv(u32),
    Match(u32),
    HalfLoop(u32),
}

impl Label {
    pub fn inverse(self) -> Label {
        match self {
            Label::Perm(j) => Label::PermInv(j),
            Label::PermInv(j) => Label::Perm(j),
            other => other,
        }
    }

    pub fn generator(self) -> u32 {
        match self {
            Label::Perm(j) | Label::PermInv(j) | Label::Match(j) | Label::HalfLoop(j) => j,
        }
    }

    pub fn is_self_inverse(self) -> bool {
        matches!(self, Label::Match(_) | Label::HalfLoop(_))
    }

    pub fn is_perm_kind(self) -> bool {
        matches!(self, Label::Perm(_) | Label::PermInv(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Perm(j) => write!(f, "perm({j})"),
            Label::PermInv(j) => write!(f, "perm_inv({j})"),
            Label::Match(j) => write!(f, "match({j})"),
            Label::HalfLoop(j) => write!(f, "halfloop({j})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopKind {
    Normal,
    Whole,
    Half,
}

/// Model tag carried by graph files and tangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    G,
    H,
    I,
    J,
}

impl ModelTag {
    pub fn parse(s: &str) -> Result<ModelTag> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(ModelTag::G),
            "h" => Ok(ModelTag::H),
            "i" => Ok(ModelTag::I),
            "j" => Ok(ModelTag::J),
            _ => invalid(format!("unknown model '{s}'")),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::G => "g",
            ModelTag::H => "h",
            ModelTag::I => "i",
            ModelTag::J => "j",
        }
    }

    /// Models whose generators are permutations (as opposed to involutions).
    pub fn uses_permutations(self) -> bool {
        matches!(self, ModelTag::G | ModelTag::H)
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

/// An undirected edge; `label` is the label of the directed edge `u -> v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgePair {
    pub u: usize,
    pub v: usize,
    pub label: Label,
    pub kind: LoopKind,
}

impl EdgePair {
    pub fn new(u: usize, v: usize, label: Label) -> EdgePair {
        EdgePair { u, v, label, kind: LoopKind::Normal }
    }

    pub fn whole(v: usize, label: Label) -> EdgePair {
        EdgePair { u: v, v, label, kind: LoopKind::Whole }
    }

    pub fn half(v: usize, label: Label) -> EdgePair {
        EdgePair { u: v, v, label, kind: LoopKind::Half }
    }

    pub fn is_loop(&self) -> bool {
        self.kind != LoopKind::Normal
    }

    /// The same undirected edge described from the other endpoint.
    pub fn reversed(&self) -> EdgePair {
        EdgePair { u: self.v, v: self.u, label: self.label.inverse(), kind: self.kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirEdge {
    pub tail: usize,
    pub head: usize,
    pub label: Label,
    pub pair: usize,
}

/// A multigraph whose directed edges come in opposite pairs carrying
/// mutually inverse labels. Vertices are `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    n: usize,
    d: Option<u32>,
    model: Option<ModelTag>,
    pairs: Vec<EdgePair>,
    dir: Vec<DirEdge>,
    opp: Vec<usize>,
    pair_dir: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl LabeledGraph {
    /// Builds and validates a graph. `d`, when given, is checked against every degree.
    pub fn new(n: usize, pairs: Vec<EdgePair>, d: Option<u32>) -> Result<LabeledGraph> {
        for (i, p) in pairs.iter().enumerate() {
            if p.u >= n || p.v >= n {
                return invalid(format!("edge {i} has an endpoint outside 0..{n}"));
            }
            match p.kind {
                LoopKind::Normal if p.u == p.v => {
                    return invalid(format!("edge {i} joins a vertex to itself but is not marked as a loop"))
                }
                LoopKind::Whole | LoopKind::Half if p.u != p.v => {
                    return invalid(format!("edge {i} is marked as a loop but joins distinct vertices"))
                }
                _ => {}
            }
            if matches!(p.label, Label::HalfLoop(_)) && p.kind != LoopKind::Half {
                return invalid(format!("edge {i} carries a halfloop label but is not a half-loop"));
            }
            if p.kind == LoopKind::Half && p.label.is_perm_kind() {
                return invalid(format!("half-loop {i} carries a permutation label"));
            }
            if p.label.generator() == 0 {
                return invalid(format!("edge {i} has generator index 0"));
            }
            if let Some(d) = d {
                let j = p.label.generator();
                let bound = if p.label.is_perm_kind() { d / 2 } else { d };
                if j > bound {
                    return invalid(format!("edge {i}: label {} exceeds the generator range for d={d}", p.label));
                }
            }
        }
        let mut dir = Vec::with_capacity(2 * pairs.len());
        let mut opp = Vec::with_capacity(2 * pairs.len());
        let mut pair_dir = Vec::with_capacity(pairs.len());
        let mut out = vec![Vec::new(); n];
        for (pi, p) in pairs.iter().enumerate() {
            let a = dir.len();
            pair_dir.push(a);
            dir.push(DirEdge { tail: p.u, head: p.v, label: p.label, pair: pi });
            out[p.u].push(a);
            if p.kind == LoopKind::Half {
                opp.push(a);
            } else {
                dir.push(DirEdge { tail: p.v, head: p.u, label: p.label.inverse(), pair: pi });
                out[p.v].push(a + 1);
                opp.push(a + 1);
                opp.push(a);
            }
        }
        let g = LabeledGraph { n, d, model: None, pairs, dir, opp, pair_dir, out };
        if let Some(d) = d {
            for v in 0..n {
                let deg = g.degree(v);
                if deg != d as usize {
                    return invalid(format!("degree violation: vertex {} has degree {deg}, expected {d}", v + 1));
                }
            }
        }
        Ok(g)
    }

    /// Convenience constructor for graphs without a declared degree.
    pub fn from_pairs(n: usize, pairs: Vec<EdgePair>) -> Result<LabeledGraph> {
        LabeledGraph::new(n, pairs, None)
    }

    pub fn with_model(mut self, model: Option<ModelTag>) -> LabeledGraph {
        self.model = model;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> Option<u32> {
        self.d
    }

    pub fn model(&self) -> Option<ModelTag> {
        self.model
    }

    pub fn pairs(&self) -> &[EdgePair] {
        &self.pairs
    }

    pub fn dir_edges(&self) -> &[DirEdge] {
        &self.dir
    }

    pub fn dir_edge(&self, e: usize) -> DirEdge {
        self.dir[e]
    }

    pub fn opp(&self, e: usize) -> usize {
        self.opp[e]
    }

    /// Directed edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// The directed edge of `pair` oriented as stored (`u -> v`).
    pub fn pair_forward(&self, pair: usize) -> usize {
        self.pair_dir[pair]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Declared degree if present, otherwise the common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<u32> {
        if let Some(d) = self.d {
            return Some(d);
        }
        let first = if self.n == 0 { return None } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == first).then_some(first as u32)
    }

    pub fn half_loop_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.kind == LoopKind::Half).count()
    }

    pub fn whole_loop_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.kind == LoopKind::Whole).count()
    }

    pub fn has_loops(&self) -> bool {
        self.pairs.iter().any(|p| p.is_loop())
    }

    /// Dense adjacency matrix; whole-loops add 2 on the diagonal, half-loops 1.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.dir {
            a[(e.tail, e.head)] += 1.0;
        }
        a
    }

    /// Sparse integer adjacency: for each vertex, (neighbour, multiplicity) sorted by neighbour.
    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, u64)>> {
        let mut rows = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut heads: Vec<usize> = self.out[v].iter().map(|&e| self.dir[e].head).collect();
            heads.sort_unstable();
            let mut row: Vec<(usize, u64)> = Vec::new();
            for h in heads {
                match row.last_mut() {
                    Some((w, c)) if *w == h => *c += 1,
                    _ => row.push((h, 1)),
                }
            }
            rows.push(row);
        }
        rows
    }

    /// Distinct neighbours of `v` (excluding `v` itself unless it has a loop).
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut ns: Vec<usize> = self.out[v].iter().map(|&e| self.dir[e].head).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// `|E| - |V|` with every loop counted as one edge.
    pub fn order(&self) -> i64 {
        self.pairs.len() as i64 - self.n as i64
    }

    /// Connected components as vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &e in &self.out[x] {
                    let y = self.dir[e].head;
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    /// Breadth-first distances from `s` (`usize::MAX` when unreachable).
    pub fn distances_from(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &e in &self.out[x] {
                let y = self.dir[e].head;
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// The subgraph keeping `keep_vertices` (in the given order) and the listed edge pairs.
    pub fn subgraph(&self, keep_vertices: &[usize], keep_pairs: &[usize]) -> Result<LabeledGraph> {
        let mut map = vec![usize::MAX; self.n];
        for (i, &v) in keep_vertices.iter().enumerate() {
            map[v] = i;
        }
        let mut pairs = Vec::with_capacity(keep_pairs.len());
        for &p in keep_pairs {
            let e = self.pairs[p];
            if map[e.u] == usize::MAX || map[e.v] == usize::MAX {
                return invalid("kept edge has a removed endpoint");
            }
            pairs.push(EdgePair { u: map[e.u], v: map[e.v], ..e });
        }
        Ok(LabeledGraph::from_pairs(keep_vertices.len(), pairs)?.with_model(self.model))
    }

    /// Removes the listed edge pairs, keeping all vertices.
    pub fn without_pairs(&self, remove: &[usize]) -> LabeledGraph {
        let keep: Vec<usize> = (0..self.pairs.len()).filter(|p| !remove.contains(p)).collect();
        let verts: Vec<usize> = (0..self.n).collect();
        self.subgraph(&verts, &keep).expect("vertex set unchanged")
    }

    /// The unique leafless graph obtained by repeatedly deleting degree-one vertices
    /// together with their incident edge.
    pub fn prune_completely(&self) -> LabeledGraph {
        let mut deg: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        let mut alive_v = vec![true; self.n];
        let mut alive_p = vec![true; self.pairs.len()];
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| deg[v] == 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive_v[v] || deg[v] != 1 {
                continue;
            }
            let Some(&e) = self.out[v].iter().find(|&&e| alive_p[self.dir[e].pair]) else { continue };
            let p = self.dir[e].pair;
            alive_p[p] = false;
            alive_v[v] = false;
            deg[v] = 0;
            let w = self.dir[e].head;
            if w != v {
                deg[w] -= 1;
                if deg[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
        let verts: Vec<usize> = (0..self.n).filter(|&v| alive_v[v]).collect();
        let keep: Vec<usize> = (0..self.pairs.len()).filter(|&p| alive_p[p]).collect();
        self.subgraph(&verts, &keep).expect("pruning keeps endpoints of surviving edges")
    }

    pub fn is_pruned(&self) -> bool {
        (0..self.n).all(|v| self.degree(v) != 1)
    }

    /// Identifies `keep` and `merge` (which must differ); edges between them become whole-loops.
    /// Edge pairs listed in `drop` are removed first.
    pub fn identify(&self, keep: usize, merge: usize, drop: &[usize]) -> Result<LabeledGraph> {
        if keep == merge || keep >= self.n || merge >= self.n {
            return invalid("identify needs two distinct vertices");
        }
        let remap = |x: usize| -> usize {
            let x = if x == merge { keep } else { x };
            if x > merge {
                x - 1
            } else {
                x
            }
        };
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (i, p) in self.pairs.iter().enumerate() {
            if drop.contains(&i) {
                continue;
            }
            let (u, v) = (remap(p.u), remap(p.v));
            let kind = if u == v && p.kind == LoopKind::Normal { LoopKind::Whole } else { p.kind };
            pairs.push(EdgePair { u, v, label: p.label, kind });
        }
        Ok(LabeledGraph::from_pairs(self.n - 1, pairs)?.with_model(self.model))
    }

    /// Contracts the edge pair `pair`, which must join distinct vertices.
    pub fn contract_edge(&self, pair: usize) -> Result<LabeledGraph> {
        let p = *self.pairs.get(pair).ok_or_else(|| Error::Invalid(format!("no edge {pair}")))?;
        if p.is_loop() {
            return invalid("cannot contract a loop");
        }
        let (keep, merge) = (p.u.min(p.v), p.u.max(p.v));
        self.identify(keep, merge, &[pair])
    }

    /// Reads the graph JSON format (1-based vertices).
    pub fn from_json_str(s: &str) -> Result<LabeledGraph> {
        let file: GraphFile = serde_json::from_str(s)?;
        file.into_graph()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from_graph(self)).expect("graph serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LabeledGraph> {
        LabeledGraph::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct LabelFile {
    pub kind: String,
    pub j: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct EdgeFile {
    pub u: usize,
    pub v: usize,
    pub label: LabelFile,
    #[serde(rename = "loop", default = "default_loop")]
    pub kind: LoopKind,
}

fn default_loop() -> LoopKind {
    LoopKind::Normal
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct GraphFile {
    pub n: usize,
    #[serde(default)]
    pub d: Option<u32>,
    #[serde(default)]
    pub model: Option<ModelTag>,
    pub edges: Vec<EdgeFile>,
}

impl GraphFile {
    pub(crate) fn into_graph(self) -> Result<LabeledGraph> {
        let mut pairs = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if e.u == 0 || e.v == 0 || e.u > self.n || e.v > self.n {
                return invalid(format!("edge {i}: vertices are 1-based and must lie in 1..={}", self.n));
            }
            let label = match e.label.kind.as_str() {
                "perm" => Label::Perm(e.label.j),
                "perm_inv" => Label::PermInv(e.label.j),
                "match" => Label::Match(e.label.j),
                "halfloop" => Label::HalfLoop(e.label.j),
                other => return invalid(format!("edge {i}: unknown label kind '{other}'")),
            };
            pairs.push(EdgePair { u: e.u - 1, v: e.v - 1, label, kind: e.kind });
        }
        Ok(LabeledGraph::new(self.n, pairs, self.d)?.with_model(self.model))
    }

    pub(crate) fn from_graph(g: &LabeledGraph) -> GraphFile {
        let edges = g
            .pairs
            .iter()
            .map(|p| {
                let p = if matches!(p.label, Label::PermInv(_)) { p.reversed() } else { *p };
                let (kind, j) = match p.label {
                    Label::Perm(j) => ("perm", j),
                    Label::PermInv(j) => ("perm_inv", j),
                    Label::Match(j) => ("match", j),
                    Label::HalfLoop(j) => ("halfloop", j),
                };
                EdgeFile { u: p.u + 1, v: p.v + 1, label: LabelFile { kind: kind.into(), j }, kind: p.kind }
            })
            .collect();
        GraphFile { n: g.n, d: g.d, model: g.model, edges }
    }
}

/// Small named graphs used throughout tests and examples.
pub mod named {
    use super::*;

    /// Single vertex carrying whole-loops labeled `perm(1..=m)`.
    pub fn bouquet(m: u32) -> LabeledGraph {
        let pairs = (1..=m).map(|j| EdgePair::whole(0, Label::Perm(j))).collect();
        LabeledGraph::from_pairs(1, pairs).expect("bouquet is valid")
    }

    /// Single vertex carrying half-loops labeled `halfloop(1..=m)`.
    pub fn half_bouquet(m: u32) -> LabeledGraph {
        let pairs = (1..=m).map(|j| EdgePair::half(0, Label::HalfLoop(j))).collect();
        LabeledGraph::from_pairs(1, pairs).expect("half bouquet is valid")
    }

    /// Two vertices joined by `m` parallel edges labeled `label(j)` for `j = 1..=m`.
    pub fn parallel(m: u32, label: fn(u32) -> Label) -> LabeledGraph {
        let pairs = (1..=m).map(|j| EdgePair::new(0, 1, label(j))).collect();
        LabeledGraph::from_pairs(2, pairs).expect("parallel pair is valid")
    }

    /// Cycle `0 -> 1 -> ... -> k-1 -> 0`, every edge labeled `perm(1)` in that direction.
    pub fn cycle(k: usize) -> LabeledGraph {
        if k == 1 {
            return bouquet(1);
        }
        let pairs = (0..k).map(|i| EdgePair::new(i, (i + 1) % k, Label::Perm(1))).collect();
        LabeledGraph::from_pairs(k, pairs).expect("cycle is valid")
    }

    /// Path on `k` vertices labeled `perm(1)`.
    pub fn path(k: usize) -> LabeledGraph {
        let pairs = (0..k.saturating_sub(1)).map(|i| EdgePair::new(i, i + 1, Label::Perm(1))).collect();
        LabeledGraph::from_pairs(k, pairs).expect("path is valid")
    }

    /// K_4 labeled by its three perfect matchings.
    pub fn k4() -> LabeledGraph {
        let pairs = vec![
            EdgePair::new(0, 1, Label::Match(1)),
            EdgePair::new(2, 3, Label::Match(1)),
            EdgePair::new(0, 2, Label::Match(2)),
            EdgePair::new(1, 3, Label::Match(2)),
            EdgePair::new(0, 3, Label::Match(3)),
            EdgePair::new(1, 2, Label::Match(3)),
        ];
        LabeledGraph::new(4, pairs, Some(3)).expect("K4 is valid")
    }

    /// Petersen graph: outer cycle `perm(1)`, inner pentagram `perm(2)`, spokes `match(3)`.
    pub fn petersen() -> LabeledGraph {
        let mut pairs = Vec::new();
        for i in 0..5 {
            pairs.push(EdgePair::new(i, (i + 1) % 5, Label::Perm(1)));
            pairs.push(EdgePair::new(i, i + 5, Label::Match(3)));
            pairs.push(EdgePair::new(5 + i, 5 + (i + 2) % 5, Label::Perm(2)));
        }
        LabeledGraph::from_pairs(10, pairs).expect("Petersen graph is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn whole_loop_contributes_two() {
        let g = LabeledGraph::new(1, vec![EdgePair::whole(0, Label::Perm(1))], None).unwrap();
        assert_eq!(g.adjacency()[(0, 0)], 2.0);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn half_loop_contributes_one() {
        let g = LabeledGraph::new(1, vec![EdgePair::half(0, Label::Match(1))], None).unwrap();
        assert_eq!(g.adjacency()[(0, 0)], 1.0);
        assert_eq!(g.dir_edges().len(), 1);
        assert_eq!(g.opp(0), 0);
    }

    #[test]
    fn degree_violation_rejected() {
        let r = LabeledGraph::new(2, vec![EdgePair::new(0, 1, Label::Perm(1))], Some(4));
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn half_loop_between_distinct_vertices_rejected() {
        let p = EdgePair { u: 0, v: 1, label: Label::Match(1), kind: LoopKind::Half };
        assert!(LabeledGraph::from_pairs(2, vec![p]).is_err());
    }

    #[test]
    fn opposite_edges_carry_inverse_labels() {
        let g = cycle(4);
        for e in 0..g.dir_edges().len() {
            let a = g.dir_edge(e);
            let b = g.dir_edge(g.opp(e));
            assert_eq!((a.tail, a.head), (b.head, b.tail));
            assert_eq!(a.label.inverse(), b.label);
            assert_eq!(g.opp(g.opp(e)), e);
        }
    }

    #[test]
    fn pruning_examples() {
        let p = path(3).prune_completely();
        assert_eq!((p.n(), p.pairs().len()), (1, 0));
        let c = cycle(5).prune_completely();
        assert_eq!((c.n(), c.pairs().len()), (5, 5));
        let mut pairs = cycle(3).pairs().to_vec();
        pairs.push(EdgePair::new(0, 3, Label::Perm(2)));
        let g = LabeledGraph::from_pairs(4, pairs).unwrap();
        let pruned = g.prune_completely();
        assert_eq!((pruned.n(), pruned.pairs().len()), (3, 3));
        assert!(pruned.is_pruned());
    }

    #[test]
    fn contraction_examples() {
        let g = parallel(1, Label::Perm).contract_edge(0).unwrap();
        assert_eq!((g.n(), g.pairs().len()), (1, 0));
        let g = parallel(3, Label::Perm).contract_edge(0).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.whole_loop_count(), 2);
        assert!(bouquet(1).contract_edge(0).is_err());
    }

    #[test]
    fn order_examples() {
        assert_eq!(bouquet(2).order(), 1);
        assert_eq!(cycle(6).order(), 0);
        assert_eq!(path(5).order(), -1);
    }

    #[test]
    fn json_round_trip() {
        let mut pairs = vec![EdgePair::new(1, 0, Label::PermInv(2)), EdgePair::half(2, Label::HalfLoop(1))];
        pairs.push(EdgePair::whole(0, Label::Perm(1)));
        pairs.push(EdgePair::new(1, 2, Label::Match(3)));
        let g = LabeledGraph::from_pairs(3, pairs).unwrap().with_model(Some(ModelTag::J));
        let back = LabeledGraph::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back.adjacency(), g.adjacency());
        assert_eq!(back.model(), Some(ModelTag::J));
        assert_eq!(back.pairs()[0], EdgePair::new(0, 1, Label::Perm(2)));
    }

    #[test]
    fn json_rejects_zero_based_vertices() {
        let s = r#"{"n":2,"d":null,"model":null,"edges":[{"u":0,"v":1,"label":{"kind":"perm","j":1},"loop":"normal"}]}"#;
        assert!(LabeledGraph::from_json_str(s).is_err());
    }

    #[test]
    fn k4_is_three_regular() {
        let g = k4();
        assert_eq!(g.regular_degree(), Some(3));
        assert!(g.is_connected());
    }
}
