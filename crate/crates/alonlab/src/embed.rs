//! Label-preserving inclusions of a small connected graph into a host graph.

use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::graph::LabeledGraph;

#[derive(Clone, Copy, Debug)]
struct Step {
    /// directed edge of the pattern, oriented away from an already placed vertex
    edge: usize,
    tail: usize,
    head: usize,
}

/// Precomputed traversal of a connected pattern graph.
#[derive(Clone, Debug)]
pub struct Matcher<'a> {
    pattern: &'a LabeledGraph,
    steps: Vec<Step>,
}

/// One inclusion: images of the pattern's vertices and of its directed edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub vertices: Vec<usize>,
    pub dir_edges: Vec<usize>,
}

struct Search<'g> {
    host: &'g LabeledGraph,
    allowed: Option<&'g [bool]>,
    vmap: Vec<usize>,
    vused: Vec<bool>,
    emap: Vec<usize>,
    pused: Vec<bool>,
}

impl<'a> Matcher<'a> {
    pub fn new(pattern: &'a LabeledGraph) -> Result<Matcher<'a>> {
        if pattern.n() == 0 {
            return invalid("pattern has no vertices");
        }
        if !pattern.is_connected() {
            return invalid("pattern must be connected");
        }
        let mut placed = vec![false; pattern.n()];
        let mut done = vec![false; pattern.pairs().len()];
        let mut steps = Vec::with_capacity(pattern.pairs().len());
        placed[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for &e in pattern.out_edges(a) {
                let de = pattern.dir_edge(e);
                if done[de.pair] {
                    continue;
                }
                done[de.pair] = true;
                steps.push(Step { edge: e, tail: a, head: de.head });
                if !placed[de.head] {
                    placed[de.head] = true;
                    queue.push_back(de.head);
                }
            }
        }
        Ok(Matcher { pattern, steps })
    }

    pub fn pattern(&self) -> &LabeledGraph {
        self.pattern
    }

    fn search<'g>(&self, host: &'g LabeledGraph, allowed: Option<&'g [bool]>) -> Search<'g> {
        Search {
            host,
            allowed,
            vmap: vec![usize::MAX; self.pattern.n()],
            vused: vec![false; host.n()],
            emap: vec![usize::MAX; self.pattern.dir_edges().len()],
            pused: vec![false; host.pairs().len()],
        }
    }

    /// Calls `visit` on every inclusion whose first pattern vertex maps to one of
    /// `anchors`, using only host edge pairs flagged in `allowed` (all when `None`).
    /// `visit` returns `false` to stop the search early.
    pub fn for_each(
        &self,
        host: &LabeledGraph,
        anchors: &[usize],
        allowed: Option<&[bool]>,
        visit: &mut dyn FnMut(&Embedding) -> bool,
    ) {
        let mut s = self.search(host, allowed);
        for &x in anchors {
            s.vmap[0] = x;
            s.vused[x] = true;
            let go_on = self.extend(&mut s, 0, visit);
            s.vused[x] = false;
            s.vmap[0] = usize::MAX;
            if !go_on {
                return;
            }
        }
    }

    fn extend(&self, s: &mut Search<'_>, depth: usize, visit: &mut dyn FnMut(&Embedding) -> bool) -> bool {
        if depth == self.steps.len() {
            let emb = Embedding { vertices: s.vmap.clone(), dir_edges: s.emap.clone() };
            return visit(&emb);
        }
        let step = self.steps[depth];
        let pe = self.pattern.dir_edge(step.edge);
        let pkind = self.pattern.pairs()[pe.pair].kind;
        let from = s.vmap[step.tail];
        let host = s.host;
        for &he in host.out_edges(from) {
            let hd = host.dir_edge(he);
            if hd.label != pe.label || s.pused[hd.pair] || host.pairs()[hd.pair].kind != pkind {
                continue;
            }
            if let Some(allowed) = s.allowed {
                if !allowed[hd.pair] {
                    continue;
                }
            }
            let target = s.vmap[step.head];
            let fresh = target == usize::MAX;
            if fresh {
                if s.vused[hd.head] {
                    continue;
                }
            } else if target != hd.head {
                continue;
            }
            if fresh {
                s.vmap[step.head] = hd.head;
                s.vused[hd.head] = true;
            }
            s.pused[hd.pair] = true;
            s.emap[step.edge] = he;
            let opp_p = self.pattern.opp(step.edge);
            if opp_p != step.edge {
                s.emap[opp_p] = host.opp(he);
            }
            let go_on = self.extend(s, depth + 1, visit);
            s.pused[hd.pair] = false;
            s.emap[step.edge] = usize::MAX;
            if opp_p != step.edge {
                s.emap[opp_p] = usize::MAX;
            }
            if fresh {
                s.vused[hd.head] = false;
                s.vmap[step.head] = usize::MAX;
            }
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Number of label-preserving inclusions into `host`.
    pub fn count(&self, host: &LabeledGraph) -> u64 {
        let anchors: Vec<usize> = (0..host.n()).collect();
        let mut c = 0u64;
        self.for_each(host, &anchors, None, &mut |_| {
            c += 1;
            true
        });
        c
    }

    /// Whether some inclusion uses only allowed host edges and starts at one of `anchors`.
    pub fn exists(&self, host: &LabeledGraph, anchors: &[usize], allowed: Option<&[bool]>) -> bool {
        let mut found = false;
        self.for_each(host, anchors, allowed, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Some inclusion, if any.
    pub fn find(&self, host: &LabeledGraph) -> Option<Embedding> {
        let anchors: Vec<usize> = (0..host.n()).collect();
        let mut out = None;
        self.for_each(host, &anchors, None, &mut |e| {
            out = Some(e.clone());
            false
        });
        out
    }
}
