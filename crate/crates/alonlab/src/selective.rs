//! Selective traces: irreducible closed walks none of whose short subpaths
//! trace out a listed tangle.

use crate::embed::Matcher;
use crate::error::{invalid, Error, Result};
use crate::graph::LabeledGraph;
use crate::nonbacktracking::NonBacktrackingGraph;

/// Default cap on the number of walk prefixes explored.
pub const DEFAULT_SELECTIVE_BUDGET: u64 = 2_000_000_000;

/// Counts irreducible closed walks of length `k` such that no contiguous
/// subpath of at most `s` steps traverses a subgraph containing one of `tangles`.
pub fn selective_trace(g: &LabeledGraph, k: usize, s: usize, tangles: &[LabeledGraph]) -> Result<u128> {
    selective_trace_with_budget(g, k, s, tangles, DEFAULT_SELECTIVE_BUDGET)
}

pub fn selective_trace_with_budget(g: &LabeledGraph, k: usize, s: usize, tangles: &[LabeledGraph], budget: u64) -> Result<u128> {
    if k == 0 || s == 0 {
        return invalid("k and s must be at least 1");
    }
    let matchers = tangles.iter().map(Matcher::new).collect::<Result<Vec<_>>>()?;
    let nb = NonBacktrackingGraph::new(g);
    let dist: Vec<Vec<usize>> = (0..g.n()).map(|v| g.distances_from(v)).collect();
    let mut ctx = Walker {
        g,
        nb: &nb,
        k,
        s,
        matchers: &matchers,
        dist: &dist,
        steps: Vec::with_capacity(k),
        allowed: vec![false; g.pairs().len()],
        visited: 0,
        budget,
        count: 0,
    };
    for e0 in 0..g.dir_edges().len() {
        ctx.steps.push(e0);
        ctx.descend()?;
        ctx.steps.pop();
    }
    Ok(ctx.count)
}

struct Walker<'a> {
    g: &'a LabeledGraph,
    nb: &'a NonBacktrackingGraph,
    k: usize,
    s: usize,
    matchers: &'a [Matcher<'a>],
    dist: &'a [Vec<usize>],
    steps: Vec<usize>,
    allowed: Vec<bool>,
    visited: u64,
    budget: u64,
    count: u128,
}

impl Walker<'_> {
    fn descend(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Budget(format!("selective trace explored more than {} walk prefixes", self.budget)));
        }
        let start = self.g.dir_edge(self.steps[0]).tail;
        let last = *self.steps.last().expect("nonempty walk");
        let here = self.g.dir_edge(last).head;
        let remaining = self.k - self.steps.len();
        if self.dist[here][start] > remaining {
            return Ok(());
        }
        if self.window_hits() {
            return Ok(());
        }
        if remaining == 0 {
            if here == start {
                self.count += 1;
            }
            return Ok(());
        }
        for i in 0..self.nb.successors(last).len() {
            let next = self.nb.successors(last)[i];
            self.steps.push(next);
            let r = self.descend();
            self.steps.pop();
            r?;
        }
        Ok(())
    }

    /// Whether the trailing window ending at the newest step contains a tangle.
    /// Shorter windows ending here are subsets, and earlier windows were checked
    /// when they were newest.
    fn window_hits(&mut self) -> bool {
        let from = self.steps.len().saturating_sub(self.s);
        let window = &self.steps[from..];
        let mut anchors: Vec<usize> = Vec::with_capacity(2 * window.len());
        let mut distinct = 0;
        for &e in window {
            let de = self.g.dir_edge(e);
            if !self.allowed[de.pair] {
                self.allowed[de.pair] = true;
                distinct += 1;
            }
            anchors.push(de.tail);
            anchors.push(de.head);
        }
        anchors.sort_unstable();
        anchors.dedup();
        let hit = self.matchers.iter().any(|m| m.pattern().pairs().len() <= distinct && m.exists(self.g, &anchors, Some(&self.allowed)));
        for &e in window {
            self.allowed[self.g.dir_edge(e).pair] = false;
        }
        hit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;
    use crate::graph::{EdgePair, Label};
    use crate::trace::irred_trace;

    fn k4_triangle() -> LabeledGraph {
        // vertices 0,1,2 of K4 with K4's labels
        LabeledGraph::from_pairs(
            3,
            vec![EdgePair::new(0, 1, Label::Match(1)), EdgePair::new(0, 2, Label::Match(2)), EdgePair::new(1, 2, Label::Match(3))],
        )
        .unwrap()
    }

    #[test]
    fn k4_triangles_are_all_excluded() {
        assert_eq!(selective_trace(&k4(), 3, 3, &[k4_triangle()]).unwrap(), 0);
    }

    #[test]
    fn bouquet_window() {
        assert_eq!(selective_trace(&bouquet(2), 2, 2, &[bouquet(2)]).unwrap(), 4);
    }

    #[test]
    fn vacuous_tangles() {
        let absent = parallel(3, Label::Match);
        for k in 1..7 {
            assert_eq!(selective_trace(&k4(), k, 3, &[absent.clone()]).unwrap(), irred_trace(&k4(), k).unwrap());
        }
    }
}
