//! Seeded samplers for the four random regular graph models.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::{EdgePair, Label, LabeledGraph, ModelTag};

/// A model together with its degree and vertex count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelId {
    pub tag: ModelTag,
    pub d: u32,
    pub n: usize,
}

impl ModelId {
    pub fn new(tag: ModelTag, d: u32, n: usize) -> Result<ModelId> {
        let m = ModelId { tag, d, n };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("n must be positive");
        }
        match self.tag {
            ModelTag::G | ModelTag::H => {
                if self.d < 4 || self.d % 2 != 0 {
                    return invalid(format!("model {} needs even d >= 4, got {}", self.tag, self.d));
                }
            }
            ModelTag::I => {
                if self.d < 3 {
                    return invalid("model I needs d >= 3");
                }
                if self.n % 2 != 0 {
                    return invalid(format!("model I needs even n, got {}", self.n));
                }
            }
            ModelTag::J => {
                if self.d < 3 {
                    return invalid("model J needs d >= 3");
                }
                if self.n % 2 != 1 {
                    return invalid(format!("model J needs odd n, got {}", self.n));
                }
            }
        }
        Ok(())
    }

    /// Number of generators: `d/2` permutations for G and H, `d` involutions for I and J.
    pub fn generators(&self) -> u32 {
        if self.tag.uses_permutations() {
            self.d / 2
        } else {
            self.d
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for sample `index` of a campaign rooted at `root`.
pub fn stream_rng(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(root ^ index))
}

pub fn uniform_permutation<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A uniformly random permutation whose cycle decomposition is a single `n`-cycle.
pub fn uniform_single_cycle<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order[1..].shuffle(rng);
    let mut p = vec![0; n];
    for i in 0..n {
        p[order[i]] = order[(i + 1) % n];
    }
    p
}

/// A uniformly random involution on `0..n` with at most one fixed point
/// (exactly one when `n` is odd).
pub fn uniform_matching<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut p = vec![0; n];
    for c in order.chunks(2) {
        match *c {
            [a, b] => {
                p[a] = b;
                p[b] = a;
            }
            [a] => p[a] = a,
            _ => unreachable!(),
        }
    }
    p
}

/// Builds the graph of a tuple of generators (permutations for G/H, involutions for I/J).
pub fn graph_from_generators(model: ModelId, gens: &[Vec<usize>]) -> Result<LabeledGraph> {
    let mut pairs = Vec::with_capacity(model.n * model.d as usize / 2 + model.d as usize);
    for (idx, p) in gens.iter().enumerate() {
        let j = idx as u32 + 1;
        for x in 0..model.n {
            let y = p[x];
            if model.tag.uses_permutations() {
                if x == y {
                    pairs.push(EdgePair::whole(x, Label::Perm(j)));
                } else {
                    pairs.push(EdgePair::new(x, y, Label::Perm(j)));
                }
            } else if x == y {
                pairs.push(EdgePair::half(x, Label::HalfLoop(j)));
            } else if x < y {
                pairs.push(EdgePair::new(x, y, Label::Match(j)));
            }
        }
    }
    Ok(LabeledGraph::new(model.n, pairs, Some(model.d))?.with_model(Some(model.tag)))
}

fn draw_generators<R: rand::Rng + ?Sized>(model: ModelId, rng: &mut R) -> Vec<Vec<usize>> {
    (0..model.generators())
        .map(|_| match model.tag {
            ModelTag::G => uniform_permutation(model.n, rng),
            ModelTag::H => uniform_single_cycle(model.n, rng),
            ModelTag::I | ModelTag::J => uniform_matching(model.n, rng),
        })
        .collect()
}

/// Sample `index` of the campaign with root seed `seed`.
pub fn sample(model: ModelId, seed: u64, index: u64) -> Result<LabeledGraph> {
    model.validate()?;
    let mut rng = stream_rng(seed, index);
    let gens = draw_generators(model, &mut rng);
    graph_from_generators(model, &gens)
}

/// Prescribed generator values: `maps[j]` lists `(x, y)` meaning generator `j+1`
/// sends `x` to `y` (for involutions `x == y` marks the fixed point).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    pub maps: Vec<Vec<(usize, usize)>>,
}

/// Samples uniformly among the model's graphs agreeing with `partial`.
pub fn sample_completion(model: ModelId, partial: &PartialAssignment, seed: u64, index: u64) -> Result<LabeledGraph> {
    model.validate()?;
    let mut rng = stream_rng(seed, index);
    let mut gens = Vec::with_capacity(model.generators() as usize);
    for j in 0..model.generators() as usize {
        let fixed: &[(usize, usize)] = partial.maps.get(j).map(Vec::as_slice).unwrap_or(&[]);
        gens.push(complete_generator(model, fixed, &mut rng)?);
    }
    graph_from_generators(model, &gens)
}

fn complete_generator<R: rand::Rng + ?Sized>(model: ModelId, fixed: &[(usize, usize)], rng: &mut R) -> Result<Vec<usize>> {
    let n = model.n;
    const UNSET: usize = usize::MAX;
    let mut p = vec![UNSET; n];
    let mut inv = vec![UNSET; n];
    for &(x, y) in fixed {
        if x >= n || y >= n {
            return invalid("prescribed value outside the vertex range");
        }
        let clash = (p[x] != UNSET && p[x] != y) || (inv[y] != UNSET && inv[y] != x);
        if clash {
            return invalid("prescribed values are not a partial injection");
        }
        p[x] = y;
        inv[y] = x;
        if !model.tag.uses_permutations() {
            if (p[y] != UNSET && p[y] != x) || (inv[x] != UNSET && inv[x] != y) {
                return invalid("prescribed values are not a partial matching");
            }
            p[y] = x;
            inv[x] = y;
        }
    }
    match model.tag {
        ModelTag::G => {
            let dom: Vec<usize> = (0..n).filter(|&x| p[x] == UNSET).collect();
            let mut ran: Vec<usize> = (0..n).filter(|&y| inv[y] == UNSET).collect();
            ran.shuffle(rng);
            for (x, y) in dom.into_iter().zip(ran) {
                p[x] = y;
            }
        }
        ModelTag::H => {
            // chain the prescribed paths into one cycle in a uniformly random cyclic order
            let mut segments: Vec<(usize, usize)> = Vec::new();
            for s in (0..n).filter(|&x| inv[x] == UNSET) {
                let mut end = s;
                while p[end] != UNSET {
                    end = p[end];
                }
                segments.push((s, end));
            }
            let covered: usize = segments.iter().map(|&(s, _)| chain_len(&p, s)).sum();
            if covered != n {
                if segments.is_empty() && fixed.len() == n {
                    let len = chain_cycle_len(&p, 0);
                    if len == n {
                        return Ok(p);
                    }
                }
                return invalid("prescribed values contain a cycle shorter than n");
            }
            let first = segments.iter().position(|&(s, _)| chain_contains(&p, s, 0)).unwrap_or(0);
            segments.swap(0, first);
            segments[1..].shuffle(rng);
            for i in 0..segments.len() {
                let end = segments[i].1;
                let next = segments[(i + 1) % segments.len()].0;
                p[end] = next;
            }
        }
        ModelTag::I | ModelTag::J => {
            let fixed_points = (0..n).filter(|&x| p[x] == x).count();
            if fixed_points > 1 || (model.tag == ModelTag::I && fixed_points > 0) {
                return invalid("too many fixed points for the matching model");
            }
            let mut free: Vec<usize> = (0..n).filter(|&x| p[x] == UNSET).collect();
            if model.tag == ModelTag::J && fixed_points == 1 && free.len() % 2 == 1 {
                return invalid("inconsistent near-perfect matching");
            }
            free.shuffle(rng);
            for c in free.chunks(2) {
                match *c {
                    [a, b] => {
                        p[a] = b;
                        p[b] = a;
                    }
                    [a] => p[a] = a,
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(p)
}

fn chain_len(p: &[usize], s: usize) -> usize {
    let mut len = 1;
    let mut x = s;
    while p[x] != usize::MAX {
        x = p[x];
        len += 1;
    }
    len
}

fn chain_contains(p: &[usize], s: usize, target: usize) -> bool {
    let mut x = s;
    loop {
        if x == target {
            return true;
        }
        if p[x] == usize::MAX {
            return false;
        }
        x = p[x];
    }
}

fn chain_cycle_len(p: &[usize], s: usize) -> usize {
    let mut len = 1;
    let mut x = p[s];
    while x != s {
        x = p[x];
        len += 1;
    }
    len
}
