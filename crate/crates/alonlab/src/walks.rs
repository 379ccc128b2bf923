//! Exact walk probabilities and expected irreducible traces in rational
//! arithmetic, with a brute-force oracle over all instances of tiny models.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::graph::ModelTag;
use crate::models::{graph_from_generators, ModelId};
use crate::par::{par_map, worker_count};
use crate::trace::trace_counts;

/// One step of a word: generator `gen` (1-based), inverted when `inv`.
/// Involution letters never carry `inv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub fn perm(gen: u32) -> Letter {
        Letter { gen, inv: false }
    }

    pub fn perm_inv(gen: u32) -> Letter {
        Letter { gen, inv: true }
    }

    pub fn matching(gen: u32) -> Letter {
        Letter { gen, inv: false }
    }

    pub fn inverse(self, involutions: bool) -> Letter {
        if involutions {
            self
        } else {
            Letter { gen: self.gen, inv: !self.inv }
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "s{}^-1", self.gen)
        } else {
            write!(f, "s{}", self.gen)
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    /// `s3` or `s3^-1`.
    fn from_str(s: &str) -> Result<Letter> {
        let s = s.trim();
        let (body, inv) = match s.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let gen = body
            .strip_prefix('s')
            .and_then(|g| g.parse::<u32>().ok())
            .filter(|&g| g >= 1)
            .ok_or_else(|| Error::Invalid(format!("cannot parse letter '{s}'")))?;
        Ok(Letter { gen, inv })
    }
}

/// Parses a comma- or space-separated word.
pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).map(str::parse).collect()
}

/// No letter is immediately followed by its inverse.
pub fn is_irreducible(word: &[Letter], involutions: bool) -> bool {
    word.windows(2).all(|w| w[1] != w[0].inverse(involutions))
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// `n (n-1) ... (n-k+1)`
pub fn falling(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| if i > n { BigInt::zero() } else { acc * big(n - i) })
}

/// Summary of the generator values a potential walk determines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormStats {
    /// Number of distinct vertices visited.
    pub v: usize,
    /// Determined values per generator.
    pub a: Vec<usize>,
    /// Per generator, whether its fixed point is determined (involution models).
    pub fixed: Vec<bool>,
}

impl FormStats {
    pub fn e(&self) -> usize {
        self.a.iter().sum()
    }

    pub fn order(&self) -> i64 {
        self.e() as i64 - self.v as i64
    }
}

/// Probability that one generator of the model agrees with `a` prescribed values.
fn generator_probability(tag: ModelTag, n: u64, a: u64, fixed: bool) -> BigRational {
    let one = BigInt::one();
    match tag {
        ModelTag::G => BigRational::new(one, falling(n, a)),
        ModelTag::H => {
            if a >= n {
                BigRational::new(one, falling(n - 1, n - 1))
            } else {
                BigRational::new(one, falling(n - 1, a))
            }
        }
        ModelTag::I => {
            let pairs = a / 2;
            let den = (0..pairs).fold(BigInt::one(), |acc, i| acc * big(n - 1 - 2 * i));
            BigRational::new(one, den)
        }
        ModelTag::J => {
            let factors = if fixed { a.div_ceil(2) } else { a / 2 };
            let den = (0..factors).fold(BigInt::one(), |acc, i| acc * big(n - 2 * i));
            BigRational::new(one, den)
        }
    }
}

/// Probability of a determined configuration: the product over generators.
pub fn config_probability(tag: ModelTag, n: usize, stats: &FormStats) -> BigRational {
    let mut p = BigRational::one();
    for (j, &a) in stats.a.iter().enumerate() {
        p *= generator_probability(tag, n as u64, a as u64, stats.fixed.get(j).copied().unwrap_or(false));
    }
    p
}

/// `n (n-1) ... (n-v+1)` times the configuration probability: the expected
/// number of potential walks of this form.
pub fn expected_symm(tag: ModelTag, stats: &FormStats, n: usize) -> BigRational {
    BigRational::from_integer(falling(n as u64, stats.v as u64)) * config_probability(tag, n, stats)
}

/// Partial generator values built up along a walk.
#[derive(Clone, Debug)]
struct Partial {
    tag: ModelTag,
    n: usize,
    fwd: Vec<Vec<usize>>,
    bwd: Vec<Vec<usize>>,
}

const UNSET: usize = usize::MAX;

impl Partial {
    fn new(tag: ModelTag, n: usize, gens: usize) -> Partial {
        Partial { tag, n, fwd: vec![vec![UNSET; n]; gens], bwd: vec![vec![UNSET; n]; gens] }
    }

    fn involutions(&self) -> bool {
        !self.tag.uses_permutations()
    }

    /// The value forced for the step `letter` from `x`, if determined.
    fn forced(&self, letter: Letter, x: usize) -> Option<usize> {
        let j = letter.gen as usize - 1;
        let y = if letter.inv { self.bwd[j][x] } else { self.fwd[j][x] };
        (y != UNSET).then_some(y)
    }

    /// Whether the step `letter` may newly take `x` to `y`.
    fn can_set(&self, letter: Letter, x: usize, y: usize) -> bool {
        let j = letter.gen as usize - 1;
        if self.involutions() {
            if self.fwd[j][x] != UNSET || self.fwd[j][y] != UNSET {
                return false;
            }
            if x == y {
                return self.tag == ModelTag::J && !self.fwd[j].iter().enumerate().any(|(z, &w)| w == z);
            }
            return true;
        }
        let (from, to) = if letter.inv { (y, x) } else { (x, y) };
        if self.fwd[j][from] != UNSET || self.bwd[j][to] != UNSET {
            return false;
        }
        if self.tag == ModelTag::H {
            // the new value would close a cycle through `to ... from -> to`
            let mut len = 1;
            let mut z = to;
            while z != from {
                z = self.fwd[j][z];
                if z == UNSET {
                    return true;
                }
                len += 1;
            }
            return len == self.n;
        }
        true
    }

    fn set(&mut self, letter: Letter, x: usize, y: usize, on: bool) {
        let j = letter.gen as usize - 1;
        if self.involutions() {
            let (a, b) = if on { (y, x) } else { (UNSET, UNSET) };
            self.fwd[j][x] = a;
            self.fwd[j][y] = b;
            return;
        }
        let (from, to) = if letter.inv { (y, x) } else { (x, y) };
        self.fwd[j][from] = if on { to } else { UNSET };
        self.bwd[j][to] = if on { from } else { UNSET };
    }

    fn stats(&self, v: usize) -> FormStats {
        let a = self.fwd.iter().map(|m| m.iter().filter(|&&y| y != UNSET).count()).collect();
        let fixed = self.fwd.iter().map(|m| self.involutions() && m.iter().enumerate().any(|(z, &w)| w == z)).collect();
        FormStats { v, a, fixed }
    }
}

fn check_letters(tag: ModelTag, d: u32, word: &[Letter]) -> Result<()> {
    let gens = if tag.uses_permutations() { d / 2 } else { d };
    for l in word {
        if l.gen == 0 || l.gen > gens {
            return invalid(format!("letter {l} is outside the {gens} generators of model {tag} with d={d}"));
        }
        if l.inv && !tag.uses_permutations() {
            return invalid(format!("letter {l}: involutions have no separate inverse"));
        }
    }
    Ok(())
}

/// Probability that the walk `t_0 -> t_1 -> ... -> t_k` along `word` is present
/// in a random graph of the model on `n` vertices (vertices 0-based).
pub fn prob_walk(tag: ModelTag, n: usize, word: &[Letter], t: &[usize]) -> Result<BigRational> {
    if t.len() != word.len() + 1 {
        return invalid("the vertex vector must be one longer than the word");
    }
    if t.iter().any(|&x| x >= n) {
        return invalid("vertex outside 0..n");
    }
    let gens = word.iter().map(|l| l.gen).max().unwrap_or(0);
    check_letters(tag, 2 * gens.max(1), word)?;
    let mut p = Partial::new(tag, n, gens as usize);
    for (i, &l) in word.iter().enumerate() {
        let (x, y) = (t[i], t[i + 1]);
        match p.forced(l, x) {
            Some(z) if z == y => {}
            Some(_) => return Ok(BigRational::zero()),
            None => {
                if !p.can_set(l, x, y) {
                    return Ok(BigRational::zero());
                }
                p.set(l, x, y, true);
            }
        }
    }
    let mut distinct = t.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(config_probability(tag, n, &p.stats(distinct.len())))
}

/// Cap on the nodes visited by the exact enumeration.
pub const EXACT_BUDGET: u64 = 200_000_000;

struct Enumerator<'a> {
    model: ModelId,
    k: usize,
    word: Option<&'a [Letter]>,
    first: Option<Letter>,
    alphabet: Vec<Letter>,
    partial: Partial,
    letters: Vec<Letter>,
    v: usize,
    visited: u64,
    sum: BigRational,
}

impl Enumerator<'_> {
    fn descend(&mut self, x: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > EXACT_BUDGET {
            return Err(Error::Budget(format!("exact enumeration exceeded {EXACT_BUDGET} nodes")));
        }
        let step = self.letters.len();
        if step == self.k {
            if x == 0 {
                self.sum += expected_symm(self.model.tag, &self.partial.stats(self.v), self.model.n);
            }
            return Ok(());
        }
        let involutions = !self.model.tag.uses_permutations();
        let choices: Vec<Letter> = match (self.word, self.first) {
            (Some(w), _) => vec![w[step]],
            (None, Some(f)) if step == 0 => vec![f],
            (None, _) => self.alphabet.iter().copied().filter(|&l| self.letters.last().is_none_or(|&p| l != p.inverse(involutions))).collect(),
        };
        for l in choices {
            self.letters.push(l);
            if let Some(y) = self.partial.forced(l, x) {
                self.descend(y)?;
            } else {
                let top = if self.v < self.model.n { self.v + 1 } else { self.v };
                for y in 0..top {
                    if !self.partial.can_set(l, x, y) {
                        continue;
                    }
                    let fresh = y == self.v;
                    if fresh {
                        self.v += 1;
                    }
                    self.partial.set(l, x, y, true);
                    let r = self.descend(y);
                    self.partial.set(l, x, y, false);
                    if fresh {
                        self.v -= 1;
                    }
                    r?;
                }
            }
            self.letters.pop();
        }
        Ok(())
    }
}

/// The model's letters: `s_j` and `s_j^-1` for permutations, `s_j` for involutions.
pub fn alphabet(tag: ModelTag, d: u32) -> Vec<Letter> {
    if tag.uses_permutations() {
        (1..=d / 2).flat_map(|j| [Letter::perm(j), Letter::perm_inv(j)]).collect()
    } else {
        (1..=d).map(Letter::matching).collect()
    }
}

fn run_enumeration(model: ModelId, k: usize, word: Option<&[Letter]>, first: Option<Letter>) -> Result<BigRational> {
    let mut e = Enumerator {
        model,
        k,
        word,
        first,
        alphabet: alphabet(model.tag, model.d),
        partial: Partial::new(model.tag, model.n, model.generators() as usize),
        letters: Vec::with_capacity(k),
        v: 1,
        visited: 0,
        sum: BigRational::zero(),
    };
    e.descend(0)?;
    Ok(e.sum)
}

/// Expected number of closed walks along `word` (summed over all start vertices).
pub fn word_expectation(model: ModelId, word: &[Letter]) -> Result<BigRational> {
    model.validate()?;
    check_letters(model.tag, model.d, word)?;
    if word.is_empty() {
        return Ok(BigRational::from_integer(big(model.n as u64)));
    }
    run_enumeration(model, word.len(), Some(word), None)
}

/// Exact `E[IrdTr(A, k)]` for the model.
pub fn exact_expected_trace(model: ModelId, k: usize) -> Result<BigRational> {
    model.validate()?;
    if k == 0 {
        return Ok(BigRational::from_integer(big(model.n as u64)));
    }
    if k > 12 || model.n > 64 {
        return Err(Error::Budget("exact enumeration supports k <= 12 and n <= 64".into()));
    }
    let letters = alphabet(model.tag, model.d);
    let parts = par_map(0..letters.len() as u64, worker_count(None), |i| run_enumeration(model, k, None, Some(letters[i as usize])));
    let mut total = BigRational::zero();
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Cap on the number of instances averaged by the brute-force oracle.
pub const BRUTE_BUDGET: u128 = 1_000_000;

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Every involution of `0..n` with no fixed point (`n` even) or exactly one (`n` odd).
pub fn all_matchings(n: usize) -> Vec<Vec<usize>> {
    fn rec(p: &mut Vec<usize>, fixed_left: bool, out: &mut Vec<Vec<usize>>) {
        let Some(x) = p.iter().position(|&y| y == UNSET) else {
            out.push(p.clone());
            return;
        };
        if fixed_left {
            p[x] = x;
            rec(p, false, out);
            p[x] = UNSET;
        }
        for y in x + 1..p.len() {
            if p[y] == UNSET {
                p[x] = y;
                p[y] = x;
                rec(p, fixed_left, out);
                p[x] = UNSET;
                p[y] = UNSET;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![UNSET; n], n % 2 == 1, &mut out);
    out
}

fn is_single_cycle(p: &[usize]) -> bool {
    let mut len = 1;
    let mut x = p[0];
    while x != 0 {
        x = p[x];
        len += 1;
    }
    len == p.len()
}

/// `E[IrdTr(A, k)]` for `k = 0..=kmax` by averaging over every instance of the model.
pub fn brute_force_expected_traces(model: ModelId, kmax: usize) -> Result<Vec<BigRational>> {
    model.validate()?;
    let choices: Vec<Vec<usize>> = match model.tag {
        ModelTag::G => all_permutations(model.n),
        ModelTag::H => all_permutations(model.n).into_iter().filter(|p| is_single_cycle(p)).collect(),
        ModelTag::I | ModelTag::J => all_matchings(model.n),
    };
    let gens = model.generators() as usize;
    let total = (choices.len() as u128).checked_pow(gens as u32).unwrap_or(u128::MAX);
    if total > BRUTE_BUDGET {
        return Err(Error::Budget(format!("{total} instances exceed the brute-force budget of {BRUTE_BUDGET}")));
    }
    let mut sums = vec![0u128; kmax + 1];
    let mut idx = vec![0usize; gens];
    loop {
        let tuple: Vec<Vec<usize>> = idx.iter().map(|&i| choices[i].clone()).collect();
        let g = graph_from_generators(model, &tuple)?;
        let counts = trace_counts(&g, kmax)?;
        for (s, c) in sums.iter_mut().zip(&counts.irred) {
            *s += c;
        }
        let mut pos = 0;
        loop {
            if pos == gens {
                let den = BigInt::from(total);
                return Ok(sums.into_iter().map(|s| BigRational::new(BigInt::from(s), den.clone())).collect());
            }
            idx[pos] += 1;
            if idx[pos] < choices.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn brute_force_expected_trace(model: ModelId, k: usize) -> Result<BigRational> {
    Ok(brute_force_expected_traces(model, k)?.pop().expect("kmax + 1 entries"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordCensus {
    pub count: u128,
    /// Per generator, the total number of its occurrences over the counted words.
    pub generator_moments: Vec<u128>,
}

/// Irreducible words of length `k` over the model's alphabet, optionally
/// restricted to a first and a last letter.
pub fn word_census(tag: ModelTag, d: u32, k: usize, start: Option<Letter>, end: Option<Letter>) -> Result<WordCensus> {
    if k == 0 || k > 12 {
        return invalid("word census needs 1 <= k <= 12");
    }
    let letters = alphabet(tag, d);
    for l in start.iter().chain(end.iter()) {
        if !letters.contains(l) {
            return invalid(format!("letter {l} is not in the alphabet"));
        }
    }
    let involutions = !tag.uses_permutations();
    let gens = if involutions { d } else { d / 2 } as usize;
    // count[l] and moment[l][j]: words ending in letter l, and their generator totals
    let mut count: Vec<u128> = letters.iter().map(|&l| u128::from(start.is_none_or(|s| s == l))).collect();
    let mut moment: Vec<Vec<u128>> =
        letters.iter().zip(&count).map(|(&l, &c)| (0..gens).map(|j| if j + 1 == l.gen as usize { c } else { 0 }).collect()).collect();
    for _ in 1..k {
        let mut nc = vec![0u128; letters.len()];
        let mut nm = vec![vec![0u128; gens]; letters.len()];
        for (b, &lb) in letters.iter().enumerate() {
            for (a, &la) in letters.iter().enumerate() {
                if lb == la.inverse(involutions) || count[a] == 0 {
                    continue;
                }
                nc[b] += count[a];
                for j in 0..gens {
                    nm[b][j] += moment[a][j];
                }
                nm[b][lb.gen as usize - 1] += count[a];
            }
        }
        count = nc;
        moment = nm;
    }
    let mut out = WordCensus { count: 0, generator_moments: vec![0; gens] };
    for (a, &l) in letters.iter().enumerate() {
        if end.is_none_or(|e| e == l) {
            out.count += count[a];
            for j in 0..gens {
                out.generator_moments[j] += moment[a][j];
            }
        }
    }
    Ok(out)
}

/// One row of the oracle report.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub model: ModelTag,
    pub n: usize,
    pub d: u32,
    pub k: usize,
    pub method: String,
    pub value: BigRational,
}

pub fn oracle_csv(rows: &[OracleRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "n", "d", "k", "method", "value_num", "value_den"])?;
    for r in rows {
        w.write_record([
            r.model.as_str().to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            r.method.clone(),
            r.value.numer().to_string(),
            r.value.denom().to_string(),
        ])?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).map_err(|e| Error::Invalid(e.to_string()))
}
