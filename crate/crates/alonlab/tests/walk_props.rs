use alonlab::walks::{
    brute_force_expected_trace, exact_expected_trace, expected_symm, prob_walk, word_census, word_expectation, FormStats, Letter,
};
use alonlab::{ModelId, ModelTag};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn divisors(m: i64) -> i64 {
    (1..=m).filter(|k| m % k == 0).count() as i64
}

fn perm_letter() -> impl Strategy<Value = Letter> {
    (1u32..=2, any::<bool>()).prop_map(|(g, inv)| if inv { Letter::perm_inv(g) } else { Letter::perm(g) })
}

fn matching_letter() -> impl Strategy<Value = Letter> {
    (1u32..=3).prop_map(Letter::matching)
}

fn word_for(tag: ModelTag) -> BoxedStrategy<Vec<Letter>> {
    if tag.uses_permutations() {
        prop::collection::vec(perm_letter(), 1..=4).boxed()
    } else {
        prop::collection::vec(matching_letter(), 1..=4).boxed()
    }
}

fn tag_strategy() -> impl Strategy<Value = (ModelTag, usize)> {
    prop_oneof![Just((ModelTag::G, 4)), Just((ModelTag::H, 4)), Just((ModelTag::I, 4)), Just((ModelTag::J, 5))]
}

type SymmetricCase = (ModelTag, usize, Vec<Letter>, Vec<usize>, Vec<usize>);

fn symmetric_case() -> impl Strategy<Value = SymmetricCase> {
    tag_strategy().prop_flat_map(|(tag, n)| {
        word_for(tag).prop_flat_map(move |w| {
            let len = w.len() + 1;
            (Just(tag), Just(n), Just(w), prop::collection::vec(0..n, len), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
    })
}

/// Every closed vertex sequence of length `k + 1` on `0..n`.
fn closed_sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t: Vec<usize>| (0..n).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    out.into_iter().map(|mut t| {
        t.push(t[0]);
        t
    })
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn walk_probability_is_vertex_symmetric((tag, n, word, t, relabel) in symmetric_case()) {
        let moved: Vec<usize> = t.iter().map(|&x| relabel[x]).collect();
        prop_assert_eq!(prob_walk(tag, n, &word, &t).unwrap(), prob_walk(tag, n, &word, &moved).unwrap());
    }

    #[test]
    fn walk_probabilities_sum_to_word_expectation((tag, n, word) in tag_strategy().prop_flat_map(|(tag, n)| word_for(tag).prop_map(move |w| (tag, n, w)))) {
        let total = closed_sequences(n, word.len())
            .iter()
            .map(|t| prob_walk(tag, n, &word, t).unwrap())
            .fold(BigRational::zero(), |a, b| a + b);
        let d = if tag.uses_permutations() { 4 } else { 3 };
        let model = ModelId::new(tag, d, n).unwrap();
        prop_assert_eq!(word_expectation(model, &word).unwrap(), total);
    }

    #[test]
    fn two_power_words_match_the_closed_form(n in 6usize..10, m1 in 1i64..=4, m2 in 1i64..=4) {
        let mut word = vec![Letter::perm(1); m1 as usize];
        word.extend(vec![Letter::perm(2); m2 as usize]);
        let model = ModelId::new(ModelTag::G, 4, n).unwrap();
        let per_start = word_expectation(model, &word).unwrap() / BigRational::from_integer(BigInt::from(n));
        let (p1, p2, nn) = (divisors(m1), divisors(m2), n as i64);
        let expected = q(p1 * p2, nn * nn) + q((nn - p1) * (nn - p2), nn * nn * (nn - 1));
        prop_assert_eq!(per_start, expected);
    }
}

#[test]
fn single_power_words_count_divisors() {
    let n = 9;
    let model = ModelId::new(ModelTag::G, 4, n).unwrap();
    for m in 1..=8 {
        let word = vec![Letter::perm(1); m];
        assert_eq!(word_expectation(model, &word).unwrap(), q(divisors(m as i64), 1));
    }
}

#[test]
fn enumeration_matches_brute_force_on_tiny_models() {
    for (tag, d, n, kmax) in [(ModelTag::G, 4, 3, 4), (ModelTag::H, 4, 4, 4), (ModelTag::I, 3, 4, 4), (ModelTag::J, 3, 3, 4)] {
        let model = ModelId::new(tag, d, n).unwrap();
        for k in 1..=kmax {
            assert_eq!(exact_expected_trace(model, k).unwrap(), brute_force_expected_trace(model, k).unwrap(), "{tag} k={k}");
        }
    }
}

#[test]
fn normalised_symmetric_expectation_converges() {
    let stats = FormStats { v: 3, a: vec![2, 2], fixed: vec![false, false] };
    let scaled = |n: usize| {
        let e = expected_symm(ModelTag::G, &stats, n).to_f64().unwrap();
        e * (n as f64).powi(stats.e() as i32 - stats.v as i32)
    };
    let mut prev_gap = f64::INFINITY;
    for n in [25usize, 50, 100, 200, 400] {
        let (f1, f2) = (scaled(n), scaled(2 * n));
        let richardson = 2.0 * f2 - f1;
        assert!((f2 - 1.0).abs() < prev_gap);
        assert!((richardson - 1.0).abs() < (f2 - 1.0).abs());
        prev_gap = (f2 - 1.0).abs();
    }
}

#[test]
fn word_census_counts_irreducible_words() {
    for (tag, d) in [(ModelTag::G, 4u32), (ModelTag::I, 3)] {
        for k in 1..=6 {
            let census = word_census(tag, d, k, None, None).unwrap();
            let expected = d as u128 * (d as u128 - 1).pow(k as u32 - 1);
            assert_eq!(census.count, expected, "{tag} k={k}");
        }
    }
}
