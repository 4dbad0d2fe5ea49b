//! Fixed inputs for the benchmarks, drawn from seeded streams so every run
//! measures the same work.

use protolife_core::arms::{random_multiset, random_ruleset, ArmsRule, RulesetParams, SymbolMultiset};
use protolife_core::lambda::{normal_form, random_term, LambdaTerm, RandomTermParams, ReductionBudget};
use protolife_core::seed::rng_from_seed;
use protolife_core::tile::{random_polyomino, Tile};
use rand::Rng;

pub const SEED: u64 = 7;

/// Closed random terms of depth up to 6.
pub fn lambda_terms(n: usize) -> Vec<LambdaTerm> {
    let mut rng = rng_from_seed(SEED);
    let params = RandomTermParams {
        max_depth: 6,
        ..RandomTermParams::default()
    };
    (0..n)
        .map(|_| random_term(&mut rng, &params).expect("valid params"))
        .collect()
}

/// Budget for benchmark reductions, small enough that divergent pairs
/// stay cheap.
pub fn bench_budget() -> ReductionBudget {
    ReductionBudget::new(1_000, 10_000).expect("nonzero budget")
}

/// Normal forms of random terms, skipping those that exhaust the budget.
pub fn normal_terms(n: usize) -> Vec<LambdaTerm> {
    lambda_terms(4 * n)
        .into_iter()
        .map(|t| normal_form(&t, bench_budget()))
        .filter(|r| !r.exhausted)
        .map(|r| r.term)
        .take(n)
        .collect()
}

/// Bytes with long repeats mixed into noise.
pub fn mixed_bytes(len: usize) -> Vec<u8> {
    let mut rng = rng_from_seed(SEED);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        if rng.gen_bool(0.5) && out.len() > 64 {
            let start = rng.gen_range(0..out.len() - 32);
            let n = rng.gen_range(4..32);
            out.extend_from_within(start..start + n);
        } else {
            out.push(rng.gen());
        }
    }
    out.truncate(len);
    out
}

/// A random ruleset at order parameter `rho` with a starting multiset.
pub fn arms_system(rho: f64) -> (Vec<ArmsRule>, SymbolMultiset) {
    let mut rng = rng_from_seed(SEED);
    let params = RulesetParams {
        n_rules: 8,
        alphabet_size: 3,
        max_side_size: 3,
        target_order_parameter: rho,
    };
    let rules = random_ruleset(&mut rng, &params).expect("valid params");
    (rules, random_multiset(&mut rng, 3, 6))
}

/// Pairs of random polyominoes with the given areas.
pub fn tile_pairs(n: usize, max_area: usize) -> Vec<(Tile, Tile)> {
    let mut rng = rng_from_seed(SEED);
    (0..n)
        .map(|_| {
            let (a, b) = (rng.gen_range(1..=max_area), rng.gen_range(1..=max_area));
            (random_polyomino(&mut rng, a), random_polyomino(&mut rng, b))
        })
        .collect()
}
