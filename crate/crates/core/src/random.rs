//! Seeded instance generators for the randomized certification suites.
//!
//! Every generated value is a dyadic rational (multiples of 2^-20 or 1/16),
//! so sums of table entries and marginal comparisons are exact in f64. That
//! keeps tie-breaking, cache transparency and the submodularity iff checks
//! free of float ambiguity.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graphs::CommGraph;
use crate::matroid::PartitionMatroid;
use crate::setfn::{iter_mask, GroundElement, GroundSet, SetFunctionOracle};

/// Counter-based derivation: one master seed, one stream per instance.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0..=(1u64 << 20)) as f64 / (1u64 << 20) as f64
}

/// Random block sizes: `n_blocks` blocks of 1..=max_block_size elements.
pub fn random_blocks(rng: &mut ChaCha8Rng, max_blocks: usize, max_block_size: usize) -> Vec<usize> {
    let n = rng.random_range(1..=max_blocks);
    (0..n).map(|_| rng.random_range(1..=max_block_size)).collect()
}

/// Abstract ground set with the given block sizes.
pub fn ground_with_blocks(blocks: &[usize]) -> Arc<GroundSet> {
    let mut elements = Vec::new();
    for (b, &size) in blocks.iter().enumerate() {
        for j in 0..size {
            elements.push(GroundElement {
                id: format!("b{}e{}", b + 1, j),
                block: b + 1,
                path: vec![],
            });
        }
    }
    Arc::new(GroundSet::new(elements).unwrap())
}

/// Random normalized monotone tabular oracle: values grow along the subset
/// lattice by non-negative dyadic increments, f(M) = max_v f(M\v) + u(M).
/// Generally neither submodular nor supermodular.
pub fn random_monotone_table(rng: &mut ChaCha8Rng, ground: Arc<GroundSet>) -> SetFunctionOracle {
    let n = ground.len();
    let size = 1usize << n;
    let mut table = vec![0.0f64; size];
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by_key(|m| m.count_ones());
    for &m in order.iter().skip(1) {
        let base = iter_mask(m as u64)
            .map(|v| table[m & !(1 << v)])
            .fold(0.0f64, f64::max);
        table[m] = base + dyadic(rng);
    }
    SetFunctionOracle::from_table(ground, table).unwrap()
}

/// Random weighted-coverage oracle: element i covers a non-empty random
/// subset of a universe with positive dyadic weights. Normalized, monotone
/// and submodular by construction; Δ(v|∅) > 0 for every v.
pub fn random_coverage_oracle(
    rng: &mut ChaCha8Rng,
    ground: Arc<GroundSet>,
    universe: usize,
) -> SetFunctionOracle {
    let n = ground.len();
    let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(1..=32) as f64 / 16.0).collect();
    let covers: Vec<u32> = (0..n)
        .map(|_| {
            let mut c = 0u32;
            for cell in 0..universe {
                if rng.random_bool(0.4) {
                    c |= 1 << cell;
                }
            }
            if c == 0 {
                c = 1 << rng.random_range(0..universe);
            }
            c
        })
        .collect();
    SetFunctionOracle::from_fn(
        ground,
        move |m| {
            let mut cells = 0u32;
            for i in iter_mask(m) {
                cells |= covers[i];
            }
            (0..universe).map(|c| if cells & (1 << c) != 0 { weights[c] } else { 0.0 }).sum()
        },
        true,
    )
}

/// Random DAG over n agents: each pair (j < i) is an edge with prob 1/2.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> CommGraph {
    let nbrs = (0..n)
        .map(|i| (0..i).filter(|_| rng.random_bool(0.5)).collect())
        .collect();
    CommGraph::new(nbrs).unwrap()
}

/// Random partition matroid over a fresh abstract ground set.
pub fn random_partition_matroid(
    rng: &mut ChaCha8Rng,
    max_blocks: usize,
    max_block_size: usize,
) -> PartitionMatroid {
    let blocks = random_blocks(rng, max_blocks, max_block_size);
    PartitionMatroid::new(ground_with_blocks(&blocks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_per_seed_and_stream() {
        let ground = ground_with_blocks(&[2, 2]);
        let a = random_monotone_table(&mut rng_for(7, 3), Arc::clone(&ground));
        let b = random_monotone_table(&mut rng_for(7, 3), Arc::clone(&ground));
        let c = random_monotone_table(&mut rng_for(7, 4), ground);
        let mut saw_difference = false;
        for m in 0..16u64 {
            assert_eq!(a.evaluate(m).unwrap().to_bits(), b.evaluate(m).unwrap().to_bits());
            if a.evaluate(m).unwrap() != c.evaluate(m).unwrap() {
                saw_difference = true;
            }
        }
        assert!(saw_difference);
    }

    #[test]
    fn monotone_tables_validate() {
        for stream in 0..25 {
            let mut rng = rng_for(11, stream);
            let blocks = random_blocks(&mut rng, 4, 3);
            let oracle = random_monotone_table(&mut rng, ground_with_blocks(&blocks));
            oracle.validate_normalized_monotone().unwrap();
        }
    }

    #[test]
    fn coverage_oracles_are_submodular() {
        for stream in 0..25 {
            let mut rng = rng_for(13, stream);
            let blocks = random_blocks(&mut rng, 3, 3);
            let oracle = random_coverage_oracle(&mut rng, ground_with_blocks(&blocks), 6);
            oracle.validate_normalized_monotone().unwrap();
            assert!(oracle.is_submodular().unwrap());
        }
    }

    #[test]
    fn random_matroids_satisfy_the_axioms() {
        for stream in 0..100 {
            let mut rng = rng_for(17, stream);
            let m = random_partition_matroid(&mut rng, 4, 3);
            assert!(m.ground().len() <= 12);
            assert!(crate::matroid::matroid_axiom_check(&m).unwrap());
        }
    }
}
