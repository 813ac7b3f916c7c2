//! Simple partition matroids: independence testing, maximal-set enumeration,
//! and an exhaustive axiom checker for small ground sets.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::setfn::{iter_mask, GroundSet, Mask};

/// Budget for maximal-set enumeration (product of block sizes).
pub const MAX_MAXIMAL_SETS: u64 = 1_000_000;

/// Independence system with at most one element per block.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    ground: Arc<GroundSet>,
    /// Per block, a mask of its members.
    block_masks: Vec<Mask>,
}

impl PartitionMatroid {
    /// Derives the matroid from the ground set's block labels. `GroundSet`
    /// construction already guarantees non-empty, disjoint, exhaustive blocks.
    pub fn new(ground: Arc<GroundSet>) -> Self {
        let block_masks = (0..ground.n_blocks())
            .map(|b| ground.block_members(b).iter().fold(0u64, |m, &i| m | (1 << i)))
            .collect();
        Self { ground, block_masks }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Number of blocks N (= rank of the matroid = team size).
    pub fn n_blocks(&self) -> usize {
        self.block_masks.len()
    }

    pub fn block_mask(&self, block0: usize) -> Mask {
        self.block_masks[block0]
    }

    /// |S ∩ X_i| ≤ 1 for every block i.
    pub fn is_independent(&self, subset: Mask) -> Result<bool> {
        self.ground.check_mask(subset)?;
        Ok(self.block_masks.iter().all(|&bm| (subset & bm).count_ones() <= 1))
    }

    /// Number of maximal independent sets, Π_i |X_i|.
    pub fn maximal_count(&self) -> u64 {
        self.block_masks.iter().fold(1u64, |acc, bm| acc.saturating_mul(bm.count_ones() as u64))
    }

    /// Streams every maximal independent set (one element per block) as a
    /// vector of element indices in block order. Sets arrive in
    /// lexicographic index order, which is id order within each block.
    pub fn maximal_sets(&self) -> Result<MaximalSets<'_>> {
        let count = self.maximal_count();
        if count > MAX_MAXIMAL_SETS {
            return Err(Error::Capacity(format!(
                "{count} maximal sets exceed the enumeration budget of {MAX_MAXIMAL_SETS}"
            )));
        }
        Ok(MaximalSets { matroid: self, counter: vec![0; self.n_blocks()], done: false })
    }
}

/// Streaming Cartesian product over blocks; never materializes all sets.
pub struct MaximalSets<'a> {
    matroid: &'a PartitionMatroid,
    counter: Vec<usize>,
    done: bool,
}

impl Iterator for MaximalSets<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let ground = self.matroid.ground();
        let current: Vec<usize> = self
            .counter
            .iter()
            .enumerate()
            .map(|(b, &j)| ground.block_members(b)[j])
            .collect();
        // odometer increment
        let mut b = self.counter.len();
        loop {
            if b == 0 {
                self.done = true;
                break;
            }
            b -= 1;
            self.counter[b] += 1;
            if self.counter[b] < ground.block_members(b).len() {
                break;
            }
            self.counter[b] = 0;
        }
        Some(current)
    }
}

/// Converts a block-ordered selection to a subset mask.
pub fn selection_mask(selection: &[usize]) -> Mask {
    selection.iter().fold(0u64, |m, &i| m | (1 << i))
}

/// Verifies the two matroid axioms on an explicit independence family over a
/// ground set of `n` elements: (i) downward closure, (ii) exchange.
///
/// Exposed separately so tests can feed hand-built non-matroid families.
pub fn axioms_hold_for_family(n: usize, family: &[Mask]) -> bool {
    if n > 20 {
        return false;
    }
    let member: std::collections::HashSet<Mask> = family.iter().copied().collect();
    if !member.contains(&0) {
        return false;
    }
    for &x in family {
        // downward closure: removing any one element stays independent
        for v in iter_mask(x) {
            if !member.contains(&(x & !(1u64 << v))) {
                return false;
            }
        }
    }
    for &x in family {
        for &z in family {
            if x.count_ones() < z.count_ones() {
                let can_extend = iter_mask(z & !x).any(|v| member.contains(&(x | (1 << v))));
                if !can_extend {
                    return false;
                }
            }
        }
    }
    true
}

/// Enumerates the full independence family of `m` and checks the axioms.
/// True for every partition matroid; the point is exercising the checker.
pub fn matroid_axiom_check(m: &PartitionMatroid) -> Result<bool> {
    let n = m.ground().len();
    if n > 15 {
        return Err(Error::Capacity(format!("axiom check limited to 15 elements, got {n}")));
    }
    let mut family = Vec::new();
    for s in 0..(1u64 << n) {
        if m.is_independent(s)? {
            family.push(s);
        }
    }
    Ok(axioms_hold_for_family(n, &family))
}
