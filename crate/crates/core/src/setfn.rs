//! Ground-set representation and set-function evaluation.
//!
//! Subsets of the ground set are bitmasks over element indices, which keeps
//! the exhaustive scans in `curvature` and `bounds` cheap. Element indices
//! are assigned by sorting elements by (block, id), so "lowest index within
//! a block" coincides with "lexicographically smallest id" — the tie-break
//! rule used everywhere.
//!
//! Marginal rewards, the telescoping sum and the exchange identity are the
//! algebra every planner and bound in this crate is built on.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of the ground set, one bit per element index.
pub type Mask = u64;

/// Hard cap on ground-set size (mask width minus a sign of prudence).
pub const MAX_GROUND: usize = 63;

/// Largest ground for which dense tables / caches are allocated (2^20 slots).
pub const MAX_DENSE: usize = 20;

/// One selectable element: a candidate plan for the agent owning `block`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroundElement {
    pub id: String,
    /// Owning agent, 1-based.
    pub block: usize,
    /// Cell ids this element visits, in order. Empty for abstract instances.
    #[serde(default)]
    pub path: Vec<String>,
}

/// The finite ground set, partitioned into per-agent blocks.
#[derive(Debug, Clone)]
pub struct GroundSet {
    elements: Vec<GroundElement>,
    by_id: BTreeMap<String, usize>,
    /// Per block (0-based), the element indices it contains, ascending.
    blocks: Vec<Vec<usize>>,
}

impl GroundSet {
    /// Builds a ground set, sorting elements by (block, id).
    ///
    /// Block labels must be exactly 1..=N with every block non-empty, ids
    /// unique, non-empty and free of ',' (reserved by the subset key
    /// encoding).
    pub fn new(mut elements: Vec<GroundElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Domain("ground set must be non-empty".into()));
        }
        if elements.len() > MAX_GROUND {
            return Err(Error::Capacity(format!(
                "ground set has {} elements, max {}",
                elements.len(),
                MAX_GROUND
            )));
        }
        for e in &elements {
            if e.id.is_empty() || e.id.contains(',') {
                return Err(Error::Domain(format!(
                    "element id {:?} must be non-empty and must not contain ','",
                    e.id
                )));
            }
            if e.block == 0 {
                return Err(Error::Domain(format!("element {:?} has block 0; blocks are 1-based", e.id)));
            }
        }
        elements.sort_by(|a, b| (a.block, &a.id).cmp(&(b.block, &b.id)));
        let n_blocks = elements.iter().map(|e| e.block).max().unwrap();
        let mut by_id = BTreeMap::new();
        let mut blocks = vec![Vec::new(); n_blocks];
        for (idx, e) in elements.iter().enumerate() {
            if by_id.insert(e.id.clone(), idx).is_some() {
                return Err(Error::Domain(format!("duplicate element id {:?}", e.id)));
            }
            blocks[e.block - 1].push(idx);
        }
        if let Some(empty) = blocks.iter().position(|b| b.is_empty()) {
            return Err(Error::Domain(format!(
                "block {} is empty; blocks must be labeled contiguously 1..=N",
                empty + 1
            )));
        }
        Ok(Self { elements, by_id, blocks })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn element(&self, idx: usize) -> &GroundElement {
        &self.elements[idx]
    }

    pub fn elements(&self) -> &[GroundElement] {
        &self.elements
    }

    /// Element indices of block `block0` (0-based), ascending = id order.
    pub fn block_members(&self, block0: usize) -> &[usize] {
        &self.blocks[block0]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown element id {:?}", id)))
    }

    pub fn full_mask(&self) -> Mask {
        if self.len() == 64 {
            !0
        } else {
            (1u64 << self.len()) - 1
        }
    }

    /// Errors if `mask` references indices outside the ground set.
    pub fn check_mask(&self, mask: Mask) -> Result<()> {
        if mask & !self.full_mask() != 0 {
            return Err(Error::Domain(format!(
                "mask {:#x} references elements outside the ground set of size {}",
                mask,
                self.len()
            )));
        }
        Ok(())
    }

    pub fn mask_from_ids<I, S>(&self, ids: I) -> Result<Mask>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut m = 0;
        for id in ids {
            m |= 1u64 << self.index_of(id.as_ref())?;
        }
        Ok(m)
    }

    pub fn ids_from_mask(&self, mask: Mask) -> Vec<String> {
        let mut ids: Vec<String> = iter_mask(mask).map(|i| self.elements[i].id.clone()).collect();
        ids.sort();
        ids
    }

    /// Canonical subset key: ids sorted lexicographically, joined by ','.
    /// The empty subset encodes as "".
    pub fn subset_key(&self, mask: Mask) -> String {
        self.ids_from_mask(mask).join(",")
    }
}

/// Iterates the element indices set in `mask`, ascending.
pub fn iter_mask(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Last-write-wins concurrent memo table. A NaN sentinel marks empty slots,
/// so NaN-valued evaluations are never cached (a validator rejects them
/// anyway).
#[derive(Debug)]
struct EvalCache {
    slots: Vec<AtomicU64>,
}

const EMPTY_SLOT: u64 = u64::MAX; // a quiet NaN bit pattern

impl EvalCache {
    fn new(n_elements: usize) -> Self {
        let slots = (0..(1usize << n_elements)).map(|_| AtomicU64::new(EMPTY_SLOT)).collect();
        Self { slots }
    }

    fn get(&self, mask: Mask) -> Option<f64> {
        let bits = self.slots[mask as usize].load(Ordering::Relaxed);
        let v = f64::from_bits(bits);
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    fn put(&self, mask: Mask, value: f64) {
        self.slots[mask as usize].store(value.to_bits(), Ordering::Relaxed);
    }
}

enum OracleKind {
    /// Dense table indexed by mask; total on 2^V by construction.
    Table(Vec<f64>),
    /// Arbitrary evaluator, optionally memoized.
    Callback(Box<dyn Fn(Mask) -> f64 + Send + Sync>),
}

impl fmt::Debug for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleKind::Table(t) => write!(f, "Table({} entries)", t.len()),
            OracleKind::Callback(_) => write!(f, "Callback"),
        }
    }
}

/// Evaluator of f over subsets of a finite ground set.
///
/// Normalization and monotonicity are validated properties, not construction
/// guarantees: deliberately broken oracles can be loaded for negative tests.
#[derive(Debug)]
pub struct SetFunctionOracle {
    ground: Arc<GroundSet>,
    kind: OracleKind,
    cache: Option<EvalCache>,
}

impl SetFunctionOracle {
    /// Builds a tabular oracle from a dense value table indexed by mask.
    pub fn from_table(ground: Arc<GroundSet>, table: Vec<f64>) -> Result<Self> {
        if ground.len() > MAX_DENSE {
            return Err(Error::Capacity(format!(
                "tabular oracle limited to {} elements, got {}",
                MAX_DENSE,
                ground.len()
            )));
        }
        if table.len() != 1usize << ground.len() {
            return Err(Error::Validation(format!(
                "table has {} entries, expected 2^{} = {}",
                table.len(),
                ground.len(),
                1usize << ground.len()
            )));
        }
        Ok(Self { ground, kind: OracleKind::Table(table), cache: None })
    }

    /// Wraps an arbitrary evaluator. With `cached` set and a ground small
    /// enough for a dense memo (≤ 2^20 subsets), repeated evaluations hit
    /// the cache; otherwise every call re-evaluates.
    pub fn from_fn<F>(ground: Arc<GroundSet>, f: F, cached: bool) -> Self
    where
        F: Fn(Mask) -> f64 + Send + Sync + 'static,
    {
        let cache = if cached && ground.len() <= MAX_DENSE {
            Some(EvalCache::new(ground.len()))
        } else {
            None
        };
        Self { ground, kind: OracleKind::Callback(Box::new(f)), cache }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn ground_arc(&self) -> Arc<GroundSet> {
        Arc::clone(&self.ground)
    }

    /// f(S). Errors on masks outside the ground set.
    pub fn evaluate(&self, subset: Mask) -> Result<f64> {
        self.ground.check_mask(subset)?;
        Ok(self.eval_unchecked(subset))
    }

    /// f(S) without the mask check; callers guarantee `subset` is in range.
    #[inline]
    pub(crate) fn eval_unchecked(&self, subset: Mask) -> f64 {
        match &self.kind {
            OracleKind::Table(t) => t[subset as usize],
            OracleKind::Callback(f) => {
                if let Some(cache) = &self.cache {
                    if let Some(v) = cache.get(subset) {
                        return v;
                    }
                    let v = f(subset);
                    cache.put(subset, v);
                    v
                } else {
                    f(subset)
                }
            }
        }
    }

    pub fn evaluate_ids<I, S>(&self, ids: I) -> Result<f64>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mask = self.ground.mask_from_ids(ids)?;
        self.evaluate(mask)
    }

    /// Marginal reward of S given Q: f(S ∪ Q) − f(Q).
    pub fn marginal(&self, s: Mask, q: Mask) -> Result<f64> {
        self.ground.check_mask(s)?;
        self.ground.check_mask(q)?;
        Ok(self.marginal_unchecked(s, q))
    }

    #[inline]
    pub(crate) fn marginal_unchecked(&self, s: Mask, q: Mask) -> f64 {
        self.eval_unchecked(s | q) - self.eval_unchecked(q)
    }

    /// Checks f(∅) = 0 exactly.
    pub fn validate_normalized(&self) -> Result<()> {
        let v = self.eval_unchecked(0);
        if v != 0.0 {
            return Err(Error::Validation(format!("f(empty) = {v}, expected 0 exactly")));
        }
        Ok(())
    }

    /// Scans for a monotonicity violation: every nested pair S ⊆ Q when the
    /// ground is small enough (3^|V| pairs, |V| ≤ 12), single-element
    /// extensions otherwise.
    pub fn find_monotonicity_violation(&self, tol: f64) -> Result<Option<MonotoneViolation>> {
        let n = self.ground.len();
        if n > MAX_DENSE {
            return Err(Error::Capacity(format!(
                "monotonicity scan limited to {MAX_DENSE} elements, got {n}"
            )));
        }
        let witness = |s: Mask, q: Mask, fs: f64, fq: f64| {
            Some(MonotoneViolation {
                subset: self.ground.ids_from_mask(s),
                superset: self.ground.ids_from_mask(q),
                f_subset: fs,
                f_superset: fq,
            })
        };
        if n <= 12 {
            let mut q = self.ground.full_mask();
            loop {
                let fq = self.eval_unchecked(q);
                let mut s = q;
                loop {
                    let fs = self.eval_unchecked(s);
                    if fs > fq + tol {
                        return Ok(witness(s, q, fs, fq));
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & q;
                }
                if q == 0 {
                    break;
                }
                q -= 1;
            }
        } else {
            for s in 0..(1u64 << n) {
                let fs = self.eval_unchecked(s);
                for v in iter_mask(self.ground.full_mask() & !s) {
                    let q = s | (1 << v);
                    let fq = self.eval_unchecked(q);
                    if fs > fq + tol {
                        return Ok(witness(s, q, fs, fq));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Errors unless the oracle is normalized and monotone (tolerance 1e-12).
    pub fn validate_normalized_monotone(&self) -> Result<()> {
        self.validate_normalized()?;
        if let Some(w) = self.find_monotonicity_violation(1e-12)? {
            return Err(Error::Validation(format!("not monotone: {w}")));
        }
        Ok(())
    }

    /// Submodularity definition check: Δ(v|A) ≥ Δ(v|B) for all A ⊆ B ⊆ V\{v},
    /// exact comparisons. Enumerates 3^(|V|−1) pairs per element.
    pub fn is_submodular(&self) -> Result<bool> {
        let n = self.ground.len();
        if n > 16 {
            return Err(Error::Capacity(format!("submodularity check limited to 16 elements, got {n}")));
        }
        let full = self.ground.full_mask();
        for v in 0..n {
            let vbit = 1u64 << v;
            let rest = full & !vbit;
            let mut b = rest;
            loop {
                let dvb = self.marginal_unchecked(vbit, b);
                // every A ⊆ B
                let mut a = b;
                loop {
                    let dva = self.marginal_unchecked(vbit, a);
                    if dva < dvb {
                        return Ok(false);
                    }
                    if a == 0 {
                        break;
                    }
                    a = (a - 1) & b;
                }
                if b == 0 {
                    break;
                }
                b = (b - 1) & rest;
            }
        }
        Ok(true)
    }

    /// Modularity check: f(S ∪ Q) + f(S ∩ Q) = f(S) + f(Q) over all pairs,
    /// exact comparisons.
    pub fn is_modular(&self) -> Result<bool> {
        let n = self.ground.len();
        if n > 12 {
            return Err(Error::Capacity(format!("modularity check limited to 12 elements, got {n}")));
        }
        let size = 1u64 << n;
        for s in 0..size {
            let fs = self.eval_unchecked(s);
            for q in 0..size {
                if self.eval_unchecked(s | q) + self.eval_unchecked(s & q) != fs + self.eval_unchecked(q) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Witness for a failed monotonicity check.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneViolation {
    pub subset: Vec<String>,
    pub superset: Vec<String>,
    pub f_subset: f64,
    pub f_superset: f64,
}

impl fmt::Display for MonotoneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "f({:?}) = {} > f({:?}) = {}",
            self.subset, self.f_subset, self.superset, self.f_superset
        )
    }
}

/// |f(S) − Σ_i Δ(s_i | s_1..s_{i−1})| for the given ordering of S.
///
/// Zero (up to accumulation error) for every set function; a residual above
/// tolerance indicates a broken oracle (impure evaluation or a stale cache).
pub fn telescoping_residual(oracle: &SetFunctionOracle, ordered: &[usize]) -> Result<f64> {
    let mut prefix: Mask = 0;
    let mut sum = 0.0;
    for &i in ordered {
        if i >= oracle.ground().len() {
            return Err(Error::Domain(format!("element index {i} out of range")));
        }
        let bit = 1u64 << i;
        if prefix & bit != 0 {
            return Err(Error::Domain(format!(
                "duplicate element {:?} in ordering",
                oracle.ground().element(i).id
            )));
        }
        sum += oracle.marginal_unchecked(bit, prefix);
        prefix |= bit;
    }
    Ok((oracle.eval_unchecked(prefix) - (oracle.eval_unchecked(0) + sum)).abs())
}

/// Residual of the exchange identity between two maximal independent sets
/// of the ground set's partition matroid:
///
/// |f(x*) − [f(x) + Σ_i Δ(x*_i | x*_1..i−1, x) − Σ_i Δ(x_i | x_1..i−1, x*)]|
///
/// `x` and `xstar` list one element index per block, in block order.
pub fn exchange_identity_residual(
    oracle: &SetFunctionOracle,
    x: &[usize],
    xstar: &[usize],
) -> Result<f64> {
    let ground = oracle.ground();
    let n = ground.n_blocks();
    let as_mask = |sel: &[usize], name: &str| -> Result<Mask> {
        if sel.len() != n {
            return Err(Error::Domain(format!(
                "{name} has {} elements, expected one per block ({n})",
                sel.len()
            )));
        }
        let mut m = 0u64;
        for (b, &i) in sel.iter().enumerate() {
            if i >= ground.len() {
                return Err(Error::Domain(format!("element index {i} out of range")));
            }
            if ground.element(i).block != b + 1 {
                return Err(Error::Domain(format!(
                    "{name}[{b}] = {:?} belongs to block {}, expected block {}",
                    ground.element(i).id,
                    ground.element(i).block,
                    b + 1
                )));
            }
            m |= 1u64 << i;
        }
        Ok(m)
    };
    let xm = as_mask(x, "x")?;
    let xsm = as_mask(xstar, "x*")?;

    let mut correction = 0.0;
    let mut prefix: Mask = 0;
    for &i in xstar {
        correction += oracle.marginal_unchecked(1 << i, prefix | xm);
        prefix |= 1 << i;
    }
    let mut prefix: Mask = 0;
    for &i in x {
        correction -= oracle.marginal_unchecked(1 << i, prefix | xsm);
        prefix |= 1 << i;
    }
    Ok((oracle.eval_unchecked(xsm) - (oracle.eval_unchecked(xm) + correction)).abs())
}

#[derive(Debug, Serialize, Deserialize)]
struct TabularFile {
    elements: Vec<GroundElement>,
    values: BTreeMap<String, f64>,
}

/// Parses the tabular set-function JSON format.
///
/// The `values` map must be total on 2^V: every subset, keyed by its sorted
/// comma-joined element ids (empty set = ""), must be present.
pub fn tabular_from_json(text: &str) -> Result<SetFunctionOracle> {
    let file: TabularFile = serde_json::from_str(text)?;
    let ground = Arc::new(GroundSet::new(file.elements)?);
    let n = ground.len();
    if n > MAX_DENSE {
        return Err(Error::Capacity(format!(
            "tabular oracle limited to {MAX_DENSE} elements, got {n}"
        )));
    }
    for key in file.values.keys() {
        let ids: Vec<&str> = if key.is_empty() { vec![] } else { key.split(',').collect() };
        let mask = ground
            .mask_from_ids(&ids)
            .map_err(|e| Error::Validation(format!("bad subset key {key:?}: {e}")))?;
        if ground.subset_key(mask) != *key {
            return Err(Error::Validation(format!(
                "subset key {key:?} is not canonical (sorted, comma-joined)"
            )));
        }
    }
    let mut table = Vec::with_capacity(1 << n);
    for mask in 0..(1u64 << n) {
        let key = ground.subset_key(mask);
        match file.values.get(&key) {
            Some(&v) => table.push(v),
            None => {
                return Err(Error::Validation(format!(
                    "tabular oracle is not total: missing value for subset {key:?}"
                )))
            }
        }
    }
    SetFunctionOracle::from_table(ground, table)
}

/// Serializes a tabular oracle (or a snapshot of any oracle on a small
/// ground) back to the JSON format.
pub fn tabular_to_json(oracle: &SetFunctionOracle) -> Result<String> {
    let ground = oracle.ground();
    let n = ground.len();
    if n > MAX_DENSE {
        return Err(Error::Capacity(format!("cannot tabulate {n} elements")));
    }
    let mut values = BTreeMap::new();
    for mask in 0..(1u64 << n) {
        values.insert(ground.subset_key(mask), oracle.eval_unchecked(mask));
    }
    let file = TabularFile { elements: ground.elements().to_vec(), values };
    Ok(serde_json::to_string_pretty(&file)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn abstract_ground(blocks: &[usize]) -> Arc<GroundSet> {
        let mut elements = Vec::new();
        for (b, &size) in blocks.iter().enumerate() {
            for j in 0..size {
                elements.push(GroundElement {
                    id: format!("e{}_{}", b + 1, j),
                    block: b + 1,
                    path: vec![],
                });
            }
        }
        Arc::new(GroundSet::new(elements).unwrap())
    }

    fn cardinality_oracle(blocks: &[usize]) -> SetFunctionOracle {
        let ground = abstract_ground(blocks);
        SetFunctionOracle::from_fn(ground, |m| m.count_ones() as f64, false)
    }

    /// Coverage of {1,2,3} with a ↦ {1,2}, b ↦ {2,3}.
    fn small_coverage() -> SetFunctionOracle {
        let ground = Arc::new(
            GroundSet::new(vec![
                GroundElement { id: "a".into(), block: 1, path: vec![] },
                GroundElement { id: "b".into(), block: 2, path: vec![] },
            ])
            .unwrap(),
        );
        let covers = [0b011u32, 0b110u32]; // cells {1,2}, {2,3}
        SetFunctionOracle::from_fn(
            ground,
            move |m| {
                let mut cells = 0u32;
                for i in iter_mask(m) {
                    cells |= covers[i];
                }
                cells.count_ones() as f64
            },
            false,
        )
    }

    #[test]
    fn marginal_of_present_element_is_zero() {
        let f = cardinality_oracle(&[1, 1, 1]);
        let a = 1 << 0;
        let q = (1 << 0) | (1 << 1);
        assert_eq!(f.marginal(a, q).unwrap(), 0.0);
    }

    #[test]
    fn marginal_at_empty_equals_value() {
        let f = cardinality_oracle(&[1, 1, 1]);
        let s = (1 << 0) | (1 << 1);
        assert_eq!(f.marginal(s, 0).unwrap(), 2.0);
    }

    #[test]
    fn coverage_marginal() {
        let f = small_coverage();
        let a = f.ground().mask_from_ids(["a"]).unwrap();
        let b = f.ground().mask_from_ids(["b"]).unwrap();
        assert_eq!(f.marginal(b, a).unwrap(), 1.0);
    }

    #[test]
    fn marginal_rejects_foreign_elements() {
        let f = cardinality_oracle(&[2]);
        assert!(matches!(f.marginal(1 << 5, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn telescoping_empty_ordering() {
        let f = cardinality_oracle(&[2, 1]);
        assert_eq!(telescoping_residual(&f, &[]).unwrap(), 0.0);
    }

    #[test]
    fn telescoping_cardinality_exact() {
        let f = cardinality_oracle(&[1, 1, 1]);
        assert_eq!(telescoping_residual(&f, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(telescoping_residual(&f, &[2, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn telescoping_rejects_duplicates() {
        let f = cardinality_oracle(&[2, 1]);
        assert!(matches!(telescoping_residual(&f, &[0, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn exchange_identity_on_equal_sets() {
        let f = cardinality_oracle(&[2, 2]);
        let x = [0usize, 2];
        assert_eq!(exchange_identity_residual(&f, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn exchange_identity_cardinality() {
        let f = cardinality_oracle(&[2, 2]);
        assert_eq!(exchange_identity_residual(&f, &[0, 2], &[1, 3]).unwrap(), 0.0);
    }

    #[test]
    fn exchange_rejects_wrong_block() {
        let f = cardinality_oracle(&[2, 2]);
        // both entries from block 1
        assert!(matches!(
            exchange_identity_residual(&f, &[0, 1], &[0, 2]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn monotone_validator_finds_witness() {
        let ground = abstract_ground(&[2]);
        let table = vec![0.0, 1.0, 2.0, 1.5]; // f({a,b}) < f({b})
        let f = SetFunctionOracle::from_table(ground, table).unwrap();
        let w = f.find_monotonicity_violation(1e-12).unwrap().unwrap();
        assert_eq!(w.f_subset, 2.0);
        assert_eq!(w.f_superset, 1.5);
        assert!(f.validate_normalized().is_ok());
        assert!(f.validate_normalized_monotone().is_err());
    }

    #[test]
    fn submodular_and_modular_checks() {
        let cov = small_coverage();
        assert!(cov.is_submodular().unwrap());
        assert!(!cov.is_modular().unwrap());

        let card = cardinality_oracle(&[1, 1, 1]);
        assert!(card.is_submodular().unwrap());
        assert!(card.is_modular().unwrap());

        // supermodular: f{a,b} jumps
        let ground = abstract_ground(&[2]);
        let f = SetFunctionOracle::from_table(ground, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert!(!f.is_submodular().unwrap());
        assert!(!f.is_modular().unwrap());
    }

    #[test]
    fn cache_transparency() {
        let ground = abstract_ground(&[2, 2]);
        let weights = [0.125, 0.25, 0.5, 1.0];
        let eval = move |m: Mask| {
            let mut acc = 0.0;
            for i in iter_mask(m) {
                acc += weights[i];
            }
            acc * acc
        };
        let cached = SetFunctionOracle::from_fn(Arc::clone(&ground), eval, true);
        let plain = SetFunctionOracle::from_fn(ground, eval, false);
        for m in 0..16u64 {
            let a = cached.evaluate(m).unwrap();
            let b = plain.evaluate(m).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
            // repeated evaluation returns the identical value
            assert_eq!(cached.evaluate(m).unwrap().to_bits(), a.to_bits());
        }
    }

    #[test]
    fn concurrent_evaluations_agree_with_sequential() {
        let ground = abstract_ground(&[3, 3, 3]);
        let eval = |m: Mask| {
            let mut acc = 0.0;
            for i in iter_mask(m) {
                acc += ((i + 1) as f64).sqrt();
            }
            acc
        };
        let cached = Arc::new(SetFunctionOracle::from_fn(Arc::clone(&ground), eval, true));
        let expected: Vec<f64> = (0..512u64).map(eval).collect();
        let mut handles = Vec::new();
        for offset in 0..4u64 {
            let oracle = Arc::clone(&cached);
            handles.push(std::thread::spawn(move || {
                // overlapping ranges so threads race on shared subsets
                for m in 0..512u64 {
                    let m = (m + offset * 128) % 512;
                    assert_eq!(oracle.evaluate(m).unwrap().to_bits(), eval(m).to_bits());
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        for m in 0..512u64 {
            assert_eq!(cached.evaluate(m).unwrap().to_bits(), expected[m as usize].to_bits());
        }
    }

    #[test]
    fn tabular_roundtrip_and_totality() {
        let json = r#"{
            "elements": [
                {"id": "a", "block": 1, "path": ["c1"]},
                {"id": "b", "block": 2}
            ],
            "values": {"": 0.0, "a": 1.0, "b": 2.0, "a,b": 2.5}
        }"#;
        let f = tabular_from_json(json).unwrap();
        assert_eq!(f.evaluate_ids(["a", "b"]).unwrap(), 2.5);
        assert_eq!(f.ground().element(0).path, vec!["c1".to_string()]);

        let back = tabular_to_json(&f).unwrap();
        let f2 = tabular_from_json(&back).unwrap();
        for m in 0..4u64 {
            assert_eq!(f.evaluate(m).unwrap(), f2.evaluate(m).unwrap());
        }

        let missing = r#"{
            "elements": [{"id": "a", "block": 1}, {"id": "b", "block": 2}],
            "values": {"": 0.0, "a": 1.0, "b": 2.0}
        }"#;
        assert!(matches!(tabular_from_json(missing), Err(Error::Validation(_))));

        let bad_key = r#"{
            "elements": [{"id": "a", "block": 1}, {"id": "b", "block": 2}],
            "values": {"": 0.0, "a": 1.0, "b": 2.0, "b,a": 2.5}
        }"#;
        assert!(matches!(tabular_from_json(bad_key), Err(Error::Validation(_))));
    }

    #[test]
    fn ground_set_rejects_bad_blocks_and_ids() {
        assert!(GroundSet::new(vec![GroundElement { id: "a,b".into(), block: 1, path: vec![] }]).is_err());
        assert!(GroundSet::new(vec![GroundElement { id: "a".into(), block: 0, path: vec![] }]).is_err());
        // gap: block 1 missing
        assert!(GroundSet::new(vec![GroundElement { id: "a".into(), block: 2, path: vec![] }]).is_err());
        let dup = vec![
            GroundElement { id: "a".into(), block: 1, path: vec![] },
            GroundElement { id: "a".into(), block: 1, path: vec![] },
        ];
        assert!(GroundSet::new(dup).is_err());
    }
}
