//! Curvature of normalized monotone set functions.
//!
//! Three quantities drive the suboptimality bounds:
//!
//! * generalized curvature `alpha`: how much a marginal can shrink as the
//!   context grows; the smallest scalar with
//!   Δ(v|B) ≥ (1−α)·Δ(v|A) for all A ⊆ B ⊆ V\{v};
//! * inverse generalized curvature `beta`: how much a marginal can grow;
//!   Δ(v|A) ≥ (1−β)·Δ(v|B) over the same range. β = 0 iff f is submodular,
//!   α = β = 0 iff modular;
//! * total curvature `alpha_c` (submodular f only): compares Δ(v|∅) against
//!   Δ(v|V\{v}).
//!
//! The scan enumerates (v, A, B) with A ⊆ B ⊆ V\{v} — 3^(|V|−1) pairs per
//! element — instead of literal (S, Q) pairs: the definitions depend only
//! on S\{v} and (S∪Q)\{v}, and every nested pair is realizable by
//! S = A ∪ {v}, Q = B\A. Pairs whose reference marginal is zero are skipped
//! and counted: the defining inequality is non-binding there because both
//! sides are non-negative under monotonicity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::setfn::{GroundElement, GroundSet, Mask, SetFunctionOracle};
use std::sync::Arc;

/// Default enumeration budget for the exhaustive scan.
pub const DEFAULT_CURVATURE_BUDGET: usize = 12;

/// The (v, A, B) triple attaining a curvature maximum, with both marginals.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureWitness {
    pub element: String,
    /// A, the smaller context.
    pub small_context: Vec<String>,
    /// B, the larger context (A ⊆ B).
    pub large_context: Vec<String>,
    /// Δ(v|A)
    pub marginal_small: f64,
    /// Δ(v|B)
    pub marginal_large: f64,
}

/// Curvature quantities with maximizing witnesses and skip accounting.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub alpha: f64,
    pub beta: f64,
    /// Present only when the oracle validated submodular (or the caller
    /// forced the computation).
    pub alpha_c: Option<f64>,
    pub alpha_witness: Option<CurvatureWitness>,
    pub beta_witness: Option<CurvatureWitness>,
    /// Element attaining alpha_c.
    pub alpha_c_witness: Option<String>,
    /// (v, A, B) pairs skipped because Δ(v|A) = 0.
    pub skipped_zero_denominators_alpha: usize,
    /// (v, A, B) pairs skipped because Δ(v|B) = 0.
    pub skipped_zero_denominators_beta: usize,
}

/// Computes alpha and beta by exhaustive enumeration.
///
/// The oracle must be normalized and monotone; that is validated here, not
/// assumed. Grounds larger than `budget` are rejected with a capacity error.
pub fn curvature_report_with_budget(
    oracle: &SetFunctionOracle,
    budget: usize,
) -> Result<CurvatureReport> {
    let n = oracle.ground().len();
    if n > budget {
        return Err(Error::Capacity(format!(
            "curvature scan over {n} elements exceeds budget {budget}"
        )));
    }
    oracle.validate_normalized_monotone()?;

    let ground = oracle.ground();
    let full = ground.full_mask();
    let mut alpha = 0.0f64;
    let mut beta = 0.0f64;
    let mut alpha_wit: Option<(usize, Mask, Mask, f64, f64)> = None;
    let mut beta_wit: Option<(usize, Mask, Mask, f64, f64)> = None;
    let mut skipped_alpha = 0usize;
    let mut skipped_beta = 0usize;

    for v in 0..n {
        let vbit = 1u64 << v;
        let rest = full & !vbit;
        let mut b = rest;
        loop {
            let dvb = oracle.marginal_unchecked(vbit, b);
            let mut a = b;
            loop {
                let dva = oracle.marginal_unchecked(vbit, a);
                if dva > 0.0 {
                    let cand = 1.0 - dvb / dva;
                    if cand > alpha {
                        alpha = cand;
                        alpha_wit = Some((v, a, b, dva, dvb));
                    }
                } else {
                    skipped_alpha += 1;
                }
                if dvb > 0.0 {
                    let cand = 1.0 - dva / dvb;
                    if cand > beta {
                        beta = cand;
                        beta_wit = Some((v, a, b, dva, dvb));
                    }
                } else {
                    skipped_beta += 1;
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

    let witness = |w: Option<(usize, Mask, Mask, f64, f64)>| {
        w.map(|(v, a, b, dva, dvb)| CurvatureWitness {
            element: ground.element(v).id.clone(),
            small_context: ground.ids_from_mask(a),
            large_context: ground.ids_from_mask(b),
            marginal_small: dva,
            marginal_large: dvb,
        })
    };

    Ok(CurvatureReport {
        alpha: alpha.min(1.0),
        beta: beta.min(1.0),
        alpha_c: None,
        alpha_witness: witness(alpha_wit),
        beta_witness: witness(beta_wit),
        alpha_c_witness: None,
        skipped_zero_denominators_alpha: skipped_alpha,
        skipped_zero_denominators_beta: skipped_beta,
    })
}

/// `curvature_report_with_budget` at the default budget.
pub fn curvature_report(oracle: &SetFunctionOracle) -> Result<CurvatureReport> {
    curvature_report_with_budget(oracle, DEFAULT_CURVATURE_BUDGET)
}

/// Generalized curvature alpha alone.
pub fn generalized_curvature(oracle: &SetFunctionOracle) -> Result<f64> {
    Ok(curvature_report(oracle)?.alpha)
}

/// Inverse generalized curvature beta alone. Zero iff f is submodular on
/// this instance.
pub fn inverse_generalized_curvature(oracle: &SetFunctionOracle) -> Result<f64> {
    Ok(curvature_report(oracle)?.beta)
}

/// Total curvature alpha_c for a validated-submodular oracle:
/// max over v in V* of [Δ(v|∅) − Δ(v|V\{v})] / Δ(v|∅), V* = {v : f(v) ≥ 0}.
///
/// Errors on non-submodular input (the quantity is only defined there) and
/// on Δ(v|∅) = 0 within V*.
pub fn total_curvature(oracle: &SetFunctionOracle) -> Result<(f64, String)> {
    oracle.validate_normalized_monotone()?;
    if !oracle.is_submodular()? {
        return Err(Error::Validation(
            "total curvature is defined only for submodular oracles".into(),
        ));
    }
    total_curvature_unchecked(oracle)
}

/// The alpha_c formula without the submodularity validation, for callers
/// that force the computation.
pub fn total_curvature_unchecked(oracle: &SetFunctionOracle) -> Result<(f64, String)> {
    let ground = oracle.ground();
    let full = ground.full_mask();
    let mut best: Option<(f64, usize)> = None;
    for v in 0..ground.len() {
        let vbit = 1u64 << v;
        let fv = oracle.eval_unchecked(vbit);
        if fv < 0.0 {
            continue; // outside V*
        }
        let d_empty = oracle.marginal_unchecked(vbit, 0);
        if d_empty <= 0.0 {
            return Err(Error::Validation(format!(
                "total curvature needs Δ(v|∅) > 0; element {:?} has {d_empty}",
                ground.element(v).id
            )));
        }
        let d_full = oracle.marginal_unchecked(vbit, full & !vbit);
        let cand = (d_empty - d_full) / d_empty;
        if best.is_none_or(|(b, _)| cand > b) {
            best = Some((cand, v));
        }
    }
    let (alpha_c, v) = best.ok_or_else(|| {
        Error::Validation("total curvature undefined: V* = {v : f(v) ≥ 0} is empty".into())
    })?;
    Ok((alpha_c.clamp(0.0, 1.0), ground.element(v).id.clone()))
}

/// Curvature of a per-cell benefit with interchangeable visits.
///
/// For a ground set of k identical visit tokens, Δ(v|C) depends only on
/// |C|, so Defs of alpha/beta collapse to comparisons of the marginal
/// sequence g(j) = f(j+1) − f(j):
///
///   alpha = max over 0 ≤ m ≤ n < k of 1 − g(n)/g(m)   (g(m) > 0)
///   beta  = max over 0 ≤ m ≤ n < k of 1 − g(m)/g(n)   (g(n) > 0)
///
/// Exact equivalent of the brute-force scan on the token ground set.
pub fn interchangeable_cell_curvature(marginals: &[f64]) -> Result<(f64, f64)> {
    if let Some(bad) = marginals.iter().find(|&&g| g < 0.0 || g.is_nan()) {
        return Err(Error::Domain(format!(
            "per-visit marginals must be non-negative, got {bad}"
        )));
    }
    let mut alpha = 0.0f64;
    let mut beta = 0.0f64;
    for m in 0..marginals.len() {
        for n in m..marginals.len() {
            if marginals[m] > 0.0 {
                alpha = alpha.max(1.0 - marginals[n] / marginals[m]);
            }
            if marginals[n] > 0.0 {
                beta = beta.max(1.0 - marginals[m] / marginals[n]);
            }
        }
    }
    Ok((alpha.min(1.0), beta.min(1.0)))
}

/// Oracle over k interchangeable visit tokens with the given per-visit
/// marginals: f(S) = Σ_{j < |S|} g(j). The brute-force counterpart of
/// `interchangeable_cell_curvature`.
pub fn token_oracle(marginals: &[f64]) -> Result<SetFunctionOracle> {
    let k = marginals.len();
    let elements = (0..k)
        .map(|j| GroundElement { id: format!("t{j}"), block: 1, path: vec![] })
        .collect();
    let ground = Arc::new(GroundSet::new(elements)?);
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(marginals.iter().scan(0.0, |acc, g| {
            *acc += g;
            Some(*acc)
        }))
        .collect();
    let table = (0..(1u64 << k)).map(|m| prefix[m.count_ones() as usize]).collect();
    SetFunctionOracle::from_table(ground, table)
}

/// Re-evaluates a witness against the oracle: 1 − Δ(v|B)/Δ(v|A) for alpha
/// witnesses, 1 − Δ(v|A)/Δ(v|B) for beta. Used by tests and certificates to
/// confirm reports are replayable.
pub fn replay_witness(
    oracle: &SetFunctionOracle,
    witness: &CurvatureWitness,
    inverse: bool,
) -> Result<f64> {
    let ground = oracle.ground();
    let v = 1u64 << ground.index_of(&witness.element)?;
    let a = ground.mask_from_ids(&witness.small_context)?;
    let b = ground.mask_from_ids(&witness.large_context)?;
    let dva = oracle.marginal(v, a)?;
    let dvb = oracle.marginal(v, b)?;
    if inverse {
        if dvb <= 0.0 {
            return Err(Error::Domain("beta witness has zero reference marginal".into()));
        }
        Ok(1.0 - dva / dvb)
    } else {
        if dva <= 0.0 {
            return Err(Error::Domain("alpha witness has zero reference marginal".into()));
        }
        Ok(1.0 - dvb / dva)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::GroundElement;
    use std::sync::Arc;

    fn two_element_table(f_a: f64, f_b: f64, f_ab: f64) -> SetFunctionOracle {
        let ground = Arc::new(
            GroundSet::new(vec![
                GroundElement { id: "a".into(), block: 1, path: vec![] },
                GroundElement { id: "b".into(), block: 2, path: vec![] },
            ])
            .unwrap(),
        );
        SetFunctionOracle::from_table(ground, vec![0.0, f_a, f_b, f_ab]).unwrap()
    }

    #[test]
    fn modular_has_zero_curvature() {
        let f = two_element_table(1.0, 1.0, 2.0);
        let r = curvature_report(&f).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert_eq!(r.beta, 0.0);
    }

    #[test]
    fn singleton_ground_has_zero_curvature() {
        let ground = Arc::new(
            GroundSet::new(vec![GroundElement { id: "a".into(), block: 1, path: vec![] }]).unwrap(),
        );
        let f = SetFunctionOracle::from_table(ground, vec![0.0, 2.0]).unwrap();
        let r = curvature_report(&f).unwrap();
        assert_eq!((r.alpha, r.beta), (0.0, 0.0));
    }

    #[test]
    fn submodular_pair_alpha_half() {
        // f{a}=f{b}=1, f{a,b}=1.5: marginal of a drops from 1 to 0.5
        let f = two_element_table(1.0, 1.0, 1.5);
        let r = curvature_report(&f).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-15);
        assert_eq!(r.beta, 0.0);
        let w = r.alpha_witness.unwrap();
        let replayed = replay_witness(&f, &w, false).unwrap();
        assert!((replayed - r.alpha).abs() < 1e-12);
    }

    #[test]
    fn supermodular_pair_beta_half() {
        // f{a,b}=3: marginal of a grows from 1 to 2
        let f = two_element_table(1.0, 1.0, 3.0);
        let r = curvature_report(&f).unwrap();
        assert!((r.beta - 0.5).abs() < 1e-15);
        assert_eq!(r.alpha, 0.0);
        let w = r.beta_witness.unwrap();
        let replayed = replay_witness(&f, &w, true).unwrap();
        assert!((replayed - r.beta).abs() < 1e-12);
    }

    #[test]
    fn total_curvature_examples() {
        // modular
        let f = two_element_table(1.0, 2.0, 3.0);
        assert_eq!(total_curvature(&f).unwrap().0, 0.0);

        // coverage a↦{1,2}, b↦{2,3}: Δ(a|∅)=2, Δ(a|{b})=1
        let f = two_element_table(2.0, 2.0, 3.0);
        assert!((total_curvature(&f).unwrap().0 - 0.5).abs() < 1e-15);

        // max-style: f{a}=f{b}=f{a,b}=1 → Δ(a|{b}) = 0 → alpha_c = 1
        let f = two_element_table(1.0, 1.0, 1.0);
        assert_eq!(total_curvature(&f).unwrap().0, 1.0);

        // non-submodular input rejected
        let f = two_element_table(1.0, 1.0, 3.0);
        assert!(matches!(total_curvature(&f), Err(Error::Validation(_))));
    }

    #[test]
    fn non_monotone_oracle_rejected() {
        let f = two_element_table(1.0, 1.0, 0.5);
        assert!(matches!(curvature_report(&f), Err(Error::Validation(_))));
    }

    #[test]
    fn budget_enforced() {
        let elements = (0..5)
            .map(|i| GroundElement { id: format!("e{i}"), block: i + 1, path: vec![] })
            .collect();
        let ground = Arc::new(GroundSet::new(elements).unwrap());
        let f = SetFunctionOracle::from_fn(ground, |m| m.count_ones() as f64, false);
        assert!(matches!(curvature_report_with_budget(&f, 4), Err(Error::Capacity(_))));
        assert!(curvature_report_with_budget(&f, 5).is_ok());
    }

    #[test]
    fn interchangeable_examples() {
        assert_eq!(interchangeable_cell_curvature(&[1.0]).unwrap(), (0.0, 0.0));

        // strictly decreasing marginals: submodular, beta = 0
        let (a, b) = interchangeable_cell_curvature(&[1.0, 0.5, 0.25, 0.1]).unwrap();
        assert!(a > 0.0);
        assert_eq!(b, 0.0);

        let (a, b) = interchangeable_cell_curvature(&[1.0, 0.5, 0.8]).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        assert!((b - 0.375).abs() < 1e-15);

        assert!(interchangeable_cell_curvature(&[0.5, -0.1]).is_err());
    }

    #[test]
    fn zero_curvature_iff_modular() {
        use crate::random::{ground_with_blocks, random_blocks, random_monotone_table, rng_for};

        // weighted-sum oracle: modular by construction
        let ground = ground_with_blocks(&[2, 2]);
        let weights = [0.25, 0.5, 1.0, 2.0];
        let modular = SetFunctionOracle::from_fn(
            std::sync::Arc::clone(&ground),
            move |m| crate::setfn::iter_mask(m).map(|i| weights[i]).sum(),
            false,
        );
        assert!(modular.is_modular().unwrap());
        let r = curvature_report(&modular).unwrap();
        assert_eq!((r.alpha, r.beta), (0.0, 0.0));

        // the equivalence holds across random instances in both directions
        let mut saw_modular = false;
        let mut saw_non_modular = false;
        for stream in 0..40 {
            let mut rng = rng_for(151, stream);
            let blocks = random_blocks(&mut rng, 3, 2);
            let oracle = random_monotone_table(&mut rng, ground_with_blocks(&blocks));
            let is_modular = oracle.is_modular().unwrap();
            let r = curvature_report(&oracle).unwrap();
            assert_eq!(
                r.alpha == 0.0 && r.beta == 0.0,
                is_modular,
                "stream {stream}: alpha {} beta {} vs modular {is_modular}",
                r.alpha,
                r.beta
            );
            if is_modular {
                saw_modular = true;
            } else {
                saw_non_modular = true;
            }
        }
        // singleton grounds are vacuously modular; bigger tables are not
        assert!(saw_modular && saw_non_modular);
    }

    #[test]
    fn interchangeable_matches_token_brute_force() {
        let g = [1.0, 0.5, 0.8];
        let oracle = token_oracle(&g).unwrap();
        let r = curvature_report(&oracle).unwrap();
        let (a, b) = interchangeable_cell_curvature(&g).unwrap();
        assert!((r.alpha - a).abs() < 1e-12);
        assert!((r.beta - b).abs() < 1e-12);
    }
}
