//! Sequential greedy planning over a partition matroid, in full-information
//! and limited-information modes.
//!
//! Agents plan in block order. Agent i scores every candidate in its block
//! by the marginal reward against a context set: the full prefix of earlier
//! choices (full mode) or only the choices of in-neighbors (limited mode).
//! The realized eta of a trace is the largest ratio between the block-best
//! marginal and the chosen marginal; the exact selector realizes eta = 1 by
//! construction, approximate selectors realize more.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{neighbor_context, CommGraph};
use crate::matroid::PartitionMatroid;
use crate::setfn::{Mask, SetFunctionOracle, MAX_DENSE};

/// How a block's element is picked from its scored candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelectionPolicy {
    /// Argmax of the marginal; ties go to the lowest element id.
    Exact,
    /// Any element whose marginal is within a (1+eps) factor of the block
    /// best qualifies; the worst qualifying element is returned to stress
    /// the bounds. eps = 0 coincides with `Exact`.
    Epsilon(f64),
}

/// Pluggable selection step: given the current block's scored candidates,
/// pick one. Implementations may be arbitrarily suboptimal; the trace
/// records the realized eta either way.
pub trait Selector {
    /// Picks from `(element index, marginal)` candidates listed in
    /// ascending-id order. Returns a position into `candidates`.
    fn select(&self, candidates: &[(usize, f64)]) -> usize;
}

impl SelectionPolicy {
    pub fn epsilon(eps: f64) -> Result<Self> {
        if eps < 0.0 || eps.is_nan() {
            return Err(Error::Domain(format!("epsilon must be >= 0, got {eps}")));
        }
        Ok(SelectionPolicy::Epsilon(eps))
    }
}

impl Selector for SelectionPolicy {
    fn select(&self, candidates: &[(usize, f64)]) -> usize {
        let best = candidates
            .iter()
            .map(|&(_, m)| m)
            .fold(f64::NEG_INFINITY, f64::max);
        match *self {
            SelectionPolicy::Exact => {
                candidates.iter().position(|&(_, m)| m == best).unwrap()
            }
            SelectionPolicy::Epsilon(eps) => {
                let threshold = best / (1.0 + eps);
                let mut worst: Option<(usize, f64)> = None;
                for (pos, &(_, m)) in candidates.iter().enumerate() {
                    if m >= threshold {
                        match worst {
                            Some((_, wm)) if wm <= m => {}
                            _ => worst = Some((pos, m)),
                        }
                    }
                }
                match worst {
                    Some((pos, _)) => pos,
                    // can only happen for negative best (non-monotone f)
                    None => candidates.iter().position(|&(_, m)| m == best).unwrap(),
                }
            }
        }
    }
}

/// One planning step of a trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyStep {
    /// 1-based agent / block.
    pub agent: usize,
    pub element: String,
    pub element_index: usize,
    /// Element ids visible to the agent when it chose.
    pub context: Vec<String>,
    /// Best marginal over the block against that context.
    pub best_marginal: f64,
    /// Marginal of the chosen element against that context.
    pub chosen_marginal: f64,
}

/// Full record of a greedy run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// Chosen element indices, one per block, block order.
    pub selection: Vec<usize>,
    /// f of the complete joint plan.
    pub value: f64,
    /// max over steps of best/chosen marginal; None when a zero-marginal
    /// element was chosen while the block best was positive (no finite eta
    /// certifies such a trace).
    pub eta_realized: Option<f64>,
}

impl GreedyTrace {
    pub fn eta(&self) -> f64 {
        self.eta_realized.unwrap_or(f64::INFINITY)
    }

    pub fn selection_mask(&self) -> Mask {
        self.selection.iter().fold(0u64, |m, &i| m | (1 << i))
    }
}

fn run_greedy<S, C>(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    policy: &S,
    mut context_of: C,
) -> Result<GreedyTrace>
where
    S: Selector + ?Sized,
    C: FnMut(usize, &[usize]) -> Result<Mask>,
{
    if !std::ptr::eq(oracle.ground(), matroid.ground())
        && (oracle.ground().len() != matroid.ground().len()
            || oracle.ground().n_blocks() != matroid.ground().n_blocks())
    {
        return Err(Error::Domain("oracle and matroid use different ground sets".into()));
    }
    if oracle.ground().len() <= MAX_DENSE {
        oracle.validate_normalized_monotone()?;
    }

    let ground = oracle.ground();
    let mut steps = Vec::with_capacity(matroid.n_blocks());
    let mut selection: Vec<usize> = Vec::with_capacity(matroid.n_blocks());
    let mut eta: Option<f64> = Some(1.0);

    for block in 0..matroid.n_blocks() {
        let context = context_of(block, &selection)?;
        let candidates: Vec<(usize, f64)> = ground
            .block_members(block)
            .iter()
            .map(|&i| (i, oracle.marginal_unchecked(1 << i, context)))
            .collect();
        let pos = policy.select(&candidates);
        let (chosen, chosen_marginal) = *candidates.get(pos).ok_or_else(|| {
            Error::Domain(format!("selector returned position {pos} outside block {}", block + 1))
        })?;
        let best = candidates.iter().map(|&(_, m)| m).fold(f64::NEG_INFINITY, f64::max);

        eta = match eta {
            None => None,
            Some(e) => {
                if chosen_marginal > 0.0 {
                    Some(e.max((best / chosen_marginal).max(1.0)))
                } else if best > 0.0 {
                    None // zero chosen against positive best: unbounded eta
                } else {
                    Some(e) // both zero: the step is vacuously 1-optimal
                }
            }
        };

        steps.push(GreedyStep {
            agent: block + 1,
            element: ground.element(chosen).id.clone(),
            element_index: chosen,
            context: ground.ids_from_mask(context),
            best_marginal: best,
            chosen_marginal,
        });
        selection.push(chosen);
    }

    let mask = selection.iter().fold(0u64, |m, &i| m | (1 << i));
    Ok(GreedyTrace { steps, selection, value: oracle.eval_unchecked(mask), eta_realized: eta })
}

fn check_policy(policy: SelectionPolicy) -> Result<()> {
    if let SelectionPolicy::Epsilon(eps) = policy {
        if eps < 0.0 || eps.is_nan() {
            return Err(Error::Domain(format!("epsilon must be >= 0, got {eps}")));
        }
    }
    Ok(())
}

/// Full-information greedy: agent i conditions on all earlier choices.
pub fn greedy_full(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    policy: SelectionPolicy,
) -> Result<GreedyTrace> {
    check_policy(policy)?;
    greedy_full_with(oracle, matroid, &policy)
}

/// `greedy_full` with a caller-supplied selection rule.
pub fn greedy_full_with<S: Selector + ?Sized>(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    selector: &S,
) -> Result<GreedyTrace> {
    run_greedy(oracle, matroid, selector, |_, chosen| {
        Ok(chosen.iter().fold(0u64, |m, &i| m | (1 << i)))
    })
}

/// Limited-information greedy: agent i conditions only on the choices of
/// its in-neighbors in `graph`. Realized eta is measured against the block
/// best over the same limited context.
pub fn greedy_limited(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    graph: &CommGraph,
    policy: SelectionPolicy,
) -> Result<GreedyTrace> {
    check_policy(policy)?;
    greedy_limited_with(oracle, matroid, graph, &policy)
}

/// `greedy_limited` with a caller-supplied selection rule.
pub fn greedy_limited_with<S: Selector + ?Sized>(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    graph: &CommGraph,
    selector: &S,
) -> Result<GreedyTrace> {
    if graph.n_agents() != matroid.n_blocks() {
        return Err(Error::Domain(format!(
            "graph has {} agents but the matroid has {} blocks",
            graph.n_agents(),
            matroid.n_blocks()
        )));
    }
    run_greedy(oracle, matroid, selector, |block, chosen| {
        neighbor_context(graph, block, chosen)
    })
}
