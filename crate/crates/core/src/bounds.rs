//! Suboptimality bounds and machine-checkable certificates.
//!
//! Full information:     f(x)/f(x*) ≥ (1−β) / (η + (1−β)·α)
//! Limited information:  f(x)/f(x*) ≥ (1−β)² / ((1−β)² + (α+η−1+β−αβ)·k*)
//!
//! A certificate records the curvature inputs, the realized/declared eta,
//! the bound value, the brute-force optimum and the achieved ratio, so every
//! claim is replayable from its witnesses. beta = 1 collapses either bound
//! to zero; such certificates are marked vacuous instead of failing.

use serde::Serialize;

use crate::curvature::{curvature_report_with_budget, CurvatureReport, DEFAULT_CURVATURE_BUDGET};
use crate::error::{Error, Result};
use crate::graphs::{fractional_clique_cover, CommGraph};
use crate::greedy::{greedy_full, greedy_limited, GreedyTrace, SelectionPolicy};
use crate::matroid::{selection_mask, PartitionMatroid};
use crate::setfn::SetFunctionOracle;

/// Slack when comparing an achieved ratio against a bound.
pub const CERT_TOLERANCE: f64 = 1e-9;

fn check_curvatures(alpha: f64, beta: f64, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0,1], got {alpha}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta must lie in [0,1], got {beta}")));
    }
    if eta < 1.0 || eta.is_nan() {
        return Err(Error::Domain(format!("eta must be >= 1, got {eta}")));
    }
    Ok(())
}

/// Full-information bound (1−β) / (η + (1−β)·α).
///
/// beta = 1 gives the degenerate bound 0 and is reported as an error so
/// callers can mark certificates vacuous.
pub fn bound_t1(alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    check_curvatures(alpha, beta, eta)?;
    if beta >= 1.0 {
        return Err(Error::Degenerate("beta = 1 collapses the bound to 0".into()));
    }
    Ok((1.0 - beta) / (eta + (1.0 - beta) * alpha))
}

/// Limited-information bound (1−β)² / ((1−β)² + (α+η−1+β−αβ)·k*).
pub fn bound_t2(alpha: f64, beta: f64, eta: f64, kstar: f64) -> Result<f64> {
    check_curvatures(alpha, beta, eta)?;
    if kstar < 1.0 || kstar.is_nan() {
        return Err(Error::Domain(format!("k* must be >= 1, got {kstar}")));
    }
    if beta >= 1.0 {
        return Err(Error::Degenerate("beta = 1 collapses the bound to 0".into()));
    }
    let one_minus_beta_sq = (1.0 - beta) * (1.0 - beta);
    let coeff = alpha + eta - 1.0 + beta - alpha * beta;
    Ok(one_minus_beta_sq / (one_minus_beta_sq + coeff * kstar))
}

/// Exhaustive optimum over maximal independent sets. Ties break toward the
/// lexicographically smallest sorted id tuple. Returns (selection in block
/// order, optimal value).
pub fn brute_force_optimum(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
) -> Result<(Vec<usize>, f64)> {
    let ground = oracle.ground();
    let mut best: Option<(Vec<usize>, f64, Vec<String>)> = None;
    for selection in matroid.maximal_sets()? {
        let value = oracle.evaluate(selection_mask(&selection))?;
        let better = match &best {
            None => true,
            Some((_, bv, bids)) => {
                value > *bv || (value == *bv && ground.ids_from_mask(selection_mask(&selection)) < *bids)
            }
        };
        if better {
            let ids = ground.ids_from_mask(selection_mask(&selection));
            best = Some((selection, value, ids));
        }
    }
    let (selection, value, _) = best.ok_or_else(|| Error::Domain("empty matroid".into()))?;
    Ok((selection, value))
}

/// Which theorem a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    T1,
    T2,
}

/// Planning mode for `certify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Limited,
}

/// A replayable record that a greedy run met (or missed) its bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub theorem: Theorem,
    pub alpha: f64,
    pub beta: f64,
    /// max(realized, declared) eta used in the bound.
    pub eta: f64,
    pub kstar: Option<f64>,
    /// Closed-form bound at (alpha, beta, eta, k*); 0 when vacuous.
    pub bound: f64,
    pub f_greedy: f64,
    pub f_opt: f64,
    /// f_greedy / f_opt, taken as 1 when both are zero.
    pub ratio: f64,
    pub holds: bool,
    /// beta = 1: the bound degenerates to 0 and certifies nothing.
    pub vacuous: bool,
    pub optimal_ids: Vec<String>,
    pub greedy_trace: GreedyTrace,
    pub curvature: CurvatureReport,
}

/// Settings for `certify`.
#[derive(Debug, Clone)]
pub struct CertifyOptions<'a> {
    pub mode: Mode,
    pub graph: Option<&'a CommGraph>,
    pub policy: SelectionPolicy,
    /// Planner-declared eta; the certificate uses max(realized, declared).
    pub declared_eta: Option<f64>,
    pub curvature_budget: usize,
}

impl Default for CertifyOptions<'_> {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            graph: None,
            policy: SelectionPolicy::Exact,
            declared_eta: None,
            curvature_budget: DEFAULT_CURVATURE_BUDGET,
        }
    }
}

/// Runs greedy, measures curvature and eta, evaluates the applicable bound
/// against the brute-force optimum, and assembles the certificate.
pub fn certify(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    options: &CertifyOptions,
) -> Result<BoundCertificate> {
    if let Some(eta) = options.declared_eta {
        if eta < 1.0 || eta.is_nan() {
            return Err(Error::Domain(format!("declared eta must be >= 1, got {eta}")));
        }
    }

    let (theorem, trace, kstar) = match options.mode {
        Mode::Full => (Theorem::T1, greedy_full(oracle, matroid, options.policy)?, None),
        Mode::Limited => {
            let graph = options
                .graph
                .ok_or_else(|| Error::Domain("limited mode requires a communication graph".into()))?;
            let trace = greedy_limited(oracle, matroid, graph, options.policy)?;
            let cover = fractional_clique_cover(graph)?;
            (Theorem::T2, trace, Some(cover.objective))
        }
    };
    certify_trace(oracle, matroid, theorem, trace, kstar, options.declared_eta, options.curvature_budget)
}

/// Certifies an externally produced trace (for example from a custom
/// [`crate::greedy::Selector`]) against the given theorem's bound.
/// T2 requires the clique cover number of the graph the trace ran under.
pub fn certify_trace(
    oracle: &SetFunctionOracle,
    matroid: &PartitionMatroid,
    theorem: Theorem,
    trace: GreedyTrace,
    kstar: Option<f64>,
    declared_eta: Option<f64>,
    curvature_budget: usize,
) -> Result<BoundCertificate> {
    if theorem == Theorem::T2 && kstar.is_none() {
        return Err(Error::Domain("the limited-information bound needs k*".into()));
    }
    let Some(measured_eta) = trace.eta_realized else {
        return Err(Error::Uncertifiable(
            "a zero-marginal element was chosen while the block best was positive; \
             no finite eta satisfies the selection inequality"
                .into(),
        ));
    };
    let eta = measured_eta.max(declared_eta.unwrap_or(1.0));

    let curvature = curvature_report_with_budget(oracle, curvature_budget)?;
    let (alpha, beta) = (curvature.alpha, curvature.beta);

    let bound_result = match theorem {
        Theorem::T1 => bound_t1(alpha, beta, eta),
        Theorem::T2 => bound_t2(alpha, beta, eta, kstar.unwrap()),
    };
    let (bound, vacuous) = match bound_result {
        Ok(b) => (b, false),
        Err(Error::Degenerate(_)) => (0.0, true),
        Err(e) => return Err(e),
    };

    let (opt_selection, f_opt) = brute_force_optimum(oracle, matroid)?;
    let f_greedy = trace.value;
    let ratio = if f_opt > 0.0 { f_greedy / f_opt } else { 1.0 };
    let holds = ratio >= bound - CERT_TOLERANCE;

    Ok(BoundCertificate {
        theorem,
        alpha,
        beta,
        eta,
        kstar,
        bound,
        f_greedy,
        f_opt,
        ratio,
        holds,
        vacuous,
        optimal_ids: oracle.ground().ids_from_mask(selection_mask(&opt_selection)),
        greedy_trace: trace,
        curvature,
    })
}
