//! Greedy maximization of normalized monotone set functions under simple
//! partition matroid constraints, with exact curvature computation and
//! machine-checkable suboptimality certificates.
//!
//! The pipeline: load or build a [`setfn::SetFunctionOracle`] over a ground
//! set of per-agent candidate plans, run [`greedy`] in full- or
//! limited-information mode, measure generalized and inverse generalized
//! curvature with [`curvature`], solve the fractional clique cover of the
//! communication graph with [`graphs`], and emit a [`bounds::BoundCertificate`]
//! comparing the achieved ratio against the closed-form guarantee. The
//! [`bos`] module supplies the flagship non-submodular objective: Bayes-risk
//! reduction from repeated searches of map cells.

pub mod bos;
pub mod bounds;
pub mod curvature;
pub mod error;
pub mod graphs;
pub mod greedy;
pub mod lp;
pub mod matroid;
pub mod random;
pub mod setfn;
pub mod suite;

pub use error::{Error, Result};
