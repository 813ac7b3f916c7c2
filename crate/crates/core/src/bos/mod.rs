//! The benefit-of-search objective: sensor model, Bayesian belief updates,
//! anticipated-risk recursion, and the joint path-planning objective.
//!
//! This is the flagship normalized, monotone, non-submodular objective the
//! certification machinery is exercised on: repeated visits to a cell can
//! have *increasing* marginal value under asymmetric estimation loss, which
//! rules out the classic submodular guarantees and makes the curvature
//! bounds earn their keep.

mod cell;
mod map;
mod risk;
mod sensor;

pub use cell::{bayes_estimate, BeliefState, CellModel};
pub use map::{
    cell_curvature_table, joint_objective, BosObjective, CellCurvatureRow, CellCurvatureTable,
    GridMap, MapCell, MAX_TABLE_K,
};
pub use risk::{anticipated_risk, benefit, risk_profile, sequence_probability_mass};
pub use sensor::SensorModel;
