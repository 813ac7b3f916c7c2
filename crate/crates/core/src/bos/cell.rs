//! Per-cell target model, Bayes estimation under asymmetric linear loss,
//! and single-measurement belief updates.

use serde::{Deserialize, Serialize};

use crate::bos::sensor::SensorModel;
use crate::error::{Error, Result};

/// The target/environment prior and loss parameters of one map cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellModel {
    pub t_max: usize,
    /// Prior over target counts 0..=t_max.
    pub prior_t: Vec<f64>,
    /// Prior over environment types.
    pub prior_e: Vec<f64>,
    /// Unit cost of underestimating the target count.
    pub c1: f64,
    /// Unit cost of overestimating the target count.
    pub c2: f64,
}

impl CellModel {
    pub fn new(prior_t: Vec<f64>, prior_e: Vec<f64>, c1: f64, c2: f64) -> Result<Self> {
        if prior_t.is_empty() {
            return Err(Error::Validation("prior_t must be non-empty".into()));
        }
        let cell = Self { t_max: prior_t.len() - 1, prior_t, prior_e, c1, c2 };
        cell.validate()?;
        Ok(cell)
    }

    /// Truncated Poisson(lambda) prior on {0..t_max}, renormalized.
    pub fn with_poisson_prior(
        lambda: f64,
        t_max: usize,
        prior_e: Vec<f64>,
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        if lambda < 0.0 || lambda.is_nan() {
            return Err(Error::Validation(format!("lambda must be >= 0, got {lambda}")));
        }
        let prior_t = truncated_poisson(lambda, t_max);
        Self::new(prior_t, prior_e, c1, c2)
    }

    pub fn validate(&self) -> Result<()> {
        check_distribution("prior_t", &self.prior_t)?;
        check_distribution("prior_e", &self.prior_e)?;
        if self.c1 <= 0.0 || self.c2 <= 0.0 || self.c1.is_nan() || self.c2.is_nan() {
            return Err(Error::Validation(format!(
                "costs must be positive: c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        Ok(())
    }

    /// Sanity between a cell and the sensor it is searched with.
    pub fn validate_against(&self, sensor: &SensorModel) -> Result<()> {
        if self.prior_e.len() != sensor.n_env() {
            return Err(Error::Validation(format!(
                "cell has {} environment types, sensor has {}",
                self.prior_e.len(),
                sensor.n_env()
            )));
        }
        Ok(())
    }

    /// Asymmetric linear loss: c1·(t−δ) when underestimating, c2·(δ−t) when
    /// overestimating, 0 when exact.
    pub fn loss(&self, t: usize, estimate: usize) -> f64 {
        if estimate < t {
            self.c1 * (t - estimate) as f64
        } else {
            self.c2 * (estimate - t) as f64
        }
    }
}

pub(crate) fn check_distribution(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Validation(format!("{name} must be non-empty")));
    }
    if p.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Validation(format!("{name} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("{name} sums to {s}, expected 1 ± 1e-12")));
    }
    Ok(())
}

pub(crate) fn truncated_poisson(lambda: f64, t_max: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(t_max + 1);
    let mut term = (-lambda).exp(); // lambda^0 / 0!
    for t in 0..=t_max {
        if t > 0 {
            term *= lambda / t as f64;
        }
        w.push(term);
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|&x| x / s).collect()
}

/// Estimate minimizing posterior expected loss, with its attained risk.
/// Ties break toward the larger estimate.
pub fn bayes_estimate(posterior_t: &[f64], c1: f64, c2: f64) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for delta in 0..posterior_t.len() {
        let risk: f64 = posterior_t
            .iter()
            .enumerate()
            .map(|(t, &p)| {
                p * if delta < t { c1 * (t - delta) as f64 } else { c2 * (delta - t) as f64 }
            })
            .sum();
        if risk <= best.1 {
            best = (delta, risk);
        }
    }
    best
}

/// Risk attained by the Bayes estimate for unnormalized weights (the argmin
/// is scale-invariant, so no division is needed).
pub(crate) fn bayes_risk_unnormalized(weights: &[f64], c1: f64, c2: f64) -> f64 {
    bayes_estimate(weights, c1, c2).1
}

/// Factored belief over one cell: a posterior over target counts and a
/// posterior over environment types, with the measurement history that
/// produced them.
///
/// The single-measurement update keeps the two marginals separate: the
/// environment posterior conditions on y alone, and the target posterior
/// mixes per-environment target updates under that environment posterior.
/// This factored view discards the target/environment coupling that z
/// induces; the risk recursion in [`crate::bos::risk`] carries the joint
/// posterior instead so that sequence probabilities and posteriors stay
/// mutually consistent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeliefState {
    pub pt: Vec<f64>,
    pub pe: Vec<f64>,
    /// (z, y) pairs applied so far.
    pub history: Vec<(usize, usize)>,
}

impl BeliefState {
    pub fn from_cell(cell: &CellModel) -> Self {
        Self { pt: cell.prior_t.clone(), pe: cell.prior_e.clone(), history: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        check_distribution("pt", &self.pt)?;
        check_distribution("pe", &self.pe)
    }

    /// Applies one (z, y) measurement:
    ///
    ///   pe'(e) ∝ Pye[e][y] · pe(e)
    ///   pt'(t)  = Σ_e [P(z|t,e) pt(t) / P(z|e)] · pe'(e)
    ///
    /// Errors with `DegenerateEvidence` when the measurement has zero
    /// probability under the current belief (impossible under truncation).
    pub fn update(&self, sensor: &SensorModel, z: usize, y: usize) -> Result<BeliefState> {
        let n_env = sensor.n_env();
        if self.pe.len() != n_env {
            return Err(Error::Domain(format!(
                "belief has {} environment types, sensor has {n_env}",
                self.pe.len()
            )));
        }
        if y >= n_env {
            return Err(Error::Domain(format!("environment reading y = {y} out of range")));
        }
        if z > sensor.z_max {
            return Err(Error::Domain(format!("z = {z} exceeds z_max = {}", sensor.z_max)));
        }

        let mut pe_new: Vec<f64> = (0..n_env).map(|e| sensor.env_confusion[e][y] * self.pe[e]).collect();
        let cy: f64 = pe_new.iter().sum();
        if cy <= 0.0 {
            return Err(Error::DegenerateEvidence(format!(
                "environment reading y = {y} has zero probability under the current belief"
            )));
        }
        for v in pe_new.iter_mut() {
            *v /= cy;
        }

        let mut pt_new = vec![0.0; self.pt.len()];
        for (e, &pe_post) in pe_new.iter().enumerate() {
            if pe_post == 0.0 {
                continue;
            }
            let pze: f64 = self
                .pt
                .iter()
                .enumerate()
                .map(|(t, &p)| sensor.likelihood_unchecked(z, t, e) * p)
                .sum();
            if pze <= 0.0 {
                return Err(Error::DegenerateEvidence(format!(
                    "measurement z = {z} has zero probability in environment {e}"
                )));
            }
            for (t, v) in pt_new.iter_mut().enumerate() {
                *v += sensor.likelihood_unchecked(z, t, e) * self.pt[t] / pze * pe_post;
            }
        }

        let mut history = self.history.clone();
        history.push((z, y));
        Ok(BeliefState { pt: pt_new, pe: pe_new, history })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_prior_normalizes() {
        let p = truncated_poisson(0.2, 2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn bayes_estimate_point_mass() {
        let (d, r) = bayes_estimate(&[0.0, 1.0, 0.0], 3.0, 1.0);
        assert_eq!(d, 1);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn bayes_estimate_asymmetric_coin() {
        // pt = (0.5, 0.5), c1 = 3, c2 = 1: overestimating is cheaper
        let (d, r) = bayes_estimate(&[0.5, 0.5], 3.0, 1.0);
        assert_eq!(d, 1);
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_loss_picks_median() {
        let third = 1.0 / 3.0;
        let (d, _) = bayes_estimate(&[third, third, third], 1.0, 1.0);
        assert_eq!(d, 1);
    }

    #[test]
    fn ties_break_toward_larger_estimate() {
        let (d, r) = bayes_estimate(&[0.5, 0.0, 0.5], 1.0, 1.0);
        assert_eq!(d, 2);
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_confusion_collapses_environment() {
        let sensor = SensorModel::new(
            vec![0.8, 0.6],
            vec![0.3, 0.2],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            8,
        )
        .unwrap();
        let cell = CellModel::new(vec![0.5, 0.5], vec![0.5, 0.5], 3.0, 1.0).unwrap();
        let b = BeliefState::from_cell(&cell).update(&sensor, 0, 1).unwrap();
        assert_eq!(b.pe, vec![0.0, 1.0]);
        assert_eq!(b.history, vec![(0, 1)]);
    }

    #[test]
    fn perfect_detector_seeing_nothing_pins_zero() {
        let sensor = SensorModel::new(vec![1.0], vec![0.0], vec![vec![1.0]], 5).unwrap();
        let cell = CellModel::new(vec![0.25, 0.5, 0.25], vec![1.0], 3.0, 1.0).unwrap();
        let b = BeliefState::from_cell(&cell).update(&sensor, 0, 0).unwrap();
        assert!((b.pt[0] - 1.0).abs() < 1e-15);
        assert_eq!(&b.pt[1..], &[0.0, 0.0]);
    }

    #[test]
    fn single_env_update_matches_hand_bayes() {
        // pt = (0.9, 0.1), D = 0.8, A = 0.3, z = 1:
        // P(1|0) = 0.21, P(1|1) = 0.602
        // pt'(1) = 0.1*0.602 / (0.9*0.21 + 0.1*0.602)
        let sensor = SensorModel::new(vec![0.8], vec![0.3], vec![vec![1.0]], 6).unwrap();
        let cell = CellModel::new(vec![0.9, 0.1], vec![1.0], 3.0, 1.0).unwrap();
        let b = BeliefState::from_cell(&cell).update(&sensor, 1, 0).unwrap();
        let expected = 0.0602 / (0.189 + 0.0602);
        assert!((b.pt[1] - expected).abs() < 1e-12);
        assert!((expected - 0.2416).abs() < 1e-4);
        assert!((b.pt.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_measurement_is_degenerate_evidence() {
        // perfect detector, prior certain of zero targets, but z = 1 observed
        let sensor = SensorModel::new(vec![1.0], vec![0.0], vec![vec![1.0]], 5).unwrap();
        let cell = CellModel::new(vec![1.0, 0.0], vec![1.0], 3.0, 1.0).unwrap();
        let r = BeliefState::from_cell(&cell).update(&sensor, 1, 0);
        assert!(matches!(r, Err(Error::DegenerateEvidence(_))));
    }

    #[test]
    fn cell_validation() {
        assert!(CellModel::new(vec![0.5, 0.6], vec![1.0], 3.0, 1.0).is_err());
        assert!(CellModel::new(vec![0.5, 0.5], vec![1.0], 0.0, 1.0).is_err());
        assert!(CellModel::new(vec![0.5, 0.5], vec![0.9], 3.0, 1.0).is_err());
        assert!(CellModel::with_poisson_prior(0.2, 2, vec![1.0], 3.0, 1.0).is_ok());
    }
}
