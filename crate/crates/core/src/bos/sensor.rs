//! Target/environment sensor model.
//!
//! A measurement of a cell returns a target count z and an environment
//! reading y. Given t true targets and environment type e, z is the sum of
//! Binomial(t, D_e) detections and a geometric false-alarm count with
//! success weight (1−A_e)A_e^j:
//!
//!   P(z|t,e) = Σ_{k=0}^{min(t,z)} C(t,k) D_e^k (1−D_e)^{t−k} (1−A_e) A_e^{z−k}
//!
//! which sums to one over z = 0..∞. Measurements are truncated at `z_max`;
//! probabilities are NOT renormalized — the dropped tail is tracked and
//! bounded instead, keeping the likelihood literal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorModel {
    /// Detection probability per environment type.
    #[serde(rename = "D")]
    pub detection: Vec<f64>,
    /// False-alarm parameter per environment type, < 1.
    #[serde(rename = "A")]
    pub false_alarm: Vec<f64>,
    /// Row-stochastic confusion matrix: Pye[e][y] = P(measure y | true e).
    #[serde(rename = "Pye")]
    pub env_confusion: Vec<Vec<f64>>,
    /// Measurement truncation bound for z.
    pub z_max: usize,
}

impl SensorModel {
    pub fn new(
        detection: Vec<f64>,
        false_alarm: Vec<f64>,
        env_confusion: Vec<Vec<f64>>,
        z_max: usize,
    ) -> Result<Self> {
        let model = Self { detection, false_alarm, env_confusion, z_max };
        model.validate()?;
        Ok(model)
    }

    /// Sensor parameters used throughout the worked example: three
    /// environment types with D = (0.65, 0.8, 0.95), A = (0.4, 0.3, 0.05).
    pub fn reference(z_max: usize) -> Self {
        Self {
            detection: vec![0.65, 0.8, 0.95],
            false_alarm: vec![0.4, 0.3, 0.05],
            env_confusion: vec![
                vec![0.82, 0.09, 0.09],
                vec![0.08, 0.84, 0.08],
                vec![0.06, 0.06, 0.88],
            ],
            z_max,
        }
    }

    pub fn n_env(&self) -> usize {
        self.detection.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.detection.len();
        if n == 0 {
            return Err(Error::Validation("sensor needs at least one environment type".into()));
        }
        if self.false_alarm.len() != n || self.env_confusion.len() != n {
            return Err(Error::Validation(format!(
                "sensor parameter lengths disagree: D has {n}, A has {}, Pye has {} rows",
                self.false_alarm.len(),
                self.env_confusion.len()
            )));
        }
        for (e, &d) in self.detection.iter().enumerate() {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Validation(format!("D[{e}] = {d} outside [0,1]")));
            }
        }
        for (e, &a) in self.false_alarm.iter().enumerate() {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::Validation(format!("A[{e}] = {a} outside [0,1)")));
            }
        }
        for (e, row) in self.env_confusion.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!("Pye row {e} has {} entries", row.len())));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::Validation(format!("Pye row {e} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!("Pye row {e} sums to {s}, expected 1")));
            }
        }
        Ok(())
    }

    /// P(z | t, e). Errors outside the truncation bound or environment range.
    pub fn likelihood(&self, z: usize, t: usize, e: usize) -> Result<f64> {
        if e >= self.n_env() {
            return Err(Error::Domain(format!("environment {e} out of range")));
        }
        if z > self.z_max {
            return Err(Error::Domain(format!("z = {z} exceeds z_max = {}", self.z_max)));
        }
        Ok(self.likelihood_unchecked(z, t, e))
    }

    pub(crate) fn likelihood_unchecked(&self, z: usize, t: usize, e: usize) -> f64 {
        let d = self.detection[e];
        let a = self.false_alarm[e];
        let mut total = 0.0;
        for k in 0..=t.min(z) {
            total += binomial(t, k) as f64
                * d.powi(k as i32)
                * (1.0 - d).powi((t - k) as i32)
                * (1.0 - a)
                * a.powi((z - k) as i32);
        }
        total
    }

    /// P(y | e) from the confusion matrix.
    pub fn env_likelihood(&self, y: usize, e: usize) -> Result<f64> {
        if e >= self.n_env() || y >= self.n_env() {
            return Err(Error::Domain(format!("environment indices (y={y}, e={e}) out of range")));
        }
        Ok(self.env_confusion[e][y])
    }

    /// Probability mass beyond the truncation bound: the largest
    /// 1 − Σ_{z ≤ z_max} P(z|t,e) over t ≤ t_max and all e.
    pub fn truncated_tail(&self, t_max: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for e in 0..self.n_env() {
            for t in 0..=t_max {
                let covered: f64 = (0..=self.z_max).map(|z| self.likelihood_unchecked(z, t, e)).sum();
                worst = worst.max(1.0 - covered);
            }
        }
        worst
    }

    /// Smallest z_max with truncated tail below `eps` for counts up to
    /// `t_max`, given this model's D/A parameters.
    pub fn z_max_for_tail(&self, eps: f64, t_max: usize) -> Result<usize> {
        let mut probe = self.clone();
        for z_max in t_max..10_000 {
            probe.z_max = z_max;
            if probe.truncated_tail(t_max) < eps {
                return Ok(z_max);
            }
        }
        Err(Error::Capacity(format!("no z_max below 10000 achieves tail < {eps}")))
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_env(d: f64, a: f64, z_max: usize) -> SensorModel {
        SensorModel::new(vec![d], vec![a], vec![vec![1.0]], z_max).unwrap()
    }

    #[test]
    fn zero_targets_is_geometric_false_alarms() {
        let s = single_env(0.8, 0.3, 10);
        for z in 0..=10 {
            let expected = 0.7 * 0.3f64.powi(z as i32);
            assert!((s.likelihood(z, 0, 0).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn no_false_alarms_is_pure_binomial() {
        let s = single_env(0.8, 0.0, 5);
        assert!((s.likelihood(0, 1, 0).unwrap() - 0.2).abs() < 1e-15);
        assert!((s.likelihood(1, 1, 0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(s.likelihood(2, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn worked_two_term_expansion() {
        // D=0.8, A=0.3, t=1, z=1: 0.8*0.7 + 0.2*0.7*0.3 = 0.602
        let s = single_env(0.8, 0.3, 6);
        assert!((s.likelihood(1, 1, 0).unwrap() - 0.602).abs() < 1e-15);
    }

    #[test]
    fn likelihood_sums_to_one_with_generous_truncation() {
        let s = SensorModel::reference(60);
        for e in 0..3 {
            for t in 0..=2 {
                let total: f64 = (0..=60).map(|z| s.likelihood_unchecked(z, t, e)).sum();
                assert!((total - 1.0).abs() < 1e-12, "t={t} e={e}: {total}");
            }
        }
    }

    #[test]
    fn tail_tracking_and_zmax_search() {
        let s = SensorModel::reference(12);
        let tail = s.truncated_tail(2);
        assert!(tail > 1e-9, "reference tail at z_max=12 is visible: {tail}");
        assert!(tail < 1e-3);
        let z = s.z_max_for_tail(1e-10, 2).unwrap();
        let mut tight = s.clone();
        tight.z_max = z;
        assert!(tight.truncated_tail(2) < 1e-10);
        assert!(z > 12 && z < 120);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(SensorModel::new(vec![0.5], vec![1.0], vec![vec![1.0]], 5).is_err());
        assert!(SensorModel::new(vec![1.5], vec![0.1], vec![vec![1.0]], 5).is_err());
        assert!(SensorModel::new(vec![0.5], vec![0.1], vec![vec![0.9, 0.2]], 5).is_err());
        assert!(SensorModel::new(vec![0.5, 0.6], vec![0.1], vec![vec![1.0]], 5).is_err());
    }

    #[test]
    fn out_of_range_measurement_is_domain_error() {
        let s = single_env(0.8, 0.3, 4);
        assert!(s.likelihood(5, 0, 0).is_err());
        assert!(s.likelihood(1, 0, 1).is_err());
    }
}
