//! Search-area maps and the joint benefit-of-search objective.
//!
//! A map is a set of disjoint cells sharing one sensor model. The joint
//! objective of a set of paths is cell-separable: each cell contributes the
//! benefit of as many visits as the selected paths pay it in total,
//!
//!   f(S) = Σ_cells benefit(cell, visits(cell, S)).
//!
//! With a truncation cap in force, visits beyond the cap earn nothing: the
//! marginal gain g(j) is zero for j ≥ cap, which drives the generalized
//! curvature of every cell with positive benefit to 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bos::cell::CellModel;
use crate::bos::risk::risk_profile;
use crate::bos::sensor::SensorModel;
use crate::curvature::interchangeable_cell_curvature;
use crate::error::{Error, Result};
use crate::setfn::{iter_mask, GroundSet, Mask, SetFunctionOracle};

/// Largest k the per-cell curvature table will evaluate.
pub const MAX_TABLE_K: usize = 6;

/// One cell of the search area.
#[derive(Debug, Clone)]
pub struct MapCell {
    pub id: String,
    pub model: CellModel,
}

/// Disjoint cells plus the sensor every agent carries.
#[derive(Debug, Clone)]
pub struct GridMap {
    pub sensor: SensorModel,
    cells: Vec<MapCell>,
    index: BTreeMap<String, usize>,
}

impl GridMap {
    pub fn new(sensor: SensorModel, cells: Vec<MapCell>) -> Result<Self> {
        sensor.validate()?;
        let mut index = BTreeMap::new();
        for (i, cell) in cells.iter().enumerate() {
            cell.model.validate()?;
            cell.model.validate_against(&sensor)?;
            if index.insert(cell.id.clone(), i).is_some() {
                return Err(Error::Domain(format!("duplicate cell id {:?}", cell.id)));
            }
        }
        Ok(Self { sensor, cells, index })
    }

    pub fn cells(&self) -> &[MapCell] {
        &self.cells
    }

    pub fn cell_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown cell id {id:?}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)?;
        let sensor = file.sensor;
        let cells = file
            .cells
            .into_iter()
            .map(|spec| {
                let model = CellModel::with_poisson_prior(
                    spec.lambda_t,
                    spec.t_max,
                    spec.prior_e,
                    spec.c1,
                    spec.c2,
                )?;
                Ok(MapCell { id: spec.id, model })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sensor, cells)
    }
}

/// File schema:
/// `{"sensor": {"D": [...], "A": [...], "Pye": [[...]], "z_max": 12},
///   "cells": [{"id": "r3c7", "prior_e": [...], "lambda_t": 0.2,
///              "t_max": 2, "c1": 3, "c2": 1}, ...]}`
#[derive(Debug, Serialize, Deserialize)]
struct MapFile {
    sensor: SensorModel,
    cells: Vec<CellSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CellSpec {
    id: String,
    prior_e: Vec<f64>,
    lambda_t: f64,
    t_max: usize,
    c1: f64,
    c2: f64,
}

/// The joint objective bound to a ground set of candidate paths.
///
/// Per-cell benefits are precomputed up to the largest visit count any
/// subset of paths can produce (clamped by the truncation cap), so oracle
/// evaluations are table lookups plus a visit count.
pub struct BosObjective {
    ground: Arc<GroundSet>,
    /// Per element, (cell index, visit count) pairs from its path payload.
    element_visits: Vec<Vec<(usize, u32)>>,
    /// Per cell, benefit[k] = r(0) − r(k) for k = 0..=table_len.
    benefit: Vec<Vec<f64>>,
    k_cap: Option<usize>,
}

impl BosObjective {
    /// Validates every path against the map and precomputes benefit tables.
    ///
    /// Errors with `Capacity` if some cell's worst-case visit count makes
    /// the risk recursion intractable; setting `k_cap` restores feasibility
    /// by truncating marginal gains.
    pub fn new(map: &GridMap, ground: Arc<GroundSet>, k_cap: Option<usize>) -> Result<Self> {
        let mut element_visits = Vec::with_capacity(ground.len());
        let mut worst_visits = vec![0usize; map.cells().len()];
        for element in ground.elements() {
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for cell_id in &element.path {
                *counts.entry(map.cell_index(cell_id)?).or_insert(0) += 1;
            }
            for (&cell, &count) in &counts {
                worst_visits[cell] += count as usize;
            }
            element_visits.push(counts.into_iter().collect());
        }

        let mut benefit = Vec::with_capacity(map.cells().len());
        for (cell, &worst) in map.cells().iter().zip(&worst_visits) {
            let depth = match k_cap {
                Some(cap) => worst.min(cap),
                None => worst,
            };
            let profile = risk_profile(&cell.model, &map.sensor, depth)?;
            benefit.push(profile.iter().map(|&r| profile[0] - r).collect());
        }

        Ok(Self { ground, element_visits, benefit, k_cap })
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    /// Total visits each selected path pays to `cell`, capped if truncating.
    fn effective_visits(&self, cell: usize, subset: Mask) -> usize {
        let mut visits = 0usize;
        for i in iter_mask(subset) {
            for &(c, count) in &self.element_visits[i] {
                if c == cell {
                    visits += count as usize;
                }
            }
        }
        match self.k_cap {
            Some(cap) => visits.min(cap),
            None => visits,
        }
    }

    pub fn value(&self, subset: Mask) -> Result<f64> {
        self.ground.check_mask(subset)?;
        Ok(self.value_unchecked(subset))
    }

    fn value_unchecked(&self, subset: Mask) -> f64 {
        (0..self.benefit.len())
            .map(|c| self.benefit[c][self.effective_visits(c, subset)])
            .sum()
    }

    /// Wraps the objective as a memoizing oracle for the planners.
    pub fn into_oracle(self) -> SetFunctionOracle {
        let ground = Arc::clone(&self.ground);
        SetFunctionOracle::from_fn(ground, move |m| self.value_unchecked(m), true)
    }
}

/// Joint objective of one subset of paths, straight from the map.
pub fn joint_objective(
    map: &GridMap,
    ground: &Arc<GroundSet>,
    subset: Mask,
    k_cap: Option<usize>,
) -> Result<f64> {
    BosObjective::new(map, Arc::clone(ground), k_cap)?.value(subset)
}

/// One row of the per-cell curvature table.
#[derive(Debug, Clone, Serialize)]
pub struct CellCurvatureRow {
    pub cell: String,
    pub k: usize,
    /// f(k)/r(0): fraction of the prior risk removed by k visits.
    pub normalized_benefit: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Per-cell rows plus per-k maxima across cells.
#[derive(Debug, Clone, Serialize)]
pub struct CellCurvatureTable {
    pub rows: Vec<CellCurvatureRow>,
    /// (k, max alpha, max beta, max normalized benefit)
    pub maxima: Vec<(usize, f64, f64, f64)>,
}

impl CellCurvatureTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,k,normalized_benefit,alpha,beta\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.cell, r.k, r.normalized_benefit, r.alpha, r.beta
            ));
        }
        for &(k, a, b, nb) in &self.maxima {
            out.push_str(&format!("max,{k},{nb},{a},{b}\n"));
        }
        out
    }
}

/// Per-cell generalized and inverse generalized curvature for visit budgets
/// `k_values`, from the marginal sequence g(j) = f(j+1) − f(j).
///
/// With `k_cap` set, marginals at or beyond the cap are zero (the truncation
/// convention), so any cell with positive benefit reports alpha = 1 once
/// k exceeds the cap.
pub fn cell_curvature_table(
    map: &GridMap,
    k_values: &[usize],
    k_cap: Option<usize>,
) -> Result<CellCurvatureTable> {
    let Some(&k_max) = k_values.iter().max() else {
        return Err(Error::Domain("no k values given".into()));
    };
    if k_max > MAX_TABLE_K {
        return Err(Error::Capacity(format!(
            "curvature table limited to k ≤ {MAX_TABLE_K}, got {k_max}"
        )));
    }
    if k_values.contains(&0) {
        return Err(Error::Domain("k = 0 has no marginals to analyze".into()));
    }

    let mut rows = Vec::new();
    let mut maxima: Vec<(usize, f64, f64, f64)> =
        k_values.iter().map(|&k| (k, 0.0, 0.0, 0.0)).collect();

    for cell in map.cells() {
        let depth = match k_cap {
            Some(cap) => k_max.min(cap),
            None => k_max,
        };
        let profile = risk_profile(&cell.model, &map.sensor, depth)?;
        let r0 = profile[0];
        // monotonicity can leave float dust at -1e-17; clamp for the alpha/beta scan
        let marginal = |j: usize| -> f64 {
            if k_cap.is_some_and(|cap| j >= cap) || j + 1 >= profile.len() {
                0.0
            } else {
                (profile[j] - profile[j + 1]).max(0.0)
            }
        };
        for (slot, &k) in k_values.iter().enumerate() {
            let g: Vec<f64> = (0..k).map(marginal).collect();
            let (alpha, beta) = interchangeable_cell_curvature(&g)?;
            let f_k = r0 - profile[k.min(depth).min(profile.len() - 1)];
            let normalized = if r0 > 0.0 { f_k / r0 } else { 0.0 };
            rows.push(CellCurvatureRow {
                cell: cell.id.clone(),
                k,
                normalized_benefit: normalized,
                alpha,
                beta,
            });
            let m = &mut maxima[slot];
            m.1 = m.1.max(alpha);
            m.2 = m.2.max(beta);
            m.3 = m.3.max(normalized);
        }
    }
    Ok(CellCurvatureTable { rows, maxima })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::GroundElement;

    fn tiny_map() -> GridMap {
        let sensor = SensorModel::new(vec![0.8], vec![0.3], vec![vec![1.0]], 8).unwrap();
        let cells = vec![
            MapCell {
                id: "c1".into(),
                model: CellModel::new(vec![0.9, 0.1], vec![1.0], 3.0, 1.0).unwrap(),
            },
            MapCell {
                id: "c2".into(),
                model: CellModel::new(vec![0.6, 0.4], vec![1.0], 3.0, 1.0).unwrap(),
            },
        ];
        GridMap::new(sensor, cells).unwrap()
    }

    fn path_ground(paths: &[(&str, usize, &[&str])]) -> Arc<GroundSet> {
        let elements = paths
            .iter()
            .map(|&(id, block, path)| GroundElement {
                id: id.into(),
                block,
                path: path.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        Arc::new(GroundSet::new(elements).unwrap())
    }

    #[test]
    fn empty_selection_is_zero() {
        let map = tiny_map();
        let ground = path_ground(&[("p1", 1, &["c1"])]);
        assert_eq!(joint_objective(&map, &ground, 0, None).unwrap(), 0.0);
    }

    #[test]
    fn single_path_single_visit_matches_per_cell_benefit() {
        let map = tiny_map();
        let ground = path_ground(&[("p1", 1, &["c1"])]);
        let v = joint_objective(&map, &ground, 1, None).unwrap();
        let expected =
            crate::bos::risk::benefit(&map.cells()[0].model, &map.sensor, 1).unwrap();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn two_paths_same_cell_compose_as_two_visits() {
        let map = tiny_map();
        let ground = path_ground(&[("p1", 1, &["c1"]), ("q1", 2, &["c1"])]);
        let v = joint_objective(&map, &ground, 0b11, None).unwrap();
        let expected =
            crate::bos::risk::benefit(&map.cells()[0].model, &map.sensor, 2).unwrap();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn unknown_cell_is_domain_error() {
        let map = tiny_map();
        let ground = path_ground(&[("p1", 1, &["nowhere"])]);
        assert!(matches!(
            BosObjective::new(&map, ground, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn truncation_cap_freezes_value() {
        let map = tiny_map();
        let ground = path_ground(&[("p1", 1, &["c1"]), ("q1", 2, &["c1"]), ("r1", 3, &["c1"])]);
        let capped = BosObjective::new(&map, Arc::clone(&ground), Some(1)).unwrap();
        let v1 = capped.value(0b001).unwrap();
        let v3 = capped.value(0b111).unwrap();
        assert_eq!(v1, v3);
        let uncapped = BosObjective::new(&map, ground, None).unwrap();
        assert!(uncapped.value(0b111).unwrap() > v1);
    }

    #[test]
    fn table_k1_is_all_zero_curvature() {
        let map = tiny_map();
        let table = cell_curvature_table(&map, &[1, 2], None).unwrap();
        for row in table.rows.iter().filter(|r| r.k == 1) {
            assert_eq!((row.alpha, row.beta), (0.0, 0.0));
            assert!(row.normalized_benefit > 0.0);
        }
        let (_, a1, b1, _) = table.maxima[0];
        assert_eq!((a1, b1), (0.0, 0.0));
    }

    #[test]
    fn truncation_forces_alpha_one() {
        let map = tiny_map();
        let table = cell_curvature_table(&map, &[3], Some(2)).unwrap();
        for row in &table.rows {
            assert_eq!(row.alpha, 1.0, "cell {} alpha {}", row.cell, row.alpha);
        }
    }

    #[test]
    fn csv_shape() {
        let map = tiny_map();
        let table = cell_curvature_table(&map, &[1], None).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "cell,k,normalized_benefit,alpha,beta");
        assert_eq!(csv.lines().count(), 1 + 2 + 1); // header + 2 cells + max row
    }

    #[test]
    fn map_json_parses_lambda_priors() {
        let text = r#"{
            "sensor": {"D": [0.8], "A": [0.3], "Pye": [[1.0]], "z_max": 8},
            "cells": [
                {"id": "c1", "prior_e": [1.0], "lambda_t": 0.2, "t_max": 2, "c1": 3, "c2": 1}
            ]
        }"#;
        let map = GridMap::from_json(text).unwrap();
        assert_eq!(map.cells().len(), 1);
        let pt = &map.cells()[0].model.prior_t;
        assert_eq!(pt.len(), 3);
        assert!((pt.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pt[0] > 0.8);
    }
}
