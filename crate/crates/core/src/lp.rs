//! Small dense linear programs: min c·x subject to A·x ≥ b, x ≥ 0.
//!
//! Two independent solvers live here on purpose. `simplex_min_ge` is the
//! production path (two-phase tableau simplex, Bland's rule so cycling is
//! impossible); `vertex_enumeration_min_ge` brute-forces every basic point
//! of the feasible polyhedron and is used by tests to cross-check the
//! simplex objective. Problem sizes are tiny (clique-cover LPs on ≤ 20
//! agents), so neither solver needs sparsity or factorization updates.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// Optimal objective and primal solution of min c·x, A·x ≥ b, x ≥ 0.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Two-phase dense simplex with Bland's anti-cycling rule.
///
/// Errors with `Validation` if the program is infeasible and `Domain` on
/// shape mismatches. Unboundedness cannot occur for covering programs with
/// c ≥ 0 but is reported as a validation error if detected.
pub fn simplex_min_ge(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("LP dimension mismatch".into()));
    }
    if m == 0 {
        return Ok(LpSolution { objective: 0.0, x: vec![0.0; n] });
    }

    // Standard form: A x − s + t = b with b ≥ 0 (flip rows if needed),
    // surplus s, artificials t. Columns: [x (n) | s (m) | t (m)].
    let total = n + 2 * m;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i] < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let mut row = vec![0.0; total];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = -sign;
        row[n + m + i] = 1.0;
        rows.push(row);
        rhs.push(sign * b[i]);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();

    // Phase 1: minimize the artificial sum.
    let phase1_cost: Vec<f64> = (0..total).map(|j| if j >= n + m { 1.0 } else { 0.0 }).collect();
    let z1 = run_simplex(&mut rows, &mut rhs, &mut basis, &phase1_cost, total)?;
    if z1 > 1e-7 {
        return Err(Error::Validation(format!("LP infeasible (phase-1 objective {z1})")));
    }

    // Drive leftover artificials out of the basis; drop redundant rows.
    let mut keep = vec![true; rows.len()];
    for i in 0..rows.len() {
        if basis[i] >= n + m {
            let pivot_col = (0..n + m).find(|&j| rows[i][j].abs() > EPS);
            match pivot_col {
                Some(j) => pivot(&mut rows, &mut rhs, &mut basis, i, j),
                None => keep[i] = false,
            }
        }
    }
    let mut filtered_rows = Vec::new();
    let mut filtered_rhs = Vec::new();
    let mut filtered_basis = Vec::new();
    for i in 0..rows.len() {
        if keep[i] {
            filtered_rows.push(std::mem::take(&mut rows[i]));
            filtered_rhs.push(rhs[i]);
            filtered_basis.push(basis[i]);
        }
    }
    let mut rows = filtered_rows;
    let mut rhs = filtered_rhs;
    let mut basis = filtered_basis;

    // Phase 2 over the original columns (artificials barred from entering).
    let mut phase2_cost = vec![0.0; total];
    phase2_cost[..n].copy_from_slice(c);
    let objective = run_simplex(&mut rows, &mut rhs, &mut basis, &phase2_cost, n + m)?;

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = rhs[i];
        }
    }
    Ok(LpSolution { objective, x })
}

/// Runs the simplex loop on the tableau, minimizing `cost`. Only columns
/// `< allowed` may enter the basis. Returns the final objective value.
fn run_simplex(
    rows: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    allowed: usize,
) -> Result<f64> {
    let m = rows.len();
    loop {
        // Reduced costs r_j = c_j − c_B · column_j (recomputed densely:
        // instances are tiny and this avoids drift in an incremental row).
        let mut entering = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * rows[i][j];
            }
            if r < -EPS {
                entering = Some(j); // Bland: smallest eligible index
                break;
            }
        }
        let Some(j) = entering else {
            let obj = (0..m).map(|i| cost[basis[i]] * rhs[i]).sum();
            return Ok(obj);
        };

        // Ratio test; Bland tie-break on the smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if rows[i][j] > EPS {
                let ratio = rhs[i] / rows[i][j];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - EPS || (ratio < lr + EPS && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return Err(Error::Validation("LP unbounded".into()));
        };
        pivot(rows, rhs, basis, i, j);
    }
}

fn pivot(rows: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], pr: usize, pc: usize) {
    let p = rows[pr][pc];
    for v in rows[pr].iter_mut() {
        *v /= p;
    }
    rhs[pr] /= p;
    for i in 0..rows.len() {
        if i == pr {
            continue;
        }
        let factor = rows[i][pc];
        if factor == 0.0 {
            continue;
        }
        for j in 0..rows[i].len() {
            let delta = factor * rows[pr][j];
            rows[i][j] -= delta;
        }
        rhs[i] -= factor * rhs[pr];
    }
    basis[pr] = pc;
}

/// Budget on basis combinations tried by the naive solver.
pub const VERTEX_ENUM_BUDGET: u64 = 2_000_000;

/// Naive optimum of min c·x, A·x ≥ b, x ≥ 0 by enumerating candidate basic
/// points: every choice of n tight constraints from the m inequality rows
/// plus the n non-negativity rows. Exponential and proud of it; exists to
/// certify the simplex on small instances.
pub fn vertex_enumeration_min_ge(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<f64> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("LP dimension mismatch".into()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let combos = binomial(m + n, n);
    if combos > VERTEX_ENUM_BUDGET {
        return Err(Error::Capacity(format!(
            "vertex enumeration needs {combos} basis combinations, budget {VERTEX_ENUM_BUDGET}"
        )));
    }

    // Rows 0..m are A x = b candidates; rows m..m+n are x_j = 0.
    let row_of = |idx: usize, out: &mut [f64]| {
        if idx < m {
            out.copy_from_slice(&a[idx]);
        } else {
            out.fill(0.0);
            out[idx - m] = 1.0;
        }
    };
    let rhs_of = |idx: usize| if idx < m { b[idx] } else { 0.0 };

    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..n).collect();
    let total = m + n;
    loop {
        // Solve the n×n tight system for this combination.
        let mut mat = vec![vec![0.0; n]; n];
        let mut rv = vec![0.0; n];
        for (r, &idx) in combo.iter().enumerate() {
            row_of(idx, &mut mat[r]);
            rv[r] = rhs_of(idx);
        }
        if let Some(x) = solve_square(&mut mat, &mut rv) {
            let feasible = x.iter().all(|&v| v >= -1e-7)
                && (0..m).all(|i| {
                    let lhs: f64 = (0..n).map(|j| a[i][j] * x[j]).sum();
                    lhs >= b[i] - 1e-7
                });
            if feasible {
                let obj: f64 = (0..n).map(|j| c[j] * x[j]).sum();
                if best.is_none_or(|bst| obj < bst) {
                    best = Some(obj);
                }
            }
        }

        // next combination in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return best.ok_or_else(|| {
                    Error::Validation("vertex enumeration found no feasible basic point".into())
                });
            }
            i -= 1;
            if combo[i] != i + total - n {
                combo[i] += 1;
                for k in i + 1..n {
                    combo[k] = combo[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; None if singular.
#[allow(clippy::needless_range_loop)] // row ops index two rows of the same matrix
fn solve_square(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| {
            mat[i][col].abs().partial_cmp(&mat[j][col].abs()).unwrap()
        })?;
        if mat[pivot_row][col].abs() < 1e-10 {
            return None;
        }
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let p = mat[col][col];
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = mat[i][col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let delta = f * mat[col][j];
                mat[i][j] -= delta;
            }
            rhs[i] -= f * rhs[col];
        }
    }
    Some((0..n).map(|i| rhs[i] / mat[i][i]).collect())
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}
