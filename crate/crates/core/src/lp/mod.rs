//! The fractional covering LP over actions:
//!
//! ```text
//! min  Σ_i w_i x_i   s.t.  Σ_i c_i(e) x_i >= 1  for every target e,   x >= 0
//! ```
//!
//! It is solved through its packing dual, whose slack basis is feasible. The
//! floating-point answer is re-checked; if the check fails on an instance small
//! enough, the LP is solved again in exact rational arithmetic.

pub mod simplex;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervention::CutProbabilityTable;
use simplex::{solve_packing, LpScalar, SimplexFailure};

/// Covering rows may be at most this far below 1.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Relative duality gap accepted as optimal.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-6;
/// Largest dimension re-solved exactly when the float check fails.
pub const EXACT_FALLBACK_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Certification {
    /// Float solve; primal and dual feasible with the reported relative gap.
    DualityGap(f64),
    /// Solved in exact rationals, then rounded to `f64`.
    Exact,
    /// No targets, nothing to certify.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    /// One entry per action; actions that cut no target get 0.
    pub x: Vec<f64>,
    pub objective: f64,
    pub certification: Certification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpMode {
    /// Float first, exact fallback when the certificate check fails.
    #[default]
    Auto,
    /// Exact rationals only.
    Exact,
}

/// Solves the covering LP for the targets of `table`.
pub fn solve_vlp(table: &CutProbabilityTable, weights: &[f64]) -> Result<LpSolution> {
    solve_vlp_with(table, weights, LpMode::Auto)
}

pub fn solve_vlp_with(
    table: &CutProbabilityTable,
    weights: &[f64],
    mode: LpMode,
) -> Result<LpSolution> {
    let k = table.k();
    if weights.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} actions",
            weights.len(),
            k
        )));
    }
    if let Some(e) = table.unreachable_edge() {
        return Err(Error::UnreachableEdge(e));
    }
    let m = table.edges().len();
    if m == 0 {
        return Ok(LpSolution {
            x: vec![0.0; k],
            objective: 0.0,
            certification: Certification::Trivial,
        });
    }
    // Only actions that cut some target matter.
    let active: Vec<usize> = (0..k)
        .filter(|&i| (0..m).any(|j| table.row(j)[i] > 0.0))
        .collect();
    let coverage: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| (0..m).map(|j| table.row(j)[i]).collect())
        .collect();
    let costs: Vec<f64> = active.iter().map(|&i| weights[i]).collect();

    let reduced = match mode {
        LpMode::Exact => solve_exact(&coverage, &costs)?,
        LpMode::Auto => match solve_float(&coverage, &costs) {
            Ok(sol) => sol,
            Err(err) => {
                if m <= EXACT_FALLBACK_LIMIT && k <= EXACT_FALLBACK_LIMIT {
                    log::debug!("float LP check failed ({err}); re-solving exactly");
                    solve_exact(&coverage, &costs)?
                } else {
                    return Err(err);
                }
            }
        },
    };
    let mut x = vec![0.0; k];
    for (slot, &i) in active.iter().enumerate() {
        x[i] = reduced.x[slot];
    }
    Ok(LpSolution {
        x,
        objective: reduced.objective,
        certification: reduced.certification,
    })
}

/// `coverage[i][j]`: probability that active action `i` cuts target `j`.
fn solve_float(coverage: &[Vec<f64>], costs: &[f64]) -> Result<LpSolution> {
    let sol = solve_packing(coverage, costs).map_err(simplex_error)?;
    let x: Vec<f64> = sol.duals.iter().map(|&v| v.max(0.0)).collect();
    let y: Vec<f64> = sol.y.iter().map(|&v| v.max(0.0)).collect();
    let primal: f64 = x.iter().zip(costs).map(|(a, b)| a * b).sum();
    let dual: f64 = y.iter().sum();
    let m = y.len();
    for j in 0..m {
        let lhs: f64 = coverage.iter().zip(&x).map(|(row, xi)| row[j] * xi).sum();
        if lhs < 1.0 - FEASIBILITY_TOLERANCE {
            return Err(Error::Numerical(format!(
                "covering row {j} has slack {lhs} below 1"
            )));
        }
    }
    for (i, row) in coverage.iter().enumerate() {
        let lhs: f64 = row.iter().zip(&y).map(|(a, b)| a * b).sum();
        if lhs > costs[i] + FEASIBILITY_TOLERANCE * costs[i].max(1.0) {
            return Err(Error::Numerical(format!("packing row {i} violated")));
        }
    }
    let gap = (primal - dual).abs() / primal.abs().max(1.0);
    if gap > OPTIMALITY_TOLERANCE {
        return Err(Error::Numerical(format!("duality gap {gap}")));
    }
    Ok(LpSolution {
        x,
        objective: primal,
        certification: Certification::DualityGap(gap),
    })
}

fn solve_exact(coverage: &[Vec<f64>], costs: &[f64]) -> Result<LpSolution> {
    let conv = |v: f64| {
        BigRational::from_f64(v).ok_or_else(|| Error::Numerical(format!("non-finite entry {v}")))
    };
    let rows: Vec<Vec<BigRational>> = coverage
        .iter()
        .map(|r| r.iter().map(|&v| conv(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rhs: Vec<BigRational> = costs.iter().map(|&v| conv(v)).collect::<Result<_>>()?;
    let sol = solve_packing(&rows, &rhs).map_err(simplex_error)?;
    let x: Vec<f64> = sol.duals.iter().map(|v| v.to_f64().max(0.0)).collect();
    Ok(LpSolution {
        x,
        objective: sol.objective.to_f64(),
        certification: Certification::Exact,
    })
}

fn simplex_error(f: SimplexFailure) -> Error {
    match f {
        SimplexFailure::Unbounded => {
            Error::Numerical("packing dual unbounded although every target is reachable".into())
        }
        SimplexFailure::IterationLimit => Error::Numerical("simplex iteration limit reached".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(rows: Vec<Vec<f64>>) -> CutProbabilityTable {
        let k = rows[0].len();
        let edges = (0..rows.len()).map(|j| Edge::new(j, rows.len() + j)).collect();
        CutProbabilityTable::from_rows(edges, k, rows).unwrap()
    }

    /// Minimum over all basic feasible solutions: every choice of `k` tight
    /// constraints among the `m + k` inequalities, solved by Gaussian elimination.
    fn brute_force(rows: &[Vec<f64>], w: &[f64]) -> f64 {
        let m = rows.len();
        let k = w.len();
        let total = m + k;
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let mut a = Vec::new();
            for c in 0..total {
                if mask >> c & 1 == 1 {
                    if c < m {
                        let mut r = rows[c].clone();
                        r.push(1.0);
                        a.push(r);
                    } else {
                        let mut r = vec![0.0; k + 1];
                        r[c - m] = 1.0;
                        a.push(r);
                    }
                }
            }
            let Some(x) = gauss(a, k) else { continue };
            let feasible = x.iter().all(|&v| v >= -1e-9)
                && rows
                    .iter()
                    .all(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() >= 1.0 - 1e-9);
            if feasible {
                best = best.min(x.iter().zip(w).map(|(a, b)| a * b).sum());
            }
        }
        best
    }

    fn gauss(mut a: Vec<Vec<f64>>, k: usize) -> Option<Vec<f64>> {
        for col in 0..k {
            let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[piv][col].abs() < 1e-12 {
                return None;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
    }

    #[test]
    fn single_edge_half_probability() {
        let s = solve_vlp(&table(vec![vec![0.5]]), &[1.0]).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12);
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_deterministic_actions() {
        let s = solve_vlp(&table(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), &[1.0, 1.0]).unwrap();
        assert_eq!(s.x, vec![1.0, 1.0]);
        assert_eq!(s.objective, 2.0);
    }

    #[test]
    fn unreachable_edge_is_named() {
        let t = table(vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(solve_vlp(&t, &[1.0, 1.0]), Err(Error::UnreachableEdge(e)) if e == t.edges()[1]));
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> = (0..4)
                .map(|_| {
                    (0..5)
                        .map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.05..1.0) })
                        .collect()
                })
                .collect();
            if rows.iter().any(|r| r.iter().all(|&v| v == 0.0)) {
                continue;
            }
            let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..3.0)).collect();
            let s = solve_vlp(&table(rows.clone()), &w).unwrap();
            let e = solve_vlp_with(&table(rows.clone()), &w, LpMode::Exact).unwrap();
            let b = brute_force(&rows, &w);
            assert!((s.objective - b).abs() < 1e-9 * b.max(1.0), "{} vs {}", s.objective, b);
            assert!((e.objective - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn zero_weight_action_is_free() {
        let s = solve_vlp(&table(vec![vec![0.5, 0.25]]), &[1.0, 0.0]).unwrap();
        assert!(s.objective.abs() < 1e-12);
        let cover = 0.5 * s.x[0] + 0.25 * s.x[1];
        assert!(cover >= 1.0 - FEASIBILITY_TOLERANCE);
    }
}
