//! Dense tableau simplex for `max 1·y  s.t.  M y <= b, y >= 0` with `b >= 0`.
//!
//! The slack basis is feasible from the start, so no phase one is needed. Pricing
//! is Dantzig's largest coefficient rule; after a run of degenerate pivots it
//! switches to Bland's rule for good, which rules out cycling.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arithmetic the tableau needs. `tolerance` is the magnitude treated as zero.
pub trait LpScalar:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn tolerance() -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
}

impl LpScalar for f64 {
    fn tolerance() -> f64 {
        1e-12
    }

    fn from_f64(x: f64) -> Option<f64> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn tolerance() -> BigRational {
        BigRational::zero()
    }

    fn from_f64(x: f64) -> Option<BigRational> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Optimal basis of the packing problem.
#[derive(Debug, Clone)]
pub struct PackingSolution<T> {
    /// Primal packing variables, one per column of `M`.
    pub y: Vec<T>,
    /// Shadow prices of the rows of `M`; these solve the covering dual.
    pub duals: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexFailure {
    Unbounded,
    IterationLimit,
}

/// Solves `max Σ y_j` subject to `Σ_j rows[i][j] y_j <= rhs[i]`, `y >= 0`.
/// Requires every `rhs[i] >= 0`.
pub fn solve_packing<T: LpScalar>(
    rows: &[Vec<T>],
    rhs: &[T],
) -> Result<PackingSolution<T>, SimplexFailure> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let width = c + r + 1;
    let eps = T::tolerance();
    let neg_eps = -eps.clone();

    let mut tab: Vec<Vec<T>> = Vec::with_capacity(r + 1);
    for (i, row) in rows.iter().enumerate() {
        let mut t = Vec::with_capacity(width);
        t.extend(row.iter().cloned());
        for s in 0..r {
            t.push(if s == i { T::one() } else { T::zero() });
        }
        t.push(rhs[i].clone());
        tab.push(t);
    }
    let mut obj: Vec<T> = vec![-T::one(); c];
    obj.extend(std::iter::repeat_n(T::zero(), r + 1));
    tab.push(obj);
    let mut basis: Vec<usize> = (c..c + r).collect();

    let max_pivots = 50_000 + 200 * (r + c);
    let bland_after = 20 * (r + c) + 50;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let mut pivots = 0;

    loop {
        let objrow = &tab[r];
        let entering = if bland {
            (0..c + r).find(|&j| objrow[j] < neg_eps)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..c + r {
                if objrow[j] < neg_eps && best.is_none_or(|b| objrow[j] < objrow[b]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(col) = entering else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..r {
            if tab[i][col] > eps {
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let lhs = tab[i][width - 1].clone() * tab[l][col].clone();
                        let rhs_v = tab[l][width - 1].clone() * tab[i][col].clone();
                        if lhs < rhs_v || (!(rhs_v < lhs) && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(row) = leave else {
            return Err(SimplexFailure::Unbounded);
        };
        if tab[row][width - 1] <= eps {
            degenerate_run += 1;
            if degenerate_run > bland_after {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        pivot(&mut tab, row, col);
        basis[row] = col;
        pivots += 1;
        if pivots > max_pivots {
            return Err(SimplexFailure::IterationLimit);
        }
    }

    let mut y = vec![T::zero(); c];
    for (i, &b) in basis.iter().enumerate() {
        if b < c {
            y[b] = tab[i][width - 1].clone();
        }
    }
    let duals = (0..r).map(|i| tab[r][c + i].clone()).collect();
    Ok(PackingSolution {
        y,
        duals,
        objective: tab[r][width - 1].clone(),
        pivots,
    })
}

fn pivot<T: LpScalar>(tab: &mut [Vec<T>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for x in tab[row].iter_mut() {
        *x = x.clone() / p.clone();
    }
    let pivot_row = tab[row].clone();
    for (i, t) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = t[col].clone();
        if f.is_zero() {
            continue;
        }
        for (x, pr) in t.iter_mut().zip(&pivot_row) {
            if !pr.is_zero() {
                *x = x.clone() - f.clone() * pr.clone();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_packing() {
        // max y1 + y2 s.t. y1 + 2 y2 <= 4, 3 y1 + y2 <= 6 → y = (1.6, 1.2)
        let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        let s = solve_packing(&rows, &[4.0, 6.0]).unwrap();
        assert!((s.objective - 2.8).abs() < 1e-12);
        assert!((s.y[0] - 1.6).abs() < 1e-12);
        // duals solve min 4a + 6b s.t. a + 3b >= 1, 2a + b >= 1
        assert!((4.0 * s.duals[0] + 6.0 * s.duals[1] - 2.8).abs() < 1e-12);
    }

    #[test]
    fn rational_agrees() {
        let rows = [vec![1.0, 2.0], vec![3.0, 1.0]];
        let q: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_float(x).unwrap()).collect())
            .collect();
        let b: Vec<BigRational> = [4.0, 6.0].iter().map(|&x| BigRational::from_float(x).unwrap()).collect();
        let s = solve_packing(&q, &b).unwrap();
        assert_eq!(s.objective, BigRational::new(14.into(), 5.into()));
    }

    #[test]
    fn unbounded_is_reported() {
        let rows = vec![vec![1.0, 0.0]];
        assert_eq!(solve_packing(&rows, &[1.0]).unwrap_err(), SimplexFailure::Unbounded);
    }
}
