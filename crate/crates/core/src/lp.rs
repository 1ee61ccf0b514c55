//! Dense tableau simplex for packing LPs `max pᵀy s.t. Ay ≤ b, y ≥ 0, b > 0`.
//!
//! The all-slack basis is feasible for such problems, so no phase one is
//! needed. Dantzig pricing is used until the first degenerate pivot, after
//! which Bland's rule takes over to rule out cycling.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct PackingSolution {
    pub objective: f64,
    /// Optimal `y`.
    pub primal: Vec<f64>,
    /// Shadow prices of the `m` packing rows (optimal solution of the
    /// covering dual `min bᵀx s.t. Aᵀx ≥ p, x ≥ 0`).
    pub row_duals: Vec<f64>,
}

pub fn maximize_packing(a: &[Vec<f64>], b: &[f64], profit: &[f64]) -> Result<PackingSolution> {
    let m = a.len();
    let n = profit.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::validation("LP dimension mismatch"));
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::validation("packing LP needs non-negative right-hand side"));
    }
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[rhs] = b[i];
            row
        })
        .collect();
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -profit[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut bland = false;

    for _ in 0..MAX_PIVOTS {
        let entering = if bland {
            (0..n + m).find(|&j| obj[j] < -EPS)
        } else {
            (0..n + m)
                .filter(|&j| obj[j] < -EPS)
                .min_by(|&x, &y| obj[x].total_cmp(&obj[y]).then(x.cmp(&y)))
        };
        let Some(j) = entering else {
            let mut primal = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    primal[bv] = t[i][rhs];
                }
            }
            return Ok(PackingSolution {
                objective: obj[rhs],
                primal,
                row_duals: obj[n..n + m].to_vec(),
            });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][j] > EPS {
                let ratio = t[i][rhs] / t[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(Error::infeasible("covering LP is infeasible (packing dual unbounded)"));
        };
        if ratio <= EPS {
            bland = true;
        }
        pivot(&mut t, &mut obj, r, j);
        basis[r] = j;
    }
    Err(Error::infeasible("simplex pivot limit reached"))
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], r: usize, j: usize) {
    let p = t[r][j];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[j];
        if f != 0.0 {
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    let f = obj[j];
    if f != 0.0 {
        for (v, &pv) in obj.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_packing() {
        // max 3y0 + 5y1 s.t. y0 ≤ 4, 2y1 ≤ 12, 3y0 + 2y1 ≤ 18 → 36 at (2, 6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let sol = maximize_packing(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0]).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.primal[0] - 2.0).abs() < 1e-9);
        assert!((sol.primal[1] - 6.0).abs() < 1e-9);
        // strong duality
        let dual_obj: f64 = sol.row_duals.iter().zip([4.0, 12.0, 18.0]).map(|(x, b)| x * b).sum();
        assert!((dual_obj - 36.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![0.0]];
        assert!(maximize_packing(&a, &[1.0], &[1.0]).is_err());
    }
}
