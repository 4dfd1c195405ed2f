//! Minimal dense primal simplex for problems of the form
//!
//! ```text
//! maximize  c . x   subject to  A x <= b,  x >= 0,  b >= 0
//! ```
//!
//! The nonnegative right-hand side makes the all-slack basis feasible, so no
//! phase-one is needed. Bland's rule keeps the pivot sequence finite and
//! deterministic. Instances here are tiny (tens of variables), so a dense
//! tableau is the simplest correct choice.

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome {
    Optimal { objective: f64, solution: Vec<f64> },
    Unbounded,
}

/// Solve `max c.x, A x <= b, x >= 0` with `b >= 0`.
///
/// `a` is row-major with `rows * cols` entries. Panics on dimension mismatch
/// or a negative right-hand side entry; both indicate an internal caller bug.
pub fn solve(c: &[f64], a: &[f64], b: &[f64], rows: usize, cols: usize) -> SimplexOutcome {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    assert_eq!(c.len(), cols);
    assert!(b.iter().all(|&v| v >= 0.0), "rhs must be nonnegative");

    let width = cols + rows + 1; // structural + slack + rhs
    let mut t = vec![0.0f64; (rows + 1) * width];
    let idx = |r: usize, col: usize| r * width + col;

    for r in 0..rows {
        for j in 0..cols {
            t[idx(r, j)] = a[r * cols + j];
        }
        t[idx(r, cols + r)] = 1.0;
        t[idx(r, width - 1)] = b[r];
    }
    // objective row holds -c so that a nonnegative row means optimal
    for j in 0..cols {
        t[idx(rows, j)] = -c[j];
    }

    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    const EPS: f64 = 1e-12;

    loop {
        // Bland: entering column = smallest index with negative reduced cost
        let mut entering = None;
        for j in 0..cols + rows {
            if t[idx(rows, j)] < -EPS {
                entering = Some(j);
                break;
            }
        }
        let Some(enter) = entering else {
            let mut solution = vec![0.0; cols];
            for (r, &var) in basis.iter().enumerate() {
                if var < cols {
                    solution[var] = t[idx(r, width - 1)];
                }
            }
            return SimplexOutcome::Optimal {
                objective: t[idx(rows, width - 1)],
                solution,
            };
        };

        // ratio test; ties broken by smallest basis variable (Bland)
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let coef = t[idx(r, enter)];
            if coef > EPS {
                let ratio = t[idx(r, width - 1)] / coef;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((best_r, best)) => {
                        if ratio < best - EPS
                            || (ratio < best + EPS && basis[r] < basis[best_r])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return SimplexOutcome::Unbounded;
        };

        // pivot
        let pivot = t[idx(pivot_row, enter)];
        for j in 0..width {
            t[idx(pivot_row, j)] /= pivot;
        }
        for r in 0..=rows {
            if r == pivot_row {
                continue;
            }
            let factor = t[idx(r, enter)];
            if factor != 0.0 {
                for j in 0..width {
                    t[idx(r, j)] -= factor * t[idx(pivot_row, j)];
                }
            }
        }
        basis[pivot_row] = enter;
    }
}
