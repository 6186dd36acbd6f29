//! Dense two-phase primal simplex for small inequality-form programs:
//!
//! ```text
//!     minimize    c'x
//!     subject to  A x <= b,   x >= 0
//! ```
//!
//! Pivoting uses Bland's smallest-index rule throughout, which rules out
//! cycling and makes the solve fully deterministic: the same input always
//! takes the same pivot path and returns bit-identical output. The tableau
//! is dense and stored row-major, since pivoting is all row arithmetic;
//! problem sizes here are a few hundred rows at most.

use nalgebra::DMatrix;

/// Entering/leaving threshold for reduced costs and pivot elements.
const PIVOT_TOL: f64 = 1e-9;
/// Residual infeasibility accepted at the end of phase 1.
const PHASE1_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    Infeasible,
    /// Should not happen for objectives bounded below; reported so callers
    /// can surface it as an internal error instead of looping forever.
    Unbounded,
}

struct Tableau {
    /// Row-major `rows x width` block; the last column of each row is the
    /// right-hand side.
    t: Vec<f64>,
    /// Objective row: reduced costs, with `-objective` in the RHS slot.
    obj: Vec<f64>,
    /// Basic variable of each row.
    basis: Vec<usize>,
    rows: usize,
    /// Number of decision columns (excludes RHS).
    cols: usize,
    width: usize,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.width..(i + 1) * self.width]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.cols]
    }

    /// One simplex phase: pivot until no reduced cost is negative.
    /// `allowed` limits the columns that may enter the basis.
    fn run(&mut self, allowed: usize) -> Option<()> {
        // Generous cap; Bland's rule terminates, this guards numerics.
        let max_iter = 200 * (self.rows + self.cols) + 1000;
        for _ in 0..max_iter {
            let entering = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL);
            let Some(enter) = entering else {
                return Some(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i * self.width + enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio - 1e-12
                                || ((ratio - best_ratio).abs() <= 1e-12
                                    && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (leave, _) = leave?; // no positive entry: unbounded
            self.pivot(leave, enter);
        }
        None
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width;
        let start = row * width;
        let p = self.t[start + col];
        for j in 0..width {
            self.t[start + j] /= p;
        }
        // split the storage around the pivot row so it can be borrowed while
        // the other rows are updated
        let (before, rest) = self.t.split_at_mut(start);
        let (pivot_row, after) = rest.split_at_mut(width);
        for (i, chunk) in before.chunks_exact_mut(width).enumerate() {
            debug_assert!(i < row);
            eliminate(chunk, pivot_row, col);
        }
        for chunk in after.chunks_exact_mut(width) {
            eliminate(chunk, pivot_row, col);
        }
        eliminate(&mut self.obj, pivot_row, col);
        self.basis[row] = col;
    }

    /// Rebuilds the objective row for cost vector `cost` under the current
    /// basis: `obj[j] = cost[j] - sum_i cost[basis[i]] * t[i][j]`.
    fn set_objective(&mut self, cost: &[f64]) {
        for j in 0..self.cols {
            self.obj[j] = cost.get(j).copied().unwrap_or(0.0);
        }
        self.obj[self.cols] = 0.0;
        for i in 0..self.rows {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row_start = i * self.width;
                for j in 0..self.width {
                    self.obj[j] -= cb * self.t[row_start + j];
                }
            }
        }
    }
}

#[inline]
fn eliminate(target: &mut [f64], pivot_row: &[f64], col: usize) {
    let f = target[col];
    if f != 0.0 {
        for (t, &p) in target.iter_mut().zip(pivot_row) {
            *t -= f * p;
        }
        target[col] = 0.0; // exact zero instead of round-off residue
    }
}

/// Solves `min c'x  s.t.  A x <= b, x >= 0` for an `m x n` matrix `a`.
pub(crate) fn solve_min(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> LpOutcome {
    let m = b.len();
    let n = c.len();
    debug_assert_eq!(a.nrows(), m);
    debug_assert_eq!(a.ncols(), n);

    // Column layout: structural | slack | artificial | rhs.
    let negative_rows: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative_rows.len();
    let cols = n + m + n_art;
    let width = cols + 1;
    let mut t = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut art_of_row = vec![usize::MAX; m];
    for (idx, &i) in negative_rows.iter().enumerate() {
        art_of_row[i] = n + m + idx;
    }
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = flip * a[(i, j)];
        }
        row[n + i] = flip; // slack
        row[cols] = flip * b[i];
        if art_of_row[i] != usize::MAX {
            row[art_of_row[i]] = 1.0;
            basis[i] = art_of_row[i];
        } else {
            basis[i] = n + i;
        }
    }

    let mut tab = Tableau {
        t,
        obj: vec![0.0; width],
        basis,
        rows: m,
        cols,
        width,
    };

    if n_art > 0 {
        let mut phase1_cost = vec![0.0; cols];
        for slot in phase1_cost.iter_mut().skip(n + m) {
            *slot = 1.0;
        }
        tab.set_objective(&phase1_cost);
        if tab.run(cols).is_none() {
            // Phase-1 objective is bounded below by zero; running out of
            // ratio candidates means the tableau degenerated numerically.
            return LpOutcome::Unbounded;
        }
        let infeasibility = -tab.obj[cols];
        if infeasibility > PHASE1_TOL {
            return LpOutcome::Infeasible;
        }
        // Drive leftover artificials out of the basis where possible; a row
        // whose coefficients are all zero is redundant and harmless.
        for i in 0..m {
            if tab.basis[i] >= n + m {
                let pivot_col = {
                    let row = tab.row(i);
                    (0..n + m).find(|&j| row[j].abs() > PIVOT_TOL)
                };
                if let Some(j) = pivot_col {
                    tab.pivot(i, j);
                }
            }
        }
    }

    tab.set_objective(c);
    // Artificial columns may not re-enter in phase 2.
    match tab.run(n + m) {
        Some(()) => {}
        None => return LpOutcome::Unbounded,
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn simple_bounded_minimum() {
        // min x1 + x2 s.t. -x1 - x2 <= -1  (i.e. x1 + x2 >= 1)
        let out = solve_min(&[1.0, 1.0], &mat(1, 2, &[-1.0, -1.0]), &[-1.0]);
        match out {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_via_two_inequalities() {
        // x1 + 2 x2 = 3, minimize x1 + x2 -> x = (0, 1.5)
        let a = mat(2, 2, &[1.0, 2.0, -1.0, -2.0]);
        let out = solve_min(&[1.0, 1.0], &a, &[3.0, -3.0]);
        match out {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 0.0).abs() < 1e-9);
                assert!((x[1] - 1.5).abs() < 1e-9);
                assert!((objective - 1.5).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x1 <= -1 with x1 >= 0 is infeasible
        let out = solve_min(&[1.0], &mat(1, 1, &[1.0]), &[-1.0]);
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn zero_rhs_degenerate_start() {
        // x1 - x2 = 0, x1 + x2 >= 2, min x1 + x2 -> (1, 1)
        let a = mat(3, 2, &[1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let out = solve_min(&[1.0, 1.0], &a, &[0.0, 0.0, -2.0]);
        match out {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - 1.0).abs() < 1e-9);
                assert!((x[1] - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let a = mat(3, 3, &[1.0, 2.0, -1.0, -2.0, 1.0, 0.5, 0.3, -0.7, 1.0]);
        let b = [1.0, -0.5, 2.0];
        let c = [1.0, 2.0, 0.5];
        let first = solve_min(&c, &a, &b);
        for _ in 0..5 {
            assert_eq!(solve_min(&c, &a, &b), first);
        }
    }
}
