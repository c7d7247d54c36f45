//! Solver-independent oracles shared by the integration suites: dense
//! Gaussian elimination, exhaustive basic-feasible-solution enumeration for
//! small LPs, and support enumeration for matrix games. None of this calls
//! into the simplex path it is used to check.
#![allow(dead_code)] // each suite links the module and uses a subset

use jamgame::Mat;

/// Solve a square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Advance `idx` to the next k-combination of `0..total`; false when done.
fn next_combination(idx: &mut [usize], total: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < total - (k - i) {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive enumeration of basic solutions of the standard form
/// `min c·x  s.t.  A x ≤ b, x ≥ 0` (slack columns appended internally).
/// Returns the best feasible basic value; assumes the program is bounded
/// and feasible, which the generators guarantee.
pub fn bfs_enumeration_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let n = c.len();
    let m = a.len();
    let total = n + m;
    let column = |i: usize, j: usize| -> f64 {
        if j < n {
            a[i][j]
        } else if j - n == i {
            1.0
        } else {
            0.0
        }
    };
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let basis_matrix: Vec<Vec<f64>> =
            (0..m).map(|i| idx.iter().map(|&j| column(i, j)).collect()).collect();
        if let Some(xb) = solve_square(basis_matrix, b.to_vec()) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let value: f64 = xb
                    .iter()
                    .zip(&idx)
                    .map(|(&v, &j)| if j < n { v * c[j] } else { 0.0 })
                    .sum();
                best = best.min(value);
            }
        }
        if !next_combination(&mut idx, total) {
            break;
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    out
}

/// Value of a zero-sum matrix game by support enumeration: for every pair
/// of equal-size supports, solve the indifference systems and verify the
/// equilibrium conditions against all pure deviations.
pub fn matrix_game_value_oracle(m: &Mat) -> Option<f64> {
    let rows = m.rows();
    let cols = m.cols();
    let tol = 1e-7 * (1.0 + m.max_abs());
    for k in 1..=rows.min(cols) {
        for row_support in combinations(rows, k) {
            for col_support in combinations(cols, k) {
                // unknowns: x over the row support plus the value v.
                // rows: indifference across the column support, then Σx = 1.
                let mut ax = vec![vec![0.0; k + 1]; k + 1];
                let mut bx = vec![0.0; k + 1];
                for (eq, &j) in col_support.iter().enumerate() {
                    for (t, &i) in row_support.iter().enumerate() {
                        ax[eq][t] = m.get(i, j);
                    }
                    ax[eq][k] = -1.0;
                }
                for t in 0..k {
                    ax[k][t] = 1.0;
                }
                bx[k] = 1.0;
                let Some(xv) = solve_square(ax, bx) else { continue };

                let mut ay = vec![vec![0.0; k + 1]; k + 1];
                let mut by = vec![0.0; k + 1];
                for (eq, &i) in row_support.iter().enumerate() {
                    for (t, &j) in col_support.iter().enumerate() {
                        ay[eq][t] = m.get(i, j);
                    }
                    ay[eq][k] = -1.0;
                }
                for t in 0..k {
                    ay[k][t] = 1.0;
                }
                by[k] = 1.0;
                let Some(yu) = solve_square(ay, by) else { continue };

                let v = xv[k];
                let u = yu[k];
                if (v - u).abs() > tol {
                    continue;
                }
                if xv[..k].iter().any(|&p| p < -1e-9) || yu[..k].iter().any(|&p| p < -1e-9) {
                    continue;
                }

                // full mixed vectors
                let mut x = vec![0.0; rows];
                for (t, &i) in row_support.iter().enumerate() {
                    x[i] = xv[t].max(0.0);
                }
                let mut y = vec![0.0; cols];
                for (t, &j) in col_support.iter().enumerate() {
                    y[j] = yu[t].max(0.0);
                }

                // no profitable pure deviation on either side
                let col_ok = (0..cols).all(|j| {
                    let payoff: f64 = (0..rows).map(|i| x[i] * m.get(i, j)).sum();
                    payoff >= v - tol
                });
                let row_ok = (0..rows).all(|i| {
                    let payoff: f64 = (0..cols).map(|j| y[j] * m.get(i, j)).sum();
                    payoff <= v + tol
                });
                if col_ok && row_ok {
                    return Some(v);
                }
            }
        }
    }
    None
}
