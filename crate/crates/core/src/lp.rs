//! Dense linear programming and the matrix-game minimax reduction.
//!
//! Every strategy computation in this crate bottoms out in [`solve_lp`]: a
//! two-phase primal simplex on a dense tableau. Problem sizes stay small
//! enough (a few thousand variables at the default horizon) that dense
//! storage beats sparse machinery. Pricing is Dantzig's rule with a
//! deterministic lowest-index tie break; after a run of degenerate pivots the
//! solver switches to Bland's rule, which cannot cycle. Exceeding the
//! iteration budget yields an explicit [`LpError::Stalled`] rather than a
//! wrong answer.
//!
//! [`solve_matrix_game`] reduces a zero-sum matrix game to a pair of LPs with
//! a free game-value variable and simplex constraints. This form works for
//! matrices of any sign, unlike the reciprocal transformation, which requires
//! positive payoffs. Both returned mixes are re-verified against every pure
//! response before being accepted.

use thiserror::Error;

use crate::game::MixedAction;
use crate::mat::Mat;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Solver outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("simplex stalled after {0} iterations")]
    Stalled(usize),
    #[error("solution failed verification: {0}")]
    Certificate(String),
}

/// A linear program over variables `z`:
/// optimize `c·z` subject to `A z ≤ b`, `E z = f` and per-variable bounds.
///
/// Variables default to `[0, +∞)`; bounds may be set to `±∞` individually.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    ineq_rows: Vec<Vec<(usize, f64)>>,
    ineq_rhs: Vec<f64>,
    eq_rows: Vec<Vec<(usize, f64)>>,
    eq_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![0.0; num_vars],
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq_rows.len()
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    /// Marks `var` as free (unbounded in both directions).
    pub fn set_free(&mut self, var: usize) {
        self.lower[var] = f64::NEG_INFINITY;
        self.upper[var] = f64::INFINITY;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Adds `Σ coef·z ≤ rhs`. Terms may repeat a variable; they accumulate.
    pub fn add_ineq(&mut self, terms: &[(usize, f64)], rhs: f64) {
        self.ineq_rows.push(terms.to_vec());
        self.ineq_rhs.push(rhs);
    }

    /// Adds `Σ coef·z = rhs`.
    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) {
        self.eq_rows.push(terms.to_vec());
        self.eq_rhs.push(rhs);
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for row in self.ineq_rows.iter().chain(&self.eq_rows) {
            for &(j, v) in row {
                if j >= n {
                    return Err(LpError::Malformed(format!("row references variable {j} of {n}")));
                }
                if !v.is_finite() {
                    return Err(LpError::Malformed("non-finite coefficient".into()));
                }
            }
        }
        if self
            .objective
            .iter()
            .chain(&self.ineq_rhs)
            .chain(&self.eq_rhs)
            .any(|v| !v.is_finite())
        {
            return Err(LpError::Malformed("non-finite objective or rhs".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(LpError::Malformed(format!("empty bound interval on variable {j}")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("degenerate bound on variable {j}")));
            }
        }
        Ok(())
    }
}

/// Result of [`solve_lp`]. When `status` is [`LpStatus::Optimal`], `point`
/// satisfies every constraint within `1e-7` and `value = c·point` within the
/// same tolerance. `dual_point` carries one multiplier per inequality row,
/// signed as the sensitivity `∂value/∂rhs`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
    pub dual_point: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
/// Degenerate iterations tolerated before switching to Bland's rule.
const STALL_SWITCH: usize = 64;

/// Solve with a deterministic two-phase dense simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    Standardized::build(lp)?.solve()
}

/// The internal standard form: minimize `c·x`, `A x = b`, `x ≥ 0`.
struct Standardized<'a> {
    lp: &'a LinearProgram,
    /// columns of the original variables after the bound substitution:
    /// (primary column, optional negative-part column, shift, negated)
    var_map: Vec<VarMap>,
    n_struct: usize,
    n_slack: usize,
    m: usize,
    /// dense rows of the equality system, length `n_struct + n_slack`
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    cost_offset: f64,
    /// per row: the slack column usable as a starting basic variable
    slack_of_row: Vec<Option<usize>>,
    /// original inequality index and sign flip for dual recovery
    ineq_dual_src: Vec<(usize, f64)>,
}

#[derive(Clone, Copy)]
struct VarMap {
    col: usize,
    neg_col: Option<usize>,
    shift: f64,
    negated: bool,
}

impl<'a> Standardized<'a> {
    fn build(lp: &'a LinearProgram) -> Result<Self, LpError> {
        let n = lp.num_vars();
        let min_sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };

        // Bound substitutions: finite lower -> shift, only-upper -> mirror,
        // free -> split. Finite uppers become extra inequality rows.
        let mut var_map = Vec::with_capacity(n);
        let mut n_struct = 0usize;
        for j in 0..n {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            let vm = if l.is_finite() {
                VarMap { col: n_struct, neg_col: None, shift: l, negated: false }
            } else if u.is_finite() {
                VarMap { col: n_struct, neg_col: None, shift: u, negated: true }
            } else {
                n_struct += 1;
                VarMap { col: n_struct - 1, neg_col: Some(n_struct), shift: 0.0, negated: false }
            };
            n_struct += 1;
            var_map.push(vm);
        }

        // Upper-bound rows for doubly bounded variables.
        let mut extra_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for j in 0..n {
            if lp.lower[j].is_finite() && lp.upper[j].is_finite() {
                extra_rows.push((vec![(j, 1.0)], lp.upper[j]));
            }
        }

        let n_ineq = lp.ineq_rows.len() + extra_rows.len();
        let m = n_ineq + lp.eq_rows.len();
        let n_slack = n_ineq;
        let width = n_struct + n_slack;

        let mut rows = vec![vec![0.0; width]; m];
        let mut rhs = vec![0.0; m];
        let mut slack_of_row = vec![None; m];
        let mut ineq_dual_src = Vec::with_capacity(m);

        let scatter = |row: &mut [f64], terms: &[(usize, f64)], rhs_adjust: &mut f64| {
            for &(j, coef) in terms {
                let vm = var_map[j];
                let c = if vm.negated { -coef } else { coef };
                row[vm.col] += c;
                if let Some(nc) = vm.neg_col {
                    row[nc] -= c;
                }
                // z = shift ± x moves the constant to the rhs
                *rhs_adjust -= coef * vm.shift;
            }
        };

        let all_ineq = lp
            .ineq_rows
            .iter()
            .zip(&lp.ineq_rhs)
            .map(|(r, &b)| (r.as_slice(), b, true))
            .chain(extra_rows.iter().map(|(r, b)| (r.as_slice(), *b, false)));
        for (i, (terms, b, is_user_row)) in all_ineq.enumerate() {
            let mut badj = b;
            scatter(&mut rows[i], terms, &mut badj);
            rows[i][n_struct + i] = 1.0;
            rhs[i] = badj;
            let mut sign = 1.0;
            if rhs[i] < 0.0 {
                for v in rows[i].iter_mut() {
                    *v = -*v;
                }
                rhs[i] = -rhs[i];
                sign = -1.0;
            } else {
                slack_of_row[i] = Some(n_struct + i);
            }
            if is_user_row {
                ineq_dual_src.push((i, sign));
            }
        }
        for (k, (terms, &b)) in lp.eq_rows.iter().zip(&lp.eq_rhs).enumerate() {
            let i = n_ineq + k;
            let mut badj = b;
            scatter(&mut rows[i], terms, &mut badj);
            rhs[i] = badj;
            if rhs[i] < 0.0 {
                for v in rows[i].iter_mut() {
                    *v = -*v;
                }
                rhs[i] = -rhs[i];
            }
        }

        // Objective in minimize form, with the bound-shift constant kept aside.
        let mut cost = vec![0.0; width];
        let mut cost_offset = 0.0;
        for j in 0..n {
            let c = min_sign * lp.objective[j];
            let vm = var_map[j];
            cost[vm.col] += if vm.negated { -c } else { c };
            if let Some(nc) = vm.neg_col {
                cost[nc] -= c;
            }
            cost_offset += c * vm.shift;
        }

        Ok(Standardized {
            lp,
            var_map,
            n_struct,
            n_slack,
            m,
            rows,
            rhs,
            cost,
            cost_offset,
            slack_of_row,
            ineq_dual_src,
        })
    }

    fn solve(self) -> Result<LpSolution, LpError> {
        let width = self.n_struct + self.n_slack;
        let m = self.m;

        // Artificial columns complete the starting basis.
        let n_art = self.slack_of_row.iter().filter(|s| s.is_none()).count();
        let total = width + n_art;
        let mut tab = Tableau::new(m, total, &self.rows, &self.rhs);
        let mut basis = Vec::with_capacity(m);
        let mut art_cols = Vec::new();
        {
            let mut next_art = width;
            for i in 0..m {
                match self.slack_of_row[i] {
                    Some(s) => basis.push(s),
                    None => {
                        tab.set(i, next_art, 1.0);
                        basis.push(next_art);
                        art_cols.push(next_art);
                        next_art += 1;
                    }
                }
            }
        }
        tab.basis = basis;

        let max_iters = 10_000 + 50 * (m + total);

        // Phase 1: drive the artificial sum to zero.
        if n_art > 0 {
            let mut phase1 = vec![0.0; total];
            for &a in &art_cols {
                phase1[a] = 1.0;
            }
            tab.install_cost(&phase1);
            let is_artificial = |c: usize| c >= width;
            match tab.run(max_iters)? {
                RunOutcome::Optimal => {}
                RunOutcome::Unbounded => {
                    return Err(LpError::Certificate("phase 1 reported unbounded".into()));
                }
            }
            if tab.objective_value() > FEAS_TOL {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    value: f64::NAN,
                    point: vec![],
                    dual_point: vec![],
                });
            }
            // Pivot leftover artificials out of the basis on the largest
            // available element; a row with no usable pivot is redundant
            // and goes inactive.
            for i in 0..m {
                if is_artificial(tab.basis[i]) {
                    let col = (0..width)
                        .filter(|&j| !tab.inactive_col[j])
                        .max_by(|&a, &b| {
                            tab.get(i, a).abs().total_cmp(&tab.get(i, b).abs())
                        })
                        .filter(|&j| tab.get(i, j).abs() > 1e-7);
                    match col {
                        Some(j) => tab.pivot(i, j),
                        None => tab.inactive_row[i] = true,
                    }
                }
            }
            for &a in &art_cols {
                tab.inactive_col[a] = true;
            }
        }

        // Phase 2 on the true objective.
        let mut phase2 = vec![0.0; total];
        phase2[..width].copy_from_slice(&self.cost);
        tab.install_cost(&phase2);
        let outcome = tab.run(max_iters)?;
        if let RunOutcome::Unbounded = outcome {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                value: f64::NAN,
                point: vec![],
                dual_point: vec![],
            });
        }

        // Recover the solution through the variable substitutions.
        let mut x_std = vec![0.0; total];
        for i in 0..m {
            x_std[tab.basis[i]] = tab.rhs(i);
        }
        let n = self.lp.num_vars();
        let mut point = vec![0.0; n];
        for j in 0..n {
            let vm = self.var_map[j];
            let mut v = x_std[vm.col];
            if let Some(nc) = vm.neg_col {
                v -= x_std[nc];
            }
            point[j] = if vm.negated { vm.shift - v } else { vm.shift + v };
        }

        let min_sign = match self.lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let value = min_sign * (tab.objective_value() + self.cost_offset);

        // Duals from the reduced costs on the slack columns. With
        // minimize-form multipliers y = c_B B⁻¹ and slack column σ·e_i, the
        // reduced cost is -σ·y_i while the user rhs maps through the same σ,
        // so the row-negation signs cancel: ∂value/∂rhs = -min_sign · c̄_slack.
        let mut dual_point = vec![0.0; self.lp.ineq_rows.len()];
        for (user_idx, &(row, _sign)) in self.ineq_dual_src.iter().enumerate() {
            let slack_col = self.n_struct + row;
            dual_point[user_idx] = -min_sign * tab.reduced_cost(slack_col);
        }

        let solution = LpSolution { status: LpStatus::Optimal, value, point, dual_point };
        self.verify(&solution)?;
        Ok(solution)
    }

    /// Primal feasibility and objective re-check; a violation is a solver
    /// defect and must surface as an error, never as a silent wrong answer.
    fn verify(&self, sol: &LpSolution) -> Result<(), LpError> {
        let lp = self.lp;
        let z = &sol.point;
        let scale = 1.0 + z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = FEAS_TOL * scale;
        for (row, &b) in lp.ineq_rows.iter().zip(&lp.ineq_rhs) {
            let lhs: f64 = row.iter().map(|&(j, c)| c * z[j]).sum();
            if lhs > b + tol {
                return Err(LpError::Certificate(format!("inequality violated by {}", lhs - b)));
            }
        }
        for (row, &b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
            let lhs: f64 = row.iter().map(|&(j, c)| c * z[j]).sum();
            if (lhs - b).abs() > tol {
                return Err(LpError::Certificate(format!("equality off by {}", lhs - b)));
            }
        }
        for j in 0..lp.num_vars() {
            if z[j] < lp.lower[j] - tol || z[j] > lp.upper[j] + tol {
                return Err(LpError::Certificate(format!("bound violated on variable {j}")));
            }
        }
        let c_dot: f64 = lp.objective.iter().zip(z).map(|(c, v)| c * v).sum();
        if (c_dot - sol.value).abs() > tol.max(1e-7 * (1.0 + sol.value.abs())) {
            return Err(LpError::Certificate(format!(
                "objective mismatch: c·z = {c_dot}, reported {}",
                sol.value
            )));
        }
        Ok(())
    }
}

enum RunOutcome {
    Optimal,
    Unbounded,
}

/// Dense tableau with an attached reduced-cost row.
struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of length `n + 1`; the last entry is the rhs.
    data: Vec<f64>,
    cost: Vec<f64>,
    cost_rhs: f64,
    basis: Vec<usize>,
    inactive_row: Vec<bool>,
    inactive_col: Vec<bool>,
}

impl Tableau {
    fn new(m: usize, n: usize, rows: &[Vec<f64>], rhs: &[f64]) -> Self {
        let stride = n + 1;
        let mut data = vec![0.0; m * stride];
        for i in 0..m {
            data[i * stride..i * stride + rows[i].len()].copy_from_slice(&rows[i]);
            data[i * stride + n] = rhs[i];
        }
        Tableau {
            m,
            n,
            data,
            cost: vec![0.0; n],
            cost_rhs: 0.0,
            basis: Vec::new(),
            inactive_row: vec![false; m],
            inactive_col: vec![false; n],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * (self.n + 1) + j] = v;
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.n + 1) + self.n]
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        self.cost[j]
    }

    fn objective_value(&self) -> f64 {
        -self.cost_rhs
    }

    /// Installs a cost vector and prices out the current basis.
    fn install_cost(&mut self, c: &[f64]) {
        self.cost.copy_from_slice(c);
        self.cost_rhs = 0.0;
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let stride = self.n + 1;
                let row = &self.data[i * stride..(i + 1) * stride];
                for j in 0..self.n {
                    self.cost[j] -= cb * row[j];
                }
                self.cost_rhs -= cb * row[self.n];
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let stride = self.n + 1;
        let start = row * stride;
        let piv = self.data[start + col];
        let inv = 1.0 / piv;
        for v in &mut self.data[start..start + stride] {
            *v *= inv;
        }
        // split_at_mut dance so the pivot row can be borrowed immutably
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let factor = self.data[i * stride + col];
            if factor == 0.0 {
                continue;
            }
            let (a, b) = if i < row {
                let (lo, hi) = self.data.split_at_mut(row * stride);
                (&mut lo[i * stride..(i + 1) * stride], &hi[..stride])
            } else {
                let (lo, hi) = self.data.split_at_mut(i * stride);
                (&mut hi[..stride], &lo[row * stride..(row + 1) * stride])
            };
            for (x, p) in a.iter_mut().zip(b.iter()) {
                *x -= factor * p;
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            let prow = &self.data[start..start + stride];
            for j in 0..self.n {
                self.cost[j] -= factor * prow[j];
            }
            self.cost_rhs -= factor * prow[self.n];
        }
        self.basis[row] = col;
    }

    /// Runs the simplex loop to optimality or unboundedness.
    fn run(&mut self, max_iters: usize) -> Result<RunOutcome, LpError> {
        let trace = std::env::var_os("LP_TRACE").is_some();
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = self.objective_value();
        for iter in 0..max_iters {
            if trace && iter % 1000 == 0 {
                eprintln!(
                    "iter {iter}: obj {} bland {bland} stall {stall}",
                    self.objective_value()
                );
            }
            let entering = if bland {
                (0..self.n)
                    .find(|&j| !self.inactive_col[j] && self.cost[j] < -COST_TOL)
            } else {
                let mut best = None;
                let mut best_v = -COST_TOL;
                for j in 0..self.n {
                    if !self.inactive_col[j] && self.cost[j] < best_v {
                        best_v = self.cost[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                return Ok(RunOutcome::Optimal);
            };

            // two-pass ratio test: find the exact minimum first, then break
            // ties by the largest pivot element for numerical stability, or
            // by lowest basic-variable index under Bland (whose anti-cycling
            // argument needs exactly that rule)
            let mut min_ratio = f64::INFINITY;
            for i in 0..self.m {
                if self.inactive_row[i] {
                    continue;
                }
                let a = self.get(i, col);
                if a > PIVOT_TOL {
                    min_ratio = min_ratio.min(self.rhs(i) / a);
                }
            }
            if min_ratio == f64::INFINITY {
                return Ok(RunOutcome::Unbounded);
            }
            let tie_tol = 1e-9 * (1.0 + min_ratio.abs());
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                if self.inactive_row[i] {
                    continue;
                }
                let a = self.get(i, col);
                if a > PIVOT_TOL && self.rhs(i) / a <= min_ratio + tie_tol {
                    match leave {
                        None => leave = Some(i),
                        Some(cur) => {
                            let better = if bland {
                                self.basis[i] < self.basis[cur]
                            } else {
                                a > self.get(cur, col)
                            };
                            if better {
                                leave = Some(i);
                            }
                        }
                    }
                }
            }
            let row = leave.expect("a minimum-ratio row exists");

            self.pivot(row, col);

            let obj = self.objective_value();
            if obj < last_obj - 1e-12 {
                // leaving the degenerate plateau: resume Dantzig pricing
                stall = 0;
                bland = false;
                last_obj = obj;
            } else {
                stall += 1;
                if stall >= STALL_SWITCH {
                    bland = true;
                }
            }
            if iter + 1 == max_iters {
                return Err(LpError::Stalled(max_iters));
            }
        }
        Err(LpError::Stalled(max_iters))
    }
}

/// Value and optimal mixed strategies of a zero-sum matrix game, row player
/// maximizing.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_mix: MixedAction,
    pub col_mix: MixedAction,
}

/// Game-value tolerance used by the post-solve security certificate.
pub const GAME_CERT_TOL: f64 = 1e-6;

/// Solve `max_x min_y xᵀ M y` over the simplices.
///
/// Two LPs are solved, one per player, with a free value variable each; the
/// minimax identity between them and both security certificates are checked
/// before the result is returned.
pub fn solve_matrix_game(m: &Mat) -> Result<MatrixGameSolution, LpError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(LpError::Malformed("empty payoff matrix".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(LpError::Malformed("non-finite payoff".into()));
    }
    let (rows, cols) = (m.rows(), m.cols());

    // Row player: variables (x_0..x_{r-1}, v), maximize v with xᵀM ≥ v·1.
    let mut lp = LinearProgram::new(Sense::Maximize, rows + 1);
    let v_var = rows;
    lp.set_objective(v_var, 1.0);
    lp.set_free(v_var);
    for j in 0..cols {
        let mut terms: Vec<(usize, f64)> = (0..rows).map(|i| (i, -m.get(i, j))).collect();
        terms.push((v_var, 1.0));
        lp.add_ineq(&terms, 0.0);
    }
    let ones: Vec<(usize, f64)> = (0..rows).map(|i| (i, 1.0)).collect();
    lp.add_eq(&ones, 1.0);
    let row_sol = expect_optimal(solve_lp(&lp)?, "row player")?;
    let row_mix = MixedAction::from_solver(row_sol.point[..rows].to_vec())
        .map_err(|e| LpError::Certificate(format!("row mix: {e}")))?;

    // Column player: variables (y_0..y_{c-1}, u), minimize u with My ≤ u·1.
    let mut lp = LinearProgram::new(Sense::Minimize, cols + 1);
    let u_var = cols;
    lp.set_objective(u_var, 1.0);
    lp.set_free(u_var);
    for i in 0..rows {
        let mut terms: Vec<(usize, f64)> = (0..cols).map(|j| (j, m.get(i, j))).collect();
        terms.push((u_var, -1.0));
        lp.add_ineq(&terms, 0.0);
    }
    let ones: Vec<(usize, f64)> = (0..cols).map(|j| (j, 1.0)).collect();
    lp.add_eq(&ones, 1.0);
    let col_sol = expect_optimal(solve_lp(&lp)?, "column player")?;
    let col_mix = MixedAction::from_solver(col_sol.point[..cols].to_vec())
        .map_err(|e| LpError::Certificate(format!("column mix: {e}")))?;

    let v_row = row_sol.value;
    let v_col = col_sol.value;
    let scale = 1.0 + m.max_abs();
    if (v_row - v_col).abs() > GAME_CERT_TOL * scale {
        return Err(LpError::Certificate(format!(
            "minimax gap {} between {v_row} and {v_col}",
            v_row - v_col
        )));
    }
    let value = 0.5 * (v_row + v_col);

    // Security certificates against every pure response.
    let guarantees = m.vec_mul(row_mix.probs());
    if guarantees.iter().any(|&g| g < value - GAME_CERT_TOL * scale) {
        return Err(LpError::Certificate("row mix fails its guarantee".into()));
    }
    let exposures = m.mul_vec(col_mix.probs());
    if exposures.iter().any(|&e| e > value + GAME_CERT_TOL * scale) {
        return Err(LpError::Certificate("column mix fails its guarantee".into()));
    }

    Ok(MatrixGameSolution { value, row_mix, col_mix })
}

fn expect_optimal(sol: LpSolution, who: &str) -> Result<LpSolution, LpError> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        s => Err(LpError::Certificate(format!("{who} LP ended {s:?}; matrix games are always solvable"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;
    use proptest::prelude::*;
    use rand::Rng as _;

    #[test]
    fn simple_bounded_max() {
        // max z1 + z2 s.t. z1 + z2 <= 1, z >= 0
        let mut lp = LinearProgram::new(Sense::Maximize, 2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.add_ineq(&[(0, 1.0), (1, 1.0)], 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-9);
        // binding constraint: unit shadow price on a maximization
        assert!((sol.dual_point[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        // max z1, z1 >= 0, no upper bound
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.set_objective(0, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // z1 <= -1 with z1 >= 0
        let mut lp = LinearProgram::new(Sense::Minimize, 1);
        lp.set_objective(0, 1.0);
        lp.add_ineq(&[(0, 1.0)], -1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min v s.t. v >= 3 - z, v >= z, z = 0.4  => v = 2.6 at z fixed
        let mut lp = LinearProgram::new(Sense::Minimize, 2);
        lp.set_objective(1, 1.0);
        lp.set_free(1);
        lp.add_ineq(&[(0, -1.0), (1, -1.0)], -3.0); // -z - v <= -3
        lp.add_ineq(&[(0, 1.0), (1, -1.0)], 0.0); // z - v <= 0
        lp.add_eq(&[(0, 1.0)], 0.4);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 2.6).abs() < 1e-9, "value {}", sol.value);
        assert!((sol.point[0] - 0.4).abs() < 1e-9);
    }

    #[test]
    fn negative_lower_bounds_shift_correctly() {
        // min z over z in [-5, -2]
        let mut lp = LinearProgram::new(Sense::Minimize, 1);
        lp.set_objective(0, 1.0);
        lp.set_bounds(0, -5.0, -2.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value + 5.0).abs() < 1e-9);
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.set_objective(0, 1.0);
        lp.set_bounds(0, -5.0, -2.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // classic cycling instance for Dantzig pricing without safeguards
        let mut lp = LinearProgram::new(Sense::Minimize, 4);
        for (j, c) in [-0.75, 150.0, -0.02, 6.0].iter().enumerate() {
            lp.set_objective(j, *c);
        }
        lp.add_ineq(&[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], 0.0);
        lp.add_ineq(&[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], 0.0);
        lp.add_ineq(&[(2, 1.0)], 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value + 0.05).abs() < 1e-9, "value {}", sol.value);
    }

    #[test]
    fn cheater_matrix_has_pure_saddle() {
        let g = GameSpec::bundled_cheater_saboteur();
        let s = solve_matrix_game(g.payoff(0)).unwrap();
        assert!((s.value + 2.0553).abs() < 1e-9, "value {}", s.value);
        assert!(s.row_mix.get(2) > 0.999);
        assert!(s.col_mix.get(2) > 0.999);
    }

    #[test]
    fn saboteur_matrix_mixed_equilibrium() {
        let g = GameSpec::bundled_cheater_saboteur();
        let s = solve_matrix_game(g.payoff(1)).unwrap();
        assert!((s.value + 0.9887).abs() < 1e-4, "value {}", s.value);
        let x_expect = [0.0, 0.51, 0.0, 0.0, 0.49];
        let y_expect = [0.59, 0.0, 0.0, 0.0, 0.41];
        for i in 0..5 {
            assert!((s.row_mix.get(i) - x_expect[i]).abs() < 0.01, "row {i}: {}", s.row_mix.get(i));
            assert!((s.col_mix.get(i) - y_expect[i]).abs() < 0.01, "col {i}: {}", s.col_mix.get(i));
        }
    }

    #[test]
    fn matching_pennies_is_symmetric() {
        let m = Mat::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = solve_matrix_game(&m).unwrap();
        assert!(s.value.abs() < 1e-9);
        assert!((s.row_mix.get(0) - 0.5).abs() < 1e-9);
        assert!((s.col_mix.get(0) - 0.5).abs() < 1e-9);
    }

    fn random_matrix(rng: &mut impl rand::Rng, r: usize, c: usize) -> Mat {
        let rows = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn minimax_duality_on_random_games() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let r = rng.gen_range(1..=6);
            let c = rng.gen_range(1..=6);
            let m = random_matrix(&mut rng, r, c);
            let s = solve_matrix_game(&m).unwrap();
            // value guaranteed against all pure responses on both sides
            let maximin = m.vec_mul(s.row_mix.probs()).iter().cloned().fold(f64::INFINITY, f64::min);
            let minimax = m.mul_vec(s.col_mix.probs()).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((maximin - s.value).abs() < 1e-6);
            assert!((minimax - s.value).abs() < 1e-6);
            assert!(maximin <= minimax + 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        // shift/scale equivariance: value maps exactly, mixes keep certifying
        #[test]
        fn shift_scale_equivariance(
            seed in 0u64..1000,
            alpha in 0.1f64..4.0,
            beta in -3.0f64..3.0,
        ) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 4, 4);
            let s = solve_matrix_game(&m).unwrap();
            let rows2 = (0..4).map(|i| (0..4).map(|j| alpha * m.get(i, j) + beta).collect()).collect();
            let m2 = Mat::from_rows(rows2).unwrap();
            let s2 = solve_matrix_game(&m2).unwrap();
            prop_assert!((s2.value - (alpha * s.value + beta)).abs() < 1e-6 * (1.0 + alpha));
            // the shifted game's returned mixes certify the shifted value
            let guar = m2.vec_mul(s2.row_mix.probs());
            prop_assert!(guar.iter().all(|&g| g >= s2.value - 1e-6 * (1.0 + alpha)));
            // and the original optimal mixes certify it too (same argmax set)
            let guar = m2.vec_mul(s.row_mix.probs());
            prop_assert!(guar.iter().all(|&g| g >= s2.value - 1e-5 * (1.0 + alpha)));
        }
    }
}
