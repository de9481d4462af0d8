//! Bounded-variable revised simplex with a dense maintained basis inverse.
//!
//! Two-phase: rows whose initial slack value violates its bounds get an
//! artificial variable; phase 1 minimizes the artificial sum, phase 2 the
//! actual (negated, internally minimized) objective. Dantzig pricing with a
//! permanent switch to Bland's rule after `10 * rows` degenerate pivots.

use crate::formulation::{LinearProgram, RowSense};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective of the original maximization; meaningful only when Optimal.
    pub objective: f64,
    /// Structural variable values; meaningful only when Optimal.
    pub values: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub cost_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
    /// Use Bland's rule from the first iteration and never leave it.
    pub sticky_bland: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-6,
            cost_tol: 1e-7,
            pivot_tol: 1e-9,
            max_iterations: 200_000,
            refactor_every: 1500,
            sticky_bland: false,
        }
    }
}

/// Solve `lp` (maximization) with default options.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, SolverError> {
    let (scaled, col_scale) = equilibrate(lp);
    let mut result = Tableau::build(&scaled, opts).solve();
    // A numerically degraded basis can occasionally turn singular. Each
    // fallback takes a different pivot path: Bland's rule with frequent
    // refactoring, then different refactor cadences with a stricter pivot
    // threshold, which refuse the noise pivots that singularize the basis.
    if !opts.sticky_bland {
        let retries = [
            SimplexOptions { sticky_bland: true, refactor_every: 100, ..*opts },
            SimplexOptions { refactor_every: 20, ..*opts },
            SimplexOptions { pivot_tol: 1e-6, refactor_every: 50, ..*opts },
        ];
        for retry in retries {
            if matches!(result, Err(SolverError::Numerical(_))) {
                result = Tableau::build(&scaled, &retry).solve();
            }
        }
    }
    let mut sol = result?;
    for (v, &s) in sol.values.iter_mut().zip(col_scale.iter()) {
        *v *= s;
    }
    Ok(sol)
}

/// Nearest power of two to `1/x`, as an exact scale factor.
fn pow2_recip(x: f64) -> f64 {
    if !(x.is_finite() && x > 0.0) {
        return 1.0;
    }
    (-x.log2().round()).exp2()
}

/// Row/column max-norm equilibration with power-of-two factors, so scaling
/// introduces no rounding error. Bounds and objective move to the scaled
/// variable space `x' = x / col_scale`; the caller maps values back.
fn equilibrate(lp: &LinearProgram) -> (LinearProgram, Vec<f64>) {
    let n = lp.n_vars();
    let mut row_scale = vec![1.0f64; lp.rows.len()];
    let mut col_scale = vec![1.0f64; n];
    for _ in 0..2 {
        for (i, row) in lp.rows.iter().enumerate() {
            let max = row
                .coeffs
                .iter()
                .map(|&(j, c)| (c * row_scale[i] * col_scale[j]).abs())
                .fold(0.0f64, f64::max);
            if max > 0.0 {
                row_scale[i] *= pow2_recip(max);
            }
        }
        let mut col_max = vec![0.0f64; n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                col_max[j] = col_max[j].max((c * row_scale[i] * col_scale[j]).abs());
            }
        }
        for (j, &max) in col_max.iter().enumerate() {
            if max > 0.0 {
                col_scale[j] *= pow2_recip(max);
            }
        }
    }
    let mut out = lp.clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        for c in row.coeffs.iter_mut() {
            c.1 *= row_scale[i] * col_scale[c.0];
        }
        row.rhs *= row_scale[i];
    }
    for j in 0..n {
        out.objective[j] *= col_scale[j];
        out.lower[j] /= col_scale[j];
        out.upper[j] /= col_scale[j];
    }
    (out, col_scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic with both bounds infinite, resting at zero.
    Free,
}

struct Tableau<'a> {
    opts: &'a SimplexOptions,
    n_structural: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Current-phase minimization costs.
    cost: Vec<f64>,
    /// Phase-2 minimization costs (negated maximization objective).
    cost2: Vec<f64>,
    rhs: Vec<f64>,
    basic: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    artificials: Vec<usize>,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
}

impl<'a> Tableau<'a> {
    fn build(lp: &LinearProgram, opts: &'a SimplexOptions) -> Self {
        let n = lp.n_vars();
        let m = lp.rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                if c != 0.0 {
                    cols[j].push((i, c));
                }
            }
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut cost2: Vec<f64> = lp.objective.iter().map(|&c| -c).collect();
        let mut rhs = Vec::with_capacity(m);
        // Slack columns: a.x + s = b with sense-derived slack bounds.
        for (i, row) in lp.rows.iter().enumerate() {
            cols.push(vec![(i, 1.0)]);
            let (lo, hi) = match row.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            cost2.push(0.0);
            rhs.push(row.rhs);
        }
        let ncols = n + m;
        let mut state = Vec::with_capacity(ncols);
        let mut x = Vec::with_capacity(ncols);
        for j in 0..ncols {
            let (st, v) = initial_rest(lower[j], upper[j]);
            state.push(st);
            x.push(v);
        }

        // Natural slack values given the nonbasic rest points.
        let mut activity = vec![0.0; m];
        for (j, col) in cols.iter().enumerate().take(n) {
            if x[j] != 0.0 {
                for &(i, c) in col {
                    activity[i] += c * x[j];
                }
            }
        }

        let mut basic = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        let mut cost = vec![0.0; ncols];
        let mut binv_diag = Vec::with_capacity(m);
        for i in 0..m {
            let s_idx = n + i;
            let natural = rhs[i] - activity[i];
            let clamped = natural.clamp(lower[s_idx], upper[s_idx]);
            if (natural - clamped).abs() <= opts.feas_tol {
                basic.push(s_idx);
                state[s_idx] = VarState::Basic(i);
                x[s_idx] = natural;
                binv_diag.push(1.0);
            } else {
                // Slack rests at its nearest bound; an artificial column
                // absorbs the residual with positive value.
                state[s_idx] = if clamped == lower[s_idx] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                x[s_idx] = clamped;
                let resid = natural - clamped;
                let coef = if resid >= 0.0 { 1.0 } else { -1.0 };
                let a_idx = cols.len();
                cols.push(vec![(i, coef)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                cost2.push(0.0);
                cost.push(1.0);
                state.push(VarState::Basic(i));
                x.push(resid.abs());
                basic.push(a_idx);
                artificials.push(a_idx);
                binv_diag.push(1.0 / coef);
            }
        }
        // cost vector may be shorter than cols if no artificial added late;
        // normalize length.
        cost.resize(cols.len(), 0.0);

        let mut binv = vec![0.0; m * m];
        for (i, d) in binv_diag.into_iter().enumerate() {
            binv[i * m + i] = d;
        }

        Tableau {
            opts,
            n_structural: n,
            m,
            cols,
            lower,
            upper,
            cost,
            cost2,
            rhs,
            basic,
            state,
            x,
            binv,
            artificials,
            bland: opts.sticky_bland,
            degenerate_run: 0,
            iterations: 0,
        }
    }

    fn solve(mut self) -> Result<LpSolution, SolverError> {
        if !self.artificials.is_empty() {
            match self.optimize()? {
                LpStatus::Unbounded => {
                    return Err(SolverError::Numerical(
                        "phase 1 reported unbounded".into(),
                    ))
                }
                _ => {}
            }
            let infeas: f64 = self.artificials.iter().map(|&j| self.x[j].max(0.0)).sum();
            if infeas > self.opts.feas_tol * 10.0 {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    objective: 0.0,
                    values: Vec::new(),
                    iterations: self.iterations,
                });
            }
            // Pin artificials at zero for phase 2.
            for &j in &self.artificials.clone() {
                self.lower[j] = 0.0;
                self.upper[j] = 0.0;
                if !matches!(self.state[j], VarState::Basic(_)) {
                    self.x[j] = 0.0;
                    self.state[j] = VarState::AtLower;
                }
            }
        }
        self.cost = self.cost2.clone();
        self.bland = self.opts.sticky_bland;
        self.degenerate_run = 0;
        let status = self.optimize()?;
        if status == LpStatus::Unbounded {
            return Ok(LpSolution {
                status,
                objective: f64::INFINITY,
                values: Vec::new(),
                iterations: self.iterations,
            });
        }
        // A pinned artificial driven basic with nonzero value would mean the
        // phase transition corrupted feasibility.
        for &j in &self.artificials {
            if self.x[j].abs() > self.opts.feas_tol * 10.0 {
                return Err(SolverError::Numerical(
                    "artificial variable left nonzero".into(),
                ));
            }
        }
        let values = self.x[..self.n_structural].to_vec();
        let objective: f64 = values
            .iter()
            .zip(self.cost2.iter())
            .map(|(&v, &c)| -c * v)
            .sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective,
            values,
            iterations: self.iterations,
        })
    }

    /// Run simplex iterations on the current cost vector until optimal,
    /// unbounded, or a limit trips.
    fn optimize(&mut self) -> Result<LpStatus, SolverError> {
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SolverError::IterationLimit(self.iterations));
            }
            if since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            }
            let y = self.dual_prices();
            let Some((enter, dir)) = self.price(&y) else {
                return Ok(LpStatus::Optimal);
            };
            let w = self.ftran(enter);
            match self.ratio_test(enter, dir, &w) {
                Ratio::Unbounded => return Ok(LpStatus::Unbounded),
                Ratio::BoundFlip(t) => {
                    self.apply_bound_flip(enter, dir, t, &w);
                }
                Ratio::Pivot { row, t, to_upper } => {
                    self.apply_pivot(enter, dir, t, row, to_upper, &w);
                    since_refactor += 1;
                }
            }
            self.iterations += 1;
        }
    }

    /// y = c_B^T B^{-1}, exploiting sparsity of the basic cost vector.
    fn dual_prices(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &j) in self.basic.iter().enumerate() {
            let cb = self.cost[j];
            if cb != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (k, &b) in row.iter().enumerate() {
                    y[k] += cb * b;
                }
            }
        }
        y
    }

    /// Pick an entering variable; `dir` is +1 to increase, -1 to decrease.
    fn price(&self, y: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.cost_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            let (eligible_dir, score) = match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower | VarState::Free => {
                    if self.upper[j] - self.lower[j] <= 0.0 && self.state[j] == VarState::AtLower {
                        continue; // fixed variable
                    }
                    let d = self.reduced_cost(j, y);
                    if self.state[j] == VarState::Free {
                        if d < -tol {
                            (1.0, -d)
                        } else if d > tol {
                            (-1.0, d)
                        } else {
                            continue;
                        }
                    } else if d < -tol {
                        (1.0, -d)
                    } else {
                        continue;
                    }
                }
                VarState::AtUpper => {
                    let d = self.reduced_cost(j, y);
                    if d > tol {
                        (-1.0, d)
                    } else {
                        continue;
                    }
                }
            };
            if self.bland {
                return Some((j, eligible_dir));
            }
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((j, eligible_dir, score)),
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(i, c) in &self.cols[j] {
            d -= y[i] * c;
        }
        d
    }

    /// w = B^{-1} A_j.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, c) in &self.cols[j] {
            if c != 0.0 {
                for r in 0..m {
                    w[r] += self.binv[r * m + i] * c;
                }
            }
        }
        w
    }

    fn ratio_test(&self, enter: usize, dir: f64, w: &[f64]) -> Ratio {
        let own_span = self.upper[enter] - self.lower[enter];
        let mut t_best = if own_span.is_finite() { own_span } else { f64::INFINITY };
        let mut leave: Option<(usize, f64, bool)> = None; // (row, |w|, to_upper)
        for (r, &wr) in w.iter().enumerate() {
            if wr.abs() <= self.opts.pivot_tol {
                continue;
            }
            let bj = self.basic[r];
            let slope = dir * wr; // x_B[r] decreases by slope * t
            let (t_r, to_upper) = if slope > 0.0 {
                let lo = self.lower[bj];
                if lo.is_infinite() {
                    continue;
                }
                (((self.x[bj] - lo) / slope).max(0.0), false)
            } else {
                let hi = self.upper[bj];
                if hi.is_infinite() {
                    continue;
                }
                (((self.x[bj] - hi) / slope).max(0.0), true)
            };
            let better = if self.bland {
                t_r < t_best - self.opts.pivot_tol
                    || (t_r <= t_best + self.opts.pivot_tol
                        && leave.as_ref().map_or(t_r < t_best, |&(lr, _, _)| {
                            self.basic[r] < self.basic[lr]
                        }))
            } else {
                t_r < t_best - self.opts.pivot_tol
                    || (t_r <= t_best + self.opts.pivot_tol
                        && leave.as_ref().is_none_or(|&(_, lw, _)| wr.abs() > lw))
            };
            if better && t_r <= t_best + self.opts.pivot_tol {
                t_best = t_best.min(t_r);
                leave = Some((r, wr.abs(), to_upper));
            }
        }
        match leave {
            None if t_best.is_infinite() => Ratio::Unbounded,
            None => Ratio::BoundFlip(t_best),
            Some((row, _, to_upper)) => {
                // The entering variable's own bound may still be the tightest.
                if own_span.is_finite() && own_span <= t_best {
                    Ratio::BoundFlip(own_span)
                } else {
                    Ratio::Pivot {
                        row,
                        t: t_best,
                        to_upper,
                    }
                }
            }
        }
    }

    fn apply_bound_flip(&mut self, enter: usize, dir: f64, t: f64, w: &[f64]) {
        if t > 0.0 {
            for (r, &wr) in w.iter().enumerate() {
                if wr != 0.0 {
                    let bj = self.basic[r];
                    self.x[bj] -= dir * wr * t;
                }
            }
        }
        self.x[enter] += dir * t;
        self.state[enter] = if dir > 0.0 {
            VarState::AtUpper
        } else {
            VarState::AtLower
        };
        // Snap exactly onto the bound to avoid drift.
        self.x[enter] = if dir > 0.0 { self.upper[enter] } else { self.lower[enter] };
        self.track_degeneracy(t);
    }

    fn apply_pivot(
        &mut self,
        enter: usize,
        dir: f64,
        t: f64,
        row: usize,
        leave_to_upper: bool,
        w: &[f64],
    ) {
        let m = self.m;
        if t > 0.0 {
            for (r, &wr) in w.iter().enumerate() {
                if wr != 0.0 {
                    let bj = self.basic[r];
                    self.x[bj] -= dir * wr * t;
                }
            }
        }
        let leaving = self.basic[row];
        self.x[leaving] = if leave_to_upper {
            self.upper[leaving]
        } else {
            self.lower[leaving]
        };
        self.state[leaving] = if leave_to_upper {
            VarState::AtUpper
        } else {
            VarState::AtLower
        };
        self.x[enter] += dir * t;
        self.state[enter] = VarState::Basic(row);
        self.basic[row] = enter;

        // Rank-one update of the dense inverse.
        let wr = w[row];
        let (head, tail) = self.binv.split_at_mut(row * m);
        let (pivot_row, rest) = tail.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v /= wr;
        }
        let update = |rows: &mut [f64], offset: usize| {
            for (ri, chunk) in rows.chunks_mut(m).enumerate() {
                let wi = w[offset + ri];
                if wi != 0.0 {
                    for (k, v) in chunk.iter_mut().enumerate() {
                        *v -= wi * pivot_row[k];
                    }
                }
            }
        };
        update(head, 0);
        update(rest, row + 1);
        self.track_degeneracy(t);
    }

    fn track_degeneracy(&mut self, t: f64) {
        if self.opts.sticky_bland {
            return;
        }
        if t <= self.opts.pivot_tol {
            self.degenerate_run += 1;
            if self.degenerate_run > 10 * self.m.max(10) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    /// Rebuild the inverse from the basis columns and refresh basic values.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut mat = vec![0.0; m * m];
        for (pos, &j) in self.basic.iter().enumerate() {
            for &(i, c) in &self.cols[j] {
                mat[i * m + pos] = c;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Gauss-Jordan with partial pivoting.
        for col in 0..m {
            let mut piv = col;
            let mut best = mat[col * m + col].abs();
            for r in (col + 1)..m {
                let v = mat[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= 1e-12 {
                return Err(SolverError::Numerical("singular basis".into()));
            }
            if piv != col {
                for k in 0..m {
                    mat.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let d = mat[col * m + col];
            for k in 0..m {
                mat[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            mat[r * m + k] -= f * mat[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        // Recompute basic values from the nonbasic rest points.
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            if self.x[j] != 0.0 {
                for &(i, c) in col {
                    r[i] -= c * self.x[j];
                }
            }
        }
        for pos in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[pos * m + k] * r[k];
            }
            self.x[self.basic[pos]] = v;
        }
        Ok(())
    }
}

fn initial_rest(lo: f64, hi: f64) -> (VarState, f64) {
    if lo.is_finite() {
        (VarState::AtLower, lo)
    } else if hi.is_finite() {
        (VarState::AtUpper, hi)
    } else {
        (VarState::Free, 0.0)
    }
}

enum Ratio {
    Unbounded,
    /// Entering variable travels to its opposite bound; no basis change.
    BoundFlip(f64),
    Pivot {
        row: usize,
        t: f64,
        to_upper: bool,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{LinRow, LinearProgram, RowSense};

    fn lp(objective: Vec<f64>, bounds: Vec<(f64, f64)>, rows: Vec<LinRow>) -> LinearProgram {
        LinearProgram {
            objective,
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            rows,
        }
    }

    #[test]
    fn box_lp_attains_corner() {
        // max x + y, x <= 1, y <= 2.
        let p = lp(
            vec![1.0, 1.0],
            vec![(0.0, 1.0), (0.0, 2.0)],
            vec![],
        );
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.values[0] - 1.0).abs() < 1e-9);
        assert!((sol.values[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // max x s.t. x >= 1, x <= 0.
        let p = lp(
            vec![1.0],
            vec![(0.0, f64::INFINITY)],
            vec![
                LinRow { coeffs: vec![(0, 1.0)], sense: RowSense::Ge, rhs: 1.0 },
                LinRow { coeffs: vec![(0, 1.0)], sense: RowSense::Le, rhs: 0.0 },
            ],
        );
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_detected() {
        let p = lp(vec![1.0], vec![(0.0, f64::INFINITY)], vec![]);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_row_is_honored() {
        // max x + 2y s.t. x + y = 3, x <= 2, y <= 2.
        let p = lp(
            vec![1.0, 2.0],
            vec![(0.0, 2.0), (0.0, 2.0)],
            vec![LinRow {
                coeffs: vec![(0, 1.0), (1, 1.0)],
                sense: RowSense::Eq,
                rhs: 3.0,
            }],
        );
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-9, "{}", sol.objective);
        assert!((sol.values[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Many redundant rows through the same vertex.
        let mut rows = Vec::new();
        for _ in 0..20 {
            rows.push(LinRow {
                coeffs: vec![(0, 1.0), (1, 1.0)],
                sense: RowSense::Le,
                rhs: 1.0,
            });
        }
        let p = lp(vec![1.0, 1.0], vec![(0.0, 10.0), (0.0, 10.0)], rows);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
