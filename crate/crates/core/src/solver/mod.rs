//! MILP solving on top of the simplex core: exact branch-and-bound and a
//! floor-and-repair heuristic for the larger experiment instances, plus an
//! independent solution verifier.

pub mod simplex;

pub use simplex::{solve_lp, solve_lp_with, LpSolution, LpStatus, SimplexOptions, SolverError};

use crate::formulation::{LinearProgram, MilpProblem, RowKind, RowSense, VarKind};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub mode: SolveMode,
    pub feas_tol: f64,
    pub int_tol: f64,
    /// Relative optimality gap below which branch-and-bound stops.
    pub gap_tol: f64,
    pub node_limit: usize,
    pub time_limit_s: f64,
    /// Upper bound on incremental-device LP re-solves in heuristic mode.
    pub heuristic_attempts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolveMode::Exact,
            feas_tol: 1e-6,
            int_tol: 1e-6,
            gap_tol: 1e-4,
            node_limit: 200_000,
            time_limit_s: 600.0,
            heuristic_attempts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MilpStatus {
    Optimal,
    /// Feasible with a relative optimality gap against the best known bound.
    Feasible { gap: f64 },
    Infeasible,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub nodes: usize,
}

impl MilpSolution {
    fn infeasible() -> Self {
        MilpSolution {
            status: MilpStatus::Infeasible,
            objective: 0.0,
            values: Vec::new(),
            nodes: 0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, MilpStatus::Optimal | MilpStatus::Feasible { .. })
    }
}

/// Downscale rows whose largest coefficient magnitude exceeds this, so the
/// simplex tolerances stay meaningful for big-M rows.
const ROW_SCALE_LIMIT: f64 = 1e3;

fn scaled_rows(lp: &LinearProgram) -> LinearProgram {
    let mut out = lp.clone();
    for row in &mut out.rows {
        let max_abs = row
            .coeffs
            .iter()
            .map(|&(_, c)| c.abs())
            .fold(0.0f64, f64::max);
        if max_abs > ROW_SCALE_LIMIT {
            let f = ROW_SCALE_LIMIT / max_abs;
            for c in &mut row.coeffs {
                c.1 *= f;
            }
            row.rhs *= f;
        }
    }
    out
}

/// Solve the program of `prog` in the mode selected by `cfg`.
pub fn solve_milp(prog: &MilpProblem, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    match cfg.mode {
        SolveMode::Exact => solve_milp_exact(&prog.lp, &prog.integer, cfg),
        SolveMode::Heuristic => solve_heuristic(prog, cfg),
    }
}

/// Branch-and-bound over the integer variables of an arbitrary program.
///
/// Depth-first with periodic best-bound reordering; branches the most
/// fractional variable, binaries before general integers.
pub fn solve_milp_exact(
    lp: &LinearProgram,
    integer: &[bool],
    cfg: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    let scaled = scaled_rows(lp);
    let opts = SimplexOptions {
        feas_tol: cfg.feas_tol,
        ..SimplexOptions::default()
    };
    let int_idx: Vec<usize> = (0..lp.n_vars()).filter(|&j| integer[j]).collect();
    let is_binary: Vec<bool> = int_idx
        .iter()
        .map(|&j| lp.lower[j] >= 0.0 && lp.upper[j] <= 1.0)
        .collect();

    struct Node {
        bounds: Vec<(f64, f64)>,
        bound: f64,
    }
    let root_bounds: Vec<(f64, f64)> = int_idx.iter().map(|&j| (lp.lower[j], lp.upper[j])).collect();
    let mut stack = vec![Node {
        bounds: root_bounds,
        bound: f64::INFINITY,
    }];
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut truncated = false;
    let started = Instant::now();
    let eps = |inc: f64| 1e-9 * (1.0 + inc.abs());

    while let Some(node) = stack.pop() {
        if nodes >= cfg.node_limit || started.elapsed().as_secs_f64() > cfg.time_limit_s {
            truncated = true;
            break;
        }
        if let Some((inc, _)) = &incumbent {
            if node.bound <= inc + eps(*inc) {
                continue;
            }
            // Stop once the whole open tree is within the gap tolerance.
            let best_open = node
                .bound
                .max(stack.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max));
            if best_open.is_finite() && best_open - inc <= cfg.gap_tol * (1.0 + inc.abs()) {
                break;
            }
        }
        nodes += 1;
        if nodes % 1024 == 0 {
            stack.sort_by(|a, b| a.bound.total_cmp(&b.bound));
        }

        let mut nlp = scaled.clone();
        for (k, &j) in int_idx.iter().enumerate() {
            nlp.lower[j] = node.bounds[k].0;
            nlp.upper[j] = node.bounds[k].1;
        }
        let sol = solve_lp_with(&nlp, &opts)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(SolverError::Numerical("unbounded node relaxation".into()))
            }
            LpStatus::Optimal => {}
        }
        if let Some((inc, _)) = &incumbent {
            if sol.objective <= inc + eps(*inc) {
                continue;
            }
        }

        // Branching candidate: most fractional, binaries first, lowest index.
        let frac = |k: usize| {
            let v = sol.values[int_idx[k]];
            (v - v.round()).abs()
        };
        let fractional: Vec<usize> = (0..int_idx.len())
            .filter(|&k| frac(k) > cfg.int_tol)
            .collect();
        let pool: Vec<usize> = if fractional.iter().any(|&k| is_binary[k]) {
            fractional.iter().copied().filter(|&k| is_binary[k]).collect()
        } else {
            fractional
        };
        let Some(&pick) = pool
            .iter()
            .reduce(|a, b| if frac(*b) > frac(*a) { b } else { a })
        else {
            // Integer feasible: re-solve with the integers pinned so the
            // continuous part is exact at the rounded point.
            let mut flp = scaled.clone();
            for &j in &int_idx {
                let v = sol.values[j].round();
                flp.lower[j] = v;
                flp.upper[j] = v;
            }
            let polished = solve_lp_with(&flp, &opts)?;
            let (obj, values) = if polished.status == LpStatus::Optimal {
                (polished.objective, polished.values)
            } else {
                (sol.objective, sol.values)
            };
            if incumbent.as_ref().is_none_or(|(inc, _)| obj > *inc) {
                incumbent = Some((obj, values));
            }
            continue;
        };

        let v = sol.values[int_idx[pick]];
        let (lo, hi) = node.bounds[pick];
        let mut down = node.bounds.clone();
        down[pick] = (lo, v.floor());
        let mut up = node.bounds;
        up[pick] = (v.ceil(), hi);
        let down_node = Node { bounds: down, bound: sol.objective };
        let up_node = Node { bounds: up, bound: sol.objective };
        // Explore the side nearer the fractional value first (pushed last).
        if v - v.floor() <= 0.5 {
            stack.push(up_node);
            stack.push(down_node);
        } else {
            stack.push(down_node);
            stack.push(up_node);
        }
    }

    Ok(match incumbent {
        Some((obj, values)) => {
            let status = if truncated {
                let best_open = stack.iter().map(|n| n.bound).fold(obj, f64::max);
                MilpStatus::Feasible {
                    gap: ((best_open - obj) / (1.0 + obj.abs())).max(0.0),
                }
            } else {
                MilpStatus::Optimal
            };
            MilpSolution {
                status,
                objective: obj,
                values,
                nodes,
            }
        }
        None if truncated => MilpSolution {
            status: MilpStatus::Unknown,
            objective: 0.0,
            values: Vec::new(),
            nodes,
        },
        None => MilpSolution {
            status: MilpStatus::Infeasible,
            objective: 0.0,
            values: Vec::new(),
            nodes,
        },
    })
}

/// Floor-and-repair heuristic: solve the relaxation, floor device counts,
/// derive the trust flags they imply, shed devices until the budget holds,
/// re-solve the flows, then greedily try single-device additions.
fn solve_heuristic(prog: &MilpProblem, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    let lp = scaled_rows(&prog.lp);
    let opts = SimplexOptions {
        feas_tol: cfg.feas_tol,
        ..SimplexOptions::default()
    };
    let relax = solve_lp_with(&lp, &opts)?;
    match relax.status {
        LpStatus::Infeasible => return Ok(MilpSolution::infeasible()),
        LpStatus::Unbounded => {
            return Err(SolverError::Numerical("unbounded relaxation".into()))
        }
        LpStatus::Optimal => {}
    }
    let bound = relax.objective;
    let n = lp.n_vars();
    let int_vars: Vec<usize> = (0..n).filter(|&j| prog.integer[j]).collect();

    // Trust flags implied by each device variable, read off the linking rows.
    let mut trust_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ri, kind) in prog.row_kinds.iter().enumerate() {
        if matches!(kind, RowKind::TrustLink { .. }) {
            let row = &prog.lp.rows[ri];
            let dev = row.coeffs.iter().find(|&&(_, c)| c > 0.0);
            let trust = row.coeffs.iter().find(|&&(_, c)| c < 0.0);
            if let (Some(&(d, _)), Some(&(t, _))) = (dev, trust) {
                trust_of[d].push(t);
            }
        }
    }
    let cost_row = prog
        .row_kinds
        .iter()
        .position(|k| matches!(k, RowKind::Cost));

    let is_device = |j: usize| {
        matches!(
            prog.var_kinds[j],
            VarKind::CscDevice { .. } | VarKind::C2cDevice { .. }
        )
    };
    let mut assign = vec![0.0f64; n];
    for &j in &int_vars {
        assign[j] = match prog.var_kinds[j] {
            VarKind::Transit { .. } => {
                // The relaxation keeps z at flow/M, which can be arbitrarily
                // small; any positive value signals the node relays traffic.
                if relax.values[j] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (relax.values[j] + cfg.int_tol)
                .floor()
                .clamp(prog.lp.lower[j], prog.lp.upper[j]),
        };
    }
    let imply_trust = |assign: &mut [f64]| {
        for &j in &int_vars {
            if matches!(prog.var_kinds[j], VarKind::Trust { .. }) {
                assign[j] = 0.0;
            }
        }
        for &j in &int_vars {
            if assign[j] > 0.0 {
                for &t in &trust_of[j] {
                    assign[t] = 1.0;
                }
            }
        }
    };
    let cost_of = |assign: &[f64]| -> f64 {
        cost_row.map_or(0.0, |ri| {
            prog.lp.rows[ri]
                .coeffs
                .iter()
                .map(|&(j, c)| c * assign[j])
                .sum()
        })
    };
    let budget = cost_row.map_or(f64::INFINITY, |ri| prog.lp.rows[ri].rhs);

    // Shed until the construction cost fits. Whether devices or transit
    // flags should go first depends on the instance, so both orders are
    // constructed and the better fixed solution wins.
    let shed = |mut assign: Vec<f64>, transit_first: bool| -> Vec<f64> {
        loop {
            imply_trust(&mut assign);
            if cost_of(&assign) <= budget + 1e-9 {
                return assign;
            }
            let transit = int_vars.iter().copied().find(|&j| {
                matches!(prog.var_kinds[j], VarKind::Transit { .. }) && assign[j] > 0.0
            });
            if transit_first {
                if let Some(j) = transit {
                    assign[j] = 0.0;
                    continue;
                }
            }
            let pick = int_vars
                .iter()
                .filter(|&&j| is_device(j) && assign[j] > 0.0)
                .min_by(|&&a, &&b| {
                    let fa = relax.values[a] - relax.values[a].floor();
                    let fb = relax.values[b] - relax.values[b].floor();
                    fa.total_cmp(&fb)
                });
            if let Some(&j) = pick {
                assign[j] -= 1.0;
                continue;
            }
            match transit {
                Some(j) => assign[j] = 0.0,
                None => return assign, // only implied flags remain
            }
        }
    };

    let solve_fixed = |assign: &[f64]| -> Result<LpSolution, SolverError> {
        let mut flp = lp.clone();
        for &j in &int_vars {
            flp.lower[j] = assign[j];
            flp.upper[j] = assign[j];
        }
        solve_lp_with(&flp, &opts)
    };
    let assign_devices_first = shed(assign.clone(), false);
    let assign_transit_first = shed(assign, true);
    let mut assign = assign_devices_first;
    let mut best = solve_fixed(&assign)?;
    if assign_transit_first != assign {
        let alt = solve_fixed(&assign_transit_first)?;
        if alt.status == LpStatus::Optimal
            && (best.status != LpStatus::Optimal || alt.objective > best.objective)
        {
            assign = assign_transit_first;
            best = alt;
        }
    }
    if best.status != LpStatus::Optimal {
        // All-zero integers are always feasible for these programs; fall back.
        for &j in &int_vars {
            assign[j] = 0.0;
        }
        best = solve_fixed(&assign)?;
        if best.status != LpStatus::Optimal {
            return Err(SolverError::Numerical(
                "fixed-integer subproblem unexpectedly infeasible".into(),
            ));
        }
    }

    // Greedy improvement: try adding one device at a time where the
    // relaxation's fractional remainder was largest.
    let mut candidates: Vec<usize> = int_vars.iter().copied().filter(|&j| is_device(j)).collect();
    candidates.sort_by(|&a, &b| {
        let fa = relax.values[a] - relax.values[a].floor();
        let fb = relax.values[b] - relax.values[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut attempts = 0usize;
    let mut improved = true;
    'outer: while improved && attempts < cfg.heuristic_attempts {
        improved = false;
        for &j in &candidates {
            if attempts >= cfg.heuristic_attempts {
                break 'outer;
            }
            if assign[j] + 1.0 > prog.lp.upper[j] + 1e-9 {
                continue;
            }
            let mut trial = assign.clone();
            trial[j] += 1.0;
            imply_trust(&mut trial);
            if cost_of(&trial) > budget + 1e-9 {
                continue;
            }
            attempts += 1;
            let sol = solve_fixed(&trial)?;
            if sol.status == LpStatus::Optimal && sol.objective > best.objective + 1e-9 {
                assign = trial;
                best = sol;
                improved = true;
            }
        }
    }

    let gap = ((bound - best.objective) / (1.0 + best.objective.abs())).max(0.0);
    Ok(MilpSolution {
        status: MilpStatus::Feasible { gap },
        objective: best.objective,
        values: best.values,
        nodes: 0,
    })
}

/// Canonical flow pattern for a solved program: keep the integer assignment
/// and the achieved objective, then minimize total flow. Removes the
/// arbitrary circulation a vertex solution may carry, so flow-derived
/// metrics do not depend on the pivot path that found the optimum.
pub fn minimal_flow_values(
    prog: &MilpProblem,
    values: &[f64],
) -> Result<Vec<f64>, SolverError> {
    let mut lp = prog.lp.clone();
    let mut flow_objective = vec![0.0; lp.n_vars()];
    for (j, kind) in prog.var_kinds.iter().enumerate() {
        match kind {
            VarKind::C2cFlow { .. } | VarKind::CscFlow { .. } => {
                flow_objective[j] = -1.0; // maximize negative total flow
            }
            VarKind::BMin => {
                let v = values[j];
                lp.lower[j] = v - 1e-9 * (1.0 + v.abs());
                lp.upper[j] = v;
            }
            _ => {
                lp.lower[j] = values[j];
                lp.upper[j] = values[j];
            }
        }
    }
    lp.objective = flow_objective;
    let sol = solve_lp_with(&lp, &SimplexOptions::default())?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.values),
        _ => Err(SolverError::Numerical(
            "flow canonicalization subproblem did not solve".into(),
        )),
    }
}

/// One constraint violated by a candidate solution.
#[derive(Debug, Clone)]
pub struct Violation {
    pub description: String,
    pub amount: f64,
}

/// Independently check a variable assignment against the original (unscaled)
/// program: bounds, exact integrality, and every row within a relative
/// tolerance.
pub fn verify_solution(prog: &MilpProblem, values: &[f64], tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if values.len() != prog.lp.n_vars() {
        out.push(Violation {
            description: format!(
                "assignment has {} values for {} variables",
                values.len(),
                prog.lp.n_vars()
            ),
            amount: f64::INFINITY,
        });
        return out;
    }
    for (j, &v) in values.iter().enumerate() {
        let allowed = tol * (1.0 + v.abs());
        if v < prog.lp.lower[j] - allowed || v > prog.lp.upper[j] + allowed {
            out.push(Violation {
                description: format!(
                    "variable x{j} ({:?}) = {v} outside [{}, {}]",
                    prog.var_kinds[j], prog.lp.lower[j], prog.lp.upper[j]
                ),
                amount: (prog.lp.lower[j] - v).max(v - prog.lp.upper[j]),
            });
        }
        if prog.integer[j] {
            let frac = (v - v.round()).abs();
            if frac != 0.0 {
                out.push(Violation {
                    description: format!(
                        "variable x{j} ({:?}) = {v} is not exactly integral",
                        prog.var_kinds[j]
                    ),
                    amount: frac,
                });
            }
        }
    }
    for (ri, row) in prog.lp.rows.iter().enumerate() {
        let mut lhs = 0.0;
        let mut magnitude = 0.0;
        for &(j, c) in &row.coeffs {
            lhs += c * values[j];
            magnitude += (c * values[j]).abs();
        }
        let excess = match row.sense {
            RowSense::Le => lhs - row.rhs,
            RowSense::Ge => row.rhs - lhs,
            RowSense::Eq => (lhs - row.rhs).abs(),
        };
        let allowed = tol * (1.0 + row.rhs.abs() + magnitude);
        if excess > allowed {
            out.push(Violation {
                description: format!(
                    "row {ri} ({:?}) violated: lhs {lhs} vs rhs {}",
                    prog.row_kinds[ri], row.rhs
                ),
                amount: excess,
            });
        }
    }
    out
}
