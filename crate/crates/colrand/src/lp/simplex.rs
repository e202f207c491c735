//! Two-phase primal revised simplex over explicit sparse columns.
//!
//! The basis inverse is maintained densely and refactorized from scratch
//! every [`SimplexOptions::refactor_every`] pivots. Pricing is Dantzig (most
//! negative reduced cost, ties to the smallest column index) and switches to
//! Bland's smallest-index rule after a run of degenerate pivots. Ratio-test
//! ties break toward the smallest row index. Given identical input and
//! options the pivot sequence is bit-identical.

use serde::{Deserialize, Serialize};

use super::{to_standard_form, CostedColumn, LpInstance, FEAS_TOL, OPT_TOL, PIVOT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// What occupies a basis slot: a column of the standardized instance
/// (structural columns first, fixed block after) or a phase-one artificial
/// for the given row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisSlot {
    Column(usize),
    Artificial(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective in the sense convention of the solved instance.
    pub objective: f64,
    /// Values of the instance's own columns (structural then fixed);
    /// standardization slacks are not reported.
    pub primal: Vec<f64>,
    /// Duals in the sense convention of the solved instance.
    pub dual: Vec<f64>,
    /// Basis of the standardized working problem, one slot per row.
    pub basis: Vec<BasisSlot>,
    pub iterations: usize,
    /// Rows whose phase-one artificial could not be pivoted out: the row was
    /// linearly dependent on the others and stays covered by an artificial
    /// frozen at zero.
    pub redundant_rows: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Pivot cap; defaults to `50 * (num_rows + num_columns)` when `None`.
    pub max_iters: Option<usize>,
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    /// Rebuild the basis inverse from scratch after this many pivots.
    pub refactor_every: usize,
    /// Switch from Dantzig to Bland pricing after this many consecutive
    /// degenerate pivots.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iters: None,
            feas_tol: FEAS_TOL,
            opt_tol: OPT_TOL,
            pivot_tol: PIVOT_TOL,
            refactor_every: 64,
            bland_after: 200,
        }
    }
}

/// Solves an explicit LP. Instances that are not min-form all-equality are
/// standardized first; the reported objective, primal values and duals are
/// translated back to the caller's convention.
pub fn solve_simplex(inst: &LpInstance, opts: &SimplexOptions) -> SolveResult {
    let std = to_standard_form(inst);
    let mut res = solve_standard(&std.lp, opts);
    res.objective = std.objective_back(res.objective);
    res.dual = std.dual_back(&res.dual);
    res.primal.truncate(std.original_columns);
    res
}

const DEGENERATE_STEP: f64 = 1e-12;

struct Tableau<'a> {
    rows: usize,
    cols: Vec<&'a CostedColumn>,
    /// Right-hand side with rows flipped to be nonnegative.
    b: Vec<f64>,
    row_flip: Vec<bool>,
    /// Dense row-major basis inverse.
    binv: Vec<f64>,
    basis: Vec<BasisSlot>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LpInstance) -> Self {
        let m = lp.num_rows;
        let cols: Vec<&CostedColumn> = lp.columns.iter().chain(&lp.fixed_columns).collect();
        let row_flip: Vec<bool> = lp.rhs.iter().map(|&b| b < 0.0).collect();
        let b: Vec<f64> = lp.rhs.iter().map(|&b| b.abs()).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Tableau {
            rows: m,
            cols,
            b: b.clone(),
            row_flip,
            binv,
            basis: (0..m).map(BasisSlot::Artificial).collect(),
            xb: b,
            pivots_since_refactor: 0,
        }
    }

    /// Entry `row` of the working (sign-flipped) column `j`.
    fn column_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cols[j]
            .column
            .entries()
            .iter()
            .map(move |&(r, v)| (r, if self.row_flip[r] { -v } else { v }))
    }

    /// `B^-1 A_j` for a working column, or `B^-1 e_r` for an artificial.
    fn ftran(&self, slot: BasisSlot) -> Vec<f64> {
        let m = self.rows;
        let mut d = vec![0.0; m];
        match slot {
            BasisSlot::Column(j) => {
                for (r, v) in self.column_entries(j) {
                    for i in 0..m {
                        d[i] += self.binv[i * m + r] * v;
                    }
                }
            }
            BasisSlot::Artificial(r) => {
                for i in 0..m {
                    d[i] = self.binv[i * m + r];
                }
            }
        }
        d
    }

    /// Simplex multipliers `c_B^T B^-1` for the given per-slot costs.
    fn multipliers(&self, cost_of: impl Fn(BasisSlot) -> f64) -> Vec<f64> {
        let m = self.rows;
        let mut p = vec![0.0; m];
        for (i, &slot) in self.basis.iter().enumerate() {
            let c = cost_of(slot);
            if c != 0.0 {
                for r in 0..m {
                    p[r] += c * self.binv[i * m + r];
                }
            }
        }
        p
    }

    /// Replaces the basis column in `row` with `slot` given the pivot column
    /// `d = B^-1 A_enter` and step length `theta`.
    fn pivot(&mut self, row: usize, slot: BasisSlot, d: &[f64], theta: f64) {
        let m = self.rows;
        for i in 0..m {
            if i != row {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = theta;
        let pivot = d[row];
        for r in 0..m {
            self.binv[row * m + r] /= pivot;
        }
        for i in 0..m {
            if i != row && d[i] != 0.0 {
                let f = d[i];
                for r in 0..m {
                    self.binv[i * m + r] -= f * self.binv[row * m + r];
                }
            }
        }
        self.basis[row] = slot;
        self.pivots_since_refactor += 1;
    }

    /// Rebuilds `binv` from the basis columns by Gauss-Jordan elimination
    /// with partial pivoting, then recomputes the basic values. If the
    /// factorization stumbles on a vanishing pivot the current (product-form)
    /// inverse is kept.
    fn refactorize(&mut self, pivot_tol: f64) {
        let m = self.rows;
        let mut mat = vec![0.0; m * m];
        for (k, &slot) in self.basis.iter().enumerate() {
            match slot {
                BasisSlot::Column(j) => {
                    for (r, v) in self.column_entries(j) {
                        mat[r * m + k] = v;
                    }
                }
                BasisSlot::Artificial(r) => mat[r * m + k] = 1.0,
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut best = col;
            for r in col + 1..m {
                if mat[r * m + col].abs() > mat[best * m + col].abs() {
                    best = r;
                }
            }
            if mat[best * m + col].abs() < pivot_tol * 1e-3 {
                return; // keep the updated inverse
            }
            if best != col {
                for k in 0..m {
                    mat.swap(col * m + k, best * m + k);
                    inv.swap(col * m + k, best * m + k);
                }
            }
            let piv = mat[col * m + col];
            for k in 0..m {
                mat[col * m + k] /= piv;
                inv[col * m + k] /= piv;
            }
            for r in 0..m {
                if r != col && mat[r * m + col] != 0.0 {
                    let f = mat[r * m + col];
                    for k in 0..m {
                        mat[r * m + k] -= f * mat[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        // The row operations reduced `mat` to the identity, so `inv` is the
        // accumulated operator B^-1 in the same row-major layout we maintain.
        self.binv = inv;
        self.pivots_since_refactor = 0;
        let b = self.b.clone();
        for i in 0..m {
            let mut v = 0.0;
            for r in 0..m {
                v += self.binv[i * m + r] * b[r];
            }
            self.xb[i] = if v < 0.0 && v > -1e-9 { 0.0 } else { v };
        }
    }
}

enum PhaseOutcome {
    Converged,
    Unbounded,
    IterationLimit,
}

/// Runs pivots until the phase objective is optimal.
#[allow(clippy::too_many_arguments)]
fn run_phase(
    t: &mut Tableau,
    costs: &dyn Fn(BasisSlot) -> f64,
    reduced: &dyn Fn(&Tableau, usize, &[f64]) -> f64,
    opts: &SimplexOptions,
    iterations: &mut usize,
    max_iters: usize,
    bland: &mut bool,
    degenerate_run: &mut usize,
) -> PhaseOutcome {
    loop {
        if *iterations >= max_iters {
            return PhaseOutcome::IterationLimit;
        }
        let p = t.multipliers(costs);
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..t.cols.len() {
            let rc = reduced(t, j, &p);
            if rc < -opts.opt_tol {
                if *bland {
                    entering = Some((j, rc));
                    break;
                }
                match entering {
                    Some((_, best)) if rc >= best => {}
                    _ => entering = Some((j, rc)),
                }
            }
        }
        let Some((j, _)) = entering else {
            return PhaseOutcome::Converged;
        };
        let d = t.ftran(BasisSlot::Column(j));
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.rows {
            if d[i] > opts.pivot_tol {
                let ratio = t.xb[i] / d[i];
                match leave {
                    Some((_, best)) if ratio >= best => {}
                    _ => leave = Some((i, ratio)),
                }
            }
        }
        let Some((row, theta)) = leave else {
            return PhaseOutcome::Unbounded;
        };
        t.pivot(row, BasisSlot::Column(j), &d, theta);
        *iterations += 1;
        if theta <= DEGENERATE_STEP {
            *degenerate_run += 1;
            if *degenerate_run >= opts.bland_after {
                *bland = true;
            }
        } else {
            *degenerate_run = 0;
        }
        if t.pivots_since_refactor >= opts.refactor_every {
            t.refactorize(opts.pivot_tol);
        }
    }
}

/// Core solver for min-form all-equality instances.
fn solve_standard(lp: &LpInstance, opts: &SimplexOptions) -> SolveResult {
    lp.validate();
    debug_assert!(lp.is_standard());
    let m = lp.num_rows;
    let n = lp.num_columns();
    let max_iters = opts.max_iters.unwrap_or(50 * (m + n));
    let mut t = Tableau::new(lp);
    let mut iterations = 0usize;
    let mut bland = false;
    let mut degenerate_run = 0usize;

    // Phase one: drive the artificial variables to zero.
    let phase1_cost = |slot: BasisSlot| match slot {
        BasisSlot::Column(_) => 0.0,
        BasisSlot::Artificial(_) => 1.0,
    };
    let phase1_reduced =
        |t: &Tableau, j: usize, p: &[f64]| -t.column_entries(j).map(|(r, v)| p[r] * v).sum::<f64>();
    let outcome = run_phase(
        &mut t,
        &phase1_cost,
        &phase1_reduced,
        opts,
        &mut iterations,
        max_iters,
        &mut bland,
        &mut degenerate_run,
    );
    let unfinished = |status: SolveStatus, t: &Tableau, iterations: usize| SolveResult {
        status,
        objective: f64::NAN,
        primal: vec![0.0; n],
        dual: vec![0.0; t.rows],
        basis: t.basis.clone(),
        iterations,
        redundant_rows: Vec::new(),
    };
    match outcome {
        PhaseOutcome::IterationLimit => {
            return unfinished(SolveStatus::IterationLimit, &t, iterations)
        }
        // The phase-one objective is bounded below by zero; an unbounded ray
        // here means numerical breakdown, reported as an iteration problem.
        PhaseOutcome::Unbounded => return unfinished(SolveStatus::IterationLimit, &t, iterations),
        PhaseOutcome::Converged => {}
    }
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(slot, _)| matches!(slot, BasisSlot::Artificial(_)))
        .map(|(_, &v)| v)
        .sum();
    if infeasibility > opts.feas_tol {
        return unfinished(SolveStatus::Infeasible, &t, iterations);
    }

    // Pivot out artificials stuck in the basis at zero where some working
    // column can replace them; rows where none can are linearly dependent.
    let mut redundant_rows = Vec::new();
    for i in 0..m {
        if !matches!(t.basis[i], BasisSlot::Artificial(_)) {
            continue;
        }
        let mut replaced = false;
        for j in 0..t.cols.len() {
            let mut dij = 0.0;
            for (r, v) in t.column_entries(j) {
                dij += t.binv[i * m + r] * v;
            }
            if dij.abs() > opts.pivot_tol {
                let d = t.ftran(BasisSlot::Column(j));
                t.pivot(i, BasisSlot::Column(j), &d, 0.0);
                replaced = true;
                break;
            }
        }
        if !replaced {
            let BasisSlot::Artificial(r) = t.basis[i] else {
                unreachable!()
            };
            redundant_rows.push(r);
            t.xb[i] = 0.0;
        }
    }
    redundant_rows.sort_unstable();

    // Phase two on the true costs; artificials left in the basis cost zero
    // and stay at zero because their rows carry no working-column mass.
    let cols_costs: Vec<f64> = t.cols.iter().map(|c| c.cost).collect();
    let cost_of = {
        let cols_costs = cols_costs.clone();
        move |slot: BasisSlot| match slot {
            BasisSlot::Column(j) => cols_costs[j],
            BasisSlot::Artificial(_) => 0.0,
        }
    };
    let phase2_reduced = |t: &Tableau, j: usize, p: &[f64]| {
        t.cols[j].cost - t.column_entries(j).map(|(r, v)| p[r] * v).sum::<f64>()
    };
    let outcome = run_phase(
        &mut t,
        &cost_of,
        &phase2_reduced,
        opts,
        &mut iterations,
        max_iters,
        &mut bland,
        &mut degenerate_run,
    );
    let status = match outcome {
        PhaseOutcome::Converged => SolveStatus::Optimal,
        PhaseOutcome::Unbounded => SolveStatus::Unbounded,
        PhaseOutcome::IterationLimit => SolveStatus::IterationLimit,
    };
    if status != SolveStatus::Optimal {
        let mut r = unfinished(status, &t, iterations);
        r.redundant_rows = redundant_rows;
        return r;
    }

    // Extract from a freshly factorized basis so the reported solution
    // carries no product-form drift.
    t.refactorize(opts.pivot_tol);
    let mut primal = vec![0.0; n];
    let mut objective = 0.0;
    for (i, &slot) in t.basis.iter().enumerate() {
        if let BasisSlot::Column(j) = slot {
            let v = t.xb[i].max(0.0);
            primal[j] += v;
            objective += cols_costs[j] * v;
        }
    }
    let mut dual = t.multipliers(&cost_of);
    for (r, flipped) in t.row_flip.iter().enumerate() {
        if *flipped {
            dual[r] = -dual[r];
        }
    }
    SolveResult {
        status,
        objective,
        primal,
        dual,
        basis: t.basis.clone(),
        iterations,
        redundant_rows,
    }
}
