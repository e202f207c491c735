//! Column generation baseline with exact pricing per family.
//!
//! Each iteration solves the restricted LP over the current column set, asks
//! the family's pricing routine for the column of minimum reduced cost under
//! the restricted duals, and adds that one column, stopping when the minimum
//! reduced cost is nonnegative (within tolerance). Pricing is exact for all
//! built-in families, so termination certifies optimality of the restricted
//! objective for the complete problem.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cr::CrRun;
use crate::lp::{
    solve_simplex, CostedColumn, SimplexOptions, SolveResult, SolveStatus, OPT_TOL,
};
use crate::oracles::{
    factorial, lehmer_decode, lehmer_encode, ChoiceParams, ColumnId, CuttingStockParams, Instance,
    InstanceKind, MdpParams,
};
use crate::rng::Stream;

#[derive(Debug, thiserror::Error)]
pub enum ColgenError {
    #[error("no exact pricing routine for this family")]
    NoPricer,
    #[error("{0} options is too many for exhaustive ranking enumeration (max 9)")]
    EnumerationTooLarge(usize),
    #[error("restricted problem not solvable: {0:?}")]
    RestrictedNotSolvable(SolveStatus),
    #[error("warm start requires an optimal run, got {0:?}")]
    WarmStartNotOptimal(SolveStatus),
    #[error(transparent)]
    Oracle(#[from] crate::oracles::OracleError),
}

/// A priced column: identity, materialized data, and its exact reduced cost
/// under the duals it was priced against.
#[derive(Clone, Debug)]
pub struct PricedColumn {
    pub id: ColumnId,
    pub column: CostedColumn,
    pub reduced_cost: f64,
}

/// Exact minimum-reduced-cost pattern via unbounded-knapsack dynamic
/// programming over the roll capacity: maximizes `p^T a` subject to
/// `w^T a <= W` over nonnegative integer patterns, so the reduced cost of
/// the returned pattern is `1 - max p^T a`. Ties prefer the smallest width
/// index at every capacity, giving a deterministic reconstruction.
pub fn price_cutting_stock(duals: &[f64], params: &CuttingStockParams) -> PricedColumn {
    let w = params.roll_width as usize;
    const SKIP: usize = usize::MAX;
    let mut best = vec![0.0f64; w + 1];
    let mut take = vec![SKIP; w + 1];
    for cap in 1..=w {
        best[cap] = best[cap - 1];
        take[cap] = SKIP;
        for (i, &wi) in params.widths.iter().enumerate() {
            let wi = wi as usize;
            if wi <= cap {
                let candidate = best[cap - wi] + duals[i];
                if candidate > best[cap] {
                    best[cap] = candidate;
                    take[cap] = i;
                }
            }
        }
    }
    let mut pattern = vec![0u32; params.widths.len()];
    let mut cap = w;
    while cap > 0 {
        match take[cap] {
            SKIP => cap -= 1,
            i => {
                pattern[i] += 1;
                cap -= params.widths[i] as usize;
            }
        }
    }
    let column = params
        .pattern_column(&pattern)
        .expect("knapsack reconstruction is feasible");
    PricedColumn {
        id: ColumnId::Pattern(pattern),
        column,
        reduced_cost: 1.0 - best[w],
    }
}

/// Exact minimum-reduced-cost ranking by full enumeration of all
/// `(N+1)!` permutations, each evaluated against the duals (unit-sum row
/// included). Feasible at desk scale only; ties prefer the smallest Lehmer
/// code.
pub fn price_choice_bruteforce(
    duals: &[f64],
    params: &ChoiceParams,
) -> Result<PricedColumn, ColgenError> {
    let options = params.num_options();
    if options > 9 {
        return Err(ColgenError::EnumerationTooLarge(options));
    }
    let total = factorial(options as u64);
    let mut best: Option<(u64, f64)> = None;
    for code in 0..total {
        let order = lehmer_decode(code, options);
        // Reduced cost of a zero-cost column is minus the dual mass it
        // covers: one cell per assortment plus the unit-sum row.
        let mut covered = duals[params.unit_sum_row()];
        for m in 0..params.num_assortments() {
            let chosen = order
                .iter()
                .copied()
                .find(|&o| params.offered(o as usize, m))
                .expect("option 0 is always offered");
            covered += duals[params.row(chosen as usize, m)];
        }
        let rc = -covered;
        match best {
            Some((_, best_rc)) if rc >= best_rc => {}
            _ => best = Some((code, rc)),
        }
    }
    let (code, reduced_cost) = best.expect("at least one ranking exists");
    let order = lehmer_decode(code, options);
    Ok(PricedColumn {
        id: ColumnId::Ranking(code),
        column: params.ranking_column(&order)?,
        reduced_cost,
    })
}

/// Exact minimum-reduced-cost state-action pair by enumeration; ties prefer
/// the lexicographically smallest pair.
pub fn price_mdp(duals: &[f64], params: &MdpParams) -> PricedColumn {
    let mut best: Option<(usize, usize, f64)> = None;
    for s in 0..params.num_states {
        for a in 0..params.num_actions {
            let mut covered = duals[s];
            for s2 in 0..params.num_states {
                covered -= params.discount * params.transition(s, a, s2) * duals[s2];
            }
            let rc = params.cost(s, a) - covered;
            match best {
                Some((_, _, best_rc)) if rc >= best_rc => {}
                _ => best = Some((s, a, rc)),
            }
        }
    }
    let (s, a, reduced_cost) = best.expect("MDP has at least one state-action pair");
    PricedColumn {
        id: ColumnId::StateAction(s as u32, a as u32),
        column: params
            .state_action_column(s, a)
            .expect("enumerated pair materializes"),
        reduced_cost,
    }
}

/// Family dispatch for exact pricing.
pub fn price(instance: &Instance, duals: &[f64]) -> Result<PricedColumn, ColgenError> {
    match &instance.kind {
        InstanceKind::CuttingStock(p) => Ok(price_cutting_stock(duals, p)),
        InstanceKind::Choice(p) => price_choice_bruteforce(duals, p),
        InstanceKind::Mdp(p) => Ok(price_mdp(duals, p)),
        _ => Err(ColgenError::NoPricer),
    }
}

/// Whether exact pricing is available for the family.
pub fn has_pricer(instance: &Instance) -> bool {
    matches!(
        instance.kind,
        InstanceKind::CuttingStock(_) | InstanceKind::Choice(_) | InstanceKind::Mdp(_)
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitProvenance {
    Cold,
    CrWarmStart,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgIteration {
    pub objective: f64,
    pub min_reduced_cost: f64,
    pub millis: f64,
}

#[derive(Clone, Debug)]
pub struct CgRun {
    pub iterations: usize,
    pub trace: Vec<CgIteration>,
    pub result: SolveResult,
    pub columns: Vec<(ColumnId, CostedColumn)>,
    pub provenance: InitProvenance,
    /// Termination was certified by nonnegative minimum reduced cost (as
    /// opposed to hitting the iteration cap).
    pub converged: bool,
}

/// Compact serializable record of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgSummary {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub provenance: InitProvenance,
    pub columns: usize,
}

impl CgRun {
    pub fn objective(&self) -> f64 {
        self.result.objective
    }

    pub fn summary(&self) -> CgSummary {
        CgSummary {
            objective: self.result.objective,
            iterations: self.iterations,
            converged: self.converged,
            provenance: self.provenance,
            columns: self.columns.len(),
        }
    }

    /// Per-iteration trace as CSV rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,objective,min_reduced_cost,millis\n");
        for (i, it) in self.trace.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.3}\n",
                i, it.objective, it.min_reduced_cost, it.millis
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CgOptions {
    pub max_iterations: usize,
    /// Terminate once the minimum reduced cost exceeds `-opt_tol`.
    pub opt_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            max_iterations: 10_000,
            opt_tol: OPT_TOL,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Feasible starting columns per family: every singleton pattern for cutting
/// stock, one seeded random ranking for choice estimation (the error columns
/// keep the program feasible), one seeded random action per state for MDPs.
pub fn cold_start_columns(
    instance: &Instance,
    seed: u64,
) -> Result<Vec<(ColumnId, CostedColumn)>, ColgenError> {
    let root = Stream::new(seed).derive_named("cold");
    match &instance.kind {
        InstanceKind::CuttingStock(p) => Ok((0..p.widths.len())
            .map(|i| {
                let mut pattern = vec![0u32; p.widths.len()];
                pattern[i] = p.roll_width / p.widths[i];
                let column = p.pattern_column(&pattern).expect("singleton fits");
                (ColumnId::Pattern(pattern), column)
            })
            .collect()),
        InstanceKind::Choice(p) => {
            let mut r = root;
            let order = p.sample_ranking(&mut r);
            let code = lehmer_encode(&order);
            Ok(vec![(ColumnId::Ranking(code), p.ranking_column(&order)?)])
        }
        InstanceKind::Mdp(p) => Ok((0..p.num_states)
            .map(|s| {
                let a = root.derive(s as u64).next_below(p.num_actions as u64) as usize;
                let column = p.state_action_column(s, a).expect("valid pair");
                (ColumnId::StateAction(s as u32, a as u32), column)
            })
            .collect()),
        _ => Err(ColgenError::NoPricer),
    }
}

/// Support columns of an optimal column-randomized run, for warm-starting.
pub fn warm_start_from_cr(
    instance: &Instance,
    run: &CrRun,
) -> Result<Vec<(ColumnId, CostedColumn)>, ColgenError> {
    if run.status() != SolveStatus::Optimal {
        return Err(ColgenError::WarmStartNotOptimal(run.status()));
    }
    let oracle = instance.oracle();
    run.support()
        .into_iter()
        .map(|(id, _)| {
            let col = oracle.materialize(&id)?;
            Ok((id, col))
        })
        .collect()
}

/// Runs column generation from the given initial columns until exact pricing
/// certifies optimality or the iteration cap is hit (partial result
/// returned, `converged = false`).
pub fn run_cg(
    instance: &Instance,
    init: Vec<(ColumnId, CostedColumn)>,
    provenance: InitProvenance,
    opts: &CgOptions,
) -> Result<CgRun, ColgenError> {
    if !has_pricer(instance) {
        return Err(ColgenError::NoPricer);
    }
    let mut columns = init;
    let mut lp = instance.shape();
    lp.columns = columns.iter().map(|(_, c)| c.clone()).collect();
    let mut trace = Vec::new();
    let mut last_objective = f64::INFINITY;
    loop {
        let t0 = Instant::now();
        let result = solve_simplex(&lp, &opts.simplex);
        if result.status != SolveStatus::Optimal {
            return Err(ColgenError::RestrictedNotSolvable(result.status));
        }
        debug_assert!(
            result.objective <= last_objective + 1e-9,
            "restricted objective increased: {} -> {}",
            last_objective,
            result.objective
        );
        last_objective = result.objective;
        let priced = price(instance, &result.dual)?;
        let millis = t0.elapsed().as_secs_f64() * 1e3;
        trace.push(CgIteration {
            objective: result.objective,
            min_reduced_cost: priced.reduced_cost,
            millis,
        });
        let converged = priced.reduced_cost >= -opts.opt_tol;
        if converged || trace.len() >= opts.max_iterations {
            return Ok(CgRun {
                iterations: trace.len(),
                trace,
                result,
                columns,
                provenance,
                converged,
            });
        }
        lp.columns.push(priced.column.clone());
        columns.push((priced.id, priced.column));
    }
}

/// Cold-started column generation.
pub fn run_cg_cold(instance: &Instance, seed: u64, opts: &CgOptions) -> Result<CgRun, ColgenError> {
    let init = cold_start_columns(instance, seed)?;
    run_cg(instance, init, InitProvenance::Cold, opts)
}
