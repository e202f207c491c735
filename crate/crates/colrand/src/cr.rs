//! The column-randomized solve pipeline.
//!
//! Assemble the LP restricted to a sample of column identities (plus the
//! instance's fixed block), solve it, and report the outcome. Infeasibility
//! of the sampled program is a recorded result, not an error: whether the
//! sample covers a feasible basis is exactly the random event the
//! near-feasibility program and the gap bounds reason about.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lp::{
    optimality_gap, solve_simplex, to_standard_form, CostedColumn, LpInstance, ObjSense, RowSense,
    SimplexOptions, SolveResult, SolveStatus, SparseColumn,
};
use crate::oracles::{ColumnId, Instance, OracleError};
use crate::sampling::{sample_groupwise, sample_iid, SampleSet, SamplingError};

#[derive(Debug, thiserror::Error)]
pub enum CrError {
    #[error("sample is empty")]
    EmptySample,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("instance has no enumerable explicit form")]
    NotEnumerable,
    #[error("instance carries no explicit sampling distribution")]
    NoDistribution,
    #[error("structured solve requires a fixed column block")]
    NoFixedBlock,
}

/// Outcome of one column-randomized solve.
#[derive(Clone, Debug)]
pub struct CrRun {
    pub sample: SampleSet,
    pub result: SolveResult,
    pub sampling_ms: f64,
    pub solve_ms: f64,
    pub columns_built: usize,
    pub duplicate_columns: usize,
}

/// Compact serializable record of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrSummary {
    pub status: SolveStatus,
    pub objective: f64,
    pub k: usize,
    pub seed: u64,
    pub scheme: crate::sampling::Scheme,
    pub sampling_ms: f64,
    pub solve_ms: f64,
    pub columns_built: usize,
    pub duplicate_columns: usize,
}

impl CrRun {
    pub fn status(&self) -> SolveStatus {
        self.result.status
    }

    pub fn objective(&self) -> f64 {
        self.result.objective
    }

    pub fn summary(&self) -> CrSummary {
        CrSummary {
            status: self.result.status,
            objective: self.result.objective,
            k: self.sample.len(),
            seed: self.sample.seed,
            scheme: self.sample.scheme,
            sampling_ms: self.sampling_ms,
            solve_ms: self.solve_ms,
            columns_built: self.columns_built,
            duplicate_columns: self.duplicate_columns,
        }
    }

    /// Positive structural entries aggregated by column identity - the
    /// support of the solution in the complete index space (all other
    /// coordinates are zero).
    pub fn support(&self) -> Vec<(ColumnId, f64)> {
        let mut acc: std::collections::BTreeMap<&ColumnId, f64> = std::collections::BTreeMap::new();
        for (id, &v) in self.sample.identities.iter().zip(&self.result.primal) {
            if v > 1e-9 {
                *acc.entry(id).or_insert(0.0) += v;
            }
        }
        acc.into_iter().map(|(id, v)| (id.clone(), v)).collect()
    }
}

/// Materializes the sampled columns on top of the instance shape.
pub fn assemble(instance: &Instance, sample: &SampleSet) -> Result<LpInstance, CrError> {
    let oracle = instance.oracle();
    let mut lp = instance.shape();
    lp.columns = sample
        .identities
        .iter()
        .map(|id| oracle.materialize(id))
        .collect::<Result<_, _>>()?;
    Ok(lp)
}

/// Solves the LP restricted to the sampled columns plus the fixed block.
pub fn solve_cr(
    instance: &Instance,
    sample: &SampleSet,
    opts: &SimplexOptions,
) -> Result<CrRun, CrError> {
    if sample.is_empty() {
        return Err(CrError::EmptySample);
    }
    let t0 = Instant::now();
    let lp = assemble(instance, sample)?;
    let result = solve_simplex(&lp, opts);
    let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(CrRun {
        sample: sample.clone(),
        result,
        sampling_ms: 0.0,
        solve_ms,
        columns_built: sample.len(),
        duplicate_columns: sample.duplicate_count(),
    })
}

/// Structured variant: only the designated structural block is sampled while
/// the instance's fixed block (error columns, slacks) is always present.
/// Used by problems like the L1 estimation program, whose error columns
/// absorb any residual so the sampled program is feasible for any sample.
pub fn solve_cr_structured(
    instance: &Instance,
    sample: &SampleSet,
    opts: &SimplexOptions,
) -> Result<CrRun, CrError> {
    if instance.shape().fixed_columns.is_empty() {
        return Err(CrError::NoFixedBlock);
    }
    solve_cr(instance, sample, opts)
}

/// Samples and solves in one step, timing both phases.
pub fn run_cr_iid(
    instance: &Instance,
    k: usize,
    seed: u64,
    opts: &SimplexOptions,
) -> Result<CrRun, CrError> {
    let t0 = Instant::now();
    let sample = sample_iid(&instance.oracle(), k, seed);
    let sampling_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut run = solve_cr(instance, &sample, opts)?;
    run.sampling_ms = sampling_ms;
    Ok(run)
}

/// Groupwise analogue of [`run_cr_iid`].
pub fn run_cr_groupwise(
    instance: &Instance,
    rounds: usize,
    seed: u64,
    opts: &SimplexOptions,
) -> Result<CrRun, CrError> {
    let t0 = Instant::now();
    let sample = sample_groupwise(&instance.oracle(), rounds, seed)?;
    let sampling_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut run = solve_cr(instance, &sample, opts)?;
    run.sampling_ms = sampling_ms;
    Ok(run)
}

/// Minimum total infeasibility of the sampled program: the optimal value of
/// `min ||A_J x - b||_1` over `x >= 0` (senses standardized first, fixed
/// block included). Zero exactly when the sampled program admits a feasible
/// point; always solvable by construction.
pub fn solve_near_feasibility(
    instance: &Instance,
    sample: &SampleSet,
    opts: &SimplexOptions,
) -> Result<f64, CrError> {
    let assembled = assemble(instance, sample)?;
    let std = to_standard_form(&assembled);
    let m = std.lp.num_rows;
    let mut columns: Vec<CostedColumn> = std
        .lp
        .columns
        .iter()
        .chain(&std.lp.fixed_columns)
        .map(|c| CostedColumn::new(0.0, c.column.clone()))
        .collect();
    for row in 0..m {
        columns.push(CostedColumn::new(1.0, SparseColumn::unit(row, 1.0)));
        columns.push(CostedColumn::new(1.0, SparseColumn::unit(row, -1.0)));
    }
    let lp = LpInstance::standard(std.lp.rhs.clone(), columns);
    let res = solve_simplex(&lp, opts);
    debug_assert_eq!(res.status, SolveStatus::Optimal);
    Ok(res.objective)
}

/// The complete problem solved exactly, available when the column space is
/// enumerable within `cap`.
pub fn solve_exact(
    instance: &Instance,
    cap: u64,
    opts: &SimplexOptions,
) -> Result<SolveResult, CrError> {
    let lp = instance.explicit_lp(cap).ok_or(CrError::NotEnumerable)?;
    Ok(solve_simplex(&lp, opts))
}

/// Distributional counterpart: the complete problem with the extra box
/// `0 <= x_j <= c * xi_j` on every structural column.
#[derive(Clone, Debug)]
pub struct DistrRun {
    pub c: f64,
    pub result: SolveResult,
}

/// Solves the box-constrained counterpart for box constant `c`. The box
/// applies to structural columns only; each bound is an explicit extra
/// `<=` row, keeping the core solver a pure standard-form simplex.
pub fn solve_distributional(
    instance: &Instance,
    c: f64,
    cap: u64,
    opts: &SimplexOptions,
) -> Result<DistrRun, CrError> {
    assert!(c > 0.0, "box constant must be positive");
    let oracle = instance.oracle();
    let xi = oracle.xi().ok_or(CrError::NoDistribution)?;
    let lp = instance.explicit_lp(cap).ok_or(CrError::NotEnumerable)?;
    let m = lp.num_rows;
    let n = lp.columns.len();
    let mut rhs = lp.rhs.clone();
    let mut senses = lp.senses.clone();
    let columns: Vec<CostedColumn> = lp
        .columns
        .iter()
        .enumerate()
        .map(|(j, col)| CostedColumn::new(col.cost, col.column.with_entry(m + j, 1.0)))
        .collect();
    rhs.extend(xi.iter().map(|&x| c * x));
    senses.extend(std::iter::repeat_n(RowSense::Leq, n));
    let boxed = LpInstance {
        num_rows: m + n,
        rhs,
        senses,
        objective: lp.objective,
        columns,
        fixed_columns: lp.fixed_columns.clone(),
    };
    let result = solve_simplex(&boxed, opts);
    Ok(DistrRun { c, result })
}

/// Minimum total infeasibility of the box-constrained counterpart:
/// `min ||A x - b||_1` over `0 <= x <= c * xi` (structural columns only,
/// senses standardized first). Always solvable; the near-feasibility
/// guarantee caps the sampled value by this plus the sampling-error term.
pub fn solve_near_feasibility_distributional(
    instance: &Instance,
    c: f64,
    cap: u64,
    opts: &SimplexOptions,
) -> Result<f64, CrError> {
    assert!(c > 0.0, "box constant must be positive");
    let oracle = instance.oracle();
    let xi = oracle.xi().ok_or(CrError::NoDistribution)?;
    let lp = instance.explicit_lp(cap).ok_or(CrError::NotEnumerable)?;
    let std = to_standard_form(&lp);
    let m = std.lp.num_rows;
    let n = std.lp.columns.len();
    let mut rhs = std.lp.rhs.clone();
    let mut senses = vec![RowSense::Eq; m];
    let mut columns: Vec<CostedColumn> = std
        .lp
        .columns
        .iter()
        .enumerate()
        .map(|(j, col)| CostedColumn::new(0.0, col.column.with_entry(m + j, 1.0)))
        .collect();
    for fixed in &std.lp.fixed_columns {
        columns.push(CostedColumn::new(0.0, fixed.column.clone()));
    }
    for row in 0..m {
        columns.push(CostedColumn::new(1.0, SparseColumn::unit(row, 1.0)));
        columns.push(CostedColumn::new(1.0, SparseColumn::unit(row, -1.0)));
    }
    rhs.extend(xi.iter().map(|&x| c * x));
    senses.extend(std::iter::repeat_n(RowSense::Leq, n));
    let boxed = LpInstance {
        num_rows: m + n,
        rhs,
        senses,
        objective: ObjSense::Min,
        columns,
        fixed_columns: Vec::new(),
    };
    let res = solve_simplex(&boxed, opts);
    debug_assert_eq!(res.status, SolveStatus::Optimal);
    Ok(res.objective)
}

/// `v(P_distr) - v(P)` oriented by objective sense; `None` when the boxed
/// program is infeasible.
pub fn distributional_gap(
    instance: &Instance,
    c: f64,
    cap: u64,
    opts: &SimplexOptions,
) -> Result<Option<f64>, CrError> {
    let exact = solve_exact(instance, cap, opts)?;
    let distr = solve_distributional(instance, c, cap, opts)?;
    if distr.result.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(Some(optimality_gap(
        instance.objective(),
        exact.objective,
        distr.result.objective,
    )))
}

/// Worst constraint violation of a run's re-expanded solution against an
/// instance's complete row system, respecting row senses.
pub fn expansion_residual(instance: &Instance, run: &CrRun) -> Result<f64, CrError> {
    let shape = instance.shape();
    let oracle = instance.oracle();
    let mut ax = vec![0.0; shape.num_rows];
    for (id, weight) in run.support() {
        let col = oracle.materialize(&id)?;
        col.column.add_into(&mut ax, weight);
    }
    // The fixed block is part of the solved program; its values sit after
    // the structural block in the primal vector.
    for (fixed, &v) in shape
        .fixed_columns
        .iter()
        .zip(&run.result.primal[run.sample.len()..])
    {
        fixed.column.add_into(&mut ax, v);
    }
    let mut worst = 0.0f64;
    for (row, (&sense, &b)) in shape.senses.iter().zip(&shape.rhs).enumerate() {
        let violation = match sense {
            RowSense::Eq => (ax[row] - b).abs(),
            RowSense::Geq => (b - ax[row]).max(0.0),
            RowSense::Leq => (ax[row] - b).max(0.0),
        };
        worst = worst.max(violation);
    }
    Ok(worst)
}

/// Sense-oriented gap of a run against a reference optimum.
pub fn run_gap(objective: ObjSense, reference: f64, run: &CrRun) -> f64 {
    optimality_gap(objective, reference, run.result.objective)
}
