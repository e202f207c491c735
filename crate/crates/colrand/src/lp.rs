//! Linear-program representation and entry points to the simplex solver.
//!
//! An [`LpInstance`] stores an explicit LP over sparse columns. Rows may be
//! equalities or inequalities and the objective may run in either direction;
//! [`to_standard_form`] rewrites any instance as an equivalent min-form,
//! all-equality program, appending slack and surplus columns to the fixed
//! block and remembering how to translate solutions back.

use serde::{Deserialize, Serialize};

pub mod simplex;

pub use simplex::{solve_simplex, BasisSlot, SimplexOptions, SolveResult, SolveStatus};

/// Primal feasibility tolerance: `max |Ax - b|` accepted as feasible.
pub const FEAS_TOL: f64 = 1e-7;
/// Dual feasibility tolerance: reduced costs above `-OPT_TOL` count as
/// nonnegative.
pub const OPT_TOL: f64 = 1e-7;
/// Relative duality-gap tolerance on reported optima.
pub const GAP_TOL: f64 = 1e-6;
/// Smallest pivot magnitude accepted by the ratio test and factorization.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("unknown column id {0}")]
    UnknownColumn(usize),
    #[error("solve did not produce an optimal basis (status {0:?})")]
    NotOptimal(SolveStatus),
}

/// Sparse LP column: row indices strictly increasing, values nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseColumn {
    entries: Vec<(usize, f64)>,
}

impl SparseColumn {
    /// Builds a column from arbitrary entries, sorting by row and dropping
    /// exact zeros. Panics on duplicate rows or non-finite values.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(r, _)| r);
        for w in entries.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate row {} in sparse column", w[0].0);
        }
        for &(_, v) in &entries {
            assert!(v.is_finite(), "non-finite column entry {v}");
        }
        SparseColumn { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseColumn::new(
            values
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(r, &v)| (r, v))
                .collect(),
        )
    }

    pub fn unit(row: usize, value: f64) -> Self {
        SparseColumn::new(vec![(row, value)])
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn max_row(&self) -> Option<usize> {
        self.entries.last().map(|&(r, _)| r)
    }

    pub fn inf_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }

    pub fn two_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(r, v)| v * dense[r]).sum()
    }

    /// Adds `scale` times this column into `dense`.
    pub fn add_into(&self, dense: &mut [f64], scale: f64) {
        for &(r, v) in &self.entries {
            dense[r] += scale * v;
        }
    }

    pub fn to_dense(&self, rows: usize) -> Vec<f64> {
        let mut d = vec![0.0; rows];
        self.add_into(&mut d, 1.0);
        d
    }

    /// Column with an extra entry appended below the existing rows.
    pub fn with_entry(&self, row: usize, value: f64) -> Self {
        let mut entries = self.entries.clone();
        entries.push((row, value));
        SparseColumn::new(entries)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostedColumn {
    pub cost: f64,
    pub column: SparseColumn,
}

impl CostedColumn {
    pub fn new(cost: f64, column: SparseColumn) -> Self {
        assert!(cost.is_finite(), "non-finite column cost {cost}");
        CostedColumn { cost, column }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSense {
    Eq,
    Geq,
    Leq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjSense {
    Min,
    Max,
}

/// Explicit LP: structural columns plus a fixed block that is always present
/// in any sampled subproblem (error columns, slacks added by
/// standardization, ...).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpInstance {
    pub num_rows: usize,
    pub rhs: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub objective: ObjSense,
    pub columns: Vec<CostedColumn>,
    pub fixed_columns: Vec<CostedColumn>,
}

impl LpInstance {
    pub fn standard(rhs: Vec<f64>, columns: Vec<CostedColumn>) -> Self {
        let m = rhs.len();
        LpInstance {
            num_rows: m,
            rhs,
            senses: vec![RowSense::Eq; m],
            objective: ObjSense::Min,
            columns,
            fixed_columns: Vec::new(),
        }
    }

    pub fn validate(&self) {
        assert_eq!(self.rhs.len(), self.num_rows);
        assert_eq!(self.senses.len(), self.num_rows);
        for b in &self.rhs {
            assert!(b.is_finite(), "non-finite rhs {b}");
        }
        for c in self.columns.iter().chain(&self.fixed_columns) {
            if let Some(r) = c.column.max_row() {
                assert!(r < self.num_rows, "column entry beyond row count");
            }
        }
    }

    /// Total number of addressable columns (structural, then fixed).
    pub fn num_columns(&self) -> usize {
        self.columns.len() + self.fixed_columns.len()
    }

    pub fn column(&self, id: usize) -> Result<&CostedColumn, LpError> {
        self.columns
            .iter()
            .chain(&self.fixed_columns)
            .nth(id)
            .ok_or(LpError::UnknownColumn(id))
    }

    pub fn is_standard(&self) -> bool {
        self.objective == ObjSense::Min && self.senses.iter().all(|&s| s == RowSense::Eq)
    }

    /// Largest absolute entry over all columns (fixed block included).
    pub fn matrix_max_abs(&self) -> f64 {
        self.columns
            .iter()
            .chain(&self.fixed_columns)
            .fold(0.0, |m, c| m.max(c.column.inf_norm()))
    }
}

/// Result of [`to_standard_form`]: the rewritten instance plus what is needed
/// to translate objective values and duals back to the original convention.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub lp: LpInstance,
    /// Objective was negated (the original instance maximizes).
    pub negated: bool,
    /// Number of columns of the original instance; standardization slacks
    /// occupy positions at and beyond this index.
    pub original_columns: usize,
}

impl StandardForm {
    /// Maps an objective value of the standard form back to the original
    /// sense convention.
    pub fn objective_back(&self, v: f64) -> f64 {
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Maps a dual vector of the standard form back to the original sense
    /// convention.
    pub fn dual_back(&self, p: &[f64]) -> Vec<f64> {
        if self.negated {
            p.iter().map(|&v| -v).collect()
        } else {
            p.to_vec()
        }
    }
}

/// Rewrites `inst` as an equivalent min-form all-equality LP.
///
/// Inequality rows gain a slack (`<=`) or surplus (`>=`) column in the fixed
/// block; a maximization objective is negated. The transformation is total
/// and exact; [`StandardForm`] inverts objective values and dual signs.
pub fn to_standard_form(inst: &LpInstance) -> StandardForm {
    inst.validate();
    let negated = inst.objective == ObjSense::Max;
    let sign = if negated { -1.0 } else { 1.0 };
    let mut columns: Vec<CostedColumn> = inst
        .columns
        .iter()
        .map(|c| CostedColumn::new(sign * c.cost, c.column.clone()))
        .collect();
    let mut fixed: Vec<CostedColumn> = inst
        .fixed_columns
        .iter()
        .map(|c| CostedColumn::new(sign * c.cost, c.column.clone()))
        .collect();
    for (row, &sense) in inst.senses.iter().enumerate() {
        match sense {
            RowSense::Eq => {}
            RowSense::Leq => fixed.push(CostedColumn::new(0.0, SparseColumn::unit(row, 1.0))),
            RowSense::Geq => fixed.push(CostedColumn::new(0.0, SparseColumn::unit(row, -1.0))),
        }
    }
    let original_columns = inst.num_columns();
    let lp = LpInstance {
        num_rows: inst.num_rows,
        rhs: inst.rhs.clone(),
        senses: vec![RowSense::Eq; inst.num_rows],
        objective: ObjSense::Min,
        columns: std::mem::take(&mut columns),
        fixed_columns: fixed,
    };
    StandardForm {
        lp,
        negated,
        original_columns,
    }
}

/// Reduced costs `c_j - p^T A_j` of the requested columns under the duals of
/// an optimal solve. Basic columns come out within [`OPT_TOL`] of zero.
pub fn reduced_costs(
    inst: &LpInstance,
    result: &SolveResult,
    cols: &[usize],
) -> Result<Vec<f64>, LpError> {
    if result.status != SolveStatus::Optimal {
        return Err(LpError::NotOptimal(result.status));
    }
    cols.iter()
        .map(|&id| {
            let c = inst.column(id)?;
            Ok(c.cost - c.column.dot(&result.dual))
        })
        .collect()
}

/// Scaffold of an L1 fit: `min sum(e+ + e-)` subject to
/// `(structural columns) lambda + e+ - e- = targets` and a trailing unit-sum
/// row `1^T lambda = 1`.
///
/// The supplied structural columns live on the target rows only; the trailing
/// unit-sum entry and zero cost are attached here. The paired error columns
/// go into the fixed block so every sampled subproblem keeps them.
pub fn l1_linearize(structural: &[SparseColumn], targets: &[f64]) -> LpInstance {
    let data_rows = targets.len();
    let unit_row = data_rows;
    let mut rhs = targets.to_vec();
    rhs.push(1.0);
    let columns = structural
        .iter()
        .map(|col| {
            assert!(
                col.max_row().is_none_or(|r| r < data_rows),
                "structural column extends past the target rows"
            );
            CostedColumn::new(0.0, col.with_entry(unit_row, 1.0))
        })
        .collect();
    let mut fixed = Vec::with_capacity(2 * data_rows);
    for row in 0..data_rows {
        fixed.push(CostedColumn::new(1.0, SparseColumn::unit(row, 1.0)));
        fixed.push(CostedColumn::new(1.0, SparseColumn::unit(row, -1.0)));
    }
    LpInstance {
        num_rows: data_rows + 1,
        rhs,
        senses: vec![RowSense::Eq; data_rows + 1],
        objective: ObjSense::Min,
        columns,
        fixed_columns: fixed,
    }
}

/// Optimality gap of a restriction, oriented by objective sense so that it is
/// nonnegative whenever `restricted` solves a subset of the complete problem.
pub fn optimality_gap(objective: ObjSense, complete: f64, restricted: f64) -> f64 {
    match objective {
        ObjSense::Min => restricted - complete,
        ObjSense::Max => complete - restricted,
    }
}
