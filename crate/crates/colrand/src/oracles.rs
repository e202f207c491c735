//! Column oracles and instance generators.
//!
//! Each application family exposes the same two capabilities: draw a random
//! column identity according to the family's randomization scheme, and
//! deterministically materialize the (cost, sparse column) pair for a given
//! identity. Identities are structural - an integer pattern vector, a Lehmer
//! code of a preference ranking, a state-action pair - never raw positions in
//! the full column space, which for procedural families is only symbolic.

use serde::{Deserialize, Serialize};

use crate::lp::{l1_linearize, CostedColumn, LpInstance, ObjSense, RowSense, SparseColumn};
use crate::rng::Stream;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid column identity for this oracle: {0}")]
    InvalidIdentity(String),
    #[error("invalid instance parameters: {0}")]
    InvalidParams(String),
    #[error("column space too large to enumerate ({0} columns)")]
    TooLarge(u64),
    #[error("instance file: {0}")]
    Schema(String),
}

/// Canonical key of a column within its family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnId {
    /// Position in an explicitly stored column list.
    Index(u64),
    /// Cutting pattern: copies of each demanded width cut from one roll.
    Pattern(Vec<u32>),
    /// Preference ranking over options `{0..N}`, stored as a Lehmer code.
    Ranking(u64),
    /// MDP state-action pair.
    StateAction(u32, u32),
}

impl std::fmt::Display for ColumnId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnId::Index(i) => write!(f, "idx:{i}"),
            ColumnId::Pattern(a) => {
                write!(f, "pat:")?;
                for (k, v) in a.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            ColumnId::Ranking(code) => write!(f, "rank:{code}"),
            ColumnId::StateAction(s, a) => write!(f, "sa:{s},{a}"),
        }
    }
}

pub fn factorial(n: u64) -> u64 {
    (2..=n).product::<u64>().max(1)
}

/// Lehmer code of a permutation (lexicographic rank).
pub fn lehmer_encode(perm: &[u8]) -> u64 {
    let n = perm.len();
    let mut code = 0u64;
    for i in 0..n {
        let smaller_after = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count() as u64;
        code += smaller_after * factorial((n - 1 - i) as u64);
    }
    code
}

/// Inverse of [`lehmer_encode`] for permutations of `{0, .., n-1}`.
pub fn lehmer_decode(mut code: u64, n: usize) -> Vec<u8> {
    let mut available: Vec<u8> = (0..n as u8).collect();
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let f = factorial((n - 1 - i) as u64);
        let idx = (code / f) as usize;
        code %= f;
        perm.push(available.remove(idx));
    }
    perm
}

// ---------------------------------------------------------------------------
// Family parameters
// ---------------------------------------------------------------------------

/// Cutting stock: demand `demands[i]` for rolls of width `widths[i]`, cut
/// from stock rolls of width `roll_width`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuttingStockParams {
    pub roll_width: u32,
    pub widths: Vec<u32>,
    pub demands: Vec<u32>,
}

impl CuttingStockParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.widths.is_empty() || self.widths.len() != self.demands.len() {
            return Err(OracleError::InvalidParams(
                "widths/demands must be nonempty and equal length".into(),
            ));
        }
        for &w in &self.widths {
            if w == 0 || w > self.roll_width {
                return Err(OracleError::InvalidParams(format!(
                    "width {w} outside (0, {}]",
                    self.roll_width
                )));
            }
        }
        if self.demands.iter().any(|&b| b == 0) {
            return Err(OracleError::InvalidParams("demands must be positive".into()));
        }
        Ok(())
    }

    /// Draws a maximal random pattern: starting from the empty pattern, keep
    /// adding a uniformly chosen width that still fits until none fits.
    pub fn sample_pattern(&self, rng: &mut Stream) -> Vec<u32> {
        let mut pattern = vec![0u32; self.widths.len()];
        let mut remaining = self.roll_width;
        loop {
            let fitting: Vec<usize> = (0..self.widths.len())
                .filter(|&i| self.widths[i] <= remaining)
                .collect();
            if fitting.is_empty() {
                return pattern;
            }
            let i = fitting[rng.next_below(fitting.len() as u64) as usize];
            pattern[i] += 1;
            remaining -= self.widths[i];
        }
    }

    pub fn pattern_column(&self, pattern: &[u32]) -> Result<CostedColumn, OracleError> {
        if pattern.len() != self.widths.len() {
            return Err(OracleError::InvalidIdentity(format!(
                "pattern length {} != {}",
                pattern.len(),
                self.widths.len()
            )));
        }
        let used: u64 = pattern
            .iter()
            .zip(&self.widths)
            .map(|(&a, &w)| a as u64 * w as u64)
            .sum();
        if used > self.roll_width as u64 {
            return Err(OracleError::InvalidIdentity(format!(
                "pattern uses width {used} > {}",
                self.roll_width
            )));
        }
        let entries = pattern
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a > 0)
            .map(|(i, &a)| (i, a as f64))
            .collect();
        Ok(CostedColumn::new(1.0, SparseColumn::new(entries)))
    }

    /// Largest entry any pattern can carry.
    pub fn max_entry(&self) -> f64 {
        self.widths
            .iter()
            .map(|&w| self.roll_width / w)
            .max()
            .unwrap_or(0) as f64
    }
}

/// Ranking-based choice estimation: `num_products` products plus the
/// no-purchase option 0, `assortments[m]` a bitmask over products `1..=N`,
/// and observed choice probabilities for every (option, assortment) cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiceParams {
    pub num_products: usize,
    /// Bit `i-1` set means product `i` is offered.
    pub assortments: Vec<u64>,
    /// Row-major `[assortment][option]`, length `M * (N+1)`.
    pub probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<f64>>,
}

impl ChoiceParams {
    pub fn num_options(&self) -> usize {
        self.num_products + 1
    }

    pub fn num_assortments(&self) -> usize {
        self.assortments.len()
    }

    /// Row of the (option, assortment) cell in the estimation LP.
    pub fn row(&self, option: usize, assortment: usize) -> usize {
        assortment * self.num_options() + option
    }

    pub fn unit_sum_row(&self) -> usize {
        self.num_assortments() * self.num_options()
    }

    pub fn offered(&self, option: usize, assortment: usize) -> bool {
        option == 0 || self.assortments[assortment] & (1 << (option - 1)) != 0
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let n = self.num_products;
        if n == 0 || n > 20 {
            return Err(OracleError::InvalidParams(format!(
                "num_products {n} outside 1..=20"
            )));
        }
        if self.assortments.is_empty() {
            return Err(OracleError::InvalidParams("no assortments".into()));
        }
        if self.probabilities.len() != self.num_assortments() * self.num_options() {
            return Err(OracleError::InvalidParams(
                "probability vector has the wrong length".into(),
            ));
        }
        for (m, &mask) in self.assortments.iter().enumerate() {
            if mask == 0 || mask >> n != 0 {
                return Err(OracleError::InvalidParams(format!(
                    "assortment {m} is empty or references unknown products"
                )));
            }
            let mut sum = 0.0;
            for i in 0..self.num_options() {
                let v = self.probabilities[self.row(i, m)];
                if self.offered(i, m) {
                    sum += v;
                } else if v != 0.0 {
                    return Err(OracleError::InvalidParams(format!(
                        "nonzero probability for option {i} not offered in assortment {m}"
                    )));
                }
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(OracleError::InvalidParams(format!(
                    "assortment {m} probabilities sum to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Uniform ranking over the options, as a preference order (rank 0 first).
    pub fn sample_ranking(&self, rng: &mut Stream) -> Vec<u8> {
        let mut order: Vec<u8> = (0..self.num_options() as u8).collect();
        rng.shuffle(&mut order);
        order
    }

    /// Column of a ranking: one indicator per assortment at the top-ranked
    /// offered option, plus the trailing unit-sum entry. Cost 0.
    pub fn ranking_column(&self, order: &[u8]) -> Result<CostedColumn, OracleError> {
        let options = self.num_options();
        if order.len() != options {
            return Err(OracleError::InvalidIdentity(format!(
                "ranking over {} options, expected {options}",
                order.len()
            )));
        }
        let mut seen = vec![false; options];
        for &o in order {
            if (o as usize) < options && !seen[o as usize] {
                seen[o as usize] = true;
            } else {
                return Err(OracleError::InvalidIdentity("not a permutation".into()));
            }
        }
        let mut entries = Vec::with_capacity(self.num_assortments() + 1);
        for m in 0..self.num_assortments() {
            let chosen = order
                .iter()
                .copied()
                .find(|&o| self.offered(o as usize, m))
                .expect("option 0 is always offered");
            entries.push((self.row(chosen as usize, m), 1.0));
        }
        entries.push((self.unit_sum_row(), 1.0));
        entries.sort_by_key(|&(r, _)| r);
        Ok(CostedColumn::new(0.0, SparseColumn::new(entries)))
    }
}

/// Discounted infinite-horizon MDP in occupancy-measure LP form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MdpParams {
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    /// `costs[s * num_actions + a]`.
    pub costs: Vec<f64>,
    /// `transitions[(s * num_actions + a) * num_states + s2]` is the
    /// probability of moving to `s2` after taking `a` in `s`.
    pub transitions: Vec<f64>,
}

impl MdpParams {
    pub fn cost(&self, s: usize, a: usize) -> f64 {
        self.costs[s * self.num_actions + a]
    }

    pub fn transition(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transitions[(s * self.num_actions + a) * self.num_states + s2]
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.num_states == 0 || self.num_actions == 0 {
            return Err(OracleError::InvalidParams("empty MDP".into()));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(OracleError::InvalidParams(format!(
                "discount {} outside [0, 1)",
                self.discount
            )));
        }
        if self.costs.len() != self.num_states * self.num_actions
            || self.transitions.len() != self.num_states * self.num_actions * self.num_states
        {
            return Err(OracleError::InvalidParams("tensor sizes do not match".into()));
        }
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let sum: f64 = (0..self.num_states).map(|s2| self.transition(s, a, s2)).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(OracleError::InvalidParams(format!(
                        "transition column ({s},{a}) sums to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Column of a state-action pair: `e_s - discount * P(. | s, a)`, cost
    /// `c(s, a)`. Entries sum to `1 - discount`.
    pub fn state_action_column(&self, s: usize, a: usize) -> Result<CostedColumn, OracleError> {
        if s >= self.num_states || a >= self.num_actions {
            return Err(OracleError::InvalidIdentity(format!(
                "state-action ({s},{a}) out of range"
            )));
        }
        let entries = (0..self.num_states)
            .map(|s2| {
                let indicator = if s2 == s { 1.0 } else { 0.0 };
                (s2, indicator - self.discount * self.transition(s, a, s2))
            })
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Ok(CostedColumn::new(self.cost(s, a), SparseColumn::new(entries)))
    }

    pub fn max_cost_abs(&self) -> f64 {
        self.costs.iter().fold(0.0f64, |m, &c| m.max(c.abs()))
    }
}

/// Explicit nonnegative covering (`Ax >= b`, min) or packing (`Ax <= b`,
/// max) data; which one it is comes from the instance kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverPackParams {
    pub num_rows: usize,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub columns: Vec<SparseColumn>,
}

impl CoverPackParams {
    fn validate_common(&self) -> Result<(), OracleError> {
        if self.columns.is_empty() || self.costs.len() != self.columns.len() {
            return Err(OracleError::InvalidParams(
                "columns/costs must be nonempty and equal length".into(),
            ));
        }
        if self.rhs.len() != self.num_rows {
            return Err(OracleError::InvalidParams("rhs length mismatch".into()));
        }
        for col in &self.columns {
            if col.entries().iter().any(|&(r, v)| r >= self.num_rows || v < 0.0) {
                return Err(OracleError::InvalidParams(
                    "matrix entries must be nonnegative and in range".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn validate_covering(&self) -> Result<(), OracleError> {
        self.validate_common()?;
        let mut row_has_positive = vec![false; self.num_rows];
        for col in &self.columns {
            for &(r, v) in col.entries() {
                if v > 0.0 {
                    row_has_positive[r] = true;
                }
            }
        }
        if let Some(r) = row_has_positive.iter().position(|&x| !x) {
            return Err(OracleError::InvalidParams(format!(
                "covering row {r} has no positive entry"
            )));
        }
        Ok(())
    }

    pub fn validate_packing(&self) -> Result<(), OracleError> {
        self.validate_common()?;
        if self.rhs.iter().any(|&b| b <= 0.0) {
            return Err(OracleError::InvalidParams("packing needs b > 0".into()));
        }
        if self.costs.iter().any(|&c| c < 0.0) {
            return Err(OracleError::InvalidParams("packing needs c >= 0".into()));
        }
        if let Some(j) = self
            .columns
            .iter()
            .position(|col| !col.entries().iter().any(|&(_, v)| v > 0.0))
        {
            return Err(OracleError::InvalidParams(format!(
                "packing column {j} has no positive entry"
            )));
        }
        Ok(())
    }
}

/// Fully explicit LP with a stored sampling distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitDenseParams {
    pub num_rows: usize,
    pub rhs: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub objective: ObjSense,
    pub columns: Vec<CostedColumn>,
    /// Column sampling distribution; nonnegative, sums to one.
    pub xi: Vec<f64>,
    /// The constraint matrix is totally unimodular (set by generators that
    /// guarantee it; enables the TU dual bound).
    #[serde(default)]
    pub totally_unimodular: bool,
}

impl ExplicitDenseParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.columns.is_empty() {
            return Err(OracleError::InvalidParams("no columns".into()));
        }
        if self.rhs.len() != self.num_rows || self.senses.len() != self.num_rows {
            return Err(OracleError::InvalidParams("row data length mismatch".into()));
        }
        if self.xi.len() != self.columns.len() {
            return Err(OracleError::InvalidParams("xi length mismatch".into()));
        }
        if self.xi.iter().any(|&x| !(x >= 0.0)) {
            return Err(OracleError::InvalidParams("xi must be nonnegative".into()));
        }
        let sum: f64 = self.xi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(OracleError::InvalidParams(format!("xi sums to {sum}")));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Instance: the persisted problem description (schema v1)
// ---------------------------------------------------------------------------

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InstanceKind {
    CuttingStock(CuttingStockParams),
    Choice(ChoiceParams),
    Mdp(MdpParams),
    Covering(CoverPackParams),
    Packing(CoverPackParams),
    ExplicitDense(ExplicitDenseParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: InstanceKind,
}

impl Instance {
    pub fn new(name: impl Into<String>, seed: u64, kind: InstanceKind) -> Self {
        Instance {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            seed,
            kind,
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(OracleError::Schema(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        match &self.kind {
            InstanceKind::CuttingStock(p) => p.validate(),
            InstanceKind::Choice(p) => p.validate(),
            InstanceKind::Mdp(p) => p.validate(),
            InstanceKind::Covering(p) => p.validate_covering(),
            InstanceKind::Packing(p) => p.validate_packing(),
            InstanceKind::ExplicitDense(p) => p.validate(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let inst: Instance =
            serde_json::from_str(text).map_err(|e| OracleError::Schema(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn objective(&self) -> ObjSense {
        match &self.kind {
            InstanceKind::Packing(_) => ObjSense::Max,
            InstanceKind::ExplicitDense(p) => p.objective,
            _ => ObjSense::Min,
        }
    }

    /// Row structure of the complete problem with an empty structural block:
    /// senses, right-hand side, objective sense, and the fixed columns that
    /// are part of every sampled subproblem.
    pub fn shape(&self) -> LpInstance {
        match &self.kind {
            InstanceKind::CuttingStock(p) => LpInstance {
                num_rows: p.widths.len(),
                rhs: p.demands.iter().map(|&b| b as f64).collect(),
                senses: vec![RowSense::Geq; p.widths.len()],
                objective: ObjSense::Min,
                columns: Vec::new(),
                fixed_columns: Vec::new(),
            },
            InstanceKind::Choice(p) => l1_linearize(&[], &p.probabilities),
            InstanceKind::Mdp(p) => LpInstance {
                num_rows: p.num_states,
                rhs: vec![1.0; p.num_states],
                senses: vec![RowSense::Eq; p.num_states],
                objective: ObjSense::Min,
                columns: Vec::new(),
                fixed_columns: Vec::new(),
            },
            InstanceKind::Covering(p) => LpInstance {
                num_rows: p.num_rows,
                rhs: p.rhs.clone(),
                senses: vec![RowSense::Geq; p.num_rows],
                objective: ObjSense::Min,
                columns: Vec::new(),
                fixed_columns: Vec::new(),
            },
            InstanceKind::Packing(p) => LpInstance {
                num_rows: p.num_rows,
                rhs: p.rhs.clone(),
                senses: vec![RowSense::Leq; p.num_rows],
                objective: ObjSense::Max,
                columns: Vec::new(),
                fixed_columns: Vec::new(),
            },
            InstanceKind::ExplicitDense(p) => LpInstance {
                num_rows: p.num_rows,
                rhs: p.rhs.clone(),
                senses: p.senses.clone(),
                objective: p.objective,
                columns: Vec::new(),
                fixed_columns: Vec::new(),
            },
        }
    }

    pub fn oracle(&self) -> Oracle<'_> {
        Oracle { kind: &self.kind }
    }

    /// The complete LP with every column materialized; `None` when the column
    /// space is procedural or larger than `cap`.
    pub fn explicit_lp(&self, cap: u64) -> Option<LpInstance> {
        let oracle = self.oracle();
        let ids = oracle.enumerate(cap)?;
        let mut lp = self.shape();
        lp.columns = ids
            .iter()
            .map(|id| oracle.materialize(id).expect("enumerated id materializes"))
            .collect();
        Some(lp)
    }

    /// Upper bound on the largest absolute matrix entry over the complete
    /// column space (exact for enumerable families).
    pub fn matrix_max_abs(&self) -> f64 {
        match &self.kind {
            InstanceKind::CuttingStock(p) => p.max_entry(),
            InstanceKind::Choice(_) => 1.0,
            InstanceKind::Mdp(p) => {
                let mut m = 0.0f64;
                for s in 0..p.num_states {
                    for a in 0..p.num_actions {
                        for s2 in 0..p.num_states {
                            let ind = if s2 == s { 1.0 } else { 0.0 };
                            m = m.max((ind - p.discount * p.transition(s, a, s2)).abs());
                        }
                    }
                }
                m
            }
            InstanceKind::Covering(p) | InstanceKind::Packing(p) => p
                .columns
                .iter()
                .fold(0.0f64, |m, c| m.max(c.inf_norm())),
            InstanceKind::ExplicitDense(p) => p
                .columns
                .iter()
                .fold(0.0f64, |m, c| m.max(c.column.inf_norm())),
        }
    }
}

// ---------------------------------------------------------------------------
// Oracle: draw + materialize
// ---------------------------------------------------------------------------

/// Borrowed view of an instance's column space.
#[derive(Clone, Copy)]
pub struct Oracle<'a> {
    kind: &'a InstanceKind,
}

impl<'a> Oracle<'a> {
    pub fn kind(&self) -> &'a InstanceKind {
        self.kind
    }

    /// One random column identity according to the family's scheme.
    pub fn draw(&self, rng: &mut Stream) -> ColumnId {
        match self.kind {
            InstanceKind::CuttingStock(p) => ColumnId::Pattern(p.sample_pattern(rng)),
            InstanceKind::Choice(p) => ColumnId::Ranking(lehmer_encode(&p.sample_ranking(rng))),
            InstanceKind::Mdp(p) => {
                let n = (p.num_states * p.num_actions) as u64;
                let idx = rng.next_below(n);
                ColumnId::StateAction(
                    (idx / p.num_actions as u64) as u32,
                    (idx % p.num_actions as u64) as u32,
                )
            }
            InstanceKind::Covering(p) | InstanceKind::Packing(p) => {
                ColumnId::Index(rng.next_below(p.columns.len() as u64))
            }
            InstanceKind::ExplicitDense(p) => {
                // Inverse-CDF draw over the stored distribution.
                let u = rng.next_f64();
                let mut acc = 0.0;
                let mut chosen = p.xi.len() - 1;
                for (j, &x) in p.xi.iter().enumerate() {
                    acc += x;
                    if u < acc {
                        chosen = j;
                        break;
                    }
                }
                ColumnId::Index(chosen as u64)
            }
        }
    }

    /// Deterministically builds the (cost, column) pair of an identity.
    pub fn materialize(&self, id: &ColumnId) -> Result<CostedColumn, OracleError> {
        match (self.kind, id) {
            (InstanceKind::CuttingStock(p), ColumnId::Pattern(a)) => p.pattern_column(a),
            (InstanceKind::Choice(p), ColumnId::Ranking(code)) => {
                let n = factorial(p.num_options() as u64);
                if *code >= n {
                    return Err(OracleError::InvalidIdentity(format!(
                        "ranking code {code} >= {n}"
                    )));
                }
                p.ranking_column(&lehmer_decode(*code, p.num_options()))
            }
            (InstanceKind::Mdp(p), ColumnId::StateAction(s, a)) => {
                p.state_action_column(*s as usize, *a as usize)
            }
            (InstanceKind::Covering(p), ColumnId::Index(j))
            | (InstanceKind::Packing(p), ColumnId::Index(j)) => {
                let j = *j as usize;
                if j >= p.columns.len() {
                    return Err(OracleError::InvalidIdentity(format!("index {j} out of range")));
                }
                Ok(CostedColumn::new(p.costs[j], p.columns[j].clone()))
            }
            (InstanceKind::ExplicitDense(p), ColumnId::Index(j)) => {
                let j = *j as usize;
                if j >= p.columns.len() {
                    return Err(OracleError::InvalidIdentity(format!("index {j} out of range")));
                }
                Ok(p.columns[j].clone())
            }
            (_, other) => Err(OracleError::InvalidIdentity(format!(
                "identity {other} does not belong to this family"
            ))),
        }
    }

    /// Total number of columns when the space is finite and representable.
    pub fn num_columns(&self) -> Option<u64> {
        match self.kind {
            InstanceKind::CuttingStock(_) => None,
            InstanceKind::Choice(p) => Some(factorial(p.num_options() as u64)),
            InstanceKind::Mdp(p) => Some((p.num_states * p.num_actions) as u64),
            InstanceKind::Covering(p) | InstanceKind::Packing(p) => Some(p.columns.len() as u64),
            InstanceKind::ExplicitDense(p) => Some(p.columns.len() as u64),
        }
    }

    /// Explicit per-column sampling distribution, in enumeration order, for
    /// families whose scheme induces one over an enumerable space. Procedural
    /// schemes (cutting patterns, rankings) keep their distribution implicit.
    pub fn xi(&self) -> Option<Vec<f64>> {
        match self.kind {
            InstanceKind::CuttingStock(_) | InstanceKind::Choice(_) => None,
            InstanceKind::Mdp(p) => {
                let n = p.num_states * p.num_actions;
                Some(vec![1.0 / n as f64; n])
            }
            InstanceKind::Covering(p) | InstanceKind::Packing(p) => {
                Some(vec![1.0 / p.columns.len() as f64; p.columns.len()])
            }
            InstanceKind::ExplicitDense(p) => Some(p.xi.clone()),
        }
    }

    /// All identities in enumeration order, if at most `cap` of them exist.
    pub fn enumerate(&self, cap: u64) -> Option<Vec<ColumnId>> {
        let n = self.num_columns()?;
        if n > cap {
            return None;
        }
        Some(match self.kind {
            InstanceKind::CuttingStock(_) => unreachable!(),
            InstanceKind::Choice(_) => (0..n).map(ColumnId::Ranking).collect(),
            InstanceKind::Mdp(p) => (0..n)
                .map(|i| {
                    ColumnId::StateAction(
                        (i / p.num_actions as u64) as u32,
                        (i % p.num_actions as u64) as u32,
                    )
                })
                .collect(),
            _ => (0..n).map(ColumnId::Index).collect(),
        })
    }

    /// Number of disjoint column groups, for families with a natural group
    /// structure (one group per MDP state).
    pub fn num_groups(&self) -> Option<usize> {
        match self.kind {
            InstanceKind::Mdp(p) => Some(p.num_states),
            _ => None,
        }
    }

    /// One draw from the within-group distribution of group `g`.
    pub fn draw_from_group(&self, g: usize, rng: &mut Stream) -> Result<ColumnId, OracleError> {
        match self.kind {
            InstanceKind::Mdp(p) => {
                if g >= p.num_states {
                    return Err(OracleError::InvalidIdentity(format!("group {g} out of range")));
                }
                let a = rng.next_below(p.num_actions as u64) as u32;
                Ok(ColumnId::StateAction(g as u32, a))
            }
            _ => Err(OracleError::InvalidParams(
                "this family has no group structure".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// What to generate and how big.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenSpec {
    CuttingStock { demand_types: usize, roll_width: u32 },
    Choice { products: usize, assortments: usize },
    Mdp { states: usize, actions: usize, discount: f64 },
    Covering { rows: usize, columns: usize },
    Packing { rows: usize, columns: usize },
    Transportation { supplies: usize, demands: usize },
}

/// Builds a seeded random instance. Identical `(spec, seed)` produce
/// identical instances.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Instance, OracleError> {
    let root = Stream::new(seed);
    let inst = match *spec {
        GenSpec::CuttingStock {
            demand_types,
            roll_width,
        } => {
            let lo = roll_width.div_ceil(10).max(1);
            let hi = roll_width / 4;
            if demand_types == 0 || hi < lo || (hi - lo + 1) < demand_types as u32 {
                return Err(OracleError::InvalidParams(format!(
                    "cannot draw {demand_types} distinct widths from {lo}..={hi}"
                )));
            }
            let mut values: Vec<u32> = (lo..=hi).collect();
            root.derive_named("widths").shuffle(&mut values);
            values.truncate(demand_types);
            let mut dr = root.derive_named("demands");
            let demands = (0..demand_types).map(|_| 1 + dr.next_below(100) as u32).collect();
            Instance::new(
                format!("cutting_stock-m{demand_types}-w{roll_width}-s{seed}"),
                seed,
                InstanceKind::CuttingStock(CuttingStockParams {
                    roll_width,
                    widths: values,
                    demands,
                }),
            )
        }
        GenSpec::Choice {
            products,
            assortments,
        } => {
            if products == 0 || products > 20 || assortments == 0 {
                return Err(OracleError::InvalidParams("invalid choice sizes".into()));
            }
            let mut ur = root.derive_named("utilities");
            let utilities: Vec<f64> = (0..products).map(|_| ur.next_f64()).collect();
            let mut ar = root.derive_named("assortments");
            // Uniform over the 2^N - 1 nonempty assortments; an empty offer
            // set has no defined choice data.
            let masks: Vec<u64> = (0..assortments)
                .map(|_| 1 + ar.next_below((1u64 << products) - 1))
                .collect();
            let probabilities = mnl_probabilities(products, &masks, &utilities);
            Instance::new(
                format!("choice-n{products}-m{assortments}-s{seed}"),
                seed,
                InstanceKind::Choice(ChoiceParams {
                    num_products: products,
                    assortments: masks,
                    probabilities,
                    utilities: Some(utilities),
                }),
            )
        }
        GenSpec::Mdp {
            states,
            actions,
            discount,
        } => {
            if states == 0 || actions == 0 || !(0.0..1.0).contains(&discount) {
                return Err(OracleError::InvalidParams("invalid MDP sizes".into()));
            }
            let mut cr = root.derive_named("costs");
            let costs: Vec<f64> = (0..states * actions).map(|_| cr.next_f64()).collect();
            let mut tr = root.derive_named("transitions");
            let mut transitions = Vec::with_capacity(states * actions * states);
            for _ in 0..states * actions {
                // Dirichlet(1): normalized unit exponentials.
                let gammas: Vec<f64> = (0..states).map(|_| tr.next_exp()).collect();
                let total: f64 = gammas.iter().sum();
                transitions.extend(gammas.iter().map(|g| g / total));
            }
            Instance::new(
                format!("mdp-s{states}-a{actions}-s{seed}"),
                seed,
                InstanceKind::Mdp(MdpParams {
                    num_states: states,
                    num_actions: actions,
                    discount,
                    costs,
                    transitions,
                }),
            )
        }
        GenSpec::Covering { rows, columns } => {
            let p = gen_cover_pack(&root, rows, columns, true)?;
            Instance::new(
                format!("covering-m{rows}-n{columns}-s{seed}"),
                seed,
                InstanceKind::Covering(p),
            )
        }
        GenSpec::Packing { rows, columns } => {
            let p = gen_cover_pack(&root, rows, columns, false)?;
            Instance::new(
                format!("packing-m{rows}-n{columns}-s{seed}"),
                seed,
                InstanceKind::Packing(p),
            )
        }
        GenSpec::Transportation { supplies, demands } => {
            if supplies == 0 || demands < 2 {
                return Err(OracleError::InvalidParams(
                    "transportation needs >= 1 supply and >= 2 demand nodes".into(),
                ));
            }
            let mut dr = root.derive_named("demands");
            let demand: Vec<f64> = (0..demands).map(|_| dr.next_range(0.2, 0.5)).collect();
            let mut sr = root.derive_named("supplies");
            let raw: Vec<f64> = (0..supplies).map(|_| sr.next_range(0.5, 1.0)).collect();
            let scale = demand.iter().sum::<f64>() / raw.iter().sum::<f64>();
            let supply: Vec<f64> = raw.iter().map(|s| s * scale).collect();
            let mut cr = root.derive_named("costs");
            // One balance row per supply node and per demand node except the
            // last, which is implied; dropping it keeps the rows independent.
            let num_rows = supplies + demands - 1;
            let mut columns = Vec::with_capacity(supplies * demands);
            let mut xi = Vec::new();
            for i in 0..supplies {
                for j in 0..demands {
                    let mut entries = vec![(i, 1.0)];
                    if j + 1 < demands {
                        entries.push((supplies + j, 1.0));
                    }
                    columns.push(CostedColumn::new(cr.next_f64(), SparseColumn::new(entries)));
                }
            }
            let n = columns.len();
            xi.resize(n, 1.0 / n as f64);
            let mut rhs = supply;
            rhs.extend_from_slice(&demand[..demands - 1]);
            Instance::new(
                format!("transportation-s{supplies}-d{demands}-s{seed}"),
                seed,
                InstanceKind::ExplicitDense(ExplicitDenseParams {
                    num_rows,
                    rhs,
                    senses: vec![RowSense::Eq; num_rows],
                    objective: ObjSense::Min,
                    columns,
                    xi,
                    totally_unimodular: true,
                }),
            )
        }
    };
    inst.validate()?;
    Ok(inst)
}

/// Exact multinomial-logit choice probabilities for the given assortments.
pub fn mnl_probabilities(products: usize, masks: &[u64], utilities: &[f64]) -> Vec<f64> {
    let options = products + 1;
    let mut v = vec![0.0; masks.len() * options];
    for (m, &mask) in masks.iter().enumerate() {
        let denom: f64 = 1.0
            + (1..=products)
                .filter(|&i| mask & (1 << (i - 1)) != 0)
                .map(|i| utilities[i - 1].exp())
                .sum::<f64>();
        v[m * options] = 1.0 / denom;
        for i in 1..=products {
            if mask & (1 << (i - 1)) != 0 {
                v[m * options + i] = utilities[i - 1].exp() / denom;
            }
        }
    }
    v
}

fn gen_cover_pack(
    root: &Stream,
    rows: usize,
    columns: usize,
    covering: bool,
) -> Result<CoverPackParams, OracleError> {
    if rows == 0 || columns == 0 {
        return Err(OracleError::InvalidParams("empty matrix".into()));
    }
    let mut mr = root.derive_named("matrix");
    let mut dense = vec![0.0f64; rows * columns];
    for v in dense.iter_mut() {
        let keep = mr.next_f64() < 0.5;
        let draw = mr.next_range(0.1, 1.0);
        if keep {
            *v = draw;
        }
    }
    // Repair toward the side's positivity assumption: every covering row,
    // and every packing column, needs a positive entry.
    let mut rr = root.derive_named("repair");
    if covering {
        for i in 0..rows {
            if (0..columns).all(|j| dense[i * columns + j] == 0.0) {
                let j = rr.next_below(columns as u64) as usize;
                dense[i * columns + j] = rr.next_range(0.1, 1.0);
            }
        }
    } else {
        for j in 0..columns {
            if (0..rows).all(|i| dense[i * columns + j] == 0.0) {
                let i = rr.next_below(rows as u64) as usize;
                dense[i * columns + j] = rr.next_range(0.1, 1.0);
            }
        }
    }
    let mut cr = root.derive_named("costs");
    let costs: Vec<f64> = (0..columns)
        .map(|_| {
            if covering {
                cr.next_range(0.5, 1.5)
            } else {
                cr.next_range(0.1, 1.1)
            }
        })
        .collect();
    let mut br = root.derive_named("rhs");
    let rhs: Vec<f64> = (0..rows).map(|_| br.next_range(1.0, 2.0)).collect();
    let cols = (0..columns)
        .map(|j| {
            SparseColumn::new(
                (0..rows)
                    .filter(|&i| dense[i * columns + j] != 0.0)
                    .map(|i| (i, dense[i * columns + j]))
                    .collect(),
            )
        })
        .collect();
    Ok(CoverPackParams {
        num_rows: rows,
        costs,
        rhs,
        columns: cols,
    })
}

/// The n-by-n identity program: min 1'x subject to Ix = 1, x >= 0, with a
/// uniform sampling distribution. Feasible only under full column coverage,
/// which makes it the canonical hard case for sampled feasibility.
pub fn identity_instance(n: usize) -> Instance {
    let columns = (0..n)
        .map(|i| CostedColumn::new(1.0, SparseColumn::unit(i, 1.0)))
        .collect();
    Instance::new(
        format!("identity-n{n}"),
        0,
        InstanceKind::ExplicitDense(ExplicitDenseParams {
            num_rows: n,
            rhs: vec![1.0; n],
            senses: vec![RowSense::Eq; n],
            objective: ObjSense::Min,
            columns,
            xi: vec![1.0 / n as f64; n],
            totally_unimodular: true,
        }),
    )
}
