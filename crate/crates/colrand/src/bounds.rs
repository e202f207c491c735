//! Optimality-gap guarantee terms and their empirical validation.
//!
//! Every high-probability guarantee on a column-randomized solve has the
//! same shape: with probability at least `1 - delta`, if the sampled program
//! is feasible, its gap is at most the gap of the box-constrained
//! distributional counterpart plus a sampling-error term that decays like
//! `1/sqrt(K)` (or `1/sqrt(rounds)` for groupwise sampling). The term
//! functions here evaluate those expressions exactly as stated; the
//! structural-constant helpers produce the dual-norm caps that specialize
//! the generic term to totally unimodular, MDP, covering and packing
//! programs; and [`empirical_violation_rate`] replays the guarantee over
//! seeded trials and reports how often it fails (it should essentially
//! never).

use serde::{Deserialize, Serialize};

use crate::cr::{
    distributional_gap, run_cr_groupwise, run_cr_iid, solve_exact, solve_near_feasibility,
    solve_near_feasibility_distributional, CrError,
};
use crate::lp::{optimality_gap, LpInstance, SimplexOptions, SolveStatus};
use crate::oracles::{ChoiceParams, CoverPackParams, Instance, InstanceKind};
use crate::rng::Stream;

#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Cr(#[from] CrError),
}

fn check(cond: bool, msg: &str) -> Result<(), BoundsError> {
    if cond {
        Ok(())
    } else {
        Err(BoundsError::Domain(msg.into()))
    }
}

fn check_common(c: f64, k: usize, delta: f64) -> Result<(), BoundsError> {
    check(c > 0.0 && c.is_finite(), "C must be positive and finite")?;
    check(k >= 1, "sample size must be at least 1")?;
    check(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)")
}

/// `1 + sqrt(2 ln(a / delta))` - the confidence factor shared by the terms.
fn confidence(a: f64, delta: f64) -> f64 {
    (1.0 + (2.0 * (a / delta).ln()).sqrt()).max(1.0)
}

/// The scale constant `1 + m * gamma * a_max` of the dual-norm terms.
pub fn dual_scale(m: usize, gamma: f64, a_max: f64) -> f64 {
    1.0 + m as f64 * gamma * a_max
}

/// Gap term driven by a bound `gamma` on the sup-norm of dual basic
/// solutions: `C (1 + m gamma a_max) / sqrt(K) * (1 + sqrt(2 ln(2/delta)))`.
pub fn dual_bound_term(
    c: f64,
    m: usize,
    gamma: f64,
    a_max: f64,
    k: usize,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(gamma >= 0.0 && a_max >= 0.0, "gamma and a_max must be nonnegative")?;
    Ok(c * dual_scale(m, gamma, a_max) / (k as f64).sqrt() * confidence(2.0, delta))
}

/// Gap term driven by a bound `chi` on the Euclidean norm of reduced-cost
/// vectors over all bases: `C chi / sqrt(K) * (1 + sqrt(2 ln(1/delta)))`.
pub fn reduced_cost_term(c: f64, chi: f64, k: usize, delta: f64) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(chi >= 0.0, "chi must be nonnegative")?;
    Ok(c * chi / (k as f64).sqrt() * confidence(1.0, delta))
}

/// A-posteriori dual-norm term: uses the sup-norm of the dual actually
/// returned by the sampled solve in place of a structural `gamma`, so it is
/// computable for any instance once a feasible run exists.
pub fn posterior_dual_term(
    c: f64,
    m: usize,
    a_max: f64,
    k: usize,
    delta: f64,
    dual: &[f64],
) -> Result<f64, BoundsError> {
    let p_inf = dual.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    dual_bound_term(c, m, p_inf, a_max, k, delta)
}

/// A-posteriori reduced-cost term: uses the Euclidean norm of the dual slack
/// `c - p^T A` of the sampled solve's dual against the explicit complete
/// matrix, in place of a structural `chi`.
pub fn posterior_slack_term(
    c: f64,
    k: usize,
    delta: f64,
    slack_two_norm: f64,
) -> Result<f64, BoundsError> {
    reduced_cost_term(c, slack_two_norm, k, delta)
}

/// `||c - p^T A||_2` over an explicit LP's structural columns.
pub fn dual_slack_two_norm(lp: &LpInstance, dual: &[f64]) -> f64 {
    lp.columns
        .iter()
        .map(|col| {
            let slack = col.cost - col.column.dot(dual);
            slack * slack
        })
        .sum::<f64>()
        .sqrt()
}

/// Near-feasibility term: with probability `1 - delta` the minimum total
/// infeasibility of the sampled program is at most its distributional
/// counterpart's plus `C m a_max / sqrt(K) * (1 + sqrt(2 ln(1/delta)))`.
pub fn near_feasibility_term(
    c: f64,
    m: usize,
    a_max: f64,
    k: usize,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(a_max >= 0.0, "a_max must be nonnegative")?;
    Ok(c / (k as f64).sqrt() * m as f64 * a_max * confidence(1.0, delta))
}

fn dependent_core(k: usize, edges: usize, lambda: f64, log_term: f64) -> f64 {
    let kk = (k * k) as f64;
    ((k + 2 * edges) as f64 / kk).sqrt() + (2.0 * lambda * log_term / kk).sqrt()
}

/// Dual-norm gap term for statistically dependent draws, parameterized by
/// the dependency graph's edge count and the forest-complexity value of a
/// chosen approximation. `scale` is `1 + m gamma a_max`. Reduces exactly to
/// [`dual_bound_term`] at `edges = 0`, `lambda = K`.
pub fn dependent_dual_term(
    c: f64,
    scale: f64,
    k: usize,
    edges: usize,
    lambda: f64,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(scale >= 0.0 && lambda >= 0.0, "scale and lambda must be nonnegative")?;
    Ok(c * scale * dependent_core(k, edges, lambda, (2.0 / delta).ln()))
}

/// Reduced-cost variant of [`dependent_dual_term`]; `scale` is `chi`.
pub fn dependent_reduced_cost_term(
    c: f64,
    scale: f64,
    k: usize,
    edges: usize,
    lambda: f64,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(scale >= 0.0 && lambda >= 0.0, "scale and lambda must be nonnegative")?;
    Ok(c * scale * dependent_core(k, edges, lambda, (1.0 / delta).ln()))
}

/// Dual-norm gap term of the groupwise scheme: the round-clique dependency
/// structure collapses the dependent-sample term to
/// `C scale / sqrt(rounds) * (1 + sqrt(2 ln(2/delta)))`.
pub fn groupwise_dual_term(
    c: f64,
    scale: f64,
    rounds: usize,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, rounds, delta)?;
    check(scale >= 0.0, "scale must be nonnegative")?;
    Ok(c * scale / (rounds as f64).sqrt() * confidence(2.0, delta))
}

/// Reduced-cost variant of [`groupwise_dual_term`]; `scale` is `chi`.
pub fn groupwise_reduced_cost_term(
    c: f64,
    scale: f64,
    rounds: usize,
    delta: f64,
) -> Result<f64, BoundsError> {
    check_common(c, rounds, delta)?;
    check(scale >= 0.0, "scale must be nonnegative")?;
    Ok(c * scale / (rounds as f64).sqrt() * confidence(1.0, delta))
}

/// Gap term for Lipschitz objectives over a sampled simplex of columns:
/// `C L H / sqrt(K) * (1 + 3 sqrt(ln(4/delta) / 2))`, where `L` is the
/// objective's Lipschitz constant and `H` caps the column Euclidean norms.
pub fn lipschitz_term(c: f64, l: f64, h: f64, k: usize, delta: f64) -> Result<f64, BoundsError> {
    check_common(c, k, delta)?;
    check(l >= 0.0 && h >= 0.0, "L and H must be nonnegative")?;
    Ok(c * l * h / (k as f64).sqrt() * (1.0 + 3.0 * (0.5 * (4.0 / delta).ln()).sqrt()))
}

// ---------------------------------------------------------------------------
// Structural constants
// ---------------------------------------------------------------------------

/// Dual sup-norm cap for totally unimodular constraint matrices:
/// `m * max|c_j|`. Every entry of a TU basis inverse is -1, 0 or 1, so a
/// dual basic solution is a signed sum of at most `m` cost entries.
pub fn gamma_tu(costs: &[f64], m: usize) -> f64 {
    m as f64 * costs.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()))
}

/// Dual sup-norm cap for discounted MDP programs: `max|c| / (1 - discount)`,
/// from the Neumann-series form of the basis inverse.
pub fn gamma_mdp(costs: &[f64], discount: f64) -> f64 {
    costs.iter().fold(0.0f64, |acc, &c| acc.max(c.abs())) / (1.0 - discount)
}

/// Dual sup-norm cap for covering programs: the worst cost-to-coverage rate
/// `max { c_j / A_ij : A_ij > 0 }` bounds every feasible dual coordinate of
/// every sampled covering dual.
pub fn u_covering(params: &CoverPackParams) -> f64 {
    let mut u = 0.0f64;
    for (col, &cost) in params.columns.iter().zip(&params.costs) {
        for &(_, a) in col.entries() {
            if a > 0.0 {
                u = u.max(cost / a);
            }
        }
    }
    u
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingBounds {
    /// Best objective-per-unit-of-resource rate per row.
    pub rates: Vec<f64>,
    /// `sum_i rates_i * b_i`; an upper bound on the packing optimum of any
    /// sampled program.
    pub objective_cap: f64,
    /// `objective_cap / min_i b_i`; caps the sup-norm of optimal duals of
    /// every sampled packing dual.
    pub dual_bound: f64,
}

/// Packing-program constants: per-row best rates, the induced objective cap,
/// and the dual-norm bound.
pub fn packing_bounds(params: &CoverPackParams) -> PackingBounds {
    let mut rates = vec![0.0f64; params.num_rows];
    for (col, &cost) in params.columns.iter().zip(&params.costs) {
        for &(i, a) in col.entries() {
            if a > 0.0 {
                rates[i] = rates[i].max(cost / a);
            }
        }
    }
    let objective_cap: f64 = rates.iter().zip(&params.rhs).map(|(r, b)| r * b).sum();
    let min_b = params.rhs.iter().cloned().fold(f64::INFINITY, f64::min);
    PackingBounds {
        rates,
        objective_cap,
        dual_bound: objective_cap / min_b,
    }
}

/// Largest `||c - p^T A||_2` over the dual basic solutions of every
/// nonsingular basis of an explicit LP — the reduced-cost-norm cap of the
/// corresponding guarantee, computable only at desk scale. `None` when the
/// basis count exceeds 200000.
pub fn chi_by_enumeration(lp: &LpInstance) -> Option<f64> {
    let m = lp.num_rows;
    let cols: Vec<(f64, Vec<f64>)> = lp
        .columns
        .iter()
        .chain(&lp.fixed_columns)
        .map(|c| (c.cost, c.column.to_dense(m)))
        .collect();
    let n = cols.len();
    if n < m {
        return None;
    }
    let mut bases = 1u64;
    for i in 0..m as u64 {
        bases = bases.saturating_mul(n as u64 - i) / (i + 1);
        if bases > 200_000 {
            return None;
        }
    }
    let mut chi = 0.0f64;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        // p solves A_B^T p = c_B; rows of A_B^T are the basis columns.
        let a_b_t: Vec<Vec<f64>> = subset.iter().map(|&j| cols[j].1.clone()).collect();
        let c_b: Vec<f64> = subset.iter().map(|&j| cols[j].0).collect();
        if let Some(p) = solve_dense_private(&a_b_t, &c_b) {
            let norm = cols
                .iter()
                .map(|(cost, col)| {
                    let slack = cost - col.iter().zip(&p).map(|(a, p)| a * p).sum::<f64>();
                    slack * slack
                })
                .sum::<f64>()
                .sqrt();
            chi = chi.max(norm);
        }
        let mut i = m;
        loop {
            if i == 0 {
                return Some(chi);
            }
            i -= 1;
            if subset[i] != i + n - m {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_dense_private(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            m[r1][col]
                .abs()
                .partial_cmp(&m[r2][col].abs())
                .expect("finite")
        })?;
        if m[pivot][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col] / m[col][col];
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// Lipschitz constant of the L1 estimation objective over the data rows and
/// the Euclidean norm cap of materialized ranking columns.
pub fn choice_lipschitz(params: &ChoiceParams) -> (f64, f64) {
    let data_rows = (params.num_assortments() * params.num_options()) as f64;
    let l = data_rows.sqrt();
    let h = (params.num_assortments() as f64 + 1.0).sqrt();
    (l, h)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    DualBound,
    ReducedCost,
    NearFeasibility,
    PosteriorDual,
    PosteriorSlack,
    TotallyUnimodular,
    Mdp,
    Covering,
    Packing,
    Groupwise,
    Lipschitz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolSource {
    Computed,
    Supplied,
    Unavailable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub value: Option<f64>,
    pub source: SymbolSource,
}

/// All terms of one guarantee: inputs with their provenance, the sampling
/// error term, and the total when the distributional gap is computable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub instance: String,
    pub symbols: Vec<Symbol>,
    pub sampling_error_term: f64,
    /// Gap of the distributional counterpart, when the column space is
    /// enumerable and a distribution is available; `None` otherwise (and for
    /// the near-feasibility kind, whose companion is the boxed counterpart's
    /// minimum infeasibility, reported in `symbols` as `v_feas_distr`).
    pub delta_v_distr: Option<f64>,
    /// Companion value plus the sampling-error term, when computable: the
    /// high-probability cap on a feasible sampled solve's gap (or on the
    /// sampled minimum infeasibility for the near-feasibility kind).
    pub total_bound: Option<f64>,
}

/// Inputs for [`build_report`] and [`empirical_violation_rate`].
#[derive(Clone, Debug)]
pub struct BoundArgs {
    pub c: f64,
    pub delta: f64,
    /// Draw count for i.i.d. kinds, rounds for the groupwise kind.
    pub k: usize,
    /// User-supplied dual-norm cap for [`BoundKind::DualBound`].
    pub gamma: Option<f64>,
    /// User-supplied reduced-cost-norm cap for [`BoundKind::ReducedCost`].
    pub chi: Option<f64>,
    /// Seed for the sampled solve behind the a-posteriori kinds.
    pub seed: u64,
    /// Enumeration cap when computing the distributional gap.
    pub cap: u64,
    pub simplex: SimplexOptions,
}

impl Default for BoundArgs {
    fn default() -> Self {
        BoundArgs {
            c: 1.0,
            delta: 0.1,
            k: 100,
            gamma: None,
            chi: None,
            seed: 0,
            cap: 1_000_000,
            simplex: SimplexOptions::default(),
        }
    }
}

fn symbol(name: &str, value: f64, source: SymbolSource) -> Symbol {
    Symbol {
        name: name.into(),
        value: Some(value),
        source,
    }
}

fn unavailable(name: &str) -> Symbol {
    Symbol {
        name: name.into(),
        value: None,
        source: SymbolSource::Unavailable,
    }
}

/// Assembles the full report for a guarantee kind on an instance: resolves
/// the structural constants, evaluates the term, and attaches the
/// distributional gap when it is computable.
pub fn build_report(
    instance: &Instance,
    kind: BoundKind,
    args: &BoundArgs,
) -> Result<BoundReport, BoundsError> {
    use SymbolSource::*;
    let shape = instance.shape();
    let m = shape.num_rows;
    let a_max = instance.matrix_max_abs();
    let mut symbols = vec![
        symbol("C", args.c, Supplied),
        symbol("delta", args.delta, Supplied),
    ];
    let unsupported = |msg: &str| Err(BoundsError::Unsupported(msg.into()));
    let term = match kind {
        BoundKind::DualBound => {
            let gamma = args.gamma.ok_or_else(|| {
                BoundsError::Unsupported(
                    "dual-bound kind needs a supplied gamma; use a structural kind otherwise"
                        .into(),
                )
            })?;
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("gamma", gamma, Supplied));
            dual_bound_term(args.c, m, gamma, a_max, args.k, args.delta)?
        }
        BoundKind::ReducedCost => {
            // No general computation exists for chi; accept a supplied value
            // or enumerate every basis of a desk-scale explicit instance.
            let (chi, source) = match args.chi {
                Some(chi) => (chi, Supplied),
                None => {
                    // The cap is defined over the equality form.
                    let enumerated = instance
                        .explicit_lp(args.cap)
                        .map(|lp| crate::lp::to_standard_form(&lp).lp)
                        .as_ref()
                        .and_then(chi_by_enumeration);
                    match enumerated {
                        Some(chi) => (chi, Computed),
                        None => {
                            return unsupported(
                                "reduced-cost kind needs a supplied chi (basis enumeration \
                                 is only available at desk scale)",
                            )
                        }
                    }
                }
            };
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("chi", chi, source));
            reduced_cost_term(args.c, chi, args.k, args.delta)?
        }
        BoundKind::NearFeasibility => {
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            near_feasibility_term(args.c, m, a_max, args.k, args.delta)?
        }
        BoundKind::PosteriorDual | BoundKind::PosteriorSlack => {
            let run = run_cr_iid(instance, args.k, args.seed, &args.simplex)?;
            if run.status() != SolveStatus::Optimal {
                return unsupported("a-posteriori bound needs a feasible sampled solve");
            }
            symbols.push(symbol("K", args.k as f64, Supplied));
            if kind == BoundKind::PosteriorDual {
                let p_inf = run.result.dual.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                symbols.push(symbol("m", m as f64, Computed));
                symbols.push(symbol("a_max", a_max, Computed));
                symbols.push(symbol("p_inf", p_inf, Computed));
                posterior_dual_term(args.c, m, a_max, args.k, args.delta, &run.result.dual)?
            } else {
                let lp = instance
                    .explicit_lp(args.cap)
                    .ok_or_else(|| BoundsError::Unsupported("slack norm needs explicit columns".into()))?;
                let slack = dual_slack_two_norm(&lp, &run.result.dual);
                symbols.push(symbol("slack_norm", slack, Computed));
                posterior_slack_term(args.c, args.k, args.delta, slack)?
            }
        }
        BoundKind::TotallyUnimodular => {
            let InstanceKind::ExplicitDense(p) = &instance.kind else {
                return unsupported("TU bound applies to explicit instances");
            };
            if !p.totally_unimodular {
                return unsupported("instance is not marked totally unimodular");
            }
            let costs: Vec<f64> = p.columns.iter().map(|c| c.cost).collect();
            let gamma = gamma_tu(&costs, m);
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("gamma", gamma, Computed));
            dual_bound_term(args.c, m, gamma, a_max, args.k, args.delta)?
        }
        BoundKind::Mdp => {
            let InstanceKind::Mdp(p) = &instance.kind else {
                return unsupported("MDP bound applies to MDP instances");
            };
            let gamma = gamma_mdp(&p.costs, p.discount);
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("gamma", gamma, Computed));
            dual_bound_term(args.c, m, gamma, a_max, args.k, args.delta)?
        }
        BoundKind::Covering => {
            let InstanceKind::Covering(p) = &instance.kind else {
                return unsupported("covering bound applies to covering instances");
            };
            let u = u_covering(p);
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("U", u, Computed));
            dual_bound_term(args.c, m, u, a_max, args.k, args.delta)?
        }
        BoundKind::Packing => {
            let InstanceKind::Packing(p) = &instance.kind else {
                return unsupported("packing bound applies to packing instances");
            };
            let pb = packing_bounds(p);
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("W", pb.objective_cap, Computed));
            symbols.push(symbol("U", pb.dual_bound, Computed));
            dual_bound_term(args.c, m, pb.dual_bound, a_max, args.k, args.delta)?
        }
        BoundKind::Groupwise => {
            let InstanceKind::Mdp(p) = &instance.kind else {
                return unsupported("the built-in groupwise bound applies to MDP instances");
            };
            let gamma = gamma_mdp(&p.costs, p.discount);
            let scale = dual_scale(m, gamma, a_max);
            symbols.push(symbol("rounds", args.k as f64, Supplied));
            symbols.push(symbol("m", m as f64, Computed));
            symbols.push(symbol("a_max", a_max, Computed));
            symbols.push(symbol("gamma", gamma, Computed));
            symbols.push(symbol("scale", scale, Computed));
            groupwise_dual_term(args.c, scale, args.k, args.delta)?
        }
        BoundKind::Lipschitz => {
            let InstanceKind::Choice(p) = &instance.kind else {
                return unsupported("the built-in Lipschitz bound applies to choice instances");
            };
            let (l, h) = choice_lipschitz(p);
            symbols.push(symbol("K", args.k as f64, Supplied));
            symbols.push(symbol("L", l, Computed));
            symbols.push(symbol("H", h, Computed));
            lipschitz_term(args.c, l, h, args.k, args.delta)?
        }
    };
    let computable = instance.oracle().xi().is_some()
        && instance
            .oracle()
            .num_columns()
            .is_some_and(|n| n <= args.cap);
    let (delta_v_distr, total_bound) = if kind == BoundKind::NearFeasibility {
        if computable {
            let v = solve_near_feasibility_distributional(instance, args.c, args.cap, &args.simplex)?;
            symbols.push(symbol("v_feas_distr", v, Computed));
            (None, Some(v + term))
        } else {
            symbols.push(unavailable("v_feas_distr"));
            (None, None)
        }
    } else {
        let gap = if computable {
            distributional_gap(instance, args.c, args.cap, &args.simplex)?
        } else {
            None
        };
        match gap {
            Some(d) => symbols.push(symbol("delta_v_distr", d, Computed)),
            None => symbols.push(unavailable("delta_v_distr")),
        }
        (gap, gap.map(|d| d + term))
    };
    Ok(BoundReport {
        kind,
        instance: instance.name.clone(),
        symbols,
        sampling_error_term: term,
        delta_v_distr,
        total_bound,
    })
}

// ---------------------------------------------------------------------------
// Empirical validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViolationReport {
    pub kind: BoundKind,
    pub trials: usize,
    pub feasible_trials: usize,
    pub violations: usize,
    /// Violations over all trials; infeasible runs count as non-violations
    /// because the guarantee is conditional on feasibility.
    pub rate: f64,
    pub term: f64,
    /// The guarantee's first term: distributional gap, or the boxed
    /// counterpart's minimum infeasibility for the near-feasibility kind.
    pub companion: f64,
    /// `companion + term`; a feasible trial whose measured quantity exceeds
    /// this counts as a violation.
    pub threshold: f64,
}

/// Replays a guarantee over seeded trials: samples, solves, and counts how
/// often the measured quantity (gap of a feasible solve, or the sampled
/// minimum infeasibility for the near-feasibility kind) exceeds its
/// high-probability threshold. Requires an enumerable instance with an
/// explicit distribution so the companion value is computable.
pub fn empirical_violation_rate(
    instance: &Instance,
    kind: BoundKind,
    args: &BoundArgs,
    trials: usize,
) -> Result<ViolationReport, BoundsError> {
    check(trials >= 1, "need at least one trial")?;
    let report = build_report(instance, kind, args)?;
    let term = report.sampling_error_term;
    let threshold = report.total_bound.ok_or_else(|| {
        BoundsError::Unsupported(
            "violation testing needs a computable companion value; the instance must be \
             enumerable with an explicit distribution, and the box-constrained counterpart \
             must be feasible (a larger C may be needed)"
                .into(),
        )
    })?;
    let sense = instance.objective();
    let exact = if kind == BoundKind::NearFeasibility {
        None
    } else {
        let res = solve_exact(instance, args.cap, &args.simplex)?;
        check(
            res.status == SolveStatus::Optimal,
            "complete problem must be solvable",
        )?;
        Some(res.objective)
    };
    let root = Stream::new(args.seed).derive_named("trial");
    let mut feasible = 0usize;
    let mut violations = 0usize;
    for t in 0..trials {
        let trial_seed = root.derive(t as u64).next_u64();
        if kind == BoundKind::NearFeasibility {
            let sample = crate::sampling::sample_iid(&instance.oracle(), args.k, trial_seed);
            let value = solve_near_feasibility(instance, &sample, &args.simplex)?;
            feasible += 1; // the infeasibility program is always solvable
            if value > threshold {
                violations += 1;
            }
            continue;
        }
        let run = match kind {
            BoundKind::Groupwise => run_cr_groupwise(instance, args.k, trial_seed, &args.simplex)?,
            _ => run_cr_iid(instance, args.k, trial_seed, &args.simplex)?,
        };
        if run.status() != SolveStatus::Optimal {
            continue;
        }
        feasible += 1;
        let gap = optimality_gap(sense, exact.expect("set for gap kinds"), run.objective());
        if gap > threshold {
            violations += 1;
        }
    }
    Ok(ViolationReport {
        kind,
        trials,
        feasible_trials: feasible,
        violations,
        rate: violations as f64 / trials as f64,
        term,
        companion: threshold - term,
        threshold,
    })
}
