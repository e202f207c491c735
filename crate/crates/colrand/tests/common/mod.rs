#![allow(dead_code)] // shared by several integration-test targets

//! Shared brute-force oracles for the integration tests. Everything here is
//! deliberately independent of the solver implementation: dense Gaussian
//! elimination plus exhaustive enumeration, nothing from `lp::simplex`.

use colrand::lp::LpInstance;

/// Solves `A x = b` by Gaussian elimination with partial pivoting; `None`
/// when a pivot falls below `1e-10`.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                m[r1][col]
                    .abs()
                    .partial_cmp(&m[r2][col].abs())
                    .expect("finite entries")
            })
            .expect("nonempty");
        if m[pivot_row][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        perm.swap(col, pivot_row);
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

#[derive(Debug, PartialEq, Clone, Copy)]
pub enum BruteForce {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

/// Exhaustive reference solve of a standard-form (min, all-equality) LP by
/// enumerating every basis: feasibility = some nonsingular basis with a
/// nonnegative basic solution; unboundedness = some feasible basis carrying
/// a negative-reduced-cost column whose basis direction has no positive
/// entry; otherwise the optimum is the best feasible basic objective.
pub fn brute_force_standard(lp: &LpInstance) -> BruteForce {
    assert!(lp.is_standard());
    let m = lp.num_rows;
    let cols: Vec<(f64, Vec<f64>)> = lp
        .columns
        .iter()
        .chain(&lp.fixed_columns)
        .map(|c| (c.cost, c.column.to_dense(m)))
        .collect();
    let n = cols.len();
    assert!(n >= m, "basis enumeration needs at least m columns");
    let mut best: Option<f64> = None;
    let mut any_feasible = false;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        // A_B as rows of the dense system.
        let a_b: Vec<Vec<f64>> = (0..m)
            .map(|r| subset.iter().map(|&j| cols[j].1[r]).collect())
            .collect();
        if let Some(x_b) = solve_dense(&a_b, &lp.rhs) {
            if x_b.iter().all(|&v| v >= -1e-9) {
                any_feasible = true;
                let obj: f64 = subset.iter().zip(&x_b).map(|(&j, &v)| cols[j].0 * v).sum();
                // Dual of this basis: A_B^T p = c_B.
                let a_bt: Vec<Vec<f64>> = (0..m)
                    .map(|r| (0..m).map(|c| a_b[c][r]).collect())
                    .collect();
                let c_b: Vec<f64> = subset.iter().map(|&j| cols[j].0).collect();
                if let Some(p) = solve_dense(&a_bt, &c_b) {
                    for (j, (cost, col)) in cols.iter().enumerate() {
                        if subset.contains(&j) {
                            continue;
                        }
                        let rc = cost - col.iter().zip(&p).map(|(a, p)| a * p).sum::<f64>();
                        if rc < -1e-7 {
                            // Ray check: direction d solves A_B d = A_j.
                            if let Some(d) = solve_dense(&a_b, col) {
                                if d.iter().all(|&v| v <= 1e-9) {
                                    return BruteForce::Unbounded;
                                }
                            }
                        }
                    }
                }
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        // Next m-subset of [n] in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return if !any_feasible {
                    BruteForce::Infeasible
                } else {
                    BruteForce::Optimal(best.expect("feasible implies a value"))
                };
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

/// All dual vectors of one-action-per-state bases of an MDP program. These
/// are the bases of the form `I - discount * P` that a feasible solve can
/// terminate on (every balance row needs its own state's column), and the
/// bases the discount-based dual cap covers. Bases that stack several
/// columns on one state can exceed that cap.
pub fn enumerate_mdp_policy_duals(params: &colrand::oracles::MdpParams) -> Vec<Vec<f64>> {
    let ns = params.num_states;
    let na = params.num_actions;
    let mut policy = vec![0usize; ns];
    let mut duals = Vec::new();
    loop {
        // Row r of A_B^T is column r of the basis matrix.
        let a_b_t: Vec<Vec<f64>> = (0..ns)
            .map(|s| {
                params
                    .state_action_column(s, policy[s])
                    .expect("valid pair")
                    .column
                    .to_dense(ns)
            })
            .collect();
        let c_b: Vec<f64> = (0..ns).map(|s| params.cost(s, policy[s])).collect();
        duals.push(solve_dense(&a_b_t, &c_b).expect("policy basis is nonsingular"));
        // Next policy in mixed-radix order.
        let mut s = 0;
        loop {
            if s == ns {
                return duals;
            }
            policy[s] += 1;
            if policy[s] < na {
                break;
            }
            policy[s] = 0;
            s += 1;
        }
    }
}

/// All dual basic solutions `p = A_B^-T c_B` over nonsingular bases of an
/// explicit column set (dense, desk scale).
pub fn enumerate_dual_basic_solutions(m: usize, cols: &[(f64, Vec<f64>)]) -> Vec<Vec<f64>> {
    let n = cols.len();
    assert!(n >= m);
    let mut subset: Vec<usize> = (0..m).collect();
    let mut duals = Vec::new();
    loop {
        let a_b: Vec<Vec<f64>> = (0..m)
            .map(|r| subset.iter().map(|&j| cols[j].1[r]).collect::<Vec<f64>>())
            .collect();
        let a_b_t: Vec<Vec<f64>> = (0..m)
            .map(|r| (0..m).map(|c| a_b[c][r]).collect())
            .collect();
        let c_b: Vec<f64> = subset.iter().map(|&j| cols[j].0).collect();
        if let Some(p) = solve_dense(&a_b_t, &c_b) {
            duals.push(p);
        }
        let mut i = m;
        loop {
            if i == 0 {
                return duals;
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
