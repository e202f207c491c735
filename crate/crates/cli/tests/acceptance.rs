//! Acceptance suite: one test per shipping criterion, each printing a
//! `criterion N PASS` line (visible with `--nocapture`). Reference values
//! come from independent oracles: dense basis enumeration, exhaustive
//! pattern enumeration, policy-basis duals, and 256-bit floating point.

use std::process::Command;
use std::time::Instant;

use colrand::bounds::{
    dependent_dual_term, dependent_reduced_cost_term, dual_bound_term, dual_scale,
    empirical_violation_rate, gamma_mdp, gamma_tu, groupwise_dual_term, lipschitz_term,
    near_feasibility_term, packing_bounds, reduced_cost_term, u_covering, BoundArgs, BoundKind,
};
use colrand::colgen::{run_cg_cold, CgOptions};
use colrand::cr::{run_cr_groupwise, run_cr_iid};
use colrand::lp::{
    solve_simplex, CostedColumn, LpInstance, SimplexOptions, SolveStatus,
    SparseColumn,
};
use colrand::oracles::{generate, CuttingStockParams, GenSpec, Instance, InstanceKind};
use colrand::rng::Stream;

mod oracle {
    //! Brute-force references, independent of the solver implementation.

    use super::*;

    pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).max_by(|&r1, &r2| {
                m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap()
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

    #[derive(Debug, PartialEq, Clone, Copy)]
    pub enum BruteForce {
        Infeasible,
        Unbounded,
        Optimal(f64),
    }

    fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..m).collect();
        loop {
            out.push(cur.clone());
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] != i + n - m {
                    cur[i] += 1;
                    for k in i + 1..m {
                        cur[k] = cur[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Exhaustive basis-enumeration solve of a standard-form LP.
    pub fn brute_force_standard(lp: &LpInstance) -> BruteForce {
        let m = lp.num_rows;
        let cols: Vec<(f64, Vec<f64>)> = lp
            .columns
            .iter()
            .chain(&lp.fixed_columns)
            .map(|c| (c.cost, c.column.to_dense(m)))
            .collect();
        let mut best: Option<f64> = None;
        for subset in subsets(cols.len(), m) {
            let a_b: Vec<Vec<f64>> = (0..m)
                .map(|r| subset.iter().map(|&j| cols[j].1[r]).collect())
                .collect();
            let Some(x_b) = solve_dense(&a_b, &lp.rhs) else {
                continue;
            };
            if x_b.iter().any(|&v| v < -1e-9) {
                continue;
            }
            let obj: f64 = subset.iter().zip(&x_b).map(|(&j, &v)| cols[j].0 * v).sum();
            // Unbounded-ray certificate at this feasible basis.
            let a_b_t: Vec<Vec<f64>> = (0..m)
                .map(|r| (0..m).map(|c| a_b[c][r]).collect())
                .collect();
            let c_b: Vec<f64> = subset.iter().map(|&j| cols[j].0).collect();
            if let Some(p) = solve_dense(&a_b_t, &c_b) {
                for (j, (cost, col)) in cols.iter().enumerate() {
                    if subset.contains(&j) {
                        continue;
                    }
                    let rc = cost - col.iter().zip(&p).map(|(a, p)| a * p).sum::<f64>();
                    if rc < -1e-7 {
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
        match best {
            Some(v) => BruteForce::Optimal(v),
            None => BruteForce::Infeasible,
        }
    }

    /// All maximal cutting patterns by depth-first search; for unit pattern
    /// costs the LP over maximal patterns equals the LP over all patterns.
    pub fn maximal_patterns(p: &CuttingStockParams) -> Vec<Vec<u32>> {
        fn rec(
            p: &CuttingStockParams,
            i: usize,
            cur: &mut Vec<u32>,
            used: u64,
            out: &mut Vec<Vec<u32>>,
        ) {
            if i == p.widths.len() {
                let remaining = p.roll_width as u64 - used;
                if p.widths.iter().all(|&w| w as u64 > remaining) {
                    out.push(cur.clone());
                }
                return;
            }
            let max_count = (p.roll_width as u64 - used) / p.widths[i] as u64;
            for c in 0..=max_count {
                cur.push(c as u32);
                rec(p, i + 1, cur, used + c * p.widths[i] as u64, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(p, 0, &mut Vec::new(), 0, &mut out);
        out
    }

    pub fn exhaustive_cutting_stock_optimum(inst: &Instance) -> f64 {
        let InstanceKind::CuttingStock(p) = &inst.kind else {
            panic!("not cutting stock")
        };
        let mut lp = inst.shape();
        lp.columns = maximal_patterns(p)
            .iter()
            .map(|a| p.pattern_column(a).unwrap())
            .collect();
        let res = solve_simplex(&lp, &SimplexOptions::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        res.objective
    }

    /// Duals of every one-action-per-state basis of an MDP.
    pub fn mdp_policy_duals(params: &colrand::oracles::MdpParams) -> Vec<Vec<f64>> {
        let ns = params.num_states;
        let na = params.num_actions;
        let mut policy = vec![0usize; ns];
        let mut duals = Vec::new();
        loop {
            let a_b_t: Vec<Vec<f64>> = (0..ns)
                .map(|s| {
                    params
                        .state_action_column(s, policy[s])
                        .unwrap()
                        .column
                        .to_dense(ns)
                })
                .collect();
            let c_b: Vec<f64> = (0..ns).map(|s| params.cost(s, policy[s])).collect();
            duals.push(solve_dense(&a_b_t, &c_b).expect("policy basis nonsingular"));
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

    /// All dual basic solutions over nonsingular bases of explicit columns.
    pub fn all_dual_basic_solutions(m: usize, cols: &[(f64, Vec<f64>)]) -> Vec<Vec<f64>> {
        let mut duals = Vec::new();
        for subset in subsets(cols.len(), m) {
            let a_b_t: Vec<Vec<f64>> = subset.iter().map(|&j| cols[j].1.clone()).collect();
            let c_b: Vec<f64> = subset.iter().map(|&j| cols[j].0).collect();
            if let Some(p) = solve_dense(&a_b_t, &c_b) {
                duals.push(p);
            }
        }
        duals
    }
}

fn opts() -> SimplexOptions {
    SimplexOptions::default()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

// ---------------------------------------------------------------------------
// 1. Solver exactness on random instances
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_solver_exactness() {
    let start = Instant::now();
    let mut rng = Stream::new(20240);
    let mut counts = [0usize; 3]; // optimal, infeasible, unbounded
    for trial in 0..500 {
        let m = 1 + rng.next_below(3) as usize;
        let n = m + rng.next_below((7 - m) as u64 + 1) as usize;
        let columns: Vec<CostedColumn> = (0..n)
            .map(|_| {
                let dense: Vec<f64> = (0..m).map(|_| rng.next_range(-1.0, 1.0)).collect();
                CostedColumn::new(rng.next_range(-1.0, 1.0), SparseColumn::from_dense(&dense))
            })
            .collect();
        let rhs: Vec<f64> = if trial % 2 == 0 {
            let mut b = vec![0.0; m];
            for col in &columns {
                col.column.add_into(&mut b, rng.next_range(0.0, 1.0));
            }
            b
        } else {
            (0..m).map(|_| rng.next_range(-1.0, 1.0)).collect()
        };
        let lp = LpInstance::standard(rhs, columns);
        let res = solve_simplex(&lp, &opts());
        let reference = oracle::brute_force_standard(&lp);
        match res.status {
            SolveStatus::Optimal => {
                counts[0] += 1;
                let oracle::BruteForce::Optimal(v) = reference else {
                    panic!("trial {trial}: solver Optimal, oracle {reference:?}");
                };
                assert!(
                    (res.objective - v).abs() <= 1e-8,
                    "trial {trial}: {} vs {v}",
                    res.objective
                );
                let pb: f64 = res.dual.iter().zip(&lp.rhs).map(|(p, b)| p * b).sum();
                assert!(
                    (res.objective - pb).abs() <= 1e-6 * (1.0 + res.objective.abs()),
                    "trial {trial}: duality gap"
                );
            }
            SolveStatus::Infeasible => {
                counts[1] += 1;
                assert_eq!(reference, oracle::BruteForce::Infeasible, "trial {trial}");
            }
            SolveStatus::Unbounded => {
                counts[2] += 1;
                assert_eq!(reference, oracle::BruteForce::Unbounded, "trial {trial}");
            }
            SolveStatus::IterationLimit => panic!("trial {trial}: iteration limit"),
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: 500 random LPs match basis enumeration \
         ({} optimal / {} infeasible / {} unbounded) in {elapsed:?}",
        counts[0], counts[1], counts[2]
    );
}

// ---------------------------------------------------------------------------
// 2. Column-generation exactness on desk cutting stock
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_cg_exactness() {
    let start = Instant::now();

    // Hand instance: widths (3,5), demands (2,1), roll 10 has optimum 7/6.
    let tiny = Instance::new(
        "cs-tiny",
        0,
        InstanceKind::CuttingStock(CuttingStockParams {
            roll_width: 10,
            widths: vec![3, 5],
            demands: vec![2, 1],
        }),
    );
    let run = run_cg_cold(&tiny, 0, &CgOptions::default()).unwrap();
    assert!(run.converged);
    assert!(
        (run.objective() - 7.0 / 6.0).abs() <= 1e-9,
        "tiny instance gave {}",
        run.objective()
    );

    for seed in 0..50u64 {
        let m = 3 + (seed as usize) % 6;
        let w = 40 + 20 * (seed as u32 % 9); // 40..=200
        let inst = generate(&GenSpec::CuttingStock { demand_types: m, roll_width: w }, seed)
            .unwrap();
        let reference = oracle::exhaustive_cutting_stock_optimum(&inst);
        let cg = run_cg_cold(&inst, seed, &CgOptions::default()).unwrap();
        assert!(cg.converged, "seed {seed} hit the iteration cap");
        assert!(
            (cg.objective() - reference).abs() <= 1e-6,
            "seed {seed}: cg {} vs exhaustive {reference}",
            cg.objective()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 2 PASS: CG = exhaustive optimum on 50 desk instances in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 3. Gap decay in the sample size
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_gap_decay_trend() {
    let start = Instant::now();
    let inst = generate(&GenSpec::CuttingStock { demand_types: 50, roll_width: 1000 }, 42)
        .unwrap();
    let cg = run_cg_cold(&inst, 0, &CgOptions::default()).unwrap();
    assert!(cg.converged, "reference CG did not converge");
    let reference = cg.objective();

    let ks = [250usize, 1000, 4000];
    let trials = 20;
    let mut means = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        let mut gaps = Vec::new();
        for t in 0..trials {
            let seed = Stream::new(7)
                .derive(ki as u64)
                .derive(t as u64)
                .next_u64();
            let run = run_cr_iid(&inst, k, seed, &opts()).unwrap();
            assert_eq!(
                run.status(),
                SolveStatus::Optimal,
                "K={k} trial {t} infeasible"
            );
            let gap = (run.objective() - reference) / reference;
            assert!(gap >= -1e-6);
            gaps.push(gap.max(0.0));
        }
        means.push(gaps.iter().sum::<f64>() / gaps.len() as f64);
    }
    println!(
        "criterion 3 means: K=250 -> {:.5}, K=1000 -> {:.5}, K=4000 -> {:.5}",
        means[0], means[1], means[2]
    );
    assert!(means[1] <= means[0], "gap grew from K=250 to K=1000: {means:?}");
    assert!(means[2] <= means[1], "gap grew from K=1000 to K=4000: {means:?}");
    assert!(
        means[2] <= 0.6 * means[1],
        "K=4000 mean {} not within 0.6x of K=1000 mean {}",
        means[2],
        means[1]
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("criterion 3 PASS: mean relative gap decays across the K sweep in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 4. Choice estimation: objective decay and the zero optimum
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_choice_zero_optimum() {
    let start = Instant::now();
    let inst = generate(&GenSpec::Choice { products: 5, assortments: 20 }, 3).unwrap();
    let ks = [200usize, 800, 3200];
    let trials = 20;
    let mut means = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        let mut objectives = Vec::new();
        for t in 0..trials {
            let seed = Stream::new(11)
                .derive(ki as u64)
                .derive(t as u64)
                .next_u64();
            let run = run_cr_iid(&inst, k, seed, &opts()).unwrap();
            // The error columns keep every sampled program feasible.
            assert_eq!(run.status(), SolveStatus::Optimal, "K={k} trial {t}");
            objectives.push(run.objective());
        }
        means.push(objectives.iter().sum::<f64>() / objectives.len() as f64);
    }
    println!(
        "criterion 4 means: K=200 -> {:.5}, K=800 -> {:.5}, K=3200 -> {:.5}",
        means[0], means[1], means[2]
    );
    // Nonincreasing up to solver tolerance; means that both sit at the zero
    // optimum differ only by accumulated roundoff (~1e-15).
    assert!(
        means[1] <= means[0] + 1e-9 && means[2] <= means[1] + 1e-9,
        "objective means not decreasing: {means:?}"
    );

    for seed in 0..10 {
        let inst = generate(&GenSpec::Choice { products: 5, assortments: 20 }, 100 + seed)
            .unwrap();
        let cg = run_cg_cold(&inst, seed, &CgOptions::default()).unwrap();
        assert!(cg.converged, "seed {seed} hit the iteration cap");
        assert!(
            cg.objective() <= 1e-6,
            "seed {seed}: CG objective {} above zero",
            cg.objective()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("criterion 4 PASS: choice objective decays in K and CG reaches zero on 10/10 seeds in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 5. Bound validity: empirical violation rate at most delta
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_bound_validity() {
    let start = Instant::now();

    // Totally unimodular transportation program, uniform distribution,
    // C = n so the box is exactly the unit cube.
    let tp = generate(&GenSpec::Transportation { supplies: 3, demands: 4 }, 7).unwrap();
    let n = tp.oracle().num_columns().unwrap() as f64;
    let args = BoundArgs {
        c: n,
        delta: 0.1,
        k: 200,
        cap: 1000,
        ..BoundArgs::default()
    };
    let tu = empirical_violation_rate(&tp, BoundKind::TotallyUnimodular, &args, 200).unwrap();
    assert!(
        tu.rate <= 0.1,
        "TU violation rate {} exceeds delta 0.1",
        tu.rate
    );

    // Groupwise MDP with the per-round guarantee; the box C*xi covers the
    // whole feasible set (each coordinate is at most the total occupancy
    // n_s / (1 - discount)), so the distributional gap is zero.
    let mdp = generate(&GenSpec::Mdp { states: 5, actions: 10, discount: 0.9 }, 5).unwrap();
    let n = mdp.oracle().num_columns().unwrap() as f64;
    let c = n * 5.0 / (1.0 - 0.9);
    let args = BoundArgs {
        c,
        delta: 0.1,
        k: 4, // rounds per group
        cap: 1000,
        ..BoundArgs::default()
    };
    let grp = empirical_violation_rate(&mdp, BoundKind::Groupwise, &args, 200).unwrap();
    assert_eq!(grp.feasible_trials, 200, "groupwise samples must be feasible");
    assert!(
        grp.rate <= 0.1,
        "groupwise violation rate {} exceeds delta 0.1",
        grp.rate
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 5 PASS: violation rates {:.4} (TU) and {:.4} (groupwise MDP) at delta 0.1 in {elapsed:?}",
        tu.rate, grp.rate
    );
}

// ---------------------------------------------------------------------------
// 6. Structural-constant soundness
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_structural_soundness() {
    let start = Instant::now();

    // TU: every dual basic solution over every nonsingular basis.
    let tp = generate(&GenSpec::Transportation { supplies: 2, demands: 3 }, 9).unwrap();
    let InstanceKind::ExplicitDense(p) = &tp.kind else {
        panic!()
    };
    let cols: Vec<(f64, Vec<f64>)> = p
        .columns
        .iter()
        .map(|c| (c.cost, c.column.to_dense(p.num_rows)))
        .collect();
    let costs: Vec<f64> = p.columns.iter().map(|c| c.cost).collect();
    let gamma = gamma_tu(&costs, p.num_rows);
    let duals = oracle::all_dual_basic_solutions(p.num_rows, &cols);
    assert!(!duals.is_empty());
    for d in &duals {
        assert!(inf_norm(d) <= gamma + 1e-7, "TU dual {} > {gamma}", inf_norm(d));
    }

    // MDP: duals of every one-action-per-state basis (the basis form the
    // discount cap covers; a feasible solve can terminate on no other).
    let mdp = generate(&GenSpec::Mdp { states: 4, actions: 3, discount: 0.85 }, 2).unwrap();
    let InstanceKind::Mdp(mp) = &mdp.kind else {
        panic!()
    };
    let gamma = gamma_mdp(&mp.costs, mp.discount);
    let duals = oracle::mdp_policy_duals(mp);
    assert_eq!(duals.len(), 81);
    for d in &duals {
        assert!(inf_norm(d) <= gamma + 1e-7, "MDP dual {} > {gamma}", inf_norm(d));
    }

    // Covering: dual of every feasible sampled solve obeys the rate bound.
    let covering = generate(&GenSpec::Covering { rows: 5, columns: 12 }, 4).unwrap();
    let InstanceKind::Covering(cp) = &covering.kind else {
        panic!()
    };
    let u = u_covering(cp);
    let mut feasible = 0;
    for seed in 0..100 {
        let run = run_cr_iid(&covering, 8, seed, &opts()).unwrap();
        if run.status() != SolveStatus::Optimal {
            continue;
        }
        feasible += 1;
        assert!(
            inf_norm(&run.result.dual) <= u + 1e-7,
            "seed {seed}: covering dual {} > U {u}",
            inf_norm(&run.result.dual)
        );
    }
    assert!(feasible >= 50, "covering suite too often infeasible");

    // Packing: every sampled optimum stays under the objective cap.
    let packing = generate(&GenSpec::Packing { rows: 5, columns: 12 }, 6).unwrap();
    let InstanceKind::Packing(pp) = &packing.kind else {
        panic!()
    };
    let cap = packing_bounds(pp).objective_cap;
    let mut feasible = 0;
    for seed in 0..100 {
        let run = run_cr_iid(&packing, 6, seed, &opts()).unwrap();
        if run.status() != SolveStatus::Optimal {
            continue;
        }
        feasible += 1;
        assert!(
            run.objective() <= cap + 1e-7,
            "seed {seed}: packing value {} > cap {cap}",
            run.objective()
        );
    }
    assert!(feasible >= 50, "packing suite too often infeasible");

    let elapsed = start.elapsed();
    println!("criterion 6 PASS: structural constants sound (zero violations at 1e-7 slack) in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 7. Groupwise feasibility
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_groupwise_feasibility() {
    let start = Instant::now();
    let inst = generate(&GenSpec::Mdp { states: 5, actions: 10, discount: 0.9 }, 3).unwrap();
    for seed in 0..100 {
        let run = run_cr_groupwise(&inst, 1, seed, &opts()).unwrap();
        assert_eq!(
            run.status(),
            SolveStatus::Optimal,
            "groupwise sample {seed} infeasible"
        );
    }
    let elapsed = start.elapsed();
    println!("criterion 7 PASS: 100/100 groupwise MDP samples feasible in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 8. Formula fidelity against 256-bit arithmetic
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_formula_fidelity() {
    use rug::Float;
    let start = Instant::now();
    const PREC: u32 = 256;
    let f = |x: f64| Float::with_val(PREC, x);
    let assert_close = |got: f64, reference: Float, what: &str| {
        let reference = reference.to_f64();
        let rel = (got - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        assert!(rel <= 1e-12, "{what}: {got} vs {reference} (rel {rel:.3e})");
    };
    let confidence2 = |delta: f64| f(1.0) + (f(2.0) * (f(2.0) / f(delta)).ln()).sqrt();
    let confidence1 = |delta: f64| f(1.0) + (f(2.0) * (f(1.0) / f(delta)).ln()).sqrt();

    let mut rng = Stream::new(31337);
    let per_op = 1700;
    for i in 0..per_op {
        let c = rng.next_range(0.05, 10.0);
        let m = 1 + rng.next_below(50) as usize;
        let gamma = rng.next_range(0.0, 20.0);
        let a_max = rng.next_range(0.0, 5.0);
        let k = 1 + rng.next_below(1_000_000) as usize;
        let delta = rng.next_range(0.001, 0.999);
        let chi = rng.next_range(0.0, 20.0);
        let edges = rng.next_below(10_000) as usize;
        let lambda = rng.next_range(k as f64, (k as f64) * (k as f64));
        let rounds = 1 + rng.next_below(10_000) as usize;
        let l = rng.next_range(0.0, 10.0);
        let h = rng.next_range(0.0, 10.0);

        let got = dual_bound_term(c, m, gamma, a_max, k, delta).unwrap();
        let scale_hp = f(1.0) + f(m as f64) * f(gamma) * f(a_max);
        let want = f(c) * scale_hp.clone() / f(k as f64).sqrt() * confidence2(delta);
        assert_close(got, want, &format!("dual term #{i}"));

        let got = reduced_cost_term(c, chi, k, delta).unwrap();
        let want = f(c) * f(chi) / f(k as f64).sqrt() * confidence1(delta);
        assert_close(got, want, &format!("reduced-cost term #{i}"));

        let got = near_feasibility_term(c, m, a_max, k, delta).unwrap();
        let want = f(c) / f(k as f64).sqrt() * f(m as f64) * f(a_max) * confidence1(delta);
        assert_close(got, want, &format!("near-feasibility term #{i}"));

        let scale = dual_scale(m, gamma, a_max);
        let got = dependent_dual_term(c, scale, k, edges, lambda, delta).unwrap();
        let kk = f(k as f64) * f(k as f64);
        let core = ((f(k as f64) + f(2.0) * f(edges as f64)) / kk.clone()).sqrt()
            + (f(2.0) * f(lambda) * (f(2.0) / f(delta)).ln() / kk.clone()).sqrt();
        let want = f(c) * f(scale) * core;
        assert_close(got, want, &format!("dependent term #{i}"));

        let got = groupwise_dual_term(c, scale, rounds, delta).unwrap();
        let want = f(c) * f(scale) / f(rounds as f64).sqrt() * confidence2(delta);
        assert_close(got, want, &format!("groupwise term #{i}"));

        let got = lipschitz_term(c, l, h, k, delta).unwrap();
        let want = f(c) * f(l) * f(h) / f(k as f64).sqrt()
            * (f(1.0) + f(3.0) * (f(0.5) * (f(4.0) / f(delta)).ln()).sqrt());
        assert_close(got, want, &format!("lipschitz term #{i}"));
    }

    // Exact reduction of the dependent terms to the i.i.d. terms.
    let mut rng = Stream::new(99);
    for _ in 0..200 {
        let c = rng.next_range(0.05, 5.0);
        let m = 1 + rng.next_below(20) as usize;
        let gamma = rng.next_range(0.0, 10.0);
        let a_max = rng.next_range(0.0, 3.0);
        let k = 1 + rng.next_below(100_000) as usize;
        let delta = rng.next_range(0.001, 0.999);
        let chi = rng.next_range(0.0, 10.0);
        let scale = dual_scale(m, gamma, a_max);
        let dep = dependent_dual_term(c, scale, k, 0, k as f64, delta).unwrap();
        let iid = dual_bound_term(c, m, gamma, a_max, k, delta).unwrap();
        assert!((dep - iid).abs() <= 1e-12 * iid.abs().max(1e-300));
        let dep = dependent_reduced_cost_term(c, chi, k, 0, k as f64, delta).unwrap();
        let iid = reduced_cost_term(c, chi, k, delta).unwrap();
        assert!((dep - iid).abs() <= 1e-12 * iid.abs().max(1e-300));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 8 PASS: 6 term formulas match 256-bit references on {} inputs in {elapsed:?}",
        per_op * 6
    );
}

// ---------------------------------------------------------------------------
// 9. End-to-end determinism of the harness
// ---------------------------------------------------------------------------

/// Rows with wall-clock columns blanked.
fn mask_timings(csv_text: &str) -> String {
    let mut out = Vec::new();
    for (i, line) in csv_text.lines().enumerate() {
        if i == 0 {
            out.push(line.to_string());
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').collect();
        // sampling_ms and solve_ms columns of the results schema.
        if fields.len() >= 15 {
            fields[13] = "";
            fields[14] = "";
        }
        out.push(fields.join(","));
    }
    out.join("\n")
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_colrand");
    let dir = std::env::temp_dir().join(format!("colrand-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("spawn colrand");
        assert!(
            out.status.success(),
            "colrand {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };

    // Instance generation is byte-identical per seed.
    run(&["generate", "--family", "covering", "--rows", "5", "--columns", "12",
          "--seed", "21", "--out", &path("a.json")]);
    run(&["generate", "--family", "covering", "--rows", "5", "--columns", "12",
          "--seed", "21", "--out", &path("b.json")]);
    let a = std::fs::read(path("a.json")).unwrap();
    let b = std::fs::read(path("b.json")).unwrap();
    assert_eq!(a, b, "generate is not byte-deterministic");

    // The same run config produces identical non-timing output at 1 and 8
    // worker threads, and across repetitions.
    let base = [
        "run", "--method", "cr", "--k", "10,25", "--trials", "6",
        "--seed", "5", "--resample-on-infeasible", "2",
    ];
    for (threads, name) in [("1", "r1.csv"), ("8", "r8.csv"), ("1", "r1b.csv")] {
        let mut args: Vec<&str> = base.to_vec();
        let instance = path("a.json");
        let out = path(name);
        args.extend_from_slice(&["--instance", &instance, "--threads", threads, "--out", &out]);
        run(&args);
    }
    let r1 = mask_timings(&std::fs::read_to_string(path("r1.csv")).unwrap());
    let r8 = mask_timings(&std::fs::read_to_string(path("r8.csv")).unwrap());
    let r1b = mask_timings(&std::fs::read_to_string(path("r1b.csv")).unwrap());
    assert_eq!(r1, r8, "thread count changed non-timing output");
    assert_eq!(r1, r1b, "repetition changed non-timing output");

    // Aggregation of identical inputs is identical (timings never enter).
    run(&["plotdata", "--input", &path("r1.csv"), "--out", &path("p1.csv")]);
    run(&["plotdata", "--input", &path("r8.csv"), "--out", &path("p8.csv")]);
    let p1 = std::fs::read(path("p1.csv")).unwrap();
    let p8 = std::fs::read(path("p8.csv")).unwrap();
    assert_eq!(p1, p8, "plotdata diverged");

    std::fs::remove_dir_all(&dir).ok();
    let elapsed = start.elapsed();
    println!("criterion 9 PASS: byte-identical non-timing output at 1 and 8 threads in {elapsed:?}");
}
