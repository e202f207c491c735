//! Cross-checks of the simplex solver against independent dense oracles.

mod common;

use colrand::lp::{
    reduced_costs, solve_simplex, CostedColumn, LpInstance, SimplexOptions, SolveStatus,
    SparseColumn,
};
use colrand::rng::Stream;
use common::{brute_force_standard, BruteForce};

fn random_standard_lp(rng: &mut Stream, feasible_bias: bool) -> LpInstance {
    let m = 1 + rng.next_below(3) as usize;
    let n = m + rng.next_below((7 - m) as u64 + 1) as usize;
    let columns: Vec<CostedColumn> = (0..n)
        .map(|_| {
            let dense: Vec<f64> = (0..m).map(|_| rng.next_range(-1.0, 1.0)).collect();
            CostedColumn::new(rng.next_range(-1.0, 1.0), SparseColumn::from_dense(&dense))
        })
        .collect();
    let rhs = if feasible_bias {
        // b = A x0 for a random nonnegative x0, so the program is feasible.
        let mut b = vec![0.0; m];
        for col in &columns {
            col.column.add_into(&mut b, rng.next_range(0.0, 1.0));
        }
        b
    } else {
        (0..m).map(|_| rng.next_range(-1.0, 1.0)).collect()
    };
    LpInstance::standard(rhs, columns)
}

#[test]
fn simplex_agrees_with_basis_enumeration_on_random_lps() {
    let mut rng = Stream::new(2024);
    let opts = SimplexOptions::default();
    let mut optimal = 0;
    let mut infeasible = 0;
    let mut unbounded = 0;
    for trial in 0..200 {
        let lp = random_standard_lp(&mut rng, trial % 2 == 0);
        let res = solve_simplex(&lp, &opts);
        let reference = brute_force_standard(&lp);
        match res.status {
            SolveStatus::Optimal => {
                optimal += 1;
                let BruteForce::Optimal(v) = reference else {
                    panic!("trial {trial}: solver Optimal, oracle {reference:?}");
                };
                assert!(
                    (res.objective - v).abs() <= 1e-8,
                    "trial {trial}: {} vs oracle {v}",
                    res.objective
                );
                // Strong duality at the reported dual.
                let pb: f64 = res.dual.iter().zip(&lp.rhs).map(|(p, b)| p * b).sum();
                assert!(
                    (res.objective - pb).abs() <= 1e-6 * (1.0 + res.objective.abs()),
                    "trial {trial}: duality gap {} vs {}",
                    res.objective,
                    pb
                );
                // Primal feasibility of the reported solution.
                let mut ax = vec![0.0; lp.num_rows];
                for (col, &v) in lp.columns.iter().zip(&res.primal) {
                    col.column.add_into(&mut ax, v);
                }
                let residual = ax
                    .iter()
                    .zip(&lp.rhs)
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                assert!(residual <= 1e-7, "trial {trial}: residual {residual}");
                // Dual feasibility and complementary slackness.
                let ids: Vec<usize> = (0..lp.num_columns()).collect();
                let rcs = reduced_costs(&lp, &res, &ids).unwrap();
                for (j, rc) in rcs.iter().enumerate() {
                    assert!(*rc >= -1e-7, "trial {trial}: reduced cost {rc} at {j}");
                    assert!(
                        res.primal[j].abs() * rc.abs() <= 1e-6,
                        "trial {trial}: complementary slackness violated at {j}"
                    );
                }
            }
            SolveStatus::Infeasible => {
                infeasible += 1;
                assert_eq!(reference, BruteForce::Infeasible, "trial {trial}");
            }
            SolveStatus::Unbounded => {
                unbounded += 1;
                assert_eq!(reference, BruteForce::Unbounded, "trial {trial}");
            }
            SolveStatus::IterationLimit => panic!("trial {trial}: iteration limit"),
        }
    }
    // The generator must exercise every status.
    assert!(optimal > 50, "only {optimal} optimal instances");
    assert!(infeasible > 10, "only {infeasible} infeasible instances");
    assert!(unbounded > 5, "only {unbounded} unbounded instances");
}

#[test]
fn dual_is_a_subgradient_in_the_rhs() {
    // For solved z(b) with dual p and any b' solved separately:
    // z(b) - z(b') <= p^T (b - b').
    let mut rng = Stream::new(555);
    let opts = SimplexOptions::default();
    let mut checked = 0;
    while checked < 100 {
        let m = 1 + rng.next_below(5) as usize;
        let n = m + rng.next_below(4) as usize;
        let columns: Vec<CostedColumn> = (0..n)
            .map(|_| {
                let dense: Vec<f64> = (0..m).map(|_| rng.next_range(-1.0, 1.0)).collect();
                CostedColumn::new(rng.next_range(0.0, 1.0), SparseColumn::from_dense(&dense))
            })
            .collect();
        let combine = |rng: &mut Stream, cols: &[CostedColumn]| {
            let mut b = vec![0.0; m];
            for col in cols {
                col.column.add_into(&mut b, rng.next_range(0.0, 1.0));
            }
            b
        };
        let b = combine(&mut rng, &columns);
        let b_prime = combine(&mut rng, &columns);
        let lp = LpInstance::standard(b.clone(), columns.clone());
        let mut lp_prime = lp.clone();
        lp_prime.rhs = b_prime.clone();
        let res = solve_simplex(&lp, &opts);
        let res_prime = solve_simplex(&lp_prime, &opts);
        if res.status != SolveStatus::Optimal || res_prime.status != SolveStatus::Optimal {
            continue;
        }
        checked += 1;
        let pd: f64 = res
            .dual
            .iter()
            .zip(b.iter().zip(&b_prime))
            .map(|(p, (bi, bpi))| p * (bi - bpi))
            .sum();
        assert!(
            res.objective - res_prime.objective <= pd + 1e-6,
            "sensitivity violated: {} - {} > {pd}",
            res.objective,
            res_prime.objective
        );
    }
}

#[test]
fn weak_duality_of_restricted_duals() {
    // Duals of a column-restricted solve are feasible for the restriction,
    // so their objective never exceeds the restricted optimum.
    let mut rng = Stream::new(77);
    let opts = SimplexOptions::default();
    for _ in 0..50 {
        let lp = random_standard_lp(&mut rng, true);
        let res = solve_simplex(&lp, &opts);
        if res.status != SolveStatus::Optimal {
            continue;
        }
        let pb: f64 = res.dual.iter().zip(&lp.rhs).map(|(p, b)| p * b).sum();
        assert!(pb <= res.objective + 1e-6);
    }
}
