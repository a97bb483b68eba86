mod support;

use paamp::milp::{branch_and_bound, brute_force_solve, MilpModel, Relation, SolveStatus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::random_milp;

fn knapsack(values: &[f64], weights: &[f64], cap: f64) -> MilpModel {
    let mut m = MilpModel::new();
    let vars: Vec<_> = (0..values.len()).map(|k| m.add_binary(format!("item{k}"))).collect();
    for (&v, &val) in vars.iter().zip(values) {
        m.add_objective_term(v, -val);
    }
    m.add_constraint(vars.iter().copied().zip(weights.iter().copied()).collect(), Relation::Le, cap);
    m
}

/// Exhaustive enumeration without any LP.
fn knapsack_by_enumeration(values: &[f64], weights: &[f64], cap: f64) -> f64 {
    let n = values.len();
    (0..1u32 << n)
        .filter(|mask| (0..n).filter(|k| mask >> k & 1 == 1).map(|k| weights[k]).sum::<f64>() <= cap)
        .map(|mask| -(0..n).filter(|k| mask >> k & 1 == 1).map(|k| values[k]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn eight_item_knapsack_matches_enumeration() {
    let values = [10.0, 13.0, 7.0, 8.0, 4.0, 11.0, 9.0, 6.0];
    let weights = [5.0, 7.0, 3.0, 4.0, 2.0, 6.0, 5.0, 3.0];
    let cap = 17.0;
    let expected = knapsack_by_enumeration(&values, &weights, cap);
    let model = knapsack(&values, &weights, cap);
    let bb = branch_and_bound(&model, 0.0, 100_000).unwrap();
    let brute = brute_force_solve(&model).unwrap();
    assert_eq!(bb.status, SolveStatus::Optimal);
    assert!((bb.objective - expected).abs() < 1e-9, "{} vs {}", bb.objective, expected);
    assert!((brute.objective - expected).abs() < 1e-9);
}

#[test]
fn random_knapsacks_match_enumeration() {
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..8).map(|_| rng.gen_range(1..20) as f64).collect();
        let weights: Vec<f64> = (0..8).map(|_| rng.gen_range(1..10) as f64).collect();
        let cap = rng.gen_range(5..30) as f64;
        let expected = knapsack_by_enumeration(&values, &weights, cap);
        let bb = branch_and_bound(&knapsack(&values, &weights, cap), 0.0, 100_000).unwrap();
        assert!((bb.objective - expected).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn hundred_random_milps_match_brute_force() {
    let mut feasible = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nb = rng.gen_range(1..=12);
        let nc = rng.gen_range(0..=20);
        let m = rng.gen_range(5..=40);
        let model = random_milp(&mut rng, nb, nc, m);
        let bb = branch_and_bound(&model, 0.0, 1_000_000).unwrap();
        let brute = brute_force_solve(&model).unwrap();
        assert_eq!(bb.has_solution(), brute.has_solution(), "seed {seed}: {:?} vs {:?}", bb.status, brute.status);
        if brute.has_solution() {
            feasible += 1;
            assert_eq!(bb.status, SolveStatus::Optimal, "seed {seed}");
            assert!(
                (bb.objective - brute.objective).abs() <= 1e-6,
                "seed {seed}: {} vs {}",
                bb.objective,
                brute.objective
            );
            assert!(model.max_violation(&bb.values) <= 1e-6);
        } else {
            assert_eq!(bb.status, SolveStatus::Infeasible);
        }
    }
    assert!(feasible >= 30, "only {feasible} feasible instances");
}

#[test]
fn no_binaries_is_a_single_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = random_milp(&mut rng, 0, 10, 12);
    let bb = branch_and_bound(&model, 0.0, 10).unwrap();
    assert!(bb.nodes <= 1);
    let lp = paamp::milp::solve_lp(&model).unwrap();
    match lp.objective() {
        Some(z) => assert!((bb.objective - z).abs() < 1e-6),
        None => assert_eq!(bb.status, SolveStatus::Infeasible),
    }
}

#[test]
fn node_limit_reports_status() {
    let values = [10.0, 13.0, 7.0, 8.0, 4.0, 11.0, 9.0, 6.0];
    let weights = [5.0, 7.0, 3.5, 4.5, 2.5, 6.5, 5.5, 3.5];
    let bb = branch_and_bound(&knapsack(&values, &weights, 17.3), 0.0, 1).unwrap();
    assert!(matches!(bb.status, SolveStatus::NodeLimit | SolveStatus::Optimal));
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(40) })]

    #[test]
    fn returned_assignments_satisfy_every_row(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_milp(&mut rng, 8, 8, 20);
        let out = branch_and_bound(&model, 0.0, 100_000).unwrap();
        if out.has_solution() {
            prop_assert!(model.max_violation(&out.values) <= 1e-6);
            for b in model.binary_ids() {
                let v = out.values[b.0];
                prop_assert!((v - v.round()).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn larger_gap_never_loses_more_than_the_gap(seed in 0u64..10_000, g in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_milp(&mut rng, 10, 6, 18);
        let exact = branch_and_bound(&model, 0.0, 100_000).unwrap();
        let loose = branch_and_bound(&model, g, 100_000).unwrap();
        prop_assert_eq!(exact.has_solution(), loose.has_solution());
        if exact.has_solution() {
            prop_assert!(exact.objective <= loose.objective + 1e-9);
            prop_assert!(loose.objective <= exact.objective + g + 1e-6);
        }
    }

    #[test]
    fn infeasibility_is_confirmed_by_enumeration(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_milp(&mut rng, 6, 3, 25);
        let out = branch_and_bound(&model, 0.0, 100_000).unwrap();
        if out.status == SolveStatus::Infeasible {
            prop_assert_eq!(brute_force_solve(&model).unwrap().status, SolveStatus::Infeasible);
        }
    }
}
