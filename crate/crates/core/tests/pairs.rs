use paamp::pairs::{pair_ratio, relevant_pairs};
use paamp::planner::initial_joint_plans;
use paamp::region_graph::{build_graph, SequencePlan};
use paamp::scenario::builtin_crossing_scenario;
use proptest::prelude::*;

fn crossing_pairs(steps: usize) -> (Vec<SequencePlan>, paamp::pairs::RelevantPairs) {
    let mut s = builtin_crossing_scenario();
    s.params.steps = steps;
    let g = build_graph(&s).unwrap();
    let plans = initial_joint_plans(&s, &g).unwrap().expect("joint plan");
    let p = relevant_pairs(&plans, &g).unwrap();
    (plans, p)
}

#[test]
fn contact_statistics_at_twenty_steps() {
    let (_, p) = crossing_pairs(20);
    let contacts = p.contacts_per_agent(4);
    let per_step = p.contacts_per_agent_per_step(4);
    println!("contacts per agent {contacts:?}, per step {per_step:?}");
    assert_eq!(contacts.iter().sum::<usize>(), 2 * p.total());
    let mean = per_step.iter().sum::<f64>() / 4.0;
    assert!(mean <= 3.0, "mean contacts per agent per step {mean}");
    assert!(pair_ratio(&p, 4).unwrap() < 1.0);
}

#[test]
fn ratio_on_crossing_is_below_one() {
    for steps in [12, 20] {
        let (_, p) = crossing_pairs(steps);
        let rho = pair_ratio(&p, 4).unwrap();
        println!("T={steps}: rho {rho:.4}");
        assert!(rho < 1.0);
    }
}

#[test]
fn same_region_and_far_apart() {
    let s = builtin_crossing_scenario();
    let g = build_graph(&s).unwrap();
    let same = [SequencePlan { agent: 0, segments: vec![0; 6] }, SequencePlan { agent: 1, segments: vec![0; 6] }];
    let p = relevant_pairs(&same, &g).unwrap();
    assert!(p.per_step.iter().all(|ps| ps == &vec![(0, 1)]));
    let apart = [SequencePlan { agent: 0, segments: vec![0; 6] }, SequencePlan { agent: 1, segments: vec![2; 6] }];
    let p = relevant_pairs(&apart, &g).unwrap();
    assert_eq!(p.total(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn bounded_and_monotone_under_new_edges(
        segs in proptest::collection::vec(proptest::collection::vec(0usize..6, 8), 2..6),
        a in 0usize..6, b in 0usize..6,
    ) {
        let s = builtin_crossing_scenario();
        let g = build_graph(&s).unwrap();
        let plans: Vec<SequencePlan> = segs.into_iter().enumerate().map(|(agent, segments)| SequencePlan { agent, segments }).collect();
        let n = plans.len();
        let p = relevant_pairs(&plans, &g).unwrap();
        for ps in &p.per_step {
            prop_assert!(ps.len() <= n * (n - 1) / 2);
        }
        if a != b {
            let wider = relevant_pairs(&plans, &g.with_edge(a, b)).unwrap();
            for (t, ps) in p.per_step.iter().enumerate() {
                for pair in ps {
                    prop_assert!(wider.per_step[t].contains(pair));
                }
            }
        }
    }
}
