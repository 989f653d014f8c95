//! Cross-checks of derived values against independent oracles: literal
//! re-enumeration of the matrix conditions, the subdivision property as a
//! facet filter, and second routes to the solver's verdicts.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use roundlab::closure::{lower_bound_chain, speedup_transform, ChainStatus, ClosureOptions};
use roundlab::complex::{ProcessId, Value};
use roundlab::executions::{
    enumerate_collect_matrices, enumerate_ordered_partitions, filter_immediate, filter_snapshot,
    IdSet,
};
use roundlab::model::ModelSpec;
use roundlab::protocol::one_round;
use roundlab::rules::{halving_rule, halving_schedule, rule_map, run_rule, two_proc_approx_rule};
use roundlab::solver::{solve, verify_map, SolveOptions};
use roundlab::task::{approx_agreement, binary_consensus, tasks_equal};

const OPTS: SolveOptions = SolveOptions { node_budget: None };

#[test]
fn collect_matrices_match_the_literal_conditions() {
    for ids in [id_set(&[1]), id_set(&[1, 2]), id_set(&[1, 2, 3])] {
        let constructed: BTreeSet<_> = enumerate_collect_matrices(&ids).into_iter().collect();
        let brute = brute_force_collect_matrices(&ids);
        assert_eq!(constructed, brute);
    }
    // Frozen sizes, pinned by the brute-force run above.
    assert_eq!(enumerate_collect_matrices(&id_set(&[1])).len(), 1);
    assert_eq!(enumerate_collect_matrices(&id_set(&[1, 2])).len(), 5);
    assert_eq!(enumerate_collect_matrices(&id_set(&[1, 2, 3])).len(), 67);
}

#[test]
fn view_assignment_counts_for_three_processes() {
    let ids = id_set(&[1, 2, 3]);
    let collect = enumerate_collect_matrices(&ids);
    let collect_views: BTreeSet<_> = collect.iter().map(|m| m.view_assignment()).collect();
    let snapshot_views: BTreeSet<_> = filter_snapshot(&collect)
        .iter()
        .map(|m| m.view_assignment())
        .collect();
    let immediate_views: BTreeSet<_> = filter_immediate(&collect)
        .iter()
        .map(|p| p.view_assignment())
        .collect();
    assert_eq!(collect_views.len(), 25);
    assert_eq!(snapshot_views.len(), 19);
    assert_eq!(immediate_views.len(), 13);
}

#[test]
fn partition_counts_follow_the_recurrence() {
    assert_eq!(ordered_partition_count(1), 1);
    assert_eq!(ordered_partition_count(2), 3);
    assert_eq!(ordered_partition_count(3), 13);
    assert_eq!(ordered_partition_count(4), 75);
    for n in 1..=4u32 {
        let ids = id_set(&(1..=n).collect::<Vec<_>>());
        assert_eq!(
            enumerate_ordered_partitions(&ids).len() as u64,
            ordered_partition_count(n as u64)
        );
    }
}

/// The subdivision property is an independent characterization of the
/// immediate-snapshot facets: enumerate all view assignments and filter.
#[test]
fn subdivision_property_reproduces_iis_facets() {
    for n in [2u32, 3] {
        let ids: Vec<ProcessId> = (1..=n).map(pid).collect();
        let sigma = sym_simplex(&(1..=n).collect::<Vec<_>>());
        let complex = one_round(&sigma, &ModelSpec::iis(), 1).unwrap();
        let got: BTreeSet<BTreeMap<ProcessId, IdSet>> = complex
            .facets()
            .iter()
            .map(|facet| {
                facet
                    .vertices()
                    .iter()
                    .map(|v| {
                        let seen = v.value.as_view().seen().unwrap().keys().copied().collect();
                        (v.id, seen)
                    })
                    .collect()
            })
            .collect();

        // All assignments i -> V_i with i in V_i satisfying: for all i,j,
        // j in V_i or i in V_j; and j in V_i implies V_j within V_i.
        let mut expected: BTreeSet<BTreeMap<ProcessId, IdSet>> = BTreeSet::new();
        let subsets: Vec<IdSet> = {
            let mut all = Vec::new();
            for mask in 1u32..(1 << n) {
                all.push(
                    ids.iter()
                        .enumerate()
                        .filter(|(k, _)| mask & (1 << k) != 0)
                        .map(|(_, id)| *id)
                        .collect(),
                );
            }
            all
        };
        let mut choice = vec![0usize; n as usize];
        'odometer: loop {
            let assignment: BTreeMap<ProcessId, IdSet> = ids
                .iter()
                .zip(&choice)
                .map(|(id, &k)| (*id, subsets[k].clone()))
                .collect();
            let own = assignment.iter().all(|(id, view)| view.contains(id));
            let property = assignment.iter().all(|(i, vi)| {
                assignment.iter().all(|(j, vj)| {
                    (vi.contains(j) || vj.contains(i)) && (!vi.contains(j) || vj.is_subset(vi))
                })
            });
            if own && property {
                expected.insert(assignment);
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    break 'odometer;
                }
                choice[k] += 1;
                if choice[k] < subsets.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
        assert_eq!(got, expected);
    }
}

/// One facet per (partition, winner in the first block): the test&set facet
/// count is the sum of first-block sizes.
#[test]
fn test_and_set_facet_count_matches_first_block_sum() {
    let sigma = sym_simplex(&[1, 2, 3]);
    let complex = one_round(&sigma, &ModelSpec::iis_test_and_set(), 1).unwrap();
    let expected: usize = enumerate_ordered_partitions(&id_set(&[1, 2, 3]))
        .iter()
        .map(|p| p.first_block().len())
        .sum();
    assert_eq!(complex.facet_count(), expected);
    assert_eq!(expected, 18);
}

/// Literal grid loop pinning the mixed-pair relation of eps = 1/2 agreement.
#[test]
fn approx_delta_matches_grid_enumeration() {
    let task = approx_agreement(2, 2, 1).unwrap();
    let sigma = rat_simplex(2, &[(1, 0), (2, 2)]);
    let mut expected = Vec::new();
    for a in 0u64..=2 {
        for b in 0u64..=2 {
            if a.abs_diff(b) <= 1 {
                expected.push(rat_simplex(2, &[(1, a), (2, b)]));
            }
        }
    }
    expected.sort();
    assert_eq!(task.delta(&sigma).unwrap(), expected.as_slice());
}

/// Distinct eps bounds are separated by an explicit pair.
#[test]
fn eps_parameters_separate_tasks() {
    let tight = approx_agreement(2, 9, 1).unwrap();
    let loose = approx_agreement(2, 9, 3).unwrap();
    let sigma = rat_simplex(9, &[(1, 0), (2, 9)]);
    let split = rat_simplex(9, &[(1, 0), (2, 2)]);
    let tight_delta = tight.delta(&sigma).unwrap();
    let loose_delta = loose.delta(&sigma).unwrap();
    assert!(tight_delta.binary_search(&split).is_err());
    assert!(loose_delta.binary_search(&split).is_ok());
    assert!(!tasks_equal(&tight, &loose).unwrap());
}

#[test]
fn eq4_map_solves_the_one_round_instance() {
    // The halving map at t=1 witnesses solvability of eps = 1/2 agreement on
    // the half grid, agreeing with the solver verdict.
    let task = approx_agreement(3, 2, 1).unwrap();
    let model = ModelSpec::iis();
    assert!(run_rule(&task, &model, 1, &[halving_rule(1, 2)]).unwrap());
    let verdict = solve(&task, &model, 1, OPTS).unwrap();
    assert!(verdict.is_solvable());
}

#[test]
fn two_proc_rule_keeps_facet_spreads_within_eps() {
    // Inputs 0 and 3/9 with eps = 1/9: the image of each of the three
    // one-round facets has spread at most 1/9.
    let rule = two_proc_approx_rule(1, 9, 0, 3);
    let sigma = rat_simplex(9, &[(1, 0), (2, 3)]);
    let complex = one_round(&sigma, &ModelSpec::iis(), 1).unwrap();
    assert_eq!(complex.facet_count(), 3);
    for facet in complex.facets() {
        let nums: Vec<u64> = facet
            .vertices()
            .iter()
            .map(|v| {
                let view = v.value.as_view();
                let current: BTreeMap<ProcessId, Value> = view
                    .seen()
                    .unwrap()
                    .iter()
                    .map(|(j, child)| match child.repr() {
                        roundlab::view::ViewRepr::Input(value) => (*j, value.clone()),
                        _ => unreachable!(),
                    })
                    .collect();
                match rule.apply(v.id, None, &current).unwrap() {
                    Value::Rational { num, .. } => num,
                    _ => unreachable!(),
                }
            })
            .collect();
        let spread = nums.iter().max().unwrap() - nums.iter().min().unwrap();
        assert!(spread <= 1, "facet {facet} spread {spread}");
    }
}

#[test]
fn halving_rule_contracts_every_facet_of_the_subdivision() {
    // Inputs pairwise within 2 eps map to outputs pairwise within eps on all
    // thirteen facets.
    let tau = rat_simplex(4, &[(1, 0), (2, 1), (3, 2)]);
    let task = approx_agreement(3, 4, 2).unwrap();
    let map = rule_map(&task, &ModelSpec::iis(), 1, &[halving_rule(1, 4)]).unwrap();
    let complex = one_round(&tau, &ModelSpec::iis(), 1).unwrap();
    assert_eq!(complex.facet_count(), 13);
    for facet in complex.facets() {
        let image = map.apply(facet).unwrap();
        let nums: Vec<u64> = image
            .vertices()
            .iter()
            .map(|v| match &v.value {
                Value::Rational { num, .. } => *num,
                _ => unreachable!(),
            })
            .collect();
        let spread = nums.iter().max().unwrap() - nums.iter().min().unwrap();
        assert!(spread <= 1, "facet {facet} -> {image} spread {spread}");
    }
}

/// Solvability is monotone in the round count: compose with one more round.
#[test]
fn extra_rounds_preserve_solvability() {
    let consensus = binary_consensus(2).unwrap();
    let ts = ModelSpec::iis_test_and_set();
    assert!(solve(&consensus, &ts, 1, OPTS).unwrap().is_solvable());
    assert!(solve(&consensus, &ts, 2, OPTS).unwrap().is_solvable());

    let approx = approx_agreement(2, 3, 1).unwrap();
    let iis = ModelSpec::iis();
    assert!(solve(&approx, &iis, 1, OPTS).unwrap().is_solvable());
    assert!(solve(&approx, &iis, 2, OPTS).unwrap().is_solvable());
}

#[test]
fn unsolvable_verdicts_are_reproducible() {
    let task = binary_consensus(2).unwrap();
    let first = solve(&task, &ModelSpec::iis(), 1, OPTS).unwrap();
    let second = solve(&task, &ModelSpec::iis(), 1, OPTS).unwrap();
    match (first, second) {
        (
            roundlab::solver::SolveVerdict::Unsolvable { explored: a },
            roundlab::solver::SolveVerdict::Unsolvable { explored: b },
        ) => assert_eq!(a, b),
        _ => panic!("consensus is unsolvable at one round"),
    }
}

#[test]
fn fixed_point_chain_reports_the_budget() {
    let task = binary_consensus(2).unwrap();
    let model = ModelSpec::iis();
    let transform = |t: &roundlab::task::Task| {
        roundlab::closure::closure(t, &model, ClosureOptions::default())
    };
    let report = lower_bound_chain(&task, &model, &transform, None, 4, OPTS).unwrap();
    assert_eq!(report.bound, 4);
    assert_eq!(report.status, ChainStatus::FixedPoint);
}

#[test]
fn speedup_of_a_one_round_witness_is_the_zero_round_identity() {
    // Reducing the halving witness of the eps = 1/2 instance yields the map
    // that outputs the input unchanged, and that map solves the closure.
    let task = approx_agreement(3, 2, 1).unwrap();
    let model = ModelSpec::iis();
    let witness = rule_map(&task, &model, 1, &halving_schedule(1, 2, 1)).unwrap();
    let reduced = speedup_transform(&task, &model, 1, &witness).unwrap();
    assert!(reduced.assignment().iter().all(|(from, to)| from == to));
    let closed = roundlab::closure::closure(&task, &model, ClosureOptions::default()).unwrap();
    assert!(verify_map(&closed, &model, 0, &reduced).unwrap());
}

#[test]
fn zero_round_local_fast_path_agrees_with_the_solver() {
    // tau listed in delta(sigma) is exactly zero-round solvability of the
    // local task.
    let task = binary_consensus(2).unwrap();
    let sigma = bit_simplex(&[(1, 0), (2, 1)]);
    let listed = task.delta(&sigma).unwrap();
    for (a, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let tau = bit_simplex(&[(1, a), (2, b)]);
        let local = roundlab::closure::local_task(&task, &sigma, &tau).unwrap();
        let zero_round = solve(&local.task, &ModelSpec::iis(), 0, OPTS)
            .unwrap()
            .is_solvable();
        assert_eq!(zero_round, listed.binary_search(&tau).is_ok());
    }
}
