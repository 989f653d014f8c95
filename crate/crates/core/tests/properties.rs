//! Property tests for the structural invariants: canonicalization, inclusion
//! closure, projection composition, serialization round-trips, the
//! value-order/encoding agreement, and the partition structure of one-round
//! complexes.

mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use roundlab::complex::{complexes_equal, ChromaticComplex, Simplex, Value, Vertex};
use roundlab::executions::enumerate_ordered_partitions;
use roundlab::json::{complex_from_json, complex_to_json};
use roundlab::model::ModelSpec;
use roundlab::protocol::{canonical_iso, one_round};

fn arb_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (0u64..=4).prop_map(|num| Value::rational(num, 4)),
        (0u8..=1).prop_map(|b| Value::bit(b).unwrap()),
        "[a-c]{1,2}".prop_map(Value::symbol),
    ]
}

fn arb_simplex(max_n: u32) -> impl Strategy<Value = Simplex> {
    prop::collection::btree_set(1..=max_n, 1..=(max_n as usize)).prop_flat_map(|ids| {
        let k = ids.len();
        (Just(ids), prop::collection::vec(arb_value(), k)).prop_map(|(ids, values)| {
            Simplex::new(
                ids.into_iter()
                    .zip(values)
                    .map(|(id, value)| Vertex::new(pid(id), value)),
            )
            .expect("distinct ids")
        })
    })
}

fn arb_complex() -> impl Strategy<Value = ChromaticComplex> {
    prop::collection::vec(arb_simplex(4), 1..6)
        .prop_map(|facets| ChromaticComplex::new(facets).expect("non-empty"))
}

proptest! {
    #[test]
    fn value_order_agrees_with_encoding_order(a in arb_value(), b in arb_value()) {
        prop_assert_eq!(a.cmp(&b), a.encoding().cmp(&b.encoding()));
        prop_assert_eq!(a == b, a.encoding() == b.encoding());
    }

    #[test]
    fn canonicalization_is_order_insensitive_and_idempotent(
        complex in arb_complex(),
        seed in any::<u64>(),
    ) {
        // Rebuild from a rotated facet list.
        let mut facets: Vec<Simplex> = complex.facets().to_vec();
        if !facets.is_empty() {
            let k = (seed as usize) % facets.len();
            facets.rotate_left(k);
        }
        let rebuilt = ChromaticComplex::new(facets).unwrap();
        prop_assert!(complexes_equal(&complex, &rebuilt));

        let again = ChromaticComplex::new(complex.facets().to_vec()).unwrap();
        prop_assert!(complexes_equal(&complex, &again));
    }

    #[test]
    fn complexes_are_inclusion_closed(complex in arb_complex()) {
        for facet in complex.facets() {
            for face in facet.faces() {
                prop_assert!(complex.contains(&face));
            }
        }
        // And simplices() lists exactly the faces of facets.
        let listed: BTreeSet<Simplex> = complex.simplices().into_iter().collect();
        for s in &listed {
            prop_assert!(complex.contains(s));
        }
    }

    #[test]
    fn projection_composes_through_intersection(
        complex in arb_complex(),
        first in prop::collection::btree_set(1u32..=4, 1..=4),
        second in prop::collection::btree_set(1u32..=4, 1..=4),
    ) {
        let j1 = id_set(&first.iter().copied().collect::<Vec<_>>());
        let j2 = id_set(&second.iter().copied().collect::<Vec<_>>());
        let joint: Vec<u32> = first.intersection(&second).copied().collect();
        let j12 = id_set(&joint);

        let via_two = complex.project(&j1).ok().and_then(|p| p.project(&j2).ok());
        let direct = if j12.is_empty() { None } else { complex.project(&j12).ok() };
        match (via_two, direct) {
            (Some(a), Some(b)) => prop_assert!(complexes_equal(&a, &b)),
            (None, None) => {}
            (a, b) => prop_assert!(false, "projection mismatch: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn complex_serialization_round_trips(complex in arb_complex()) {
        let text = complex_to_json(&complex);
        let back = complex_from_json(&text).unwrap();
        prop_assert!(complexes_equal(&complex, &back));
        prop_assert_eq!(text, complex_to_json(&back));
    }

    #[test]
    fn protocol_complexes_round_trip_with_views(sigma in arb_simplex(3)) {
        let complex = one_round(&sigma, &ModelSpec::iis_test_and_set(), 1).unwrap();
        let back = complex_from_json(&complex_to_json(&complex)).unwrap();
        prop_assert!(complexes_equal(&complex, &back));
    }

    #[test]
    fn iis_facets_are_the_ordered_partitions(sigma in arb_simplex(4)) {
        let complex = one_round(&sigma, &ModelSpec::iis(), 1).unwrap();
        let partitions = enumerate_ordered_partitions(&sigma.ids());
        prop_assert_eq!(complex.facet_count(), partitions.len());

        let got: BTreeSet<_> = complex
            .facets()
            .iter()
            .map(|facet| {
                facet
                    .vertices()
                    .iter()
                    .map(|v| {
                        let seen: Vec<_> =
                            v.value.as_view().seen().unwrap().keys().copied().collect();
                        (v.id, seen)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let expected: BTreeSet<_> = partitions
            .iter()
            .map(|p| {
                p.view_assignment()
                    .into_iter()
                    .map(|(id, seen)| (id, seen.into_iter().collect::<Vec<_>>()))
                    .collect::<Vec<_>>()
            })
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn test_and_set_facets_have_unique_minimal_winners(sigma in arb_simplex(3)) {
        let complex = one_round(&sigma, &ModelSpec::iis_test_and_set(), 1).unwrap();
        for facet in complex.facets() {
            let views: Vec<(bool, BTreeSet<roundlab::complex::ProcessId>)> = facet
                .vertices()
                .iter()
                .map(|v| {
                    let view = v.value.as_view();
                    let winner = view.box_output() == Some(roundlab::complex::Bit::ONE);
                    (winner, view.seen().unwrap().keys().copied().collect())
                })
                .collect();
            let winners: Vec<_> = views.iter().filter(|(w, _)| *w).collect();
            prop_assert_eq!(winners.len(), 1);
            // The winner comes from the first block: its view is contained
            // in every other view.
            let (_, winner_view) = winners[0];
            for (_, view) in &views {
                prop_assert!(winner_view.is_subset(view));
            }
            // Solo-first vertices always win.
            for (winner, view) in &views {
                if view.len() == 1 {
                    prop_assert!(*winner);
                }
            }
        }
    }

    #[test]
    fn canonical_iso_sends_facets_to_facets(
        from in arb_simplex(3),
        values in prop::collection::vec(arb_value(), 3),
    ) {
        let ids: Vec<_> = from.ids().into_iter().collect();
        let to = Simplex::new(
            ids.iter()
                .zip(values)
                .map(|(id, value)| Vertex::new(*id, value)),
        )
        .unwrap();
        let source = one_round(&from, &ModelSpec::iis(), 1).unwrap();
        let target = one_round(&to, &ModelSpec::iis(), 1).unwrap();
        for facet in source.facets() {
            let image = Simplex::new(
                facet
                    .vertices()
                    .iter()
                    .map(|v| canonical_iso(&from, &to, v).unwrap()),
            )
            .unwrap();
            prop_assert!(target.facets().contains(&image));
        }
    }
}
