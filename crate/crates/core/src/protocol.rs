//! Protocol complexes: all views reachable after one round or after `t`
//! iterated rounds of a model, starting from an input simplex or complex.
//!
//! Immediate-snapshot facets are generated directly from ordered partitions
//! (one facet per partition, times one per black-box outcome), which for a
//! plain immediate snapshot yields the standard chromatic subdivision.
//! Collect and snapshot facets come from execution matrices. Box outcomes
//! follow first-block semantics: within a round, every concurrency class
//! writes, calls the box, and snapshots atomically, so all box calls of the
//! first scheduled block complete before any later block starts. The test&set
//! winner is therefore a first-block process, and the consensus decision is a
//! first-block input bit.

use std::collections::BTreeMap;

use crate::complex::{Bit, ChromaticComplex, ProcessId, Simplex, Value, Vertex};
use crate::executions::{enumerate_collect_matrices, filter_snapshot, IdSet, OrderedPartition};
use crate::model::{BlackBox, Communication, ModelError, ModelSpec};
use crate::view::View;

/// The one-round protocol complex of a simplex: one facet per execution and
/// black-box outcome. `round` is only consulted by binary-consensus input
/// plans.
pub fn one_round(
    sigma: &Simplex,
    model: &ModelSpec,
    round: u32,
) -> Result<ChromaticComplex, ModelError> {
    model.validate()?;
    let facets = match model.communication {
        Communication::ImmediateSnapshot => {
            let partitions =
                crate::executions::enumerate_ordered_partitions(&sigma.ids());
            let mut facets = Vec::new();
            for partition in &partitions {
                facets.extend(facets_for_partition(sigma, partition, &model.blackbox, round)?);
            }
            facets
        }
        Communication::Snapshot | Communication::Collect => {
            // validate() has already ruled out black boxes here.
            let matrices = enumerate_collect_matrices(&sigma.ids());
            let matrices = match model.communication {
                Communication::Snapshot => filter_snapshot(&matrices),
                _ => matrices,
            };
            matrices
                .iter()
                .map(|m| facet_from_views(sigma, &m.view_assignment(), None))
                .collect()
        }
    };
    Ok(ChromaticComplex::new(facets).expect("one-round complex is non-empty"))
}

fn facets_for_partition(
    sigma: &Simplex,
    partition: &OrderedPartition,
    blackbox: &BlackBox,
    round: u32,
) -> Result<Vec<Simplex>, ModelError> {
    let views = partition.view_assignment();
    match blackbox {
        BlackBox::None => Ok(vec![facet_from_views(sigma, &views, None)]),
        BlackBox::TestAndSet => {
            // Exactly one winner per execution, drawn from the first block.
            let mut facets = Vec::new();
            for winner in partition.first_block() {
                let outputs: BTreeMap<ProcessId, Bit> = views
                    .keys()
                    .map(|id| (*id, if id == winner { Bit::ONE } else { Bit::ZERO }))
                    .collect();
                facets.push(facet_from_views(sigma, &views, Some(&outputs)));
            }
            Ok(facets)
        }
        BlackBox::BinaryConsensus(inputs) => {
            let mut bits: Vec<Bit> = Vec::new();
            for id in partition.first_block() {
                let bit = inputs.input(*id, round)?;
                if !bits.contains(&bit) {
                    bits.push(bit);
                }
            }
            bits.sort();
            let mut facets = Vec::new();
            for decided in bits {
                let outputs: BTreeMap<ProcessId, Bit> =
                    views.keys().map(|id| (*id, decided)).collect();
                facets.push(facet_from_views(sigma, &views, Some(&outputs)));
            }
            Ok(facets)
        }
    }
}

fn facet_from_views(
    sigma: &Simplex,
    views: &BTreeMap<ProcessId, IdSet>,
    box_outputs: Option<&BTreeMap<ProcessId, Bit>>,
) -> Simplex {
    let vertices: Vec<Vertex> = views
        .iter()
        .map(|(id, seen_ids)| {
            let seen: BTreeMap<ProcessId, View> = seen_ids
                .iter()
                .map(|j| {
                    let value = sigma
                        .value_of(*j)
                        .expect("views only mention participants");
                    (*j, value.as_view())
                })
                .collect();
            let box_output = box_outputs.map(|outputs| outputs[id]);
            Vertex::new(*id, Value::Nested(View::round(box_output, seen)))
        })
        .collect();
    Simplex::new(vertices).expect("view assignments are chromatic")
}

/// The `t`-round protocol complex of an input complex: round `r` applies
/// `one_round` to every facet of the round `r-1` complex and unions the
/// results. `t = 0` returns the input unchanged.
pub fn iterate(
    input: &ChromaticComplex,
    model: &ModelSpec,
    t: u32,
) -> Result<ChromaticComplex, ModelError> {
    model.validate()?;
    let mut current = input.clone();
    for round in 1..=t {
        let mut facets = Vec::new();
        for facet in current.facets() {
            facets.extend(one_round(facet, model, round)?.facets().iter().cloned());
        }
        current = ChromaticComplex::new(facets)
            .expect("iterated complex is non-empty")
            .with_ambient(input.ambient());
    }
    Ok(current)
}

/// The carrier of an input simplex: the `t`-round protocol complex reachable
/// when exactly the processes of `sigma` participate.
pub fn carrier(
    sigma: &Simplex,
    model: &ModelSpec,
    t: u32,
) -> Result<ChromaticComplex, ModelError> {
    iterate(&ChromaticComplex::from_facet(sigma.clone()), model, t)
}

/// The canonical isomorphism between the one-round complexes of two simplices
/// on the same ids: replaces every collected input value of `from` by the
/// corresponding value of `to`, preserving the seen-set structure and box
/// outputs.
pub fn canonical_iso(from: &Simplex, to: &Simplex, v: &Vertex) -> Result<Vertex, ModelError> {
    if from.ids() != to.ids() {
        return Err(ModelError::IdMismatch);
    }
    let view = match &v.value {
        Value::Nested(view) => view,
        _ => return Err(ModelError::NotInComplex),
    };
    let (box_output, seen) = match (view.box_output(), view.seen()) {
        (b, Some(seen)) => (b, seen),
        _ => return Err(ModelError::NotInComplex),
    };
    if !seen.contains_key(&v.id) {
        return Err(ModelError::NotInComplex);
    }
    let mut new_seen = BTreeMap::new();
    for (j, child) in seen {
        let from_value = from.value_of(*j).ok_or(ModelError::NotInComplex)?;
        if *child != from_value.as_view() {
            return Err(ModelError::NotInComplex);
        }
        let to_value = to.value_of(*j).expect("same id sets");
        new_seen.insert(*j, to_value.as_view());
    }
    Ok(Vertex::new(v.id, Value::Nested(View::round(box_output, new_seen))))
}
