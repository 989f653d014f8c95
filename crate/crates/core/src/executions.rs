//! One-round interleavings: execution matrices for the collect and snapshot
//! models, and ordered partitions for immediate snapshot.
//!
//! A matrix pairs read sets `P_0..P_r` with blocks `I_0..I_r` partitioning
//! the participants: every process in `I_s` reads exactly the writes of
//! `P_s`. The matrix conditions are: `0 <= r <= |I|-1`, every `P_s` is a
//! subset of `I`, `P_0 = I`, the blocks partition `I`, and the union of
//! `I_s..I_r` is contained in `P_s` for every `s`. Snapshot keeps the
//! matrices whose read sets form a chain; immediate snapshot additionally
//! requires that whoever you read has a read set contained in yours, which
//! makes the surviving view assignments exactly the ordered partitions of
//! the participants (blocks in schedule order, a process seeing the union
//! of its own block and all earlier ones).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::complex::ProcessId;

pub type IdSet = BTreeSet<ProcessId>;

/// One round of collect-style communication in matrix form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ExecutionMatrix {
    /// Read sets `P_0..P_r`.
    pub reads: Vec<IdSet>,
    /// Blocks `I_0..I_r`, a partition of the participants.
    pub blocks: Vec<IdSet>,
}

impl ExecutionMatrix {
    /// The read set of the block containing `id`.
    pub fn view_of(&self, id: ProcessId) -> Option<&IdSet> {
        self.blocks
            .iter()
            .position(|block| block.contains(&id))
            .map(|s| &self.reads[s])
    }

    /// The view assignment induced by the matrix: each participant mapped to
    /// the set of processes it reads.
    pub fn view_assignment(&self) -> BTreeMap<ProcessId, IdSet> {
        let mut views = BTreeMap::new();
        for (block, read) in self.blocks.iter().zip(&self.reads) {
            for id in block {
                views.insert(*id, read.clone());
            }
        }
        views
    }

    /// Snapshot condition: the read sets form a chain under inclusion.
    pub fn satisfies_snapshot(&self) -> bool {
        for i in 0..self.reads.len() {
            for j in (i + 1)..self.reads.len() {
                let a = &self.reads[i];
                let b = &self.reads[j];
                if !a.is_subset(b) && !b.is_subset(a) {
                    return false;
                }
            }
        }
        true
    }

    /// Immediate-snapshot condition: whoever appears in your read set has a
    /// read set contained in yours.
    pub fn satisfies_immediate(&self) -> bool {
        for read in &self.reads {
            for q in read {
                let q_read = self
                    .view_of(*q)
                    .expect("blocks partition the participants");
                if !q_read.is_subset(read) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for ExecutionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |sets: &[IdSet]| {
            sets.iter()
                .map(|s| {
                    let ids: Vec<String> = s.iter().map(|id| id.to_string()).collect();
                    format!("{{{}}}", ids.join(""))
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "[P: {} | I: {}]", row(&self.reads), row(&self.blocks))
    }
}

/// An immediate-snapshot execution: disjoint non-empty blocks covering the
/// participants, listed in schedule order. A process in block `j` sees the
/// union of blocks `1..=j`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct OrderedPartition {
    blocks: Vec<IdSet>,
}

impl OrderedPartition {
    pub fn new(blocks: Vec<IdSet>) -> OrderedPartition {
        debug_assert!(blocks.iter().all(|b| !b.is_empty()));
        OrderedPartition { blocks }
    }

    pub fn blocks(&self) -> &[IdSet] {
        &self.blocks
    }

    /// The block scheduled first.
    pub fn first_block(&self) -> &IdSet {
        &self.blocks[0]
    }

    /// The snapshot view of `id`: its block plus all earlier blocks.
    pub fn view_of(&self, id: ProcessId) -> Option<IdSet> {
        let mut seen = IdSet::new();
        for block in &self.blocks {
            seen.extend(block.iter().copied());
            if block.contains(&id) {
                return Some(seen);
            }
        }
        None
    }

    pub fn view_assignment(&self) -> BTreeMap<ProcessId, IdSet> {
        let mut views = BTreeMap::new();
        let mut seen = IdSet::new();
        for block in &self.blocks {
            seen.extend(block.iter().copied());
            for id in block {
                views.insert(*id, seen.clone());
            }
        }
        views
    }

    /// The matrix form: schedule-first blocks sit at the highest column
    /// index (they have the smallest read sets).
    pub fn to_matrix(&self) -> ExecutionMatrix {
        let mut reads = Vec::with_capacity(self.blocks.len());
        let mut prefix = IdSet::new();
        for block in &self.blocks {
            prefix.extend(block.iter().copied());
            reads.push(prefix.clone());
        }
        reads.reverse();
        let blocks: Vec<IdSet> = self.blocks.iter().rev().cloned().collect();
        ExecutionMatrix { reads, blocks }
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let ids: Vec<String> = b.iter().map(|id| id.to_string()).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        write!(f, "({})", blocks.join(","))
    }
}

/// All non-empty subsets of `ids`, in a deterministic order.
pub fn nonempty_subsets(ids: &IdSet) -> Vec<IdSet> {
    let elements: Vec<ProcessId> = ids.iter().copied().collect();
    let mut subsets = Vec::with_capacity((1usize << elements.len()) - 1);
    for mask in 1u32..(1u32 << elements.len()) {
        let subset: IdSet = elements
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, id)| *id)
            .collect();
        subsets.push(subset);
    }
    subsets.sort();
    subsets
}

/// All ordered partitions of `ids` into non-empty blocks, in schedule order.
pub fn enumerate_ordered_partitions(ids: &IdSet) -> Vec<OrderedPartition> {
    let mut result = Vec::new();
    let mut prefix: Vec<IdSet> = Vec::new();
    fn go(remaining: &IdSet, prefix: &mut Vec<IdSet>, result: &mut Vec<OrderedPartition>) {
        if remaining.is_empty() {
            result.push(OrderedPartition::new(prefix.clone()));
            return;
        }
        for block in nonempty_subsets(remaining) {
            let rest: IdSet = remaining.difference(&block).copied().collect();
            prefix.push(block);
            go(&rest, prefix, result);
            prefix.pop();
        }
    }
    go(ids, &mut prefix, &mut result);
    result.sort();
    result
}

/// Every matrix satisfying the five collect conditions, in a deterministic
/// order.
pub fn enumerate_collect_matrices(ids: &IdSet) -> Vec<ExecutionMatrix> {
    assert!(!ids.is_empty(), "participant set must be non-empty");
    let mut result = Vec::new();
    for partition in enumerate_block_sequences(ids) {
        // Column s must read at least the blocks from s onward.
        let r = partition.len() - 1;
        let mut suffix_unions: Vec<IdSet> = vec![IdSet::new(); r + 1];
        let mut acc = IdSet::new();
        for s in (0..=r).rev() {
            acc.extend(partition[s].iter().copied());
            suffix_unions[s] = acc.clone();
        }
        let mut reads: Vec<IdSet> = vec![ids.clone()];
        fill_reads(ids, &partition, &suffix_unions, 1, &mut reads, &mut result);
    }
    result.sort();
    result
}

fn fill_reads(
    ids: &IdSet,
    partition: &[IdSet],
    suffix_unions: &[IdSet],
    s: usize,
    reads: &mut Vec<IdSet>,
    result: &mut Vec<ExecutionMatrix>,
) {
    if s == partition.len() {
        result.push(ExecutionMatrix {
            reads: reads.clone(),
            blocks: partition.to_vec(),
        });
        return;
    }
    let required = &suffix_unions[s];
    let free: IdSet = ids.difference(required).copied().collect();
    let mut extras: Vec<IdSet> = vec![IdSet::new()];
    extras.extend(nonempty_subsets(&free));
    for extra in extras {
        let read: IdSet = required.union(&extra).copied().collect();
        reads.push(read);
        fill_reads(ids, partition, suffix_unions, s + 1, reads, result);
        reads.pop();
    }
}

/// All sequences of disjoint non-empty blocks covering `ids`, i.e. ordered
/// partitions in matrix column order `I_0..I_r`.
fn enumerate_block_sequences(ids: &IdSet) -> Vec<Vec<IdSet>> {
    enumerate_ordered_partitions(ids)
        .into_iter()
        .map(|p| p.blocks().to_vec())
        .collect()
}

/// Keeps exactly the matrices whose read sets form a chain.
pub fn filter_snapshot(matrices: &[ExecutionMatrix]) -> Vec<ExecutionMatrix> {
    matrices
        .iter()
        .filter(|m| m.satisfies_snapshot())
        .cloned()
        .collect()
}

/// Keeps the matrices satisfying the immediate-snapshot condition and
/// re-expresses them as ordered partitions in schedule order, deduplicated.
pub fn filter_immediate(matrices: &[ExecutionMatrix]) -> Vec<OrderedPartition> {
    let mut partitions: BTreeSet<OrderedPartition> = BTreeSet::new();
    for m in matrices {
        if !m.satisfies_immediate() {
            continue;
        }
        partitions.insert(partition_from_views(&m.view_assignment()));
    }
    partitions.into_iter().collect()
}

/// Reconstructs the schedule-ordered blocks from an immediate-snapshot view
/// assignment: group by view, order groups by view inclusion.
fn partition_from_views(views: &BTreeMap<ProcessId, IdSet>) -> OrderedPartition {
    let mut groups: BTreeMap<IdSet, IdSet> = BTreeMap::new();
    for (id, view) in views {
        groups.entry(view.clone()).or_default().insert(*id);
    }
    let mut ordered: Vec<(IdSet, IdSet)> = groups.into_iter().collect();
    ordered.sort_by_key(|(view, _)| view.len());
    let mut prefix = IdSet::new();
    let mut blocks = Vec::with_capacity(ordered.len());
    for (view, block) in ordered {
        prefix.extend(block.iter().copied());
        debug_assert_eq!(prefix, view, "immediate-snapshot views must be prefix unions");
        blocks.push(block);
    }
    OrderedPartition::new(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[u32]) -> IdSet {
        list.iter()
            .map(|&k| ProcessId::new(k).unwrap())
            .collect()
    }

    #[test]
    fn solo_participant_has_one_matrix() {
        let matrices = enumerate_collect_matrices(&ids(&[1]));
        assert_eq!(matrices.len(), 1);
        let m = &matrices[0];
        assert_eq!(m.reads, vec![ids(&[1])]);
        assert_eq!(m.blocks, vec![ids(&[1])]);
    }

    #[test]
    fn two_participant_collect_views() {
        let matrices = enumerate_collect_matrices(&ids(&[1, 2]));
        let assignments: BTreeSet<_> = matrices.iter().map(|m| m.view_assignment()).collect();
        let p1 = ProcessId::new(1).unwrap();
        let p2 = ProcessId::new(2).unwrap();
        let both_both: BTreeMap<_, _> =
            [(p1, ids(&[1, 2])), (p2, ids(&[1, 2]))].into_iter().collect();
        let one_solo: BTreeMap<_, _> = [(p1, ids(&[1])), (p2, ids(&[1, 2]))].into_iter().collect();
        let two_solo: BTreeMap<_, _> = [(p1, ids(&[1, 2])), (p2, ids(&[2]))].into_iter().collect();
        let expected: BTreeSet<_> = [both_both, one_solo, two_solo].into_iter().collect();
        assert_eq!(assignments, expected);
    }

    #[test]
    fn snapshot_filter_drops_incomparable_reads() {
        let m = ExecutionMatrix {
            reads: vec![ids(&[1, 2, 3]), ids(&[1, 2]), ids(&[2, 3])],
            blocks: vec![ids(&[1]), ids(&[2]), ids(&[3])],
        };
        assert!(!m.satisfies_snapshot());
        assert!(filter_snapshot(&[m]).is_empty());

        let solo = enumerate_collect_matrices(&ids(&[1]));
        assert_eq!(filter_snapshot(&solo), solo);
    }

    #[test]
    fn immediate_partitions_for_two() {
        let matrices = enumerate_collect_matrices(&ids(&[1, 2]));
        let partitions = filter_immediate(&matrices);
        assert_eq!(partitions.len(), 3);
        let blocks: BTreeSet<Vec<IdSet>> = partitions
            .iter()
            .map(|p| p.blocks().to_vec())
            .collect();
        let expected: BTreeSet<Vec<IdSet>> = [
            vec![ids(&[1]), ids(&[2])],
            vec![ids(&[2]), ids(&[1])],
            vec![ids(&[1, 2])],
        ]
        .into_iter()
        .collect();
        assert_eq!(blocks, expected);
    }

    #[test]
    fn immediate_partitions_for_three() {
        let matrices = enumerate_collect_matrices(&ids(&[1, 2, 3]));
        assert_eq!(filter_immediate(&matrices).len(), 13);
        assert_eq!(enumerate_ordered_partitions(&ids(&[1, 2, 3])).len(), 13);
    }

    #[test]
    fn immediate_agrees_with_direct_enumeration() {
        for participants in [ids(&[1]), ids(&[1, 2]), ids(&[1, 2, 3])] {
            let filtered: BTreeSet<OrderedPartition> =
                filter_immediate(&enumerate_collect_matrices(&participants))
                    .into_iter()
                    .collect();
            let direct: BTreeSet<OrderedPartition> =
                enumerate_ordered_partitions(&participants).into_iter().collect();
            assert_eq!(filtered, direct);
        }
    }

    #[test]
    fn three_participant_containment_is_strict() {
        let participants = ids(&[1, 2, 3]);
        let collect = enumerate_collect_matrices(&participants);
        let snapshot = filter_snapshot(&collect);
        let collect_views: BTreeSet<_> = collect.iter().map(|m| m.view_assignment()).collect();
        let snapshot_views: BTreeSet<_> = snapshot.iter().map(|m| m.view_assignment()).collect();
        let immediate_views: BTreeSet<_> = filter_immediate(&collect)
            .iter()
            .map(|p| p.view_assignment())
            .collect();
        assert!(immediate_views.is_subset(&snapshot_views));
        assert!(snapshot_views.is_subset(&collect_views));
        assert!(immediate_views.len() < snapshot_views.len());
        assert!(snapshot_views.len() < collect_views.len());
    }

    #[test]
    fn matrix_round_trip_through_partition() {
        for p in enumerate_ordered_partitions(&ids(&[1, 2, 3])) {
            let m = p.to_matrix();
            assert!(m.satisfies_immediate());
            assert_eq!(m.view_assignment(), p.view_assignment());
        }
    }
}
