//! Shared test oracles: independent brute-force enumerators used to pin
//! derived expectations. These deliberately avoid the library's constructive
//! enumeration and search paths; they re-state the definitions literally and
//! pay the exponential price, which is fine at test scale.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use roundlab::complex::{ProcessId, Simplex, Value, Vertex};
use roundlab::executions::{ExecutionMatrix, IdSet};
use roundlab::model::ModelSpec;
use roundlab::protocol::carrier;
use roundlab::task::Task;

pub fn pid(id: u32) -> ProcessId {
    ProcessId::new(id).unwrap()
}

pub fn id_set(list: &[u32]) -> IdSet {
    list.iter().map(|&k| pid(k)).collect()
}

pub fn bit_simplex(bits: &[(u32, u8)]) -> Simplex {
    Simplex::new(
        bits.iter()
            .map(|&(k, b)| Vertex::new(pid(k), Value::bit(b).unwrap())),
    )
    .unwrap()
}

pub fn rat_simplex(m: u64, vals: &[(u32, u64)]) -> Simplex {
    Simplex::new(
        vals.iter()
            .map(|&(k, num)| Vertex::new(pid(k), Value::rational(num, m))),
    )
    .unwrap()
}

pub fn sym_simplex(ids: &[u32]) -> Simplex {
    Simplex::new(
        ids.iter()
            .map(|&k| Vertex::new(pid(k), Value::symbol(format!("x{k}")))),
    )
    .unwrap()
}

/// Number of ordered set partitions of an `n`-set, by the recurrence
/// `a(n) = sum_k C(n,k) a(n-k)`: choose the first block, order the rest.
pub fn ordered_partition_count(n: u64) -> u64 {
    fn binomial(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let mut result = 1u64;
        for j in 0..k {
            result = result * (n - j) / (j + 1);
        }
        result
    }
    let mut a = vec![1u64; (n + 1) as usize];
    for size in 1..=n {
        a[size as usize] = (1..=size)
            .map(|k| binomial(size, k) * a[(size - k) as usize])
            .sum();
    }
    a[n as usize]
}

/// Every way to fill a matrix with subsets of `ids`, tested literally against
/// the five collect conditions: row lengths agree and are at most `|ids|`,
/// every read set is a subset of the participants, the first read set is all
/// of them, the blocks partition the participants, and each read set covers
/// the blocks from its column onward.
pub fn brute_force_collect_matrices(ids: &IdSet) -> BTreeSet<ExecutionMatrix> {
    let elements: Vec<ProcessId> = ids.iter().copied().collect();
    let all_subsets: Vec<IdSet> = (0u32..(1u32 << elements.len()))
        .map(|mask| {
            elements
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, id)| *id)
                .collect()
        })
        .collect();

    let mut found = BTreeSet::new();
    for len in 1..=elements.len() {
        let mut rows: Vec<usize> = vec![0; 2 * len];
        'odometer: loop {
            let reads: Vec<IdSet> = rows[..len].iter().map(|&k| all_subsets[k].clone()).collect();
            let blocks: Vec<IdSet> =
                rows[len..].iter().map(|&k| all_subsets[k].clone()).collect();

            let p0_full = reads[0] == *ids;
            let partition = {
                let mut union = IdSet::new();
                let mut disjoint = true;
                for block in &blocks {
                    if block.is_empty() || !union.is_disjoint(block) {
                        disjoint = false;
                        break;
                    }
                    union.extend(block.iter().copied());
                }
                disjoint && union == *ids
            };
            let coverage = (0..len).all(|s| {
                let suffix: IdSet = blocks[s..]
                    .iter()
                    .flat_map(|b| b.iter().copied())
                    .collect();
                suffix.is_subset(&reads[s])
            });
            if p0_full && partition && coverage {
                found.insert(ExecutionMatrix { reads, blocks });
            }

            let mut k = 0;
            loop {
                if k == rows.len() {
                    break 'odometer;
                }
                rows[k] += 1;
                if rows[k] < all_subsets.len() {
                    break;
                }
                rows[k] = 0;
                k += 1;
            }
        }
    }
    found
}

/// Exhaustive solvability check: enumerates every chromatic assignment of
/// output vertices to protocol vertices and tests the specification facet by
/// facet. Returns the verdict and the number of assignments tried.
pub fn brute_force_solvable(task: &Task, model: &ModelSpec, t: u32) -> (bool, u64) {
    let mut vars: Vec<Vertex> = Vec::new();
    let mut constraints: Vec<(Vec<usize>, BTreeSet<Simplex>)> = Vec::new();
    let mut var_index: BTreeMap<Vertex, usize> = BTreeMap::new();
    for sigma in task.inputs().simplices() {
        let allowed: BTreeSet<Simplex> = task.delta(&sigma).unwrap().iter().cloned().collect();
        let complex = carrier(&sigma, model, t).unwrap();
        for v in complex.vertices() {
            var_index.entry(v.clone()).or_insert_with(|| {
                vars.push(v);
                vars.len() - 1
            });
        }
        for facet in complex.facets() {
            let scope: Vec<usize> = facet.vertices().iter().map(|v| var_index[v]).collect();
            constraints.push((scope, allowed.clone()));
        }
    }

    let by_id = task.outputs().vertices_by_id();
    let domains: Vec<Vec<Vertex>> = vars
        .iter()
        .map(|v| by_id.get(&v.id).cloned().unwrap_or_default())
        .collect();
    if domains.iter().any(|d| d.is_empty()) {
        return (false, 0);
    }

    let mut choice = vec![0usize; vars.len()];
    let mut tried = 0u64;
    'odometer: loop {
        tried += 1;
        let satisfied = constraints.iter().all(|(scope, allowed)| {
            let image = Simplex::new(
                scope
                    .iter()
                    .map(|&var| domains[var][choice[var]].clone()),
            )
            .expect("chromatic image");
            allowed.contains(&image)
        });
        if satisfied {
            return (true, tried);
        }
        let mut k = 0;
        loop {
            if k == vars.len() {
                break 'odometer;
            }
            choice[k] += 1;
            if choice[k] < domains[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
    (false, tried)
}

/// Total number of chromatic assignments for the instance; callers use it to
/// keep brute force within budget.
pub fn assignment_count(task: &Task, model: &ModelSpec, t: u32) -> u128 {
    let by_id = task.outputs().vertices_by_id();
    roundlab::solver::protocol_vertices(task, model, t)
        .unwrap()
        .iter()
        .map(|v| by_id.get(&v.id).map(|d| d.len() as u128).unwrap_or(0))
        .product()
}
