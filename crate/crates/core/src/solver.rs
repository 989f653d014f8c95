//! Decides `t`-round solvability of a task in a model by exhaustive search
//! for a color-preserving simplicial decision map from the protocol complex
//! to the output complex that agrees with the specification relation.
//!
//! The search is a constraint problem: variables are protocol vertices (views
//! are shared across carriers, so a vertex appearing in several carriers gets
//! a single assignment), domains are the same-id output vertices, and every
//! facet of every carrier contributes a table constraint listing the legal
//! output simplices for its input simplex. Propagation keeps the domains
//! arc-consistent with the tables; branching follows the canonical vertex
//! and value orders, so verdicts and witnesses are reproducible.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::complex::{ProcessId, Simplex, Vertex};
use crate::model::{ModelError, ModelSpec};
use crate::protocol::carrier;
use crate::task::Task;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("search budget exhausted after {explored} nodes")]
    ResourceLimit { explored: u64 },
    #[error("map does not assign protocol vertex {0}")]
    PartialMap(String),
    #[error("no delta entry for input simplex {0}")]
    MissingDelta(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A color-preserving vertex map, the witness format for solvability.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SimplicialMap {
    assignment: BTreeMap<Vertex, Vertex>,
}

impl SimplicialMap {
    pub fn new(assignment: BTreeMap<Vertex, Vertex>) -> SimplicialMap {
        SimplicialMap { assignment }
    }

    pub fn get(&self, v: &Vertex) -> Option<&Vertex> {
        self.assignment.get(v)
    }

    pub fn assignment(&self) -> &BTreeMap<Vertex, Vertex> {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// The image of a simplex under the map.
    pub fn apply(&self, s: &Simplex) -> Result<Simplex, SolveError> {
        let vertices: Result<Vec<Vertex>, SolveError> = s
            .vertices()
            .iter()
            .map(|v| {
                self.assignment
                    .get(v)
                    .cloned()
                    .ok_or_else(|| SolveError::PartialMap(v.to_string()))
            })
            .collect();
        Ok(Simplex::new(vertices?).expect("chromatic image"))
    }
}

/// The outcome of a complete search.
#[derive(Clone, Debug)]
pub enum SolveVerdict {
    Solvable(SimplicialMap),
    Unsolvable { explored: u64 },
}

impl SolveVerdict {
    pub fn is_solvable(&self) -> bool {
        matches!(self, SolveVerdict::Solvable(_))
    }

    pub fn witness(&self) -> Option<&SimplicialMap> {
        match self {
            SolveVerdict::Solvable(map) => Some(map),
            SolveVerdict::Unsolvable { .. } => None,
        }
    }
}

impl fmt::Display for SolveVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveVerdict::Solvable(_) => write!(f, "solvable"),
            SolveVerdict::Unsolvable { explored } => {
                write!(f, "unsolvable (explored {explored} nodes)")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Upper bound on branch nodes; exceeding it aborts with `ResourceLimit`
    /// rather than returning a verdict.
    pub node_budget: Option<u64>,
}

/// All vertices of the `t`-round protocol complex over the task's input
/// complex, i.e. the union of the per-input-simplex carriers.
pub fn protocol_vertices(
    task: &Task,
    model: &ModelSpec,
    t: u32,
) -> Result<Vec<Vertex>, SolveError> {
    let mut vertices: Vec<Vertex> = Vec::new();
    for sigma in task.inputs().simplices() {
        vertices.extend(carrier(&sigma, model, t)?.vertices());
    }
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}

/// Decides whether the task is solvable in exactly `t` rounds of the model.
/// `Unsolvable` is returned only after the search space is exhausted.
pub fn solve(
    task: &Task,
    model: &ModelSpec,
    t: u32,
    options: SolveOptions,
) -> Result<SolveVerdict, SolveError> {
    model.validate().map_err(SolveError::Model)?;
    let csp = Csp::build(task, model, t)?;
    let mut explored = 0u64;
    let mut domains: Vec<BitSet> = csp
        .vars
        .iter()
        .map(|var| BitSet::full(csp.domain(var.id_slot).len()))
        .collect();
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(SolveVerdict::Unsolvable { explored });
    }
    let all: Vec<usize> = (0..csp.constraints.len()).collect();
    if !csp.propagate(&mut domains, &all) {
        return Ok(SolveVerdict::Unsolvable { explored });
    }
    match csp.dfs(&mut domains, &mut explored, options.node_budget)? {
        Some(solution) => {
            let assignment: BTreeMap<Vertex, Vertex> = csp
                .vars
                .iter()
                .zip(&solution)
                .map(|(var, &value)| {
                    (
                        var.vertex.clone(),
                        csp.domain(var.id_slot)[value as usize].clone(),
                    )
                })
                .collect();
            Ok(SolveVerdict::Solvable(SimplicialMap::new(assignment)))
        }
        None => Ok(SolveVerdict::Unsolvable { explored }),
    }
}

/// Checks a map against the task with a traversal independent of the
/// solver: totality on protocol vertices, color preservation, and agreement
/// with the specification on every carrier facet.
pub fn verify_map(
    task: &Task,
    model: &ModelSpec,
    t: u32,
    map: &SimplicialMap,
) -> Result<bool, SolveError> {
    model.validate().map_err(SolveError::Model)?;
    for sigma in task.inputs().simplices() {
        let legal = task
            .delta(&sigma)
            .ok_or_else(|| SolveError::MissingDelta(sigma.to_string()))?;
        let complex = carrier(&sigma, model, t)?;
        for v in complex.vertices() {
            match map.get(&v) {
                None => return Err(SolveError::PartialMap(v.to_string())),
                Some(image) => {
                    if image.id != v.id {
                        return Ok(false);
                    }
                }
            }
        }
        for facet in complex.facets() {
            let image = map.apply(facet)?;
            if legal.binary_search(&image).is_err() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct CspVar {
    vertex: Vertex,
    id_slot: usize,
}

struct Constraint {
    scope: Vec<usize>,
    tuples: Vec<Vec<u16>>,
}

struct Csp {
    vars: Vec<CspVar>,
    /// Output vertices per id slot, shared by all same-id variables.
    domain_values: Vec<Vec<Vertex>>,
    constraints: Vec<Constraint>,
    /// Constraint indices touching each variable.
    watchers: Vec<Vec<usize>>,
}

impl Csp {
    fn domain(&self, id_slot: usize) -> &[Vertex] {
        &self.domain_values[id_slot]
    }

    fn build(task: &Task, model: &ModelSpec, t: u32) -> Result<Csp, SolveError> {
        let by_id = task.outputs().vertices_by_id();
        let mut id_slots: BTreeMap<ProcessId, usize> = BTreeMap::new();
        let mut domain_values: Vec<Vec<Vertex>> = Vec::new();
        let mut value_index: Vec<BTreeMap<Vertex, u16>> = Vec::new();
        for (id, values) in by_id {
            id_slots.insert(id, domain_values.len());
            value_index.push(
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (v.clone(), k as u16))
                    .collect(),
            );
            domain_values.push(values);
        }

        let mut vars: Vec<CspVar> = Vec::new();
        let mut var_index: BTreeMap<Vertex, usize> = BTreeMap::new();
        let mut constraints: Vec<Constraint> = Vec::new();

        for sigma in task.inputs().simplices() {
            let legal = task
                .delta(&sigma)
                .ok_or_else(|| SolveError::MissingDelta(sigma.to_string()))?;
            let complex = carrier(&sigma, model, t)?;
            for v in complex.vertices() {
                if var_index.contains_key(&v) {
                    continue;
                }
                // A protocol vertex whose id has no output vertex leaves an
                // empty domain; solve() reports Unsolvable in that case.
                let id_slot = match id_slots.get(&v.id) {
                    Some(slot) => *slot,
                    None => {
                        id_slots.insert(v.id, domain_values.len());
                        value_index.push(BTreeMap::new());
                        domain_values.push(Vec::new());
                        domain_values.len() - 1
                    }
                };
                var_index.insert(v.clone(), vars.len());
                vars.push(CspVar { vertex: v, id_slot });
            }
            for facet in complex.facets() {
                let scope: Vec<usize> = facet
                    .vertices()
                    .iter()
                    .map(|v| var_index[v])
                    .collect();
                let tuples: Vec<Vec<u16>> = legal
                    .iter()
                    .map(|tau| {
                        tau.vertices()
                            .iter()
                            .map(|out| {
                                let slot = id_slots[&out.id];
                                value_index[slot][out]
                            })
                            .collect()
                    })
                    .collect();
                constraints.push(Constraint { scope, tuples });
            }
        }

        let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
        for (c, constraint) in constraints.iter().enumerate() {
            for &var in &constraint.scope {
                watchers[var].push(c);
            }
        }

        Ok(Csp {
            vars,
            domain_values,
            constraints,
            watchers,
        })
    }

    /// Arc consistency over the table constraints in `queue`, pruning values
    /// without a supporting tuple. Returns false on a domain wipe-out.
    fn propagate(&self, domains: &mut [BitSet], queue: &[usize]) -> bool {
        let mut pending: Vec<usize> = queue.to_vec();
        let mut queued: Vec<bool> = vec![false; self.constraints.len()];
        for &c in &pending {
            queued[c] = true;
        }
        while let Some(c) = pending.pop() {
            queued[c] = false;
            let constraint = &self.constraints[c];
            let arity = constraint.scope.len();
            let mut support: Vec<BitSet> = constraint
                .scope
                .iter()
                .map(|&var| BitSet::empty(domains[var].capacity()))
                .collect();
            for tuple in &constraint.tuples {
                let live = (0..arity)
                    .all(|pos| domains[constraint.scope[pos]].contains(tuple[pos] as usize));
                if live {
                    for pos in 0..arity {
                        support[pos].insert(tuple[pos] as usize);
                    }
                }
            }
            for pos in 0..arity {
                let var = constraint.scope[pos];
                if domains[var].intersect_with(&support[pos]) {
                    if domains[var].is_empty() {
                        return false;
                    }
                    for &watcher in &self.watchers[var] {
                        if !queued[watcher] {
                            queued[watcher] = true;
                            pending.push(watcher);
                        }
                    }
                }
            }
        }
        true
    }

    fn dfs(
        &self,
        domains: &mut Vec<BitSet>,
        explored: &mut u64,
        budget: Option<u64>,
    ) -> Result<Option<Vec<u16>>, SolveError> {
        let unfixed = (0..self.vars.len()).find(|&v| domains[v].len() > 1);
        let var = match unfixed {
            None => {
                let solution: Vec<u16> = domains
                    .iter()
                    .map(|d| d.first().expect("consistent domains are non-empty") as u16)
                    .collect();
                return Ok(Some(solution));
            }
            Some(var) => var,
        };
        for value in domains[var].iter() {
            *explored += 1;
            if let Some(limit) = budget {
                if *explored > limit {
                    return Err(SolveError::ResourceLimit { explored: *explored });
                }
            }
            let mut next: Vec<BitSet> = domains.clone();
            next[var] = BitSet::singleton(domains[var].capacity(), value);
            if self.propagate(&mut next, &self.watchers[var]) {
                if let Some(solution) = self.dfs(&mut next, explored, budget)? {
                    return Ok(Some(solution));
                }
            }
        }
        Ok(None)
    }
}

/// A fixed-capacity bit set over domain indices.
#[derive(Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
    capacity: usize,
}

impl BitSet {
    fn empty(capacity: usize) -> BitSet {
        BitSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    fn full(capacity: usize) -> BitSet {
        let mut set = BitSet::empty(capacity);
        for k in 0..capacity {
            set.insert(k);
        }
        set
    }

    fn singleton(capacity: usize, value: usize) -> BitSet {
        let mut set = BitSet::empty(capacity);
        set.insert(value);
        set
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn insert(&mut self, k: usize) {
        self.words[k / 64] |= 1u64 << (k % 64);
    }

    fn contains(&self, k: usize) -> bool {
        self.words[k / 64] & (1u64 << (k % 64)) != 0
    }

    /// Intersects in place; true iff anything was removed.
    fn intersect_with(&mut self, other: &BitSet) -> bool {
        let mut changed = false;
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            let new = *w & o;
            if new != *w {
                changed = true;
                *w = new;
            }
        }
        changed
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.capacity).filter(|&k| self.contains(k))
    }
}
