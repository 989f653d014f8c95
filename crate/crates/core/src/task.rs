//! Tasks as explicit finite objects: an input complex, an output complex, and
//! the specification map stored extensionally as a relation on simplices.
//!
//! The library builds binary consensus, its weak variant (agreement required
//! only when at least three processes participate), and approximate agreement
//! on a rational grid together with its liberal version (no closeness bound
//! when exactly two processes participate).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complex::{
    complexes_equal, ChromaticComplex, ComplexError, ProcessId, Simplex, Value, Vertex,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("grid parameters must be positive")]
    BadGrid,
    #[error("task needs at least {min} processes, got {n}")]
    TooFewProcesses { min: u32, n: u32 },
    #[error("the two tasks have different input complexes")]
    InputMismatch,
    #[error("delta does not cover input simplex {0}")]
    MissingDelta(String),
    #[error("delta key {0} is not a simplex of the input complex")]
    UnknownInput(String),
    #[error("delta image for {0} has mismatched ids")]
    ImageIdMismatch(String),
    #[error("delta image {image} for {input} is not in the output complex")]
    ImageOutsideOutputs { input: String, image: String },
    #[error("delta image set for {0} is empty")]
    EmptyDelta(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A task: input complex, output complex, and the specification relation,
/// total on the simplices of the input complex. For every input simplex the
/// legal outputs carry the same ids.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Task {
    inputs: ChromaticComplex,
    outputs: ChromaticComplex,
    delta: BTreeMap<Simplex, Vec<Simplex>>,
}

impl Task {
    pub fn new(
        inputs: ChromaticComplex,
        outputs: ChromaticComplex,
        delta: BTreeMap<Simplex, Vec<Simplex>>,
    ) -> Result<Task, TaskError> {
        let mut canonical: BTreeMap<Simplex, Vec<Simplex>> = BTreeMap::new();
        for (sigma, taus) in delta {
            if !inputs.contains(&sigma) {
                return Err(TaskError::UnknownInput(sigma.to_string()));
            }
            let mut taus = taus;
            taus.sort();
            taus.dedup();
            if taus.is_empty() {
                return Err(TaskError::EmptyDelta(sigma.to_string()));
            }
            for tau in &taus {
                if tau.ids() != sigma.ids() {
                    return Err(TaskError::ImageIdMismatch(sigma.to_string()));
                }
                if !outputs.contains(tau) {
                    return Err(TaskError::ImageOutsideOutputs {
                        input: sigma.to_string(),
                        image: tau.to_string(),
                    });
                }
            }
            canonical.insert(sigma, taus);
        }
        for sigma in inputs.simplices() {
            if !canonical.contains_key(&sigma) {
                return Err(TaskError::MissingDelta(sigma.to_string()));
            }
        }
        Ok(Task {
            inputs,
            outputs,
            delta: canonical,
        })
    }

    pub fn inputs(&self) -> &ChromaticComplex {
        &self.inputs
    }

    pub fn outputs(&self) -> &ChromaticComplex {
        &self.outputs
    }

    /// The legal outputs for an input simplex, in canonical order.
    pub fn delta(&self, sigma: &Simplex) -> Option<&[Simplex]> {
        self.delta.get(sigma).map(|taus| taus.as_slice())
    }

    pub fn delta_map(&self) -> &BTreeMap<Simplex, Vec<Simplex>> {
        &self.delta
    }

    /// The vertices occurring in the legal outputs for `sigma`.
    pub fn delta_vertices(&self, sigma: &Simplex) -> Vec<Vertex> {
        let mut vertices: Vec<Vertex> = self
            .delta(sigma)
            .into_iter()
            .flatten()
            .flat_map(|tau| tau.vertices().iter().cloned())
            .collect();
        vertices.sort();
        vertices.dedup();
        vertices
    }
}

/// True iff the two delta maps agree on every input simplex. Output
/// complexes are not compared; the relation is the content of a task.
pub fn tasks_equal(a: &Task, b: &Task) -> Result<bool, TaskError> {
    if !complexes_equal(&a.inputs, &b.inputs) {
        return Err(TaskError::InputMismatch);
    }
    Ok(a.delta == b.delta)
}

fn pid(id: u32) -> ProcessId {
    ProcessId::new(id).expect("ids start at 1")
}

/// The full input complex over a value alphabet: one facet per assignment of
/// a value to each of the `n` processes.
fn full_complex(n: u32, values: &[Value]) -> ChromaticComplex {
    let mut facets = Vec::new();
    let mut choice = vec![0usize; n as usize];
    loop {
        let facet = Simplex::new(
            (1..=n).map(|id| Vertex::new(pid(id), values[choice[(id - 1) as usize]].clone())),
        )
        .expect("distinct ids");
        facets.push(facet);
        // Odometer over the value alphabet.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return ChromaticComplex::new(facets).expect("non-empty").with_ambient(n);
            }
            choice[k] += 1;
            if choice[k] < values.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn bit_values() -> [Value; 2] {
    [
        Value::bit(0).expect("valid bit"),
        Value::bit(1).expect("valid bit"),
    ]
}

fn uniform_simplex(ids: &[ProcessId], value: &Value) -> Simplex {
    Simplex::new(ids.iter().map(|id| Vertex::new(*id, value.clone()))).expect("distinct ids")
}

fn is_unanimous(sigma: &Simplex) -> bool {
    sigma
        .vertices()
        .windows(2)
        .all(|w| w[0].value == w[1].value)
}

/// Binary consensus for `n >= 2` processes: on mixed inputs the participants
/// agree on one of the two unanimous outputs, otherwise validity pins the
/// input.
pub fn binary_consensus(n: u32) -> Result<Task, TaskError> {
    if n < 2 {
        return Err(TaskError::TooFewProcesses { min: 2, n });
    }
    let [zero, one] = bit_values();
    let inputs = full_complex(n, &[zero.clone(), one.clone()]);
    let all_ids: Vec<ProcessId> = (1..=n).map(pid).collect();
    let outputs = ChromaticComplex::new([
        uniform_simplex(&all_ids, &zero),
        uniform_simplex(&all_ids, &one),
    ])?
    .with_ambient(n);

    let mut delta = BTreeMap::new();
    for sigma in inputs.simplices() {
        let ids: Vec<ProcessId> = sigma.ids().into_iter().collect();
        let taus = if is_unanimous(&sigma) {
            vec![sigma.clone()]
        } else {
            vec![
                uniform_simplex(&ids, &zero),
                uniform_simplex(&ids, &one),
            ]
        };
        delta.insert(sigma, taus);
    }
    Task::new(inputs, outputs, delta)
}

/// The weakened consensus task for `n >= 3` processes: validity always holds
/// (outputs are input values), but agreement is required only when at least
/// three processes participate. Two mixed participants may output any
/// chromatic pair over their input values.
pub fn weak_consensus(n: u32) -> Result<Task, TaskError> {
    if n < 3 {
        return Err(TaskError::TooFewProcesses { min: 3, n });
    }
    let [zero, one] = bit_values();
    let inputs = full_complex(n, &[zero.clone(), one.clone()]);
    let all_ids: Vec<ProcessId> = (1..=n).map(pid).collect();

    let mut output_facets = vec![
        uniform_simplex(&all_ids, &zero),
        uniform_simplex(&all_ids, &one),
    ];
    // Mixed pairs are legal outputs when exactly two processes participate.
    for i in 0..all_ids.len() {
        for j in (i + 1)..all_ids.len() {
            for (a, b) in [(&zero, &one), (&one, &zero)] {
                output_facets.push(
                    Simplex::new([
                        Vertex::new(all_ids[i], a.clone()),
                        Vertex::new(all_ids[j], b.clone()),
                    ])
                    .expect("distinct ids"),
                );
            }
        }
    }
    let outputs = ChromaticComplex::new(output_facets)?.with_ambient(n);

    let mut delta = BTreeMap::new();
    for sigma in inputs.simplices() {
        let ids: Vec<ProcessId> = sigma.ids().into_iter().collect();
        let taus = if is_unanimous(&sigma) {
            vec![sigma.clone()]
        } else if ids.len() == 2 {
            // Both input values occur, so every chromatic pair over {0,1} is
            // valid.
            let mut taus = Vec::new();
            for a in [&zero, &one] {
                for b in [&zero, &one] {
                    taus.push(
                        Simplex::new([
                            Vertex::new(ids[0], a.clone()),
                            Vertex::new(ids[1], b.clone()),
                        ])
                        .expect("distinct ids"),
                    );
                }
            }
            taus
        } else {
            vec![
                uniform_simplex(&ids, &zero),
                uniform_simplex(&ids, &one),
            ]
        };
        delta.insert(sigma, taus);
    }
    Task::new(inputs, outputs, delta)
}

fn grid(m: u64) -> Vec<Value> {
    (0..=m).map(|k| Value::rational(k, m)).collect()
}

fn numerator(v: &Value) -> u64 {
    match v {
        Value::Rational { num, .. } => *num,
        _ => unreachable!("grid tasks use rational values"),
    }
}

/// Every chromatic assignment of grid values to `ids` whose numerators lie in
/// `lo..=hi` and, when `eps_bound` is set, are pairwise at most that far
/// apart.
fn grid_assignments(
    ids: &[ProcessId],
    m: u64,
    lo: u64,
    hi: u64,
    eps_bound: Option<u64>,
) -> Vec<Simplex> {
    let mut result = Vec::new();
    let mut choice = vec![lo; ids.len()];
    'outer: loop {
        let spread_ok = match eps_bound {
            Some(eps) => {
                let min = *choice.iter().min().expect("non-empty");
                let max = *choice.iter().max().expect("non-empty");
                max - min <= eps
            }
            None => true,
        };
        if spread_ok {
            result.push(
                Simplex::new(
                    ids.iter()
                        .zip(&choice)
                        .map(|(id, num)| Vertex::new(*id, Value::rational(*num, m))),
                )
                .expect("distinct ids"),
            );
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                break 'outer;
            }
            choice[k] += 1;
            if choice[k] <= hi {
                break;
            }
            choice[k] = lo;
            k += 1;
        }
    }
    result.sort();
    result
}

fn approx_task(n: u32, m: u64, eps_num: u64, liberal: bool) -> Result<Task, TaskError> {
    if m == 0 || eps_num == 0 {
        return Err(TaskError::BadGrid);
    }
    let min_procs = if liberal { 3 } else { 2 };
    if n < min_procs {
        return Err(TaskError::TooFewProcesses { min: min_procs, n });
    }
    let inputs = full_complex(n, &grid(m));
    let all_ids: Vec<ProcessId> = (1..=n).map(pid).collect();

    // Output facets: full-id assignments with spread at most eps. The liberal
    // version adds every chromatic pair, whatever its spread.
    let mut output_facets = grid_assignments(&all_ids, m, 0, m, Some(eps_num));
    if liberal {
        for i in 0..all_ids.len() {
            for j in (i + 1)..all_ids.len() {
                output_facets.extend(grid_assignments(
                    &[all_ids[i], all_ids[j]],
                    m,
                    0,
                    m,
                    None,
                ));
            }
        }
    }
    let outputs = ChromaticComplex::new(output_facets)?.with_ambient(n);

    let mut delta = BTreeMap::new();
    for sigma in inputs.simplices() {
        let ids: Vec<ProcessId> = sigma.ids().into_iter().collect();
        let nums: Vec<u64> = sigma.vertices().iter().map(|v| numerator(&v.value)).collect();
        let lo = *nums.iter().min().expect("non-empty");
        let hi = *nums.iter().max().expect("non-empty");
        let eps_bound = if liberal && ids.len() == 2 {
            None
        } else {
            Some(eps_num)
        };
        let taus = grid_assignments(&ids, m, lo, hi, eps_bound);
        delta.insert(sigma, taus);
    }
    Task::new(inputs, outputs, delta)
}

/// Approximate agreement on the grid `{0, 1/m, ..., 1}`: outputs lie within
/// the input range and pairwise at most `eps_num/m` apart. When
/// `eps_num >= m` the pairwise constraint is vacuous.
pub fn approx_agreement(n: u32, m: u64, eps_num: u64) -> Result<Task, TaskError> {
    approx_task(n, m, eps_num, false)
}

/// The liberal version: identical, except that every chromatic pair of grid
/// values is also a legal output configuration, so two participants only
/// need to stay within the input range.
pub fn liberal_approx_agreement(n: u32, m: u64, eps_num: u64) -> Result<Task, TaskError> {
    approx_task(n, m, eps_num, true)
}
