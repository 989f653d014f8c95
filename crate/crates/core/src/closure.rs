//! The task-closure operator and the constructive round-reduction transform.
//!
//! The closure of a task with respect to a model keeps the input complex and
//! admits, for an input simplex, every chromatic output vertex set whose
//! local task is solvable in at most one round of the model. The local task
//! for an input simplex and such a vertex set pins solo participants to their
//! own vertex and frees larger participation sets to any legal output with
//! the right ids. A task equal to its own closure is a fixed point: it is
//! zero-round solvable or not solvable at all, which is what the lower-bound
//! chain exploits.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{
    Bit, ChromaticComplex, ComplexError, ProcessId, Simplex, Value, Vertex,
};
use crate::model::{BcInputs, BlackBox, ModelError, ModelSpec};
use crate::protocol::carrier;
use crate::solver::{solve, verify_map, SimplicialMap, SolveError, SolveOptions};
use crate::task::{tasks_equal, Task, TaskError};
use crate::view::View;

#[derive(Debug, Error)]
pub enum ClosureError {
    #[error("ids of the vertex set differ from the input simplex")]
    IdMismatch,
    #[error("vertex {0} does not occur in the legal outputs of the input simplex")]
    NotInTarget(String),
    #[error("simplex {0} is not in the input complex")]
    NotAnInput(String),
    #[error("the supplied map does not solve the task")]
    NotASolution,
    #[error("round-reduction needs at least one round")]
    ZeroRounds,
    #[error("beta must assign a bit to process {0}")]
    IncompleteBeta(ProcessId),
    #[error("chain did not stabilize within {0} steps")]
    StepBudgetExceeded(u32),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// The local task for an input simplex and a chromatic set of output
/// vertices: solo participants must output their own vertex, larger subsets
/// may output any legal output simplex on their ids.
#[derive(Clone, Debug)]
pub struct LocalTask {
    /// The chromatic vertex set, treated as a full input simplex even when it
    /// is not a simplex of the target.
    pub tau: Simplex,
    /// The materialized task: inputs are the faces of `tau`, outputs the
    /// complex induced by the legal outputs of the original input simplex.
    pub task: Task,
}

/// Builds the local task for `sigma` and `tau`.
pub fn local_task(task: &Task, sigma: &Simplex, tau: &Simplex) -> Result<LocalTask, ClosureError> {
    let listed = task
        .delta(sigma)
        .ok_or_else(|| ClosureError::NotAnInput(sigma.to_string()))?;
    if tau.ids() != sigma.ids() {
        return Err(ClosureError::IdMismatch);
    }
    let target_vertices = task.delta_vertices(sigma);
    for v in tau.vertices() {
        if target_vertices.binary_search(v).is_err() {
            return Err(ClosureError::NotInTarget(v.to_string()));
        }
    }

    let inputs = ChromaticComplex::from_facet(tau.clone());
    let outputs = ChromaticComplex::new(listed.iter().cloned())?;
    let mut delta: BTreeMap<Simplex, Vec<Simplex>> = BTreeMap::new();
    for face in tau.faces() {
        let images = if face.len() == 1 {
            vec![face.clone()]
        } else {
            let ids = face.ids();
            let mut images: Vec<Simplex> = listed
                .iter()
                .map(|w| w.project(&ids).expect("listed outputs carry all ids"))
                .collect();
            images.sort();
            images.dedup();
            images
        };
        delta.insert(face, images);
    }
    let task = Task::new(inputs, outputs, delta)?;
    Ok(LocalTask {
        tau: tau.clone(),
        task,
    })
}

/// How the one-round solvability check treats black-box inputs.
enum BoxMode<'a> {
    /// Use the model as given (no box, or test&set which takes no inputs).
    Plain(&'a ModelSpec),
    /// Binary consensus with the input bits existentially quantified over
    /// constant-per-process assignments.
    BcExistential,
    /// Binary consensus with the input bit of every process pinned.
    BcPinned(&'a BTreeMap<ProcessId, Bit>),
}

fn one_round_solvable(
    local: &LocalTask,
    mode: &BoxMode<'_>,
    solver: SolveOptions,
) -> Result<bool, ClosureError> {
    match mode {
        BoxMode::Plain(model) => Ok(solve(&local.task, model, 1, solver)?.is_solvable()),
        BoxMode::BcExistential => {
            let ids: Vec<ProcessId> = local.tau.ids().into_iter().collect();
            for mask in 0u32..(1u32 << ids.len()) {
                let beta = ids.iter().enumerate().map(|(k, id)| {
                    let bit = if mask & (1 << k) != 0 { Bit::ONE } else { Bit::ZERO };
                    (*id, bit)
                });
                let model = ModelSpec::iis_binary_consensus(BcInputs::per_process(beta));
                if solve(&local.task, &model, 1, solver)?.is_solvable() {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        BoxMode::BcPinned(beta) => {
            let bits: Result<Vec<(ProcessId, Bit)>, ClosureError> = local
                .tau
                .ids()
                .into_iter()
                .map(|id| {
                    beta.get(&id)
                        .map(|bit| (id, *bit))
                        .ok_or(ClosureError::IncompleteBeta(id))
                })
                .collect();
            let model = ModelSpec::iis_binary_consensus(BcInputs::per_process(bits?));
            Ok(solve(&local.task, &model, 1, solver)?.is_solvable())
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClosureOptions {
    pub solver: SolveOptions,
    /// Solve the independent per-simplex subproblems on the rayon pool.
    pub parallel: bool,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            solver: SolveOptions::default(),
            parallel: true,
        }
    }
}

/// The closure of a task with respect to a model. For a model with a
/// binary-consensus box the one-round check may pick any constant-per-process
/// input assignment; use [`closure_beta`] to pin one.
pub fn closure(task: &Task, model: &ModelSpec, options: ClosureOptions) -> Result<Task, ClosureError> {
    model.validate()?;
    let mode = match &model.blackbox {
        BlackBox::None | BlackBox::TestAndSet => BoxMode::Plain(model),
        BlackBox::BinaryConsensus(_) => BoxMode::BcExistential,
    };
    closure_with_mode(task, &mode, options)
}

/// The closure restricted to a fixed box-input function: every process calls
/// the binary-consensus box with its bit under `beta`. `beta` must cover all
/// processes of the input complex.
pub fn closure_beta(
    task: &Task,
    beta: &BTreeMap<ProcessId, Bit>,
    options: ClosureOptions,
) -> Result<Task, ClosureError> {
    for id in task.inputs().ids() {
        if !beta.contains_key(&id) {
            return Err(ClosureError::IncompleteBeta(id));
        }
    }
    closure_with_mode(task, &BoxMode::BcPinned(beta), options)
}

fn closure_with_mode(
    task: &Task,
    mode: &BoxMode<'_>,
    options: ClosureOptions,
) -> Result<Task, ClosureError> {
    let sigmas = task.inputs().simplices();
    // Identical (tau, target) pairs recur across input simplices; their local
    // tasks are the same problem, so the verdicts are shared.
    let memo: Mutex<HashMap<(Simplex, Vec<Simplex>), bool>> = Mutex::new(HashMap::new());

    let solve_sigma = |sigma: &Simplex| -> Result<(Simplex, Vec<Simplex>), ClosureError> {
        let listed = task
            .delta(sigma)
            .ok_or_else(|| ClosureError::NotAnInput(sigma.to_string()))?;
        let mut admitted: Vec<Simplex> = Vec::new();
        for tau in chromatic_vertex_sets(task, sigma) {
            // Zero-round fast path: tau already a legal output simplex.
            let ok = if listed.binary_search(&tau).is_ok() {
                true
            } else {
                let key = (tau.clone(), listed.to_vec());
                let cached = memo.lock().expect("memo lock").get(&key).copied();
                match cached {
                    Some(verdict) => verdict,
                    None => {
                        let local = local_task(task, sigma, &tau)?;
                        let verdict = one_round_solvable(&local, mode, options.solver)?;
                        memo.lock().expect("memo lock").insert(key, verdict);
                        verdict
                    }
                }
            };
            if ok {
                admitted.push(tau);
            }
        }
        admitted.sort();
        Ok((sigma.clone(), admitted))
    };

    let results: Result<Vec<(Simplex, Vec<Simplex>)>, ClosureError> = if options.parallel {
        sigmas.par_iter().map(solve_sigma).collect()
    } else {
        sigmas.iter().map(solve_sigma).collect()
    };
    let delta: BTreeMap<Simplex, Vec<Simplex>> = results?.into_iter().collect();

    // The output complex consists of the images of the new relation and all
    // their faces.
    let outputs = ChromaticComplex::new(delta.values().flatten().cloned())?
        .with_ambient(task.inputs().ambient());
    Ok(Task::new(task.inputs().clone(), outputs, delta)?)
}

/// All chromatic vertex sets over the legal output vertices of `sigma` with
/// the same ids as `sigma`, in canonical order.
fn chromatic_vertex_sets(task: &Task, sigma: &Simplex) -> Vec<Simplex> {
    let vertices = task.delta_vertices(sigma);
    let mut per_id: BTreeMap<ProcessId, Vec<Vertex>> = BTreeMap::new();
    for v in vertices {
        per_id.entry(v.id).or_default().push(v);
    }
    let pools: Vec<&Vec<Vertex>> = sigma.ids().iter().map(|id| &per_id[id]).collect();
    let mut result = Vec::new();
    let mut choice = vec![0usize; pools.len()];
    'outer: loop {
        result.push(
            Simplex::new(
                pools
                    .iter()
                    .zip(&choice)
                    .map(|(pool, &k)| pool[k].clone()),
            )
            .expect("distinct ids"),
        );
        let mut k = 0;
        loop {
            if k == choice.len() {
                break 'outer;
            }
            choice[k] += 1;
            if choice[k] < pools[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
    result.sort();
    result
}

/// Fixed-point test: the closure equals the task itself.
pub fn is_fixed_point(
    task: &Task,
    model: &ModelSpec,
    options: ClosureOptions,
) -> Result<bool, ClosureError> {
    let closed = closure(task, model, options)?;
    Ok(tasks_equal(&closed, task)?)
}

fn solo_box_output(model: &ModelSpec, id: ProcessId, round: u32) -> Result<Option<Bit>, ClosureError> {
    match &model.blackbox {
        BlackBox::None => Ok(None),
        // Running solo in the box, the caller is first and wins.
        BlackBox::TestAndSet => Ok(Some(Bit::ONE)),
        // A solo consensus call decides the caller's own input.
        BlackBox::BinaryConsensus(inputs) => Ok(Some(inputs.input(id, round)?)),
    }
}

/// The constructive round reduction: from a map solving the task in `t >= 1`
/// rounds, builds the map on the `(t-1)`-round protocol complex that sends a
/// vertex to the image of its solo extension. The result solves the closure
/// of the task in `t - 1` rounds.
pub fn speedup_transform(
    task: &Task,
    model: &ModelSpec,
    t: u32,
    map: &SimplicialMap,
) -> Result<SimplicialMap, ClosureError> {
    if t == 0 {
        return Err(ClosureError::ZeroRounds);
    }
    if !verify_map(task, model, t, map)? {
        return Err(ClosureError::NotASolution);
    }
    let mut assignment: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for sigma in task.inputs().simplices() {
        for v in carrier(&sigma, model, t - 1)?.vertices() {
            if assignment.contains_key(&v) {
                continue;
            }
            let solo_view = View::round(
                solo_box_output(model, v.id, t)?,
                [(v.id, v.value.as_view())].into(),
            );
            let solo_vertex = Vertex::new(v.id, Value::Nested(solo_view));
            let image = map
                .get(&solo_vertex)
                .ok_or_else(|| SolveError::PartialMap(solo_vertex.to_string()))?;
            assignment.insert(v, image.clone());
        }
    }
    Ok(SimplicialMap::new(assignment))
}

/// Why a lower-bound chain stopped.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChainStatus {
    /// The `bound`-fold transform is zero-round solvable; `bound` is the
    /// exact point where the chain bottoms out.
    ZeroRoundSolvable,
    /// The transform reached a fixed point while still zero-round
    /// unsolvable: the task is unsolvable at any round count, reported as
    /// unbounded within the step budget.
    FixedPoint,
}

#[derive(Clone, Copy, Debug)]
pub struct ChainReport {
    /// A valid lower bound on the number of rounds needed for the task.
    pub bound: u32,
    pub status: ChainStatus,
}

/// Iterates `transform` from `task`, checking zero-round solvability at each
/// step. If the `k`-fold transform is the first zero-round-solvable one, the
/// task needs at least `k` rounds. If the chain reaches a fixed point first
/// (detected by `halt`, which defaults to task equality), the task is
/// unsolvable and `max_steps` is reported. A chain that keeps changing past
/// `max_steps` is an error.
pub fn lower_bound_chain(
    task: &Task,
    model: &ModelSpec,
    transform: &dyn Fn(&Task) -> Result<Task, ClosureError>,
    halt: Option<&dyn Fn(&Task, &Task) -> bool>,
    max_steps: u32,
    solver: SolveOptions,
) -> Result<ChainReport, ClosureError> {
    let mut current = task.clone();
    for step in 0..=max_steps {
        if solve(&current, model, 0, solver)?.is_solvable() {
            return Ok(ChainReport {
                bound: step,
                status: ChainStatus::ZeroRoundSolvable,
            });
        }
        if step == max_steps {
            return Err(ClosureError::StepBudgetExceeded(max_steps));
        }
        let next = transform(&current)?;
        let stop = match halt {
            Some(h) => h(&current, &next),
            None => tasks_equal(&next, &current).unwrap_or(false),
        };
        if stop {
            return Ok(ChainReport {
                bound: max_steps,
                status: ChainStatus::FixedPoint,
            });
        }
        current = next;
    }
    unreachable!("loop returns or errors at step == max_steps")
}
