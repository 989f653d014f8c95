//! JSON wire formats for complexes, models, tasks, betas, and witness maps.
//!
//! Complexes: `{"n": int, "facets": [[{"id": int, "value": V}]]}` where V is
//! `{"rat": [num, den]}`, `{"bit": 0|1}`, `{"sym": "..."}`, or
//! `{"view": ...}` for protocol vertices. Views are `{"input": V}` or
//! `{"box": 0|1, "seen": {"<id>": view}}` (the `box` field is omitted for
//! models without a black box).
//!
//! Models: `{"comm": "iis|snapshot|collect", "box": "none|ts|bc",
//! "bc_inputs": {"<id>|*": 0|1|{"<round>": 0|1}}}`.
//!
//! Tasks: `{"kind": "consensus|weak_consensus|approx|liberal_approx", ...}`
//! for the named families, or `{"kind": "custom", "inputs": ..,
//! "outputs": .., "delta": [[sigma, [tau, ..]], ..]}`.
//!
//! All serialization is canonical: maps are ordered, so equal objects
//! produce byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    Bit, ChromaticComplex, ComplexError, ProcessId, Simplex, Value, Vertex,
};
use crate::model::{BcInputPlan, BcInputs, BlackBox, Communication, ModelSpec};
use crate::solver::SimplicialMap;
use crate::task::{
    approx_agreement, binary_consensus, liberal_approx_agreement, weak_consensus, Task, TaskError,
};
use crate::view::{View, ViewRepr};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("json: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("unknown communication model {0:?}")]
    UnknownComm(String),
    #[error("unknown black box {0:?}")]
    UnknownBox(String),
    #[error("model box \"bc\" requires bc_inputs")]
    MissingBcInputs,
    #[error("bad id key {0:?}")]
    BadIdKey(String),
    #[error("bad round key {0:?}")]
    BadRoundKey(String),
    #[error("bad bit {0}")]
    BadBit(u8),
    #[error("a round view of process {0} must contain its own id")]
    ViewOwnership(ProcessId),
}

// ---------------------------------------------------------------------------
// Values, vertices, views
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
pub enum ValueDto {
    #[serde(rename = "rat")]
    Rational(u64, u64),
    #[serde(rename = "bit")]
    Bit(u8),
    #[serde(rename = "sym")]
    Symbol(String),
    #[serde(rename = "view")]
    View(Box<ViewDto>),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum ViewDto {
    Input {
        input: ValueDto,
    },
    Round {
        #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
        box_output: Option<u8>,
        seen: BTreeMap<String, ViewDto>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct VertexDto {
    pub id: u32,
    pub value: ValueDto,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ComplexDto {
    pub n: u32,
    pub facets: Vec<Vec<VertexDto>>,
}

pub fn value_to_dto(value: &Value) -> ValueDto {
    match value {
        Value::Rational { num, den } => ValueDto::Rational(*num, *den),
        Value::Bit(b) => ValueDto::Bit(b.as_u8()),
        Value::Symbol(s) => ValueDto::Symbol(s.clone()),
        Value::Nested(view) => ValueDto::View(Box::new(view_to_dto(view))),
    }
}

fn view_to_dto(view: &View) -> ViewDto {
    match view.repr() {
        ViewRepr::Input(value) => ViewDto::Input {
            input: value_to_dto(value),
        },
        ViewRepr::Round { box_output, seen } => ViewDto::Round {
            box_output: box_output.map(|b| b.as_u8()),
            seen: seen
                .iter()
                .map(|(id, child)| (id.to_string(), view_to_dto(child)))
                .collect(),
        },
    }
}

pub fn value_from_dto(dto: &ValueDto) -> Result<Value, JsonError> {
    Ok(match dto {
        ValueDto::Rational(num, den) => Value::rational(*num, *den),
        ValueDto::Bit(b) => Value::Bit(Bit::new(*b).map_err(|_| JsonError::BadBit(*b))?),
        ValueDto::Symbol(s) => Value::Symbol(s.clone()),
        ValueDto::View(view) => Value::Nested(view_from_dto(view)?),
    })
}

fn view_from_dto(dto: &ViewDto) -> Result<View, JsonError> {
    Ok(match dto {
        ViewDto::Input { input } => View::input(value_from_dto(input)?),
        ViewDto::Round { box_output, seen } => {
            let box_output = match box_output {
                None => None,
                Some(b) => Some(Bit::new(*b).map_err(|_| JsonError::BadBit(*b))?),
            };
            let seen: Result<BTreeMap<ProcessId, View>, JsonError> = seen
                .iter()
                .map(|(key, child)| {
                    let id = parse_id_key(key)?;
                    let child = view_from_dto(child)?;
                    // Collect follows write: a round view of j contains j.
                    if let ViewRepr::Round { seen, .. } = child.repr() {
                        if !seen.contains_key(&id) {
                            return Err(JsonError::ViewOwnership(id));
                        }
                    }
                    Ok((id, child))
                })
                .collect();
            View::round(box_output, seen?)
        }
    })
}

fn parse_id_key(key: &str) -> Result<ProcessId, JsonError> {
    key.parse::<u32>()
        .ok()
        .and_then(|raw| ProcessId::new(raw).ok())
        .ok_or_else(|| JsonError::BadIdKey(key.to_string()))
}

pub fn vertex_to_dto(v: &Vertex) -> VertexDto {
    VertexDto {
        id: v.id.get(),
        value: value_to_dto(&v.value),
    }
}

pub fn vertex_from_dto(dto: &VertexDto) -> Result<Vertex, JsonError> {
    let id = ProcessId::new(dto.id)?;
    let value = value_from_dto(&dto.value)?;
    if let Value::Nested(view) = &value {
        if let ViewRepr::Round { seen, .. } = view.repr() {
            if !seen.contains_key(&id) {
                return Err(JsonError::ViewOwnership(id));
            }
        }
    }
    Ok(Vertex::new(id, value))
}

pub fn simplex_to_dto(s: &Simplex) -> Vec<VertexDto> {
    s.vertices().iter().map(vertex_to_dto).collect()
}

pub fn simplex_from_dto(dto: &[VertexDto]) -> Result<Simplex, JsonError> {
    let vertices: Result<Vec<Vertex>, JsonError> = dto.iter().map(vertex_from_dto).collect();
    Ok(Simplex::new(vertices?)?)
}

pub fn complex_to_dto(c: &ChromaticComplex) -> ComplexDto {
    ComplexDto {
        n: c.ambient(),
        facets: c.facets().iter().map(simplex_to_dto).collect(),
    }
}

pub fn complex_from_dto(dto: &ComplexDto) -> Result<ChromaticComplex, JsonError> {
    let facets: Result<Vec<Simplex>, JsonError> =
        dto.facets.iter().map(|f| simplex_from_dto(f)).collect();
    Ok(ChromaticComplex::new(facets?)?.with_ambient(dto.n))
}

pub fn complex_to_json(c: &ChromaticComplex) -> String {
    serde_json::to_string_pretty(&complex_to_dto(c)).expect("complex serialization")
}

pub fn complex_from_json(text: &str) -> Result<ChromaticComplex, JsonError> {
    complex_from_dto(&serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ModelDto {
    pub comm: String,
    #[serde(rename = "box")]
    pub blackbox: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc_inputs: Option<BTreeMap<String, BcInputDto>>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum BcInputDto {
    Constant(u8),
    ByRound(BTreeMap<String, u8>),
}

pub fn model_to_dto(model: &ModelSpec) -> ModelDto {
    let comm = model.communication.to_string();
    let (blackbox, bc_inputs) = match &model.blackbox {
        BlackBox::None => ("none".to_string(), None),
        BlackBox::TestAndSet => ("ts".to_string(), None),
        BlackBox::BinaryConsensus(inputs) => {
            let mut map: BTreeMap<String, BcInputDto> = BTreeMap::new();
            if let Some(bit) = inputs.default {
                map.insert("*".to_string(), BcInputDto::Constant(bit.as_u8()));
            }
            for (id, plan) in &inputs.per_process {
                let dto = match plan {
                    BcInputPlan::Constant(bit) => BcInputDto::Constant(bit.as_u8()),
                    BcInputPlan::ByRound(rounds) => BcInputDto::ByRound(
                        rounds
                            .iter()
                            .map(|(round, bit)| (round.to_string(), bit.as_u8()))
                            .collect(),
                    ),
                };
                map.insert(id.to_string(), dto);
            }
            ("bc".to_string(), Some(map))
        }
    };
    ModelDto {
        comm,
        blackbox,
        bc_inputs,
    }
}

pub fn model_from_dto(dto: &ModelDto) -> Result<ModelSpec, JsonError> {
    let communication = match dto.comm.as_str() {
        "iis" => Communication::ImmediateSnapshot,
        "snapshot" => Communication::Snapshot,
        "collect" => Communication::Collect,
        other => return Err(JsonError::UnknownComm(other.to_string())),
    };
    let blackbox = match dto.blackbox.as_str() {
        "none" => BlackBox::None,
        "ts" => BlackBox::TestAndSet,
        "bc" => {
            let raw = dto.bc_inputs.as_ref().ok_or(JsonError::MissingBcInputs)?;
            let mut inputs = BcInputs::default();
            for (key, plan) in raw {
                let plan = match plan {
                    BcInputDto::Constant(b) => {
                        BcInputPlan::Constant(Bit::new(*b).map_err(|_| JsonError::BadBit(*b))?)
                    }
                    BcInputDto::ByRound(rounds) => {
                        let rounds: Result<BTreeMap<u32, Bit>, JsonError> = rounds
                            .iter()
                            .map(|(round, b)| {
                                let round = round
                                    .parse::<u32>()
                                    .map_err(|_| JsonError::BadRoundKey(round.clone()))?;
                                let bit = Bit::new(*b).map_err(|_| JsonError::BadBit(*b))?;
                                Ok((round, bit))
                            })
                            .collect();
                        BcInputPlan::ByRound(rounds?)
                    }
                };
                if key == "*" {
                    match plan {
                        BcInputPlan::Constant(bit) => inputs.default = Some(bit),
                        BcInputPlan::ByRound(_) => {
                            return Err(JsonError::BadIdKey("*".to_string()))
                        }
                    }
                } else {
                    inputs.per_process.insert(parse_id_key(key)?, plan);
                }
            }
            BlackBox::BinaryConsensus(inputs)
        }
        other => return Err(JsonError::UnknownBox(other.to_string())),
    };
    Ok(ModelSpec {
        communication,
        blackbox,
    })
}

pub fn model_to_json(model: &ModelSpec) -> String {
    serde_json::to_string_pretty(&model_to_dto(model)).expect("model serialization")
}

pub fn model_from_json(text: &str) -> Result<ModelSpec, JsonError> {
    model_from_dto(&serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind")]
pub enum TaskDto {
    #[serde(rename = "consensus")]
    Consensus { n: u32 },
    #[serde(rename = "weak_consensus")]
    WeakConsensus { n: u32 },
    #[serde(rename = "approx")]
    Approx { n: u32, m: u64, eps_num: u64 },
    #[serde(rename = "liberal_approx")]
    LiberalApprox { n: u32, m: u64, eps_num: u64 },
    #[serde(rename = "custom")]
    Custom {
        inputs: ComplexDto,
        outputs: ComplexDto,
        delta: Vec<(Vec<VertexDto>, Vec<Vec<VertexDto>>)>,
    },
}

pub fn task_from_dto(dto: &TaskDto) -> Result<Task, JsonError> {
    Ok(match dto {
        TaskDto::Consensus { n } => binary_consensus(*n)?,
        TaskDto::WeakConsensus { n } => weak_consensus(*n)?,
        TaskDto::Approx { n, m, eps_num } => approx_agreement(*n, *m, *eps_num)?,
        TaskDto::LiberalApprox { n, m, eps_num } => liberal_approx_agreement(*n, *m, *eps_num)?,
        TaskDto::Custom {
            inputs,
            outputs,
            delta,
        } => {
            let inputs = complex_from_dto(inputs)?;
            let outputs = complex_from_dto(outputs)?;
            let mut map: BTreeMap<Simplex, Vec<Simplex>> = BTreeMap::new();
            for (sigma, taus) in delta {
                let sigma = simplex_from_dto(sigma)?;
                let taus: Result<Vec<Simplex>, JsonError> =
                    taus.iter().map(|t| simplex_from_dto(t)).collect();
                map.insert(sigma, taus?);
            }
            Task::new(inputs, outputs, map)?
        }
    })
}

/// Serializes a task extensionally (named families are exported as their
/// explicit relation).
pub fn task_to_dto(task: &Task) -> TaskDto {
    TaskDto::Custom {
        inputs: complex_to_dto(task.inputs()),
        outputs: complex_to_dto(task.outputs()),
        delta: task
            .delta_map()
            .iter()
            .map(|(sigma, taus)| {
                (
                    simplex_to_dto(sigma),
                    taus.iter().map(simplex_to_dto).collect(),
                )
            })
            .collect(),
    }
}

pub fn task_to_json(task: &Task) -> String {
    serde_json::to_string_pretty(&task_to_dto(task)).expect("task serialization")
}

pub fn task_from_json(text: &str) -> Result<Task, JsonError> {
    task_from_dto(&serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// Betas and witness maps
// ---------------------------------------------------------------------------

/// Parses `{"<id>|*": 0|1}` into a total bit assignment over `ids`.
pub fn beta_from_json(
    text: &str,
    ids: impl IntoIterator<Item = ProcessId>,
) -> Result<BTreeMap<ProcessId, Bit>, JsonError> {
    let raw: BTreeMap<String, u8> = serde_json::from_str(text)?;
    let mut default: Option<Bit> = None;
    let mut explicit: BTreeMap<ProcessId, Bit> = BTreeMap::new();
    for (key, b) in &raw {
        let bit = Bit::new(*b).map_err(|_| JsonError::BadBit(*b))?;
        if key == "*" {
            default = Some(bit);
        } else {
            explicit.insert(parse_id_key(key)?, bit);
        }
    }
    let mut beta = BTreeMap::new();
    for id in ids {
        match explicit.get(&id).copied().or(default) {
            Some(bit) => {
                beta.insert(id, bit);
            }
            None => return Err(JsonError::BadIdKey(id.to_string())),
        }
    }
    Ok(beta)
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct MapDto {
    pub map: Vec<(VertexDto, VertexDto)>,
}

pub fn map_to_json(map: &SimplicialMap) -> String {
    let dto = MapDto {
        map: map
            .assignment()
            .iter()
            .map(|(from, to)| (vertex_to_dto(from), vertex_to_dto(to)))
            .collect(),
    };
    serde_json::to_string_pretty(&dto).expect("map serialization")
}

pub fn map_from_json(text: &str) -> Result<SimplicialMap, JsonError> {
    let dto: MapDto = serde_json::from_str(text)?;
    let mut assignment = BTreeMap::new();
    for (from, to) in &dto.map {
        assignment.insert(vertex_from_dto(from)?, vertex_from_dto(to)?);
    }
    Ok(SimplicialMap::new(assignment))
}
