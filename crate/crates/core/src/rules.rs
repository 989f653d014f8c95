//! Named decision rules: executable forms of the explicit decision maps used
//! as upper-bound witnesses and as cross-checks for the solver.
//!
//! Multi-round compositions treat each round's outputs as the next round's
//! inputs, and the induced simplicial map is materialized over the whole
//! protocol complex rather than simulated schedule by schedule. All rules
//! stay on the `1/m` grid: they only take minima, maxima, and shifts by a
//! grid multiple, never averages.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complex::{Bit, ProcessId, Simplex, Value, Vertex};
use crate::model::{ModelError, ModelSpec};
use crate::protocol::carrier;
use crate::solver::{verify_map, SimplicialMap, SolveError};
use crate::task::Task;
use crate::view::{View, ViewRepr};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule expects rational grid values, got {0}")]
    BadValue(String),
    #[error("rule expects values over denominator {expected}, got {got}")]
    WrongGrid { expected: u64, got: u64 },
    #[error("two-process rule applied to a view with {0} participants")]
    TooManyParticipants(usize),
    #[error("pinned rule applied to values outside its declared pair")]
    AlienValue,
    #[error("rule needs a black-box output but the view has none")]
    MissingBox,
    #[error("a view that lost test&set lacks the peer value; the complex is malformed")]
    MissingPeerValue,
    #[error("rule composition does not match the view shape: {0}")]
    PartialRule(String),
    #[error("{rounds} rounds need {rounds} rules, got {rules}")]
    WrongRuleCount { rounds: u32, rules: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A per-round decision rule mapping a process's view to an output value.
#[derive(Clone, Debug)]
pub struct DecisionRule {
    name: String,
    kind: RuleKind,
}

#[derive(Clone, Debug)]
enum RuleKind {
    /// The two-process map: with current values sorted as `y1 <= y2` and
    /// `z = min(y2, y1 + eps)`, a solo process keeps its value, the
    /// higher-valued process outputs `z` when it sees both, and the
    /// lower-valued one outputs `min(y2, z + eps)`.
    TwoProcApprox {
        eps_num: u64,
        den: u64,
        /// Restricts the rule to one declared input pair (numerators sorted).
        pinned: Option<(u64, u64)>,
    },
    /// Maps the multiset of collected values to `min(max, min + eps)`,
    /// ignoring any black-box output.
    Halving { eps_num: u64, den: u64 },
    /// Two-process consensus from test&set: the winner outputs its own
    /// input, the loser adopts the other process's input (guaranteed to have
    /// been written first).
    TsConsensus,
}

impl DecisionRule {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Applies the rule to one view: the box output (if any) and the current
    /// values collected in the round, keyed by process id. The owner's own
    /// id is always present.
    pub fn apply(
        &self,
        id: ProcessId,
        box_output: Option<Bit>,
        current: &BTreeMap<ProcessId, Value>,
    ) -> Result<Value, RuleError> {
        match &self.kind {
            RuleKind::TwoProcApprox {
                eps_num,
                den,
                pinned,
            } => {
                if current.len() > 2 {
                    return Err(RuleError::TooManyParticipants(current.len()));
                }
                let nums = numerators(current, *den)?;
                let own = nums[&id];
                if current.len() == 1 {
                    if let Some((y1, y2)) = pinned {
                        if own != *y1 && own != *y2 {
                            return Err(RuleError::AlienValue);
                        }
                    }
                    return Ok(Value::rational(own, *den));
                }
                let lo = *nums.values().min().expect("non-empty view");
                let hi = *nums.values().max().expect("non-empty view");
                if let Some((y1, y2)) = pinned {
                    if (lo, hi) != (*y1, *y2) {
                        return Err(RuleError::AlienValue);
                    }
                }
                let z = hi.min(lo + eps_num);
                let out = if own == hi {
                    z
                } else {
                    hi.min(z + eps_num)
                };
                Ok(Value::rational(out, *den))
            }
            RuleKind::Halving { eps_num, den } => {
                let nums = numerators(current, *den)?;
                let lo = *nums.values().min().expect("non-empty view");
                let hi = *nums.values().max().expect("non-empty view");
                Ok(Value::rational(hi.min(lo + eps_num), *den))
            }
            RuleKind::TsConsensus => {
                if current.len() > 2 {
                    return Err(RuleError::TooManyParticipants(current.len()));
                }
                match box_output {
                    None => Err(RuleError::MissingBox),
                    Some(Bit::ONE) => Ok(current[&id].clone()),
                    Some(_) => {
                        let peer = current
                            .iter()
                            .find(|(peer_id, _)| **peer_id != id)
                            .map(|(_, value)| value.clone());
                        peer.ok_or(RuleError::MissingPeerValue)
                    }
                }
            }
        }
    }
}

fn numerators(
    current: &BTreeMap<ProcessId, Value>,
    den: u64,
) -> Result<BTreeMap<ProcessId, u64>, RuleError> {
    current
        .iter()
        .map(|(id, value)| match value {
            Value::Rational { num, den: d } if *d == den => Ok((*id, *num)),
            Value::Rational { den: d, .. } => Err(RuleError::WrongGrid {
                expected: den,
                got: *d,
            }),
            other => Err(RuleError::BadValue(other.to_string())),
        })
        .collect()
}

/// The two-process map pinned to the input pair `y1/den <= y2/den`.
pub fn two_proc_approx_rule(
    eps_num: u64,
    den: u64,
    y1_num: u64,
    y2_num: u64,
) -> DecisionRule {
    assert!(y1_num <= y2_num, "callers sort the pinned pair");
    DecisionRule {
        name: format!("two-proc(eps={eps_num}/{den}, pinned {y1_num}/{den},{y2_num}/{den})"),
        kind: RuleKind::TwoProcApprox {
            eps_num,
            den,
            pinned: Some((y1_num, y2_num)),
        },
    }
}

/// The two-process map over arbitrary input pairs; roles are assigned by
/// sorting the two current values.
pub fn two_proc_approx_family(eps_num: u64, den: u64) -> DecisionRule {
    DecisionRule {
        name: format!("two-proc(eps={eps_num}/{den})"),
        kind: RuleKind::TwoProcApprox {
            eps_num,
            den,
            pinned: None,
        },
    }
}

/// The distance-halving map `min(max, min + eps)` over the collected values.
pub fn halving_rule(eps_num: u64, den: u64) -> DecisionRule {
    DecisionRule {
        name: format!("halving(eps={eps_num}/{den})"),
        kind: RuleKind::Halving { eps_num, den },
    }
}

/// Two-process consensus from one test&set call.
pub fn ts_consensus_rule() -> DecisionRule {
    DecisionRule {
        name: "ts-consensus".to_string(),
        kind: RuleKind::TsConsensus,
    }
}

/// The `t`-round composition of halving rules: round `r` runs with
/// `eps * 2^(t-r)`, so distances shrink to `eps` by the last round.
pub fn halving_schedule(eps_num: u64, den: u64, t: u32) -> Vec<DecisionRule> {
    (0..t)
        .map(|r| halving_rule(eps_num << (t - 1 - r), den))
        .collect()
}

/// The `t`-round composition of two-process rules: round `r` runs with
/// `eps * 3^(t-r)`.
pub fn two_proc_schedule(eps_num: u64, den: u64, t: u32) -> Vec<DecisionRule> {
    (0..t)
        .map(|r| two_proc_approx_family(eps_num * 3u64.pow(t - 1 - r), den))
        .collect()
}

/// Evaluates a rule composition on a view of matching depth: the inner
/// rounds produce the current values the outer rule consumes.
fn decide(rules: &[DecisionRule], id: ProcessId, view: &View) -> Result<Value, RuleError> {
    match (rules.split_last(), view.repr()) {
        (None, ViewRepr::Input(value)) => Ok(value.clone()),
        (None, ViewRepr::Round { .. }) => Err(RuleError::PartialRule(
            "round view left over after consuming all rules".to_string(),
        )),
        (Some(_), ViewRepr::Input(_)) => Err(RuleError::PartialRule(
            "input view reached with rules still to apply".to_string(),
        )),
        (Some((last, inner)), ViewRepr::Round { box_output, seen }) => {
            let current: Result<BTreeMap<ProcessId, Value>, RuleError> = seen
                .iter()
                .map(|(j, child)| Ok((*j, decide(inner, *j, child)?)))
                .collect();
            last.apply(id, *box_output, &current?)
        }
    }
}

/// Materializes the simplicial map induced by a per-round rule composition
/// over the `t`-round protocol complex of the task's inputs.
pub fn rule_map(
    task: &Task,
    model: &ModelSpec,
    t: u32,
    rules: &[DecisionRule],
) -> Result<SimplicialMap, RuleError> {
    if rules.len() != t as usize {
        return Err(RuleError::WrongRuleCount {
            rounds: t,
            rules: rules.len(),
        });
    }
    let mut assignment: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for sigma in task.inputs().simplices() {
        for v in carrier(&sigma, model, t)?.vertices() {
            if assignment.contains_key(&v) {
                continue;
            }
            let output = decide(rules, v.id, &v.value.as_view())?;
            let image = Vertex::new(v.id, output);
            assignment.insert(v, image);
        }
    }
    Ok(SimplicialMap::new(assignment))
}

/// Runs a rule composition and reports whether the induced map solves the
/// task: an independent upper-bound path next to the solver.
pub fn run_rule(
    task: &Task,
    model: &ModelSpec,
    t: u32,
    rules: &[DecisionRule],
) -> Result<bool, RuleError> {
    let map = rule_map(task, model, t, rules)?;
    Ok(verify_map(task, model, t, &map)?)
}

/// The images of one facet under a map, in id order; handy for inspecting
/// rule outputs.
pub fn facet_image(map: &SimplicialMap, facet: &Simplex) -> Result<Simplex, RuleError> {
    Ok(map.apply(facet)?)
}
