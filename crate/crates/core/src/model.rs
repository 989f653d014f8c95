//! Communication model specifications: the collect / snapshot / immediate
//! snapshot round structure, optionally augmented with a test&set or
//! binary-consensus black box.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::complex::{Bit, ProcessId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("black boxes are only supported with immediate snapshot")]
    UnsupportedCombination,
    #[error("no binary-consensus input declared for process {id} at round {round}")]
    MissingBoxInput { id: ProcessId, round: u32 },
    #[error("ids of the two simplices differ")]
    IdMismatch,
    #[error("vertex does not belong to the one-round complex of the source simplex")]
    NotInComplex,
}

/// How one round of communication reads the shared array.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Communication {
    Collect,
    Snapshot,
    ImmediateSnapshot,
}

impl fmt::Display for Communication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Communication::Collect => "collect",
            Communication::Snapshot => "snapshot",
            Communication::ImmediateSnapshot => "iis",
        };
        write!(f, "{name}")
    }
}

/// Inputs handed to the binary-consensus box: a bit per process, either
/// constant across rounds or given round by round. A `default` applies to
/// every process without an explicit plan.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BcInputs {
    pub default: Option<Bit>,
    pub per_process: BTreeMap<ProcessId, BcInputPlan>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BcInputPlan {
    Constant(Bit),
    ByRound(BTreeMap<u32, Bit>),
}

impl BcInputs {
    /// The same bit for every process at every round.
    pub fn uniform(bit: Bit) -> BcInputs {
        BcInputs {
            default: Some(bit),
            per_process: BTreeMap::new(),
        }
    }

    /// A constant bit per process (round-independent).
    pub fn per_process(bits: impl IntoIterator<Item = (ProcessId, Bit)>) -> BcInputs {
        BcInputs {
            default: None,
            per_process: bits
                .into_iter()
                .map(|(id, bit)| (id, BcInputPlan::Constant(bit)))
                .collect(),
        }
    }

    /// The input bit process `id` feeds the box at `round`, an error if the
    /// plan does not cover the pair.
    pub fn input(&self, id: ProcessId, round: u32) -> Result<Bit, ModelError> {
        match self.per_process.get(&id) {
            Some(BcInputPlan::Constant(bit)) => Ok(*bit),
            Some(BcInputPlan::ByRound(by_round)) => by_round
                .get(&round)
                .copied()
                .or(self.default)
                .ok_or(ModelError::MissingBoxInput { id, round }),
            None => self.default.ok_or(ModelError::MissingBoxInput { id, round }),
        }
    }
}

/// The per-round black box, if any. Inputs to the binary-consensus box depend
/// only on the process id and the round number.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BlackBox {
    None,
    TestAndSet,
    BinaryConsensus(BcInputs),
}

impl BlackBox {
    pub fn is_none(&self) -> bool {
        matches!(self, BlackBox::None)
    }
}

/// A full model: communication discipline plus optional black box. Black
/// boxes only combine with immediate snapshot.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModelSpec {
    pub communication: Communication,
    pub blackbox: BlackBox,
}

impl ModelSpec {
    pub fn collect() -> ModelSpec {
        ModelSpec {
            communication: Communication::Collect,
            blackbox: BlackBox::None,
        }
    }

    pub fn snapshot() -> ModelSpec {
        ModelSpec {
            communication: Communication::Snapshot,
            blackbox: BlackBox::None,
        }
    }

    pub fn iis() -> ModelSpec {
        ModelSpec {
            communication: Communication::ImmediateSnapshot,
            blackbox: BlackBox::None,
        }
    }

    pub fn iis_test_and_set() -> ModelSpec {
        ModelSpec {
            communication: Communication::ImmediateSnapshot,
            blackbox: BlackBox::TestAndSet,
        }
    }

    pub fn iis_binary_consensus(inputs: BcInputs) -> ModelSpec {
        ModelSpec {
            communication: Communication::ImmediateSnapshot,
            blackbox: BlackBox::BinaryConsensus(inputs),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.blackbox.is_none() && self.communication != Communication::ImmediateSnapshot {
            return Err(ModelError::UnsupportedCombination);
        }
        Ok(())
    }

    pub fn has_box(&self) -> bool {
        !self.blackbox.is_none()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.blackbox {
            BlackBox::None => write!(f, "{}", self.communication),
            BlackBox::TestAndSet => write!(f, "{}+ts", self.communication),
            BlackBox::BinaryConsensus(_) => write!(f, "{}+bc", self.communication),
        }
    }
}
