//! Full-information views of processes in iterated round-based executions.
//!
//! A view is either the process input (before any communication) or, after a
//! round, the optional black-box output together with the map of views the
//! process collected in that round. Views carry a canonical byte encoding so
//! that structurally identical views arising from different input simplices
//! are the same object for equality, ordering, and hashing.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::complex::{Bit, ProcessId, Value};

pub(crate) const TAG_VIEW_INPUT: u8 = 0x10;
pub(crate) const TAG_VIEW_ROUND: u8 = 0x11;

/// A recursive full-information view. Immutable and cheaply cloneable.
#[derive(Clone)]
pub struct View(Arc<ViewData>);

struct ViewData {
    repr: ViewRepr,
    /// Canonical encoding, injective on views. All comparisons go through it.
    enc: Vec<u8>,
    depth: u32,
}

/// The shape of a view: round-zero input, or the result of one round.
#[derive(Clone)]
pub enum ViewRepr {
    /// The process input, before any communication.
    Input(Value),
    /// The state after one round: black-box output (if the model has a box)
    /// and the collected views, keyed by process id. The owner's own id is
    /// always present in `seen`, because the collect follows the write.
    Round {
        box_output: Option<Bit>,
        seen: BTreeMap<ProcessId, View>,
    },
}

impl View {
    pub fn input(value: Value) -> View {
        View::from_repr(ViewRepr::Input(value))
    }

    pub fn round(box_output: Option<Bit>, seen: BTreeMap<ProcessId, View>) -> View {
        View::from_repr(ViewRepr::Round { box_output, seen })
    }

    fn from_repr(repr: ViewRepr) -> View {
        let mut enc = Vec::new();
        let depth;
        match &repr {
            ViewRepr::Input(value) => {
                depth = 0;
                enc.push(TAG_VIEW_INPUT);
                value.encode_into(&mut enc);
            }
            ViewRepr::Round { box_output, seen } => {
                depth = 1 + seen.values().map(|v| v.depth()).max().unwrap_or(0);
                enc.push(TAG_VIEW_ROUND);
                match box_output {
                    None => enc.push(0x00),
                    Some(bit) => {
                        enc.push(0x01);
                        enc.push(bit.as_u8());
                    }
                }
                enc.extend_from_slice(&(seen.len() as u32).to_be_bytes());
                for (id, view) in seen {
                    enc.extend_from_slice(&id.get().to_be_bytes());
                    enc.extend_from_slice(view.encoding());
                }
            }
        }
        View(Arc::new(ViewData { repr, enc, depth }))
    }

    pub fn repr(&self) -> &ViewRepr {
        &self.0.repr
    }

    /// Canonical byte encoding; injective on views.
    pub fn encoding(&self) -> &[u8] {
        &self.0.enc
    }

    /// Number of communication rounds reflected in the view.
    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    pub fn box_output(&self) -> Option<Bit> {
        match self.repr() {
            ViewRepr::Input(_) => None,
            ViewRepr::Round { box_output, .. } => *box_output,
        }
    }

    /// The collected views, for a round view.
    pub fn seen(&self) -> Option<&BTreeMap<ProcessId, View>> {
        match self.repr() {
            ViewRepr::Input(_) => None,
            ViewRepr::Round { seen, .. } => Some(seen),
        }
    }
}

impl PartialEq for View {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.enc == other.0.enc
    }
}

impl Eq for View {}

impl PartialOrd for View {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for View {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.enc.cmp(&other.0.enc)
    }
}

impl Hash for View {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.enc.hash(state);
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr() {
            ViewRepr::Input(value) => write!(f, "{value}"),
            ViewRepr::Round { box_output, seen } => {
                if let Some(bit) = box_output {
                    write!(f, "{}|", bit.as_u8())?;
                }
                write!(f, "{{")?;
                for (k, (id, view)) in seen.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{id}:{view}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Debug for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "View({self})")
    }
}
