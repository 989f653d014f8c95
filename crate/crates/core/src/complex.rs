//! Chromatic simplicial complexes: colored vertices, simplices with distinct
//! colors, and complexes stored as subset-maximal facets in a canonical order.
//!
//! These are the substrate for every other module. Complexes store facets
//! only; faces are materialized on demand. All types are immutable after
//! construction and safe to share across threads.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::view::View;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("simplex repeats process id {0}")]
    NonChromatic(ProcessId),
    #[error("simplex must be non-empty")]
    EmptySimplex,
    #[error("complex must have at least one facet")]
    Empty,
    #[error("projection selects no vertex")]
    EmptyResult,
    #[error("process id must be at least 1")]
    ZeroProcessId,
    #[error("bit must be 0 or 1, got {0}")]
    BadBit(u8),
}

/// A process identity, an integer in `1..=n` for ambient system size `n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProcessId(u32);

impl ProcessId {
    pub fn new(id: u32) -> Result<ProcessId, ComplexError> {
        if id == 0 {
            return Err(ComplexError::ZeroProcessId);
        }
        Ok(ProcessId(id))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single bit, used for black-box inputs and outputs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Bit(u8);

impl Bit {
    pub const ZERO: Bit = Bit(0);
    pub const ONE: Bit = Bit(1);

    pub fn new(b: u8) -> Result<Bit, ComplexError> {
        match b {
            0 | 1 => Ok(Bit(b)),
            other => Err(ComplexError::BadBit(other)),
        }
    }

    pub fn as_u8(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const TAG_VAL_RATIONAL: u8 = 0x01;
const TAG_VAL_BIT: u8 = 0x02;
const TAG_VAL_SYMBOL: u8 = 0x03;
const TAG_VAL_NESTED: u8 = 0x04;

/// A canonical value term. Rationals share one global denominator per task
/// instance; there is no floating point anywhere. The total order is the
/// lexicographic order of the canonical byte encoding.
#[derive(Clone)]
pub enum Value {
    Rational { num: u64, den: u64 },
    Bit(Bit),
    Symbol(String),
    Nested(View),
}

impl Value {
    pub fn rational(num: u64, den: u64) -> Value {
        Value::Rational { num, den }
    }

    pub fn bit(b: u8) -> Result<Value, ComplexError> {
        Ok(Value::Bit(Bit::new(b)?))
    }

    pub fn symbol(s: impl Into<String>) -> Value {
        Value::Symbol(s.into())
    }

    /// Appends the canonical encoding. The encoding is injective: a one-byte
    /// variant tag followed by fixed-width big-endian integers, with a length
    /// prefix for symbols.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Value::Rational { num, den } => {
                out.push(TAG_VAL_RATIONAL);
                out.extend_from_slice(&num.to_be_bytes());
                out.extend_from_slice(&den.to_be_bytes());
            }
            Value::Bit(b) => {
                out.push(TAG_VAL_BIT);
                out.push(b.as_u8());
            }
            Value::Symbol(s) => {
                out.push(TAG_VAL_SYMBOL);
                out.extend_from_slice(&(s.len() as u32).to_be_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            Value::Nested(view) => {
                out.push(TAG_VAL_NESTED);
                out.extend_from_slice(view.encoding());
            }
        }
    }

    pub fn encoding(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    /// Reads the value as a view: a nested view directly, anything else as a
    /// round-zero input view.
    pub fn as_view(&self) -> View {
        match self {
            Value::Nested(view) => view.clone(),
            other => View::input(other.clone()),
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Value::Rational { .. } => TAG_VAL_RATIONAL,
            Value::Bit(_) => TAG_VAL_BIT,
            Value::Symbol(_) => TAG_VAL_SYMBOL,
            Value::Nested(_) => TAG_VAL_NESTED,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    // Field-by-field comparison that coincides with comparing canonical
    // encodings (a property test pins this down).
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Rational { num: a, den: ad }, Rational { num: b, den: bd }) => {
                a.cmp(b).then(ad.cmp(bd))
            }
            (Bit(a), Bit(b)) => a.cmp(b),
            (Symbol(a), Symbol(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            (Nested(a), Nested(b)) => a.cmp(b),
            (a, b) => a.tag().cmp(&b.tag()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u8(self.tag());
        match self {
            Value::Rational { num, den } => {
                state.write_u64(*num);
                state.write_u64(*den);
            }
            Value::Bit(b) => state.write_u8(b.as_u8()),
            Value::Symbol(s) => s.hash(state),
            Value::Nested(view) => view.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational { num, den } => write!(f, "{num}/{den}"),
            Value::Bit(b) => write!(f, "{b}"),
            Value::Symbol(s) => write!(f, "{s}"),
            Value::Nested(view) => write!(f, "{view}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({self})")
    }
}

/// A colored vertex: a process id paired with a value. Two vertices with
/// equal fields are the same vertex.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub id: ProcessId,
    pub value: Value,
}

impl Vertex {
    pub fn new(id: ProcessId, value: Value) -> Vertex {
        Vertex { id, value }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.id, self.value)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A chromatic simplex: a non-empty set of vertices with pairwise distinct
/// process ids, kept sorted by id.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    vertices: Vec<Vertex>,
}

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>) -> Result<Simplex, ComplexError> {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vertices.sort();
        vertices.dedup();
        for pair in vertices.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ComplexError::NonChromatic(pair[0].id));
            }
        }
        Ok(Simplex { vertices })
    }

    pub fn from_vertex(v: Vertex) -> Simplex {
        Simplex { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The set of colors appearing in the simplex.
    pub fn ids(&self) -> BTreeSet<ProcessId> {
        self.vertices.iter().map(|v| v.id).collect()
    }

    pub fn value_of(&self, id: ProcessId) -> Option<&Value> {
        self.vertices
            .binary_search_by(|v| v.id.cmp(&id))
            .ok()
            .map(|k| &self.vertices[k].value)
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        self.value_of(v.id).is_some_and(|value| *value == v.value)
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.contains_vertex(v))
    }

    /// All `2^k - 1` non-empty subsets, in canonical order.
    pub fn faces(&self) -> Vec<Simplex> {
        let k = self.vertices.len();
        let mut faces = Vec::with_capacity((1usize << k) - 1);
        for mask in 1u32..(1u32 << k) {
            let vertices: Vec<Vertex> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.vertices[i].clone())
                .collect();
            faces.push(Simplex { vertices });
        }
        faces.sort();
        faces
    }

    /// The face induced by the given ids, if any of them occur.
    pub fn project(&self, ids: &BTreeSet<ProcessId>) -> Option<Simplex> {
        let vertices: Vec<Vertex> = self
            .vertices
            .iter()
            .filter(|v| ids.contains(&v.id))
            .cloned()
            .collect();
        if vertices.is_empty() {
            None
        } else {
            Some(Simplex { vertices })
        }
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    // Canonical order: id sets first, then the value lists.
    fn cmp(&self, other: &Self) -> Ordering {
        let ids = self.vertices.iter().map(|v| v.id);
        let other_ids = other.vertices.iter().map(|v| v.id);
        ids.cmp(other_ids).then_with(|| {
            let values = self.vertices.iter().map(|v| &v.value);
            let other_values = other.vertices.iter().map(|v| &v.value);
            values.cmp(other_values)
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.vertices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An immutable chromatic complex, stored as its subset-maximal facets in
/// canonical order. Faces are generated on demand.
#[derive(Clone, PartialEq, Eq)]
pub struct ChromaticComplex {
    ambient: u32,
    facets: Vec<Simplex>,
}

impl ChromaticComplex {
    /// Builds a complex from the given simplices, keeping only the
    /// subset-maximal ones. The ambient size is the largest id present.
    pub fn new(facets: impl IntoIterator<Item = Simplex>) -> Result<ChromaticComplex, ComplexError> {
        let mut facets: Vec<Simplex> = facets.into_iter().collect();
        if facets.is_empty() {
            return Err(ComplexError::Empty);
        }
        facets.sort();
        facets.dedup();
        // Absorb simplices that are faces of another facet.
        let mut maximal: Vec<Simplex> = Vec::with_capacity(facets.len());
        for (k, s) in facets.iter().enumerate() {
            let absorbed = facets
                .iter()
                .enumerate()
                .any(|(j, t)| j != k && s.len() < t.len() && s.is_face_of(t));
            if !absorbed {
                maximal.push(s.clone());
            }
        }
        let ambient = maximal
            .iter()
            .flat_map(|s| s.vertices().iter().map(|v| v.id.get()))
            .max()
            .unwrap_or(0);
        Ok(ChromaticComplex {
            ambient,
            facets: maximal,
        })
    }

    pub fn from_facet(s: Simplex) -> ChromaticComplex {
        ChromaticComplex {
            ambient: s.vertices().iter().map(|v| v.id.get()).max().unwrap_or(0),
            facets: vec![s],
        }
    }

    /// Overrides the ambient system size recorded for serialization.
    pub fn with_ambient(mut self, n: u32) -> ChromaticComplex {
        self.ambient = self.ambient.max(n);
        self
    }

    pub fn ambient(&self) -> u32 {
        self.ambient
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Every simplex of the complex: all non-empty faces of all facets,
    /// deduplicated, in canonical order.
    pub fn simplices(&self) -> Vec<Simplex> {
        let mut all: BTreeSet<Simplex> = BTreeSet::new();
        for facet in &self.facets {
            for face in facet.faces() {
                all.insert(face);
            }
        }
        all.into_iter().collect()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let mut all: BTreeSet<Vertex> = BTreeSet::new();
        for facet in &self.facets {
            all.extend(facet.vertices().iter().cloned());
        }
        all.into_iter().collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    pub fn ids(&self) -> BTreeSet<ProcessId> {
        self.facets.iter().flat_map(|s| s.ids()).collect()
    }

    /// Membership test: is `s` a face of some facet?
    pub fn contains(&self, s: &Simplex) -> bool {
        self.facets.iter().any(|facet| s.is_face_of(facet))
    }

    /// The subcomplex induced by the vertices with ids in `ids`.
    pub fn project(&self, ids: &BTreeSet<ProcessId>) -> Result<ChromaticComplex, ComplexError> {
        let projected: Vec<Simplex> = self
            .facets
            .iter()
            .filter_map(|facet| facet.project(ids))
            .collect();
        if projected.is_empty() {
            return Err(ComplexError::EmptyResult);
        }
        let ambient = self.ambient;
        Ok(ChromaticComplex::new(projected)?.with_ambient(ambient))
    }

    /// All 1-faces of the complex, as ordered vertex pairs, deduplicated.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut edges: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for facet in &self.facets {
            let vs = facet.vertices();
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    edges.insert((vs[i].clone(), vs[j].clone()));
                }
            }
        }
        edges.into_iter().collect()
    }

    /// Groups the complex's vertices by process id.
    pub fn vertices_by_id(&self) -> BTreeMap<ProcessId, Vec<Vertex>> {
        let mut by_id: BTreeMap<ProcessId, BTreeSet<Vertex>> = BTreeMap::new();
        for v in self.vertices() {
            by_id.entry(v.id).or_default().insert(v);
        }
        by_id
            .into_iter()
            .map(|(id, set)| (id, set.into_iter().collect()))
            .collect()
    }
}

/// Equality of complexes: equal facet sets after canonicalization. The
/// recorded ambient size is metadata and does not participate.
pub fn complexes_equal(a: &ChromaticComplex, b: &ChromaticComplex) -> bool {
    a.facets == b.facets
}

impl fmt::Debug for ChromaticComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChromaticComplex[")?;
        for (k, s) in self.facets.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}
