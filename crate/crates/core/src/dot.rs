//! DOT export of the 1-skeleton of a chromatic complex: one node per vertex
//! labeled `id:value`, one edge per 1-face. Output is canonical, so equal
//! complexes render byte-identically.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::complex::{ChromaticComplex, Vertex};

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn complex_to_dot(complex: &ChromaticComplex) -> String {
    let vertices = complex.vertices();
    let index: BTreeMap<&Vertex, usize> =
        vertices.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let mut out = String::new();
    out.push_str("graph complex {\n");
    out.push_str("  node [shape=circle];\n");
    for (k, v) in vertices.iter().enumerate() {
        let label = escape(&format!("{}:{}", v.id, v.value));
        let _ = writeln!(out, "  v{k} [label=\"{label}\"];");
    }
    for (a, b) in complex.edges() {
        let _ = writeln!(out, "  v{} -- v{};", index[&a], index[&b]);
    }
    out.push_str("}\n");
    out
}
