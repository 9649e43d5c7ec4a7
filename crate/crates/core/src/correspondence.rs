//! Finite-dimensional graph correspondences.
//!
//! A directed graph `G = (G⁰, G¹, r, s)` together with a multiplicity `m_v ≥ 1`
//! per vertex determines
//!
//! * the coefficient algebra `A = ℂ^{G⁰}` (functions on vertices),
//! * the Hilbert space `H = ⊕_v H_v` with `dim H_v = m_v`, on which `A` acts by
//!   `σ(a) = ⊕_v a(v)·I`,
//! * the space `E⊗H = ⊕_e H_{s(e)}`, on which `A` acts on the left by
//!   `φ(a)⊗I = ⊕_e a(r(e))·I`.
//!
//! Block layouts follow the input order of vertices and edges.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, zeros, CMatrix};

/// One edge of the graph JSON document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub name: String,
    pub src: String,
    pub rng: String,
}

/// The graph JSON document:
/// `{"vertices": [...], "edges": [{"name","src","rng"}], "multiplicities": {...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub multiplicities: BTreeMap<String, usize>,
}

impl GraphSpec {
    /// Parses the JSON document; parse errors carry line and column.
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| {
            let text = e.to_string();
            let message = text.rsplit_once(" at line ").map_or(text.as_str(), |(m, _)| m);
            Error::Parse(format!(
                "graph JSON at line {}, column {}: {}",
                e.line(),
                e.column(),
                message
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub range: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.source == self.range
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    /// Builds a graph from vertex names and `(name, source, range)` triples.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        let mut seen = HashSet::new();
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(Error::DuplicateName(v.clone()));
            }
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };
        let mut edge_names = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (name, src, rng) in edges {
            let name = name.as_ref().to_string();
            if !edge_names.insert(name.clone()) || seen.contains(&name) {
                return Err(Error::DuplicateName(name));
            }
            out.push(Edge {
                name,
                source: lookup(src.as_ref())?,
                range: lookup(rng.as_ref())?,
            });
        }
        Ok(DirectedGraph {
            vertices,
            edges: out,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Vertices that are not the range of any edge.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| !self.edges.iter().any(|e| e.range == v))
            .collect()
    }

    pub fn has_sources(&self) -> bool {
        !self.sources().is_empty()
    }

    pub fn loops(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].is_loop())
            .collect()
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }

    /// Edges whose range is `v`, in input order.
    pub fn edges_into(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].range == v)
            .collect()
    }
}

/// An element of `A = ℂ^{G⁰}`: one scalar per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement(pub Vec<Complex64>);

impl AlgebraElement {
    pub fn constant(n: usize, value: Complex64) -> Self {
        AlgebraElement(vec![value; n])
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, c64(1.0, 0.0))
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, c64(0.0, 0.0))
    }

    /// Indicator function of vertex `v`.
    pub fn indicator(n: usize, v: usize) -> Self {
        let mut values = vec![c64(0.0, 0.0); n];
        values[v] = c64(1.0, 0.0);
        AlgebraElement(values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        AlgebraElement(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn adjoint(&self) -> Self {
        AlgebraElement(self.0.iter().map(|a| a.conj()).collect())
    }
}

/// Concrete realisation of a graph correspondence with vertex multiplicities.
#[derive(Clone, Debug)]
pub struct CorrespondenceContext {
    graph: DirectedGraph,
    multiplicities: Vec<usize>,
    h_offsets: Vec<usize>,
    eh_offsets: Vec<usize>,
    dim_h: usize,
    dim_eh: usize,
    pub(crate) actions: Vec<(CMatrix, CMatrix)>,
    pub(crate) pattern_basis: Vec<CMatrix>,
}

/// Builds the context from a graph and a multiplicity per vertex name.
pub fn build_context(
    graph: DirectedGraph,
    multiplicities: &BTreeMap<String, usize>,
) -> Result<CorrespondenceContext> {
    for name in multiplicities.keys() {
        if graph.vertex_index(name).is_none() {
            return Err(Error::UnknownVertex(name.clone()));
        }
    }
    let mut mult = Vec::with_capacity(graph.num_vertices());
    for v in graph.vertices() {
        match multiplicities.get(v) {
            None => return Err(Error::MissingMultiplicity(v.clone())),
            Some(0) => return Err(Error::ZeroMultiplicity(v.clone())),
            Some(&m) => mult.push(m),
        }
    }
    let mut h_offsets = Vec::with_capacity(mult.len());
    let mut dim_h = 0;
    for &m in &mult {
        h_offsets.push(dim_h);
        dim_h += m;
    }
    let mut eh_offsets = Vec::with_capacity(graph.num_edges());
    let mut dim_eh = 0;
    for e in graph.edges() {
        eh_offsets.push(dim_eh);
        dim_eh += mult[e.source];
    }
    let mut ctx = CorrespondenceContext {
        graph,
        multiplicities: mult,
        h_offsets,
        eh_offsets,
        dim_h,
        dim_eh,
        actions: Vec::new(),
        pattern_basis: Vec::new(),
    };
    let n = ctx.graph.num_vertices();
    ctx.actions = (0..n)
        .map(|v| {
            let a = AlgebraElement::indicator(n, v);
            (ctx.sigma_op(&a), ctx.phi_tensor_op(&a))
        })
        .collect();
    ctx.pattern_basis = crate::intertwiners::pattern_matrix_units(&ctx);
    Ok(ctx)
}

impl CorrespondenceContext {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let edges: Vec<(&str, &str, &str)> = spec
            .edges
            .iter()
            .map(|e| (e.name.as_str(), e.src.as_str(), e.rng.as_str()))
            .collect();
        let vertices: Vec<&str> = spec.vertices.iter().map(String::as_str).collect();
        let graph = DirectedGraph::new(&vertices, &edges)?;
        build_context(graph, &spec.multiplicities)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_spec(&GraphSpec::from_json_str(s)?)
    }

    pub fn to_spec(&self) -> GraphSpec {
        let g = &self.graph;
        GraphSpec {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    name: e.name.clone(),
                    src: g.vertices()[e.source].clone(),
                    rng: g.vertices()[e.range].clone(),
                })
                .collect(),
            multiplicities: g
                .vertices()
                .iter()
                .cloned()
                .zip(self.multiplicities.iter().cloned())
                .collect(),
        }
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, v: usize) -> usize {
        self.multiplicities[v]
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_eh(&self) -> usize {
        self.dim_eh
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    /// Coordinates of `H_v` inside `H`.
    pub fn h_range(&self, v: usize) -> Range<usize> {
        let start = self.h_offsets[v];
        start..start + self.multiplicities[v]
    }

    /// Coordinates of the `e`-block `H_{s(e)}` inside `E⊗H`.
    pub fn eh_range(&self, e: usize) -> Range<usize> {
        let start = self.eh_offsets[e];
        start..start + self.multiplicities[self.graph.edges[e].source]
    }

    /// `σ(a) = ⊕_v a(v)·I_{H_v}`.
    pub fn sigma_op(&self, a: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim_h, self.dim_h);
        for v in 0..self.num_vertices() {
            for i in self.h_range(v) {
                m[(i, i)] = a.0[v];
            }
        }
        m
    }

    /// `φ(a)⊗I = ⊕_e a(r(e))·I_{H_{s(e)}}`.
    pub fn phi_tensor_op(&self, a: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim_eh, self.dim_eh);
        for (e, edge) in self.graph.edges().iter().enumerate() {
            for i in self.eh_range(e) {
                m[(i, i)] = a.0[edge.range];
            }
        }
        m
    }

    /// Right action `ρ(b) = ⊕_e b(s(e))·I_{H_{s(e)}}` on `E⊗H`.
    pub fn right_action_op(&self, b: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim_eh, self.dim_eh);
        for (e, edge) in self.graph.edges().iter().enumerate() {
            for i in self.eh_range(e) {
                m[(i, i)] = b.0[edge.source];
            }
        }
        m
    }

    /// Matrix-unit basis of the commutant `σ(A)' = ⊕_v B(H_v)`.
    pub fn commutant_basis(&self) -> Vec<CMatrix> {
        let mut basis = Vec::new();
        for v in 0..self.num_vertices() {
            for i in self.h_range(v) {
                for j in self.h_range(v) {
                    let mut m = zeros(self.dim_h, self.dim_h);
                    m[(i, j)] = c64(1.0, 0.0);
                    basis.push(m);
                }
            }
        }
        basis
    }

    /// `I_E ⊗ c` on `E⊗H` for `c ∈ σ(A)'`: the `s(e)` diagonal block of `c`
    /// placed on each `e`-block.
    pub fn commutant_on_eh(&self, c: &CMatrix) -> CMatrix {
        let mut m = zeros(self.dim_eh, self.dim_eh);
        for (e, edge) in self.graph.edges().iter().enumerate() {
            let src = self.h_range(edge.source);
            let dst = self.eh_range(e);
            m.view_mut((dst.start, dst.start), (dst.len(), dst.len()))
                .copy_from(&c.view((src.start, src.start), (src.len(), src.len())));
        }
        m
    }

    /// Norm of the part of `c` lying off the vertex diagonal blocks.
    pub fn off_block_diagonal_norm(&self, c: &CMatrix) -> f64 {
        let mut masked = c.clone();
        for v in 0..self.num_vertices() {
            let r = self.h_range(v);
            masked
                .view_mut((r.start, r.start), (r.len(), r.len()))
                .fill(c64(0.0, 0.0));
        }
        crate::linalg::operator_norm(&masked)
    }
}
