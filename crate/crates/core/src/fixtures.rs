//! Small named correspondences used in tests, benchmarks and examples.

use std::collections::BTreeMap;

use crate::correspondence::{build_context, CorrespondenceContext, DirectedGraph};

fn context(vertices: &[&str], edges: &[(&str, &str, &str)], mult: &[usize]) -> CorrespondenceContext {
    let graph = DirectedGraph::new(vertices, edges).expect("fixture graph is valid");
    let multiplicities: BTreeMap<String, usize> = vertices
        .iter()
        .map(|v| v.to_string())
        .zip(mult.iter().cloned())
        .collect();
    build_context(graph, &multiplicities).expect("fixture multiplicities are valid")
}

/// One vertex, one loop, multiplicity 1: the classical disc.
pub fn scalar_case() -> CorrespondenceContext {
    context(&["v"], &[("e", "v", "v")], &[1])
}

/// Vertices `v1, v2`; edges `e1: v1→v1`, `e2: v1→v2`; multiplicities `(2, 1)`.
pub fn two_vertex() -> CorrespondenceContext {
    context(
        &["v1", "v2"],
        &[("e1", "v1", "v1"), ("e2", "v1", "v2")],
        &[2, 1],
    )
}

/// Directed 3-cycle, all multiplicities 1; no loops, no sources.
pub fn three_cycle() -> CorrespondenceContext {
    context(
        &["a", "b", "c"],
        &[("x", "a", "b"), ("y", "b", "c"), ("z", "c", "a")],
        &[1, 1, 1],
    )
}

/// Two-vertex cycle with multiplicities `(2, 1)`; no loops, no sources.
pub fn two_cycle() -> CorrespondenceContext {
    context(&["p", "q"], &[("f", "p", "q"), ("g", "q", "p")], &[2, 1])
}

/// Four vertices, six edges, mixed multiplicities up to 3 and two loops.
pub fn four_vertex() -> CorrespondenceContext {
    context(
        &["a", "b", "c", "d"],
        &[
            ("l1", "a", "a"),
            ("ab", "a", "b"),
            ("bc", "b", "c"),
            ("cd", "c", "d"),
            ("da", "d", "a"),
            ("l2", "c", "c"),
        ],
        &[2, 1, 3, 1],
    )
}

/// Edge `a→b` only: `a` is a source.
pub fn with_source() -> CorrespondenceContext {
    context(&["a", "b"], &[("e", "a", "b"), ("l", "b", "b")], &[1, 2])
}

/// All desk-scale fixtures without sources, with display names.
pub fn sourceless() -> Vec<(&'static str, CorrespondenceContext)> {
    vec![
        ("scalar", scalar_case()),
        ("two_vertex", two_vertex()),
        ("three_cycle", three_cycle()),
        ("two_cycle", two_cycle()),
        ("four_vertex", four_vertex()),
    ]
}
