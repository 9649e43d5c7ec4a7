//! Fixed workloads for the benchmarks.

use std::collections::BTreeMap;

use discgrp::intertwiners::sample_ball_with;
use discgrp::random::rng_from_seed;
use discgrp::{
    build_context, build_morita, CorrespondenceContext, DirectedGraph, DiscAutomorphism,
    Intertwiner, MoritaContext, Tolerance,
};

/// A directed `n`-cycle with a loop at the first vertex and multiplicity `m`
/// everywhere.
pub fn looped_cycle(n: usize, m: usize) -> CorrespondenceContext {
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(String, String, String)> = (0..n)
        .map(|i| (format!("c{i}"), vertices[i].clone(), vertices[(i + 1) % n].clone()))
        .collect();
    edges.push(("l".into(), vertices[0].clone(), vertices[0].clone()));
    let graph = DirectedGraph::new(&vertices, &edges).expect("valid graph");
    let mult: BTreeMap<String, usize> = vertices.iter().map(|v| (v.clone(), m)).collect();
    build_context(graph, &mult).expect("valid multiplicities")
}

pub struct Workload {
    pub ctx: CorrespondenceContext,
    pub tol: Tolerance,
    pub g: DiscAutomorphism,
    pub f: DiscAutomorphism,
    pub eta: Intertwiner,
    pub morita: MoritaContext,
}

impl Workload {
    pub fn new(ctx: CorrespondenceContext, seed: u64) -> Self {
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(seed);
        let g = DiscAutomorphism::random(&ctx, &mut rng, 0.6, &tol).expect("sample inside the ball");
        let f = DiscAutomorphism::random(&ctx, &mut rng, 0.6, &tol).expect("sample inside the ball");
        let eta = sample_ball_with(&ctx, &mut rng, 0.9);
        let mut ranks = vec![1; ctx.num_vertices()];
        ranks[0] = 2;
        let morita = build_morita(&ctx, &ranks, &tol).expect("positive ranks");
        Workload {
            ctx,
            tol,
            g,
            f,
            eta,
            morita,
        }
    }
}
