//! Transport along a Morita equivalence.
//!
//! Given the graph correspondence `F` over `B = ℂ^{G⁰}` with representation
//! `σ` on `H`, and ranks `k_v ≥ 1`, let `A = ⊕_v M_{k_v}` and
//! `X = ⊕_v ℂ^{k_v}` (an `A`–`B` equivalence bimodule). The companion
//! correspondence `E = X⊗_B F⊗_B X̃` over `A` has `e`-component
//! `ℂ^{k_{r(e)}} ⊗ (ℂ^{k_{s(e)}})*`. Balanced tensor products over `B` and
//! `A` keep only matching vertex components, so every space is a direct sum
//! of plain tensor products:
//!
//! * `K = X⊗_σ H = ⊕_v ℂ^{k_v} ⊗ H_v`, index `(v, i, j)` in vertex order;
//! * `E⊗_A K = ⊕_e ℂ^{k_{r(e)}} ⊗ H_{s(e)}`, index `(e, i, j)` in edge order
//!   (the "edge-major" layout);
//! * `X⊗_B F⊗H = ⊕_v ℂ^{k_v} ⊗ (⊕_{r(e)=v} H_{s(e)})`, index `(v, i, e, j)`
//!   (the "vertex-major" layout).
//!
//! `W` is the coordinate permutation from the edge-major to the
//! vertex-major layout, and `η*^X = (I_X⊗η*) W`. The reverse direction uses
//! the isometric embedding `W': F⊗H → E⊗K` onto the `i = 0` coordinates and
//! the contraction `Q: K → H` reading the `i = 0` coordinates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::{AlgebraElement, CorrespondenceContext};
use crate::disc::{AdmissibleIsometry, DiscAutomorphism};
use crate::error::{Error, Result};
use crate::intertwiners::{sample_ball_with, Intertwiner, IntertwinerSpace, RelationSpace};
use crate::linalg::{c64, identity, operator_norm, unitary_defect, zeros, CMatrix, Tolerance};

#[derive(Clone, Debug)]
pub struct MoritaContext {
    source: CorrespondenceContext,
    ranks: Vec<usize>,
    k_offsets: Vec<usize>,
    ek_offsets: Vec<usize>,
    dim_k: usize,
    dim_ek: usize,
    perm: Vec<usize>,
    w: CMatrix,
    w_prime: CMatrix,
    contraction: CMatrix,
    target: RelationSpace,
}

/// Serializable description of a [`MoritaContext`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoritaSummary {
    pub ranks: Vec<usize>,
    pub dim_h: usize,
    pub dim_eh: usize,
    pub dim_k: usize,
    pub dim_ek: usize,
    pub source_dimension: usize,
    pub target_dimension: usize,
    /// `w_permutation[c]` is the vertex-major index of edge-major coordinate `c`.
    pub w_permutation: Vec<usize>,
}

/// Builds the companion correspondence for ranks given per vertex (in vertex
/// order).
pub fn build_morita(
    source: &CorrespondenceContext,
    ranks: &[usize],
    tol: &Tolerance,
) -> Result<MoritaContext> {
    let g = source.graph();
    if ranks.len() != g.num_vertices() {
        return Err(Error::ShapeMismatch {
            expected: (g.num_vertices(), 1),
            found: (ranks.len(), 1),
        });
    }
    if let Some(v) = ranks.iter().position(|&k| k == 0) {
        return Err(Error::RankZero(g.vertices()[v].clone()));
    }
    let m = source.multiplicities();
    let mut k_offsets = Vec::new();
    let mut dim_k = 0;
    for v in 0..g.num_vertices() {
        k_offsets.push(dim_k);
        dim_k += ranks[v] * m[v];
    }
    let mut ek_offsets = Vec::new();
    let mut dim_ek = 0;
    for e in g.edges() {
        ek_offsets.push(dim_ek);
        dim_ek += ranks[e.range] * m[e.source];
    }

    let mut perm = vec![0; dim_ek];
    let mut at = 0;
    for (v, &rank) in ranks.iter().enumerate() {
        for i in 0..rank {
            for e in g.edges_into(v) {
                let ms = m[g.edges()[e].source];
                for j in 0..ms {
                    perm[ek_offsets[e] + i * ms + j] = at;
                    at += 1;
                }
            }
        }
    }
    debug_assert_eq!(at, dim_ek);
    let mut w = zeros(dim_ek, dim_ek);
    for (c, &r) in perm.iter().enumerate() {
        w[(r, c)] = c64(1.0, 0.0);
    }

    let mut w_prime = zeros(dim_ek, source.dim_eh());
    for e in 0..g.num_edges() {
        for (j, c) in source.eh_range(e).enumerate() {
            w_prime[(ek_offsets[e] + j, c)] = c64(1.0, 0.0);
        }
    }
    let mut contraction = zeros(source.dim_h(), dim_k);
    for v in 0..g.num_vertices() {
        for (j, r) in source.h_range(v).enumerate() {
            contraction[(r, k_offsets[v] + j)] = c64(1.0, 0.0);
        }
    }

    let mut mctx = MoritaContext {
        source: source.clone(),
        ranks: ranks.to_vec(),
        k_offsets,
        ek_offsets,
        dim_k,
        dim_ek,
        perm,
        w,
        w_prime,
        contraction,
        target: RelationSpace::solve(Vec::new(), &[], &[], tol)?,
    };
    let actions = mctx
        .algebra_matrix_units()
        .into_iter()
        .map(|(v, a, b)| (mctx.induced_unit(v, a, b), mctx.left_unit_on_ek(v, a, b)))
        .collect();
    let k_blocks: Vec<_> = (0..g.num_vertices()).map(|v| mctx.k_range(v)).collect();
    let ek_blocks: Vec<_> = (0..g.num_edges()).map(|e| mctx.ek_range(e)).collect();
    mctx.target = RelationSpace::solve(actions, &k_blocks, &ek_blocks, tol)?;
    Ok(mctx)
}

impl MoritaContext {
    pub fn source(&self) -> &CorrespondenceContext {
        &self.source
    }

    /// The intertwiner space of the companion correspondence on `K`.
    pub fn target(&self) -> &RelationSpace {
        &self.target
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn dim_ek(&self) -> usize {
        self.dim_ek
    }

    /// The permutation matrix `W` (edge-major to vertex-major).
    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    /// The isometry `W': F⊗H → E⊗K`.
    pub fn w_prime(&self) -> &CMatrix {
        &self.w_prime
    }

    /// The contraction `Q: K → H`.
    pub fn contraction(&self) -> &CMatrix {
        &self.contraction
    }

    pub fn k_range(&self, v: usize) -> std::ops::Range<usize> {
        let start = self.k_offsets[v];
        start..start + self.ranks[v] * self.source.multiplicity(v)
    }

    pub fn ek_range(&self, e: usize) -> std::ops::Range<usize> {
        let edge = &self.source.graph().edges()[e];
        let start = self.ek_offsets[e];
        start..start + self.ranks[edge.range] * self.source.multiplicity(edge.source)
    }

    pub fn summary(&self) -> MoritaSummary {
        MoritaSummary {
            ranks: self.ranks.clone(),
            dim_h: self.source.dim_h(),
            dim_eh: self.source.dim_eh(),
            dim_k: self.dim_k,
            dim_ek: self.dim_ek,
            source_dimension: self.source.dimension(),
            target_dimension: self.target.dimension(),
            w_permutation: self.perm.clone(),
        }
    }

    /// Matrix units `E^{(v)}_{ab}` of `A = ⊕ M_{k_v}`.
    pub fn algebra_matrix_units(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (v, &k) in self.ranks.iter().enumerate() {
            for a in 0..k {
                for b in 0..k {
                    out.push((v, a, b));
                }
            }
        }
        out
    }

    /// `σ^X(E^{(v)}_{ab}) = E_{ab} ⊗ I_{H_v}` on the `v`-component of `K`.
    pub fn induced_unit(&self, v: usize, a: usize, b: usize) -> CMatrix {
        let mut m = zeros(self.dim_k, self.dim_k);
        let mv = self.source.multiplicity(v);
        let off = self.k_offsets[v];
        for j in 0..mv {
            m[(off + a * mv + j, off + b * mv + j)] = c64(1.0, 0.0);
        }
        m
    }

    /// `φ_E(E^{(v)}_{ab}) ⊗ I` on `E⊗K`: `E_{ab} ⊗ I` on every `e`-block with
    /// `r(e) = v`.
    pub fn left_unit_on_ek(&self, v: usize, a: usize, b: usize) -> CMatrix {
        let mut m = zeros(self.dim_ek, self.dim_ek);
        for e in self.source.graph().edges_into(v) {
            let ms = self.source.multiplicity(self.source.graph().edges()[e].source);
            let off = self.ek_offsets[e];
            for j in 0..ms {
                m[(off + a * ms + j, off + b * ms + j)] = c64(1.0, 0.0);
            }
        }
        m
    }

    /// Left action of `E^{(v)}_{ab}` on the vertex-major layout.
    fn left_unit_on_vm(&self, v: usize, a: usize, b: usize) -> CMatrix {
        self.w.clone() * self.left_unit_on_ek(v, a, b) * self.w.adjoint()
    }

    /// Right action of `b ∈ B` on the edge-major layout: `b(s(e))` on the
    /// `e`-block.
    fn right_on_ek(&self, b: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim_ek, self.dim_ek);
        for (e, edge) in self.source.graph().edges().iter().enumerate() {
            for i in self.ek_range(e) {
                m[(i, i)] = b.0[edge.source];
            }
        }
        m
    }

    /// Right action of `b ∈ B` on the vertex-major layout, built from the
    /// `(v, i, e, j)` enumeration directly.
    fn right_on_vm(&self, b: &AlgebraElement) -> CMatrix {
        let g = self.source.graph();
        let mut m = zeros(self.dim_ek, self.dim_ek);
        let mut at = 0;
        for v in 0..g.num_vertices() {
            for _ in 0..self.ranks[v] {
                for e in g.edges_into(v) {
                    let s = g.edges()[e].source;
                    for _ in 0..self.source.multiplicity(s) {
                        m[(at, at)] = b.0[s];
                        at += 1;
                    }
                }
            }
        }
        m
    }

    /// Left action of `E^{(v)}_{ab}` on the vertex-major layout, built from
    /// the `(v, i, e, j)` enumeration directly.
    fn left_unit_on_vm_direct(&self, v0: usize, a: usize, b: usize) -> CMatrix {
        let g = self.source.graph();
        let mut m = zeros(self.dim_ek, self.dim_ek);
        let mut off = 0;
        for v in 0..g.num_vertices() {
            let width: usize = g
                .edges_into(v)
                .into_iter()
                .map(|e| self.source.multiplicity(g.edges()[e].source))
                .sum();
            if v == v0 {
                for t in 0..width {
                    m[(off + a * width + t, off + b * width + t)] = c64(1.0, 0.0);
                }
            }
            off += self.ranks[v] * width;
        }
        m
    }

    /// Residual of `W` being a unitary bimodule map: `W` intertwines the left
    /// `A`-actions and the right `B`-actions of the two layouts, and `W'` is
    /// an isometry.
    pub fn bimodule_defect(&self) -> f64 {
        let n = self.source.num_vertices();
        let mut worst = unitary_defect(&self.w);
        worst = worst.max(operator_norm(
            &(self.w_prime.adjoint() * &self.w_prime - identity(self.source.dim_eh())),
        ));
        for (v, a, b) in self.algebra_matrix_units() {
            let lhs = &self.w * self.left_unit_on_ek(v, a, b);
            let rhs = self.left_unit_on_vm_direct(v, a, b) * &self.w;
            worst = worst.max(operator_norm(&(lhs - rhs)));
            let via_w = self.left_unit_on_vm(v, a, b);
            worst = worst.max(operator_norm(&(via_w - self.left_unit_on_vm_direct(v, a, b))));
        }
        for v in 0..n {
            let b = AlgebraElement::indicator(n, v);
            let lhs = &self.w * self.right_on_ek(&b);
            let rhs = self.right_on_vm(&b) * &self.w;
            worst = worst.max(operator_norm(&(lhs - rhs)));
        }
        worst
    }

    /// `σ^X(a)` for `a ∈ B` acting diagonally: `a(v)·I` on the `v`-component.
    pub fn induced_rep(&self, a: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim_k, self.dim_k);
        for v in 0..self.source.num_vertices() {
            for i in self.k_range(v) {
                m[(i, i)] = a.0[v];
            }
        }
        m
    }

    /// `I_X ⊗ η*` from the vertex-major layout to `K`.
    fn lift_vertex_major(&self, eta: &CMatrix) -> CMatrix {
        let g = self.source.graph();
        let mut out = zeros(self.dim_k, self.dim_ek);
        let mut col = 0;
        for v in 0..g.num_vertices() {
            let group: Vec<usize> = g.edges_into(v);
            let rows = self.source.h_range(v);
            let mv = rows.len();
            for i in 0..self.ranks[v] {
                for &e in &group {
                    let cols = self.source.eh_range(e);
                    let block = eta.view((rows.start, cols.start), (mv, cols.len()));
                    out.view_mut((self.k_offsets[v] + i * mv, col), (mv, cols.len()))
                        .copy_from(&block);
                    col += cols.len();
                }
            }
        }
        out
    }

    /// `η*^X = (I_X ⊗ η*) W`.
    pub fn transport_matrix(&self, eta: &CMatrix) -> CMatrix {
        self.lift_vertex_major(eta) * &self.w
    }

    pub fn transport(&self, eta: &Intertwiner) -> Intertwiner {
        Intertwiner::from_matrix_unchecked(self.transport_matrix(eta.matrix()))
    }

    /// `Q T W'`: the reverse transport.
    pub fn transport_back(&self, eta_x: &Intertwiner) -> Intertwiner {
        Intertwiner::from_matrix_unchecked(&self.contraction * eta_x.matrix() * &self.w_prime)
    }

    /// `⊕_v I_{k_v} ⊗ u_v` on `K`.
    fn lift_u(&self, u: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
        let off = self.source.off_block_diagonal_norm(u);
        if off > tol.scaled(self.source.dim_h()) {
            return Err(Error::NotAdmissible(format!(
                "u has off-diagonal vertex blocks of norm {off:e}"
            )));
        }
        let mut out = zeros(self.dim_k, self.dim_k);
        for v in 0..self.source.num_vertices() {
            let r = self.source.h_range(v);
            let mv = r.len();
            let block = u.view((r.start, r.start), (mv, mv));
            for i in 0..self.ranks[v] {
                let at = self.k_offsets[v] + i * mv;
                out.view_mut((at, at), (mv, mv)).copy_from(&block);
            }
        }
        Ok(out)
    }

    /// `W*(I_X ⊗ v*)W` on `E⊗K` (edge-major layout).
    fn lift_v_adj(&self, v_adj: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
        let g = self.source.graph();
        let edges = g.edges();
        let mut out = zeros(self.dim_ek, self.dim_ek);
        for e1 in 0..edges.len() {
            for e2 in 0..edges.len() {
                let (r1, r2) = (self.source.eh_range(e1), self.source.eh_range(e2));
                let block = v_adj
                    .view((r1.start, r2.start), (r1.len(), r2.len()))
                    .clone_owned();
                if edges[e1].range != edges[e2].range {
                    let norm = operator_norm(&block);
                    if norm > tol.scaled(self.source.dim_eh()) {
                        return Err(Error::NotAdmissible(format!(
                            "v* couples `{}` and `{}` with different ranges",
                            edges[e1].name, edges[e2].name
                        )));
                    }
                    continue;
                }
                for i in 0..self.ranks[edges[e1].range] {
                    out.view_mut(
                        (self.ek_offsets[e1] + i * r1.len(), self.ek_offsets[e2] + i * r2.len()),
                        (r1.len(), r2.len()),
                    )
                    .copy_from(&block);
                }
            }
        }
        Ok(out)
    }

    /// Lifts an admissible isometry of the source to the target.
    pub fn lift_isometry(&self, omega: &AdmissibleIsometry, tol: &Tolerance) -> Result<AdmissibleIsometry> {
        AdmissibleIsometry::new(
            &self.target,
            self.lift_u(omega.u(), tol)?,
            self.lift_v_adj(omega.v_adj(), tol)?,
        )
    }

    /// `𝓕(g) = transport ∘ g ∘ transport⁻¹`, canonically
    /// `(⊕ I⊗u_v, W*(I⊗v*)W, γ*^X)`.
    pub fn functor_f(&self, g: &DiscAutomorphism, tol: &Tolerance) -> Result<DiscAutomorphism> {
        let omega = self.lift_isometry(g.omega(), tol)?;
        DiscAutomorphism::new(omega, &self.transport(g.gamma()), tol)
    }

    /// `𝓖(g)` for a target automorphism whose isometry data has the form
    /// `I_X ⊗ (·)`, i.e. `u` commutes with `σ^X(A)` and `v*` with
    /// `φ_E(A)⊗I`.
    pub fn functor_g(&self, g: &DiscAutomorphism, tol: &Tolerance) -> Result<DiscAutomorphism> {
        let u = g.omega().u();
        let v_adj = g.omega().v_adj();
        let defect = self
            .target
            .commutant_defect(u)
            .max(self.target.eh_commutant_defect(v_adj));
        if defect > tol.scaled(self.dim_k + self.dim_ek) {
            return Err(Error::NotKroneckerForm { defect });
        }
        let q = &self.contraction;
        let wp = &self.w_prime;
        let omega = AdmissibleIsometry::new(&self.source, q * u * q.adjoint(), wp.adjoint() * v_adj * wp)?;
        DiscAutomorphism::new(omega, &self.transport_back(g.gamma()), tol)
    }

    /// Random target automorphism with isometry data of the form `I_X ⊗ (·)`
    /// and `γ*` sampled from the target space directly.
    pub fn random_target_automorphism<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        radius_cap: f64,
        tol: &Tolerance,
    ) -> Result<DiscAutomorphism> {
        let omega = AdmissibleIsometry::random(&self.source, rng);
        let lifted = self.lift_isometry(&omega, tol)?;
        let gamma = sample_ball_with(&self.target, rng, radius_cap);
        DiscAutomorphism::new(lifted, &gamma, tol)
    }

    /// ε-square residual
    /// `‖𝓖𝓕(g(η₁)) − (𝓖𝓕)(g)(𝓖𝓕(η₁))‖`.
    pub fn epsilon_square_defect(&self, g: &DiscAutomorphism, eta1: &Intertwiner, tol: &Tolerance) -> Result<f64> {
        let gf = |x: &Intertwiner| self.transport_back(&self.transport(x));
        let lhs = gf(&g.apply(eta1)?);
        let ggf = self.functor_g(&self.functor_f(g, tol)?, tol)?;
        let rhs = ggf.apply(&gf(eta1))?;
        Ok(lhs.distance(&rhs))
    }

    /// λ-square residual
    /// `‖(𝓕𝓖)(g)(𝓕𝓖(η₁)) − g(η₁)‖` for a target automorphism and point.
    pub fn lambda_square_defect(&self, g: &DiscAutomorphism, eta1: &Intertwiner, tol: &Tolerance) -> Result<f64> {
        let fg_point = self.transport(&self.transport_back(eta1));
        let fg = self.functor_f(&self.functor_g(g, tol)?, tol)?;
        Ok(fg.apply(&fg_point)?.distance(&g.apply(eta1)?))
    }

    /// Both naturality residuals: the ε-square at `(g, η₁*)` and the λ-square
    /// at `(𝓕(g), η₁*^X)`.
    pub fn naturality_defect(&self, g: &DiscAutomorphism, eta1: &Intertwiner, tol: &Tolerance) -> Result<(f64, f64)> {
        let eps = self.epsilon_square_defect(g, eta1, tol)?;
        let lam = self.lambda_square_defect(&self.functor_f(g, tol)?, &self.transport(eta1), tol)?;
        Ok((eps, lam))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::linalg::span_rank;
    use crate::random::{haar_unitary, rng_from_seed};

    #[test]
    fn bookkeeping() {
        let tol = Tolerance::default();
        let ctx = fixtures::two_vertex();
        let m = build_morita(&ctx, &[2, 1], &tol).unwrap();
        assert_eq!(m.dim_k(), 2 * 2 + 1);
        // e1: k_{v1}·m_{v1} = 4, e2: k_{v2}·m_{v1} = 2.
        assert_eq!(m.dim_ek(), 6);
        assert!(m.bimodule_defect() < 1e-15);
        assert_eq!(m.target().dimension(), ctx.dimension());
        let p = m.induced_rep(&AlgebraElement::indicator(2, 0));
        let rank = (0..p.nrows()).filter(|&i| p[(i, i)].norm() > 0.5).count();
        assert_eq!(rank, 4);

        assert!(matches!(build_morita(&ctx, &[0, 1], &tol), Err(Error::RankZero(_))));
    }

    #[test]
    fn trivial_ranks_are_identity() {
        let tol = Tolerance::default();
        for (_, ctx) in fixtures::sourceless() {
            let ones = vec![1; ctx.num_vertices()];
            let m = build_morita(&ctx, &ones, &tol).unwrap();
            let eta = sample_disc(&ctx, 3, 0.7);
            let x = m.transport(&eta);
            assert!(operator_norm(&(x.matrix() - eta.matrix())) < 1e-15);
        }
    }

    #[test]
    fn transport_is_isometric_and_onto() {
        let tol = Tolerance::default();
        let ctx = fixtures::four_vertex();
        let m = build_morita(&ctx, &[2, 1, 3, 2], &tol).unwrap();
        let eta = sample_disc(&ctx, 8, 0.7);
        let x = m.transport(&eta);
        assert!((x.norm() - 0.7).abs() < 1e-12);
        assert!(m.target().intertwining_defect(x.matrix()) < 1e-14);
        let images: Vec<_> = ctx
            .basis()
            .iter()
            .map(|b| m.transport_matrix(b))
            .collect();
        assert_eq!(span_rank(&images, &tol), m.target().dimension());
        assert!(m.transport_back(&x).distance(&eta) < 1e-15);
    }

    #[test]
    fn functors_round_trip() {
        let tol = Tolerance::default();
        let ctx = fixtures::two_vertex();
        let m = build_morita(&ctx, &[2, 1], &tol).unwrap();
        let mut rng = rng_from_seed(12);
        let g = DiscAutomorphism::random(&ctx, &mut rng, 0.5, &tol).unwrap();
        let back = m.functor_g(&m.functor_f(&g, &tol).unwrap(), &tol).unwrap();
        assert!(back.distance(&g, &ctx) < 1e-12);
        let eta = sample_disc(&ctx, 2, 0.6);
        let (e, l) = m.naturality_defect(&g, &eta, &tol).unwrap();
        assert!(e < 1e-12 && l < 1e-12, "{e} {l}");
    }

    #[test]
    fn non_kronecker_is_rejected() {
        let tol = Tolerance::default();
        let ctx = fixtures::two_vertex();
        let m = build_morita(&ctx, &[2, 1], &tol).unwrap();
        let mut rng = rng_from_seed(1);
        let u = haar_unitary(&mut rng, m.dim_k());
        let w = AdmissibleIsometry::new(m.target(), u, identity(m.dim_ek())).unwrap();
        let g = DiscAutomorphism::from_isometry(m.target(), &w);
        assert!(matches!(m.functor_g(&g, &tol), Err(Error::NotKroneckerForm { .. })));
    }
}
