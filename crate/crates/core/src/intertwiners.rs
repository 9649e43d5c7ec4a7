//! Intertwining spaces and their unit balls.
//!
//! An intertwiner is an operator `η*: E⊗H → H` with
//! `η*(φ(a)⊗I) = σ(a)η*` for all `a`. For a graph correspondence this forces
//! the `(v, e)` block of `η*` to vanish unless `r(e) = v`.
//!
//! [`IntertwinerSpace`] abstracts over where the relation comes from, so the
//! same disc machinery runs on a graph correspondence and on the companion
//! correspondence built by [`crate::morita`].

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::{AlgebraElement, CorrespondenceContext};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, check_finite, frobenius_inner, nullspace_basis, operator_norm, unvectorize, zeros,
    CMatrix, Tolerance,
};
use crate::random::{complex_gaussian, rng_from_seed};

/// A space of operators `E⊗H → H` cut out by an intertwining relation with
/// respect to finitely many pairs `(σ(a_k), φ(a_k)⊗I)`.
pub trait IntertwinerSpace {
    fn dim_h(&self) -> usize;

    fn dim_eh(&self) -> usize;

    /// Pairs `(σ(a), φ(a)⊗I)` for a spanning set of the coefficient algebra.
    fn actions(&self) -> &[(CMatrix, CMatrix)];

    /// Frobenius-orthonormal basis of the intertwiner space.
    fn basis(&self) -> &[CMatrix];

    fn dimension(&self) -> usize {
        self.basis().len()
    }

    /// `max_k ‖M(φ(a_k)⊗I) − σ(a_k)M‖`.
    fn intertwining_defect(&self, m: &CMatrix) -> f64 {
        self.actions()
            .iter()
            .map(|(s, f)| operator_norm(&(m * f - s * m)))
            .fold(0.0, f64::max)
    }

    /// `max_k ‖cσ(a_k) − σ(a_k)c‖`: distance-like measure of `c ∉ σ(A)'`.
    fn commutant_defect(&self, c: &CMatrix) -> f64 {
        self.actions()
            .iter()
            .map(|(s, _)| operator_norm(&(c * s - s * c)))
            .fold(0.0, f64::max)
    }

    /// `max_k ‖d(φ(a_k)⊗I) − (φ(a_k)⊗I)d‖` for an operator `d` on `E⊗H`.
    fn eh_commutant_defect(&self, d: &CMatrix) -> f64 {
        self.actions()
            .iter()
            .map(|(_, f)| operator_norm(&(d * f - f * d)))
            .fold(0.0, f64::max)
    }

    /// Orthogonal (Frobenius) projection onto the intertwiner space.
    fn project(&self, m: &CMatrix) -> CMatrix {
        let mut out = zeros(self.dim_h(), self.dim_eh());
        for b in self.basis() {
            out += b * frobenius_inner(b, m);
        }
        out
    }
}

impl IntertwinerSpace for CorrespondenceContext {
    fn dim_h(&self) -> usize {
        CorrespondenceContext::dim_h(self)
    }

    fn dim_eh(&self) -> usize {
        CorrespondenceContext::dim_eh(self)
    }

    fn actions(&self) -> &[(CMatrix, CMatrix)] {
        &self.actions
    }

    fn basis(&self) -> &[CMatrix] {
        &self.pattern_basis
    }
}

/// A point of an intertwiner space: the matrix `η*` of shape
/// `dim_H × dim_EH`.
#[derive(Clone, Debug, PartialEq)]
pub struct Intertwiner(CMatrix);

impl Intertwiner {
    /// Validates shape, finiteness and the intertwining relation.
    pub fn new(space: &dyn IntertwinerSpace, m: CMatrix, tol: &Tolerance) -> Result<Self> {
        check_shape(space, &m)?;
        check_finite(&m)?;
        let defect = space.intertwining_defect(&m);
        if defect > relation_tol(&m, tol) {
            return Err(Error::NotAnIntertwiner { defect });
        }
        Ok(Intertwiner(m))
    }

    /// Wraps a matrix already known to intertwine (output of a closed
    /// operation on intertwiners).
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        Intertwiner(m)
    }

    pub fn zero(space: &dyn IntertwinerSpace) -> Self {
        Intertwiner(zeros(space.dim_h(), space.dim_eh()))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Operator norm `‖η*‖`.
    pub fn norm(&self) -> f64 {
        operator_norm(&self.0)
    }

    /// `η = (η*)*: H → E⊗H`.
    pub fn adjoint(&self) -> CMatrix {
        self.0.adjoint()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Intertwiner(&self.0 * s)
    }

    pub fn neg(&self) -> Self {
        Intertwiner(-&self.0)
    }

    pub fn distance(&self, other: &Intertwiner) -> f64 {
        operator_norm(&(&self.0 - &other.0))
    }
}

fn check_shape(space: &dyn IntertwinerSpace, m: &CMatrix) -> Result<()> {
    let expected = (space.dim_h(), space.dim_eh());
    if m.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: m.shape(),
        });
    }
    Ok(())
}

fn relation_tol(m: &CMatrix, tol: &Tolerance) -> f64 {
    tol.abs_tol * operator_norm(m).max(1.0)
}

/// `allowed[v][e]` iff `r(e) = v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntertwinerPattern {
    pub allowed: Vec<Vec<bool>>,
}

impl IntertwinerPattern {
    pub fn is_allowed(&self, v: usize, e: usize) -> bool {
        self.allowed[v][e]
    }

    /// Allowed `(vertex, edge)` cells in edge order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let edges = self.allowed.first().map_or(0, Vec::len);
        let mut out = Vec::new();
        for e in 0..edges {
            for (v, row) in self.allowed.iter().enumerate() {
                if row[e] {
                    out.push((v, e));
                }
            }
        }
        out
    }
}

pub fn pattern(ctx: &CorrespondenceContext) -> IntertwinerPattern {
    let g = ctx.graph();
    IntertwinerPattern {
        allowed: (0..g.num_vertices())
            .map(|v| g.edges().iter().map(|e| e.range == v).collect())
            .collect(),
    }
}

/// Matrix units supported on the allowed blocks, ordered by edge, then row,
/// then column.
pub(crate) fn pattern_matrix_units(ctx: &CorrespondenceContext) -> Vec<CMatrix> {
    let mut basis = Vec::new();
    for (v, e) in pattern(ctx).cells() {
        for i in ctx.h_range(v) {
            for j in ctx.eh_range(e) {
                let mut m = zeros(ctx.dim_h(), ctx.dim_eh());
                m[(i, j)] = c64(1.0, 0.0);
                basis.push(m);
            }
        }
    }
    basis
}

/// Whether `m` satisfies the intertwining relation within
/// `abs_tol · max(1, ‖m‖)`.
pub fn is_intertwiner(space: &dyn IntertwinerSpace, m: &CMatrix, tol: &Tolerance) -> Result<bool> {
    check_shape(space, m)?;
    Ok(space.intertwining_defect(m) <= relation_tol(m, tol))
}

/// Seeded point of the ball `‖η*‖ ≤ radius_cap`.
///
/// Coefficients along the orthonormal basis are complex Gaussians (for a
/// graph correspondence this fills the allowed blocks entrywise), and the
/// result is rescaled to norm `radius_cap·(1 − 10⁻¹²)`, strictly inside the
/// cap despite rounding.
pub fn sample_disc(space: &dyn IntertwinerSpace, seed: u64, radius_cap: f64) -> Intertwiner {
    sample_disc_with(space, &mut rng_from_seed(seed), radius_cap)
}

pub fn sample_disc_with<R: Rng + ?Sized>(
    space: &dyn IntertwinerSpace,
    rng: &mut R,
    radius_cap: f64,
) -> Intertwiner {
    assert!(
        radius_cap > 0.0 && radius_cap < 1.0,
        "radius_cap must lie in (0, 1), got {radius_cap}"
    );
    let mut m = zeros(space.dim_h(), space.dim_eh());
    for b in space.basis() {
        m += b * complex_gaussian(rng);
    }
    let norm = operator_norm(&m);
    Intertwiner(m * c64(radius_cap * (1.0 - 1e-12) / (norm + 1e-300), 0.0))
}

/// Like [`sample_disc_with`] but with a radius drawn uniformly from
/// `(0, radius_cap]`, so the sample covers the interior of the ball.
pub fn sample_ball_with<R: Rng + ?Sized>(
    space: &dyn IntertwinerSpace,
    rng: &mut R,
    radius_cap: f64,
) -> Intertwiner {
    let t: f64 = rng.random_range(0.05..=1.0);
    sample_disc_with(space, rng, radius_cap * t)
}

/// Generic intertwiner space for block-diagonal actions.
///
/// When every action is block diagonal for the given partitions of `H` and
/// `E⊗H`, the relation decouples over block pairs and the basis is the union
/// of the per-block kernels, which keeps every SVD small.
#[derive(Clone, Debug)]
pub struct RelationSpace {
    dim_h: usize,
    dim_eh: usize,
    actions: Vec<(CMatrix, CMatrix)>,
    basis: Vec<CMatrix>,
}

impl RelationSpace {
    pub fn solve(
        actions: Vec<(CMatrix, CMatrix)>,
        h_blocks: &[Range<usize>],
        eh_blocks: &[Range<usize>],
        tol: &Tolerance,
    ) -> Result<Self> {
        let dim_h = h_blocks.iter().map(|r| r.len()).sum();
        let dim_eh = eh_blocks.iter().map(|r| r.len()).sum();
        for (s, f) in &actions {
            if s.shape() != (dim_h, dim_h) {
                return Err(Error::ShapeMismatch {
                    expected: (dim_h, dim_h),
                    found: s.shape(),
                });
            }
            if f.shape() != (dim_eh, dim_eh) {
                return Err(Error::ShapeMismatch {
                    expected: (dim_eh, dim_eh),
                    found: f.shape(),
                });
            }
            if off_block_norm(s, h_blocks) > tol.abs_tol || off_block_norm(f, eh_blocks) > tol.abs_tol {
                return Err(Error::Numerical(
                    "actions are not block diagonal for the given partition".into(),
                ));
            }
        }
        let mut basis = Vec::new();
        for p in h_blocks {
            for q in eh_blocks {
                let (np, nq) = (p.len(), q.len());
                if np == 0 || nq == 0 {
                    continue;
                }
                // vec(XF) = (Fᵀ ⊗ I) vec X and vec(SX) = (I ⊗ S) vec X.
                let mut rows = Vec::new();
                for (s, f) in &actions {
                    let s_pp = s.view((p.start, p.start), (np, np)).clone_owned();
                    let f_qq = f.view((q.start, q.start), (nq, nq)).clone_owned();
                    let l = f_qq.transpose().kronecker(&CMatrix::identity(np, np))
                        - CMatrix::identity(nq, nq).kronecker(&s_pp);
                    if l.iter().any(|z| z.norm() > 0.0) {
                        rows.push(l);
                    }
                }
                let kernel = if rows.is_empty() {
                    (0..np * nq)
                        .map(|i| {
                            let mut v = zeros(np * nq, 1);
                            v[(i, 0)] = c64(1.0, 0.0);
                            v
                        })
                        .collect()
                } else {
                    let total: usize = rows.iter().map(|r| r.nrows()).sum();
                    let mut stacked = zeros(total, np * nq);
                    let mut at = 0;
                    for r in &rows {
                        stacked.view_mut((at, 0), (r.nrows(), np * nq)).copy_from(r);
                        at += r.nrows();
                    }
                    nullspace_basis(&stacked, tol)
                };
                for x in kernel {
                    let block = unvectorize(&x, np, nq);
                    let mut m = zeros(dim_h, dim_eh);
                    m.view_mut((p.start, q.start), (np, nq)).copy_from(&block);
                    basis.push(m);
                }
            }
        }
        Ok(RelationSpace {
            dim_h,
            dim_eh,
            actions,
            basis,
        })
    }
}

fn off_block_norm(m: &CMatrix, blocks: &[Range<usize>]) -> f64 {
    let mut masked = m.clone();
    for b in blocks {
        masked
            .view_mut((b.start, b.start), (b.len(), b.len()))
            .fill(c64(0.0, 0.0));
    }
    masked.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl IntertwinerSpace for RelationSpace {
    fn dim_h(&self) -> usize {
        self.dim_h
    }

    fn dim_eh(&self) -> usize {
        self.dim_eh
    }

    fn actions(&self) -> &[(CMatrix, CMatrix)] {
        &self.actions
    }

    fn basis(&self) -> &[CMatrix] {
        &self.basis
    }
}

/// Frobenius-orthonormal basis of the center: intertwiners `b` with
/// `c·b = b·(I_E⊗c)` for every `c ∈ σ(A)'`.
#[derive(Clone, Debug)]
pub struct CenterBasis {
    elements: Vec<Intertwiner>,
}

impl CenterBasis {
    pub fn elements(&self) -> &[Intertwiner] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let mut out = zeros(m.nrows(), m.ncols());
        for b in &self.elements {
            out += b.matrix() * frobenius_inner(b.matrix(), m);
        }
        out
    }

    /// Operator-norm distance from `m` to the span of the center.
    pub fn distance(&self, m: &CMatrix) -> f64 {
        operator_norm(&(m - self.project(m)))
    }

    pub fn contains(&self, m: &CMatrix, tol: &Tolerance) -> bool {
        self.distance(m) <= tol.scaled(m.len().max(1)) * operator_norm(m).max(1.0)
    }
}

/// Residual of the center relation `c·b − b·(I_E⊗c)` over the commutant
/// matrix units.
pub fn center_defect(ctx: &CorrespondenceContext, b: &CMatrix) -> f64 {
    ctx.commutant_basis()
        .iter()
        .map(|c| operator_norm(&(c * b - b * ctx.commutant_on_eh(c))))
        .fold(0.0, f64::max)
}

/// Solves the stacked center relation over the pattern basis.
pub fn center_basis(ctx: &CorrespondenceContext, tol: &Tolerance) -> CenterBasis {
    let basis = ctx.basis();
    let d = basis.len();
    if d == 0 {
        return CenterBasis { elements: Vec::new() };
    }
    let commutant = ctx.commutant_basis();
    let block = ctx.dim_h() * ctx.dim_eh();
    let mut stacked = zeros(commutant.len() * block, d);
    for (ci, c) in commutant.iter().enumerate() {
        let c_eh = ctx.commutant_on_eh(c);
        for (k, b) in basis.iter().enumerate() {
            let r = c * b - b * &c_eh;
            for (i, z) in r.iter().enumerate() {
                stacked[(ci * block + i, k)] = *z;
            }
        }
    }
    let elements = nullspace_basis(&stacked, tol)
        .into_iter()
        .map(|x| {
            let mut m = zeros(ctx.dim_h(), ctx.dim_eh());
            for (k, b) in basis.iter().enumerate() {
                m += b * x[(k, 0)];
            }
            Intertwiner(m)
        })
        .collect();
    CenterBasis { elements }
}

/// Basis of `𝔷(E) = {x : a·x = x·a}` as edge-coefficient vectors: the
/// indicators of loops.
pub fn center_of_e(ctx: &CorrespondenceContext) -> Vec<Vec<Complex64>> {
    let n = ctx.num_edges();
    ctx.graph()
        .loops()
        .into_iter()
        .map(|e| {
            let mut x = vec![c64(0.0, 0.0); n];
            x[e] = c64(1.0, 0.0);
            x
        })
        .collect()
}

/// Residual of `a·x = x·a` over vertex indicators, where
/// `(a·x)_e = a(r(e))x_e` and `(x·a)_e = x_e a(s(e))`.
pub fn edge_center_defect(ctx: &CorrespondenceContext, x: &[Complex64]) -> f64 {
    let n = ctx.num_vertices();
    (0..n)
        .map(|v| {
            let a = AlgebraElement::indicator(n, v);
            ctx.graph()
                .edges()
                .iter()
                .zip(x)
                .map(|(e, xe)| ((a.0[e.range] - a.0[e.source]) * xe).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `{"blocks": {"v,e": [[re, im], ...]}}` with allowed blocks in row-major
/// order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwinerJson {
    pub blocks: BTreeMap<String, Vec<[f64; 2]>>,
}

pub fn intertwiner_to_json(ctx: &CorrespondenceContext, eta: &Intertwiner) -> IntertwinerJson {
    let g = ctx.graph();
    let mut blocks = BTreeMap::new();
    for (v, e) in pattern(ctx).cells() {
        let mut entries = Vec::new();
        for i in ctx.h_range(v) {
            for j in ctx.eh_range(e) {
                let z = eta.matrix()[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        blocks.insert(format!("{},{}", g.vertices()[v], g.edges()[e].name), entries);
    }
    IntertwinerJson { blocks }
}

pub fn intertwiner_from_json(
    ctx: &CorrespondenceContext,
    json: &IntertwinerJson,
    tol: &Tolerance,
) -> Result<Intertwiner> {
    let g = ctx.graph();
    let mut m = zeros(ctx.dim_h(), ctx.dim_eh());
    for (key, entries) in &json.blocks {
        let (vname, ename) = key
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("block key `{key}` is not `vertex,edge`")))?;
        let v = g
            .vertex_index(vname)
            .ok_or_else(|| Error::UnknownVertex(vname.into()))?;
        let e = g
            .edge_index(ename)
            .ok_or_else(|| Error::UnknownEdge(ename.into()))?;
        let (rows, cols) = (ctx.h_range(v), ctx.eh_range(e));
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::Parse(format!(
                "block `{key}` needs {} entries, found {}",
                rows.len() * cols.len(),
                entries.len()
            )));
        }
        let mut it = entries.iter();
        for i in rows {
            for j in cols.clone() {
                let [re, im] = *it.next().expect("length checked");
                m[(i, j)] = c64(re, im);
            }
        }
    }
    Intertwiner::new(ctx, m, tol)
}
