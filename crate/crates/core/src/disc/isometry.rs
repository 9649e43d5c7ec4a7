use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceContext;
use crate::error::{Error, Result};
use crate::intertwiners::{Intertwiner, IntertwinerSpace};
use crate::linalg::{c64, identity, operator_norm, unitary_defect, zeros, CMatrix, Tolerance};
use crate::random::haar_unitary;

/// Linear isometry `ω(η*) = u η* v*` of the intertwiner space.
///
/// For a graph correspondence without sources, `u = ⊕_v u_v` is block
/// diagonal and the `(i, j)` edge block of `v*` vanishes unless
/// `r(e_i) = r(e_j)`; see [`AdmissibleIsometry::structure_violations`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleIsometry {
    u: CMatrix,
    v_adj: CMatrix,
}

/// A failed admissibility condition for a graph isometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsometryViolation {
    /// `u` has a nonzero block between distinct vertices.
    UOffDiagonal { row: String, col: String, norm: f64 },
    /// A diagonal block `u_v` is not unitary.
    UBlockNotUnitary { vertex: String, defect: f64 },
    /// Condition (1): `v*_{ij} ≠ 0` although `r(e_i) ≠ r(e_j)`.
    OffRangeBlock { row: String, col: String, norm: f64 },
    /// Condition (2): `Σ_j v*_{ij}(v*_{ij})* ≠ I`.
    RowNormalization { edge: String, defect: f64 },
    /// Condition (3): `Σ_j v*_{ij}(v*_{kj})* ≠ 0` for `i ≠ k`.
    RowOrthogonality { edge: String, other: String, norm: f64 },
}

impl AdmissibleIsometry {
    pub fn new(space: &dyn IntertwinerSpace, u: CMatrix, v_adj: CMatrix) -> Result<Self> {
        let (dh, deh) = (space.dim_h(), space.dim_eh());
        for (m, n) in [(&u, dh), (&v_adj, deh)] {
            if m.shape() != (n, n) {
                return Err(Error::ShapeMismatch {
                    expected: (n, n),
                    found: m.shape(),
                });
            }
        }
        Ok(AdmissibleIsometry { u, v_adj })
    }

    pub(crate) fn from_parts(u: CMatrix, v_adj: CMatrix) -> Self {
        AdmissibleIsometry { u, v_adj }
    }

    pub fn identity(space: &dyn IntertwinerSpace) -> Self {
        AdmissibleIsometry {
            u: identity(space.dim_h()),
            v_adj: identity(space.dim_eh()),
        }
    }

    /// `η* ↦ −η*`.
    pub fn minus_identity(space: &dyn IntertwinerSpace) -> Self {
        AdmissibleIsometry {
            u: identity(space.dim_h()),
            v_adj: -identity(space.dim_eh()),
        }
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// `v*`.
    pub fn v_adj(&self) -> &CMatrix {
        &self.v_adj
    }

    pub fn apply_matrix(&self, eta: &CMatrix) -> CMatrix {
        &self.u * eta * &self.v_adj
    }

    pub fn apply(&self, eta: &Intertwiner) -> Intertwiner {
        Intertwiner::from_matrix_unchecked(self.apply_matrix(eta.matrix()))
    }

    /// `ω⁻¹(η*) = u* η* v`.
    pub fn inverse(&self) -> Self {
        AdmissibleIsometry {
            u: self.u.adjoint(),
            v_adj: self.v_adj.adjoint(),
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &AdmissibleIsometry) -> Self {
        AdmissibleIsometry {
            u: &self.u * &first.u,
            v_adj: &first.v_adj * &self.v_adj,
        }
    }

    pub fn negated(&self) -> Self {
        AdmissibleIsometry {
            u: self.u.clone(),
            v_adj: -&self.v_adj,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitary_defect(&self.u).max(unitary_defect(&self.v_adj))
    }

    /// `max_k` relation defect of `ω(B_k)` over the basis of the space.
    pub fn preservation_defect(&self, space: &dyn IntertwinerSpace) -> f64 {
        space
            .basis()
            .iter()
            .map(|b| space.intertwining_defect(&self.apply_matrix(b)))
            .fold(0.0, f64::max)
    }

    /// Extensional distance `max_k ‖ω₁(B_k) − ω₂(B_k)‖`.
    pub fn distance(&self, other: &AdmissibleIsometry, space: &dyn IntertwinerSpace) -> f64 {
        space
            .basis()
            .iter()
            .map(|b| operator_norm(&(self.apply_matrix(b) - other.apply_matrix(b))))
            .fold(0.0, f64::max)
    }

    /// Random admissible isometry: Haar unitaries on each `H_v`, and a Haar
    /// unitary on each range group `⊕_{r(e)=w} H_{s(e)}` for `v*`.
    pub fn random<R: Rng + ?Sized>(ctx: &CorrespondenceContext, rng: &mut R) -> Self {
        let mut u = zeros(ctx.dim_h(), ctx.dim_h());
        for v in 0..ctx.num_vertices() {
            let r = ctx.h_range(v);
            u.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&haar_unitary(rng, r.len()));
        }
        let mut v_adj = zeros(ctx.dim_eh(), ctx.dim_eh());
        for w in 0..ctx.num_vertices() {
            let coords: Vec<usize> = ctx
                .graph()
                .edges_into(w)
                .into_iter()
                .flat_map(|e| ctx.eh_range(e))
                .collect();
            let block = haar_unitary(rng, coords.len());
            for (a, &i) in coords.iter().enumerate() {
                for (b, &j) in coords.iter().enumerate() {
                    v_adj[(i, j)] = block[(a, b)];
                }
            }
        }
        AdmissibleIsometry { u, v_adj }
    }

    /// Every failed admissibility condition, with the offending
    /// block named. An empty list means `ω` is admissible.
    pub fn structure_violations(
        &self,
        ctx: &CorrespondenceContext,
        tol: &Tolerance,
    ) -> Vec<IsometryViolation> {
        let g = ctx.graph();
        let eps = tol.scaled(ctx.dim_h().max(ctx.dim_eh()));
        let mut out = Vec::new();
        let n = ctx.num_vertices();
        for i in 0..n {
            for j in 0..n {
                let block = self
                    .u
                    .view(
                        (ctx.h_range(i).start, ctx.h_range(j).start),
                        (ctx.multiplicity(i), ctx.multiplicity(j)),
                    )
                    .clone_owned();
                if i == j {
                    let defect = unitary_defect(&block);
                    if defect > eps {
                        out.push(IsometryViolation::UBlockNotUnitary {
                            vertex: g.vertices()[i].clone(),
                            defect,
                        });
                    }
                } else {
                    let norm = operator_norm(&block);
                    if norm > eps {
                        out.push(IsometryViolation::UOffDiagonal {
                            row: g.vertices()[i].clone(),
                            col: g.vertices()[j].clone(),
                            norm,
                        });
                    }
                }
            }
        }
        let edges = g.edges();
        let vb = |i: usize, j: usize| {
            let (ri, rj) = (ctx.eh_range(i), ctx.eh_range(j));
            self.v_adj
                .view((ri.start, rj.start), (ri.len(), rj.len()))
                .clone_owned()
        };
        for i in 0..edges.len() {
            for j in 0..edges.len() {
                if edges[i].range != edges[j].range {
                    let norm = operator_norm(&vb(i, j));
                    if norm > eps {
                        out.push(IsometryViolation::OffRangeBlock {
                            row: edges[i].name.clone(),
                            col: edges[j].name.clone(),
                            norm,
                        });
                    }
                }
            }
        }
        for i in 0..edges.len() {
            for k in 0..edges.len() {
                let mut sum = zeros(ctx.eh_range(i).len(), ctx.eh_range(k).len());
                for j in 0..edges.len() {
                    sum += vb(i, j) * vb(k, j).adjoint();
                }
                if i == k {
                    let defect = operator_norm(&(sum - identity(ctx.eh_range(i).len())));
                    if defect > eps {
                        out.push(IsometryViolation::RowNormalization {
                            edge: edges[i].name.clone(),
                            defect,
                        });
                    }
                } else {
                    let norm = operator_norm(&sum);
                    if norm > eps {
                        out.push(IsometryViolation::RowOrthogonality {
                            edge: edges[i].name.clone(),
                            other: edges[k].name.clone(),
                            norm,
                        });
                    }
                }
            }
        }
        out
    }

    /// Scalar multiple `e^{iθ}` of the `u` factor.
    pub fn rotated(&self, theta: f64) -> Self {
        AdmissibleIsometry {
            u: &self.u * c64(theta.cos(), theta.sin()),
            v_adj: self.v_adj.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::random::rng_from_seed;

    #[test]
    fn random_isometries_are_admissible() {
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(5);
        for (_, ctx) in fixtures::sourceless() {
            for _ in 0..5 {
                let w = AdmissibleIsometry::random(&ctx, &mut rng);
                assert!(w.structure_violations(&ctx, &tol).is_empty());
                assert!(w.preservation_defect(&ctx) < 1e-12);
                let eta = sample_disc(&ctx, 1, 0.7);
                assert!((w.apply(&eta).norm() - eta.norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn off_range_block_breaks_preservation() {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let mut w = AdmissibleIsometry::random(&ctx, &mut rng_from_seed(2));
        // e1 has range v1, e2 has range v2.
        w.v_adj[(0, 2)] += c64(0.2, 0.0);
        let v = w.structure_violations(&ctx, &tol);
        assert!(v
            .iter()
            .any(|x| matches!(x, IsometryViolation::OffRangeBlock { row, col, .. } if row == "e1" && col == "e2")));
        assert!(w.preservation_defect(&ctx) > 1e-3);
    }

    #[test]
    fn inverse_and_after() {
        let ctx = fixtures::four_vertex();
        let mut rng = rng_from_seed(8);
        let a = AdmissibleIsometry::random(&ctx, &mut rng);
        let b = AdmissibleIsometry::random(&ctx, &mut rng);
        let id = AdmissibleIsometry::identity(&ctx);
        assert!(a.inverse().after(&a).distance(&id, &ctx) < 1e-12);
        let eta = sample_disc(&ctx, 4, 0.5);
        let lhs = a.after(&b).apply(&eta);
        let rhs = a.apply(&b.apply(&eta));
        assert!(lhs.distance(&rhs) < 1e-12);
    }
}
