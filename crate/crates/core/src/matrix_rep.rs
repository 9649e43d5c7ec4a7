//! Homogeneous coordinates and the block-matrix representation.
//!
//! A point `η*` of the disc has homogeneous coordinates `[I_H  η*]`, a block
//! row on `H ⊕ (E⊗H)`; pairs `(U, η*)` and `(CU, Cη*)` with `C ∈ σ(A)'`
//! invertible are the same class. An automorphism `g = ω ∘ g_γ` with
//! `ω(η*) = uη*v*` acts by right multiplication with
//!
//! ```text
//! T = [  Δ_γ⁻¹u*     γ*Δ_{γ*}⁻¹v* ]
//!     [ −γΔ_γ⁻¹u*    −Δ_{γ*}⁻¹v*  ]
//! ```
//!
//! so composition reverses the matrix order: `Ψ(g ∘ f) = T_f T_g`. That is
//! the product [`op_product`] implements. Every such `T` satisfies
//! `TκT* = κ` for `κ = diag(I_H, −I_{E⊗H})`.

use serde::{Deserialize, Serialize};

use crate::disc::{DiscAutomorphism, MoebiusMap};
use crate::error::{Error, Result};
use crate::intertwiners::{Intertwiner, IntertwinerSpace};
use crate::linalg::{
    block2x2, c64, identity, operator_norm, try_inverse, zeros, CMatrix, Tolerance,
};

/// Homogeneous coordinates `(U, η*)` of a class `[U  η*]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PPoint {
    pub u: CMatrix,
    pub eta: CMatrix,
}

impl PPoint {
    pub fn new(u: CMatrix, eta: CMatrix) -> Self {
        PPoint { u, eta }
    }

    /// The `1×2` block row `[U  η*]`.
    pub fn row(&self) -> CMatrix {
        let mut row = zeros(self.u.nrows(), self.u.ncols() + self.eta.ncols());
        row.view_mut((0, 0), self.u.shape()).copy_from(&self.u);
        row.view_mut((0, self.u.ncols()), self.eta.shape())
            .copy_from(&self.eta);
        row
    }
}

/// `(I_H, η*)`.
pub fn homogeneous(eta: &Intertwiner) -> PPoint {
    let m = eta.matrix();
    PPoint::new(identity(m.nrows()), m.clone())
}

/// `(I_H, U⁻¹η*)`; `U` must be invertible and lie in `σ(A)'`.
pub fn canonicalize(p: &PPoint, space: &dyn IntertwinerSpace, tol: &Tolerance) -> Result<PPoint> {
    let scale = operator_norm(&p.u).max(1.0);
    if space.commutant_defect(&p.u) > tol.scaled(space.dim_h()) * scale {
        return Err(Error::SingularU);
    }
    let svd = p.u.clone().svd(false, false);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if p.u.nrows() > 0 && smin <= tol.abs_tol * scale {
        return Err(Error::SingularU);
    }
    let inv = try_inverse(&p.u).ok_or(Error::SingularU)?;
    Ok(PPoint::new(identity(p.u.nrows()), inv * &p.eta))
}

/// A `2×2` block operator on `H ⊕ (E⊗H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepMatrix {
    dim_h: usize,
    dim_eh: usize,
    t: CMatrix,
}

impl RepMatrix {
    pub fn from_matrix(dim_h: usize, dim_eh: usize, t: CMatrix) -> Result<Self> {
        let n = dim_h + dim_eh;
        if t.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: (n, n),
                found: t.shape(),
            });
        }
        Ok(RepMatrix { dim_h, dim_eh, t })
    }

    pub fn identity(dim_h: usize, dim_eh: usize) -> Self {
        RepMatrix {
            dim_h,
            dim_eh,
            t: identity(dim_h + dim_eh),
        }
    }

    /// `κ = diag(I_H, −I_{E⊗H})`.
    pub fn kappa(dim_h: usize, dim_eh: usize) -> Self {
        let mut t = identity(dim_h + dim_eh);
        for i in dim_h..dim_h + dim_eh {
            t[(i, i)] = c64(-1.0, 0.0);
        }
        RepMatrix { dim_h, dim_eh, t }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_h, self.dim_eh)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    pub fn into_matrix(self) -> CMatrix {
        self.t
    }

    fn block(&self, r: usize, c: usize) -> CMatrix {
        let (h, e) = (self.dim_h, self.dim_eh);
        let (r0, nr) = if r == 0 { (0, h) } else { (h, e) };
        let (c0, nc) = if c == 0 { (0, h) } else { (h, e) };
        self.t.view((r0, c0), (nr, nc)).clone_owned()
    }

    /// `H → H` block.
    pub fn a11(&self) -> CMatrix {
        self.block(0, 0)
    }

    /// Top-right block, shaped like an intertwiner.
    pub fn a12(&self) -> CMatrix {
        self.block(0, 1)
    }

    pub fn a21(&self) -> CMatrix {
        self.block(1, 0)
    }

    pub fn a22(&self) -> CMatrix {
        self.block(1, 1)
    }

    pub fn to_json(&self) -> RepMatrixJson {
        let dense = |m: CMatrix| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        };
        RepMatrixJson {
            a11: dense(self.a11()),
            a12: dense(self.a12()),
            a21: dense(self.a21()),
            a22: dense(self.a22()),
        }
    }
}

/// Four dense complex blocks, each a list of rows of `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepMatrixJson {
    pub a11: Vec<Vec<[f64; 2]>>,
    pub a12: Vec<Vec<[f64; 2]>>,
    pub a21: Vec<Vec<[f64; 2]>>,
    pub a22: Vec<Vec<[f64; 2]>>,
}

fn assemble(m: &MoebiusMap, u: &CMatrix, v_adj: &CMatrix) -> CMatrix {
    let g = m.gamma().matrix();
    let gamma = g.adjoint();
    let u_adj = u.adjoint();
    let a11 = m.delta_inv() * &u_adj;
    let a12 = g * m.delta_star_inv() * v_adj;
    let a21 = -(&gamma * m.delta_inv() * &u_adj);
    let a22 = -(m.delta_star_inv() * v_adj);
    block2x2(&a11, &a12, &a21, &a22)
}

/// Block matrix of `g = ω ∘ g_γ`.
pub fn rep_matrix(g: &DiscAutomorphism) -> RepMatrix {
    let (dim_h, dim_eh) = g.gamma().matrix().shape();
    RepMatrix {
        dim_h,
        dim_eh,
        t: assemble(g.moebius_map(), g.omega().u(), g.omega().v_adj()),
    }
}

/// `[U  η*]·T`, canonicalised.
pub fn act(p: &PPoint, t: &RepMatrix, space: &dyn IntertwinerSpace, tol: &Tolerance) -> Result<PPoint> {
    let (h, e) = t.dims();
    if p.u.shape() != (h, h) || p.eta.shape() != (h, e) {
        return Err(Error::ShapeMismatch {
            expected: (h, h + e),
            found: (p.u.nrows(), p.u.ncols() + p.eta.ncols()),
        });
    }
    let row = p.row() * t.matrix();
    let out = PPoint::new(
        row.view((0, 0), (h, h)).clone_owned(),
        row.view((0, h), (h, e)).clone_owned(),
    );
    canonicalize(&out, space, tol)
}

/// `‖TκT* − κ‖`.
pub fn pseudo_unitary_defect(t: &RepMatrix) -> f64 {
    let (h, e) = t.dims();
    let k = RepMatrix::kappa(h, e).t;
    operator_norm(&(t.matrix() * &k * t.matrix().adjoint() - k))
}

/// Element of the opposite group `𝓜^op/∼`.
///
/// The product is reversed: `a * b` is the class of the matrix `b·a`, so that
/// `Ψ(g) * Ψ(f) = Ψ(g ∘ f)`. Two classes are equal when they act identically
/// on homogeneous coordinates (see [`RepClass::distance`]).
#[derive(Clone, Debug, PartialEq)]
pub struct RepClass {
    pub rep: RepMatrix,
}

impl RepClass {
    pub fn of(g: &DiscAutomorphism) -> Self {
        RepClass { rep: rep_matrix(g) }
    }

    pub fn identity(dim_h: usize, dim_eh: usize) -> Self {
        RepClass {
            rep: RepMatrix::identity(dim_h, dim_eh),
        }
    }

    /// `max_p ‖η*_a(p) − η*_b(p)‖` over `p ∈ {0} ∪ {½B_k} ∪ {¼(B_k + iB_{k+1})}`
    /// after acting on `[I  p]`.
    pub fn distance(&self, other: &RepClass, space: &dyn IntertwinerSpace, tol: &Tolerance) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in class_test_points(space) {
            let hp = homogeneous(&Intertwiner::from_matrix_unchecked(p));
            let a = act(&hp, &self.rep, space, tol)?;
            let b = act(&hp, &other.rep, space, tol)?;
            worst = worst.max(operator_norm(&(a.eta - b.eta)));
        }
        Ok(worst)
    }
}

fn class_test_points(space: &dyn IntertwinerSpace) -> Vec<CMatrix> {
    let basis = space.basis();
    let mut points = vec![zeros(space.dim_h(), space.dim_eh())];
    for (k, b) in basis.iter().enumerate() {
        points.push(b * c64(0.5, 0.0));
        let next = &basis[(k + 1) % basis.len()];
        points.push((b + next * c64(0.0, 1.0)) * c64(0.25, 0.0));
    }
    points
}

/// `a * b`: the class of `b·a`.
pub fn op_product(a: &RepClass, b: &RepClass) -> RepClass {
    let (h, e) = a.rep.dims();
    RepClass {
        rep: RepMatrix {
            dim_h: h,
            dim_eh: e,
            t: b.rep.matrix() * a.rep.matrix(),
        },
    }
}

/// Inverse class via the closed form
///
/// ```text
/// [  uΔ_γ⁻¹     uγ*Δ_{γ*}⁻¹ ]
/// [ −vγΔ_γ⁻¹    −vΔ_{γ*}⁻¹  ]
/// ```
///
/// with `(γ*, u, v)` read off the blocks of `T`: `γ = −T₂₁T₁₁⁻¹`,
/// `u* = Δ_γ T₁₁`, `v* = −Δ_{γ*} T₂₂`.
pub fn rep_inverse(a: &RepClass, tol: &Tolerance) -> Result<RepClass> {
    let (h, e) = a.rep.dims();
    let t11_inv = try_inverse(&a.rep.a11()).ok_or(Error::SingularU)?;
    let gamma = -(a.rep.a21() * &t11_inv);
    let gamma_adj = Intertwiner::from_matrix_unchecked(gamma.adjoint());
    let tight = Tolerance::new(tol.abs_tol, tol.margin.min(1e-6))?;
    let m = MoebiusMap::new(&gamma_adj, &tight)?;
    let u = (m.delta() * a.rep.a11()).adjoint();
    let v = (-(m.delta_star() * a.rep.a22())).adjoint();
    let g = gamma_adj.matrix();
    let b11 = &u * m.delta_inv();
    let b12 = &u * g * m.delta_star_inv();
    let b21 = -(&v * &gamma * m.delta_inv());
    let b22 = -(&v * m.delta_star_inv());
    Ok(RepClass {
        rep: RepMatrix {
            dim_h: h,
            dim_eh: e,
            t: block2x2(&b11, &b12, &b21, &b22),
        },
    })
}

/// Residuals of the four defect-operator identities
///
/// 1. `Δ_γ⁻² − γ*Δ_{γ*}⁻²γ = I_H`
/// 2. `γΔ_γ⁻²γ* − Δ_{γ*}⁻² = −I_{E⊗H}`
/// 3. `−Δ_γ⁻²γ* + γ*Δ_{γ*}⁻² = 0`
/// 4. `−γΔ_γ⁻² + Δ_{γ*}⁻²γ = 0`
///
/// evaluated with eigendecomposition-based inverse square roots.
pub fn neumann_identities_defect(gamma: &Intertwiner, tol: &Tolerance) -> Result<[f64; 4]> {
    let m = MoebiusMap::new(gamma, tol)?;
    let g = gamma.matrix();
    let ga = g.adjoint();
    let dinv2 = m.delta_inv() * m.delta_inv();
    let dsinv2 = m.delta_star_inv() * m.delta_star_inv();
    let (h, e) = g.shape();
    Ok([
        operator_norm(&(&dinv2 - g * &dsinv2 * &ga - identity(h))),
        operator_norm(&(&ga * &dinv2 * g - &dsinv2 + identity(e))),
        operator_norm(&(-(&dinv2 * g) + g * &dsinv2)),
        operator_norm(&(-(&ga * &dinv2) + &dsinv2 * &ga)),
    ])
}

/// Truncated Neumann series `Σ_{n<order} Pⁿ` approximating `(I − P)⁻¹`; the
/// truncation error is at most `‖P‖^order / (1 − ‖P‖)`.
pub fn neumann_series_inverse(p: &CMatrix, order: usize) -> CMatrix {
    let n = p.nrows();
    let mut sum = zeros(n, n);
    let mut term = identity(n);
    for _ in 0..order {
        sum += &term;
        term = &term * p;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::AdmissibleIsometry;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::linalg::distance;
    use crate::random::{rng_from_seed, well_conditioned};

    #[test]
    fn g0_is_kappa() {
        let ctx = fixtures::two_vertex();
        let t = rep_matrix(&DiscAutomorphism::minus_identity(&ctx));
        assert!(distance(t.matrix(), RepMatrix::kappa(3, 4).matrix()) < 1e-15);
        let id = rep_matrix(&DiscAutomorphism::identity(&ctx));
        assert!(distance(id.matrix(), RepMatrix::identity(3, 4).matrix()) < 1e-15);
    }

    #[test]
    fn pure_isometry_is_block_diagonal() {
        let ctx = fixtures::two_vertex();
        let w = AdmissibleIsometry::random(&ctx, &mut rng_from_seed(6));
        let g = DiscAutomorphism::new(w.clone(), &Intertwiner::zero(&ctx), &Tolerance::default()).unwrap();
        let t = rep_matrix(&g);
        assert!(distance(&t.a11(), &w.u().adjoint()) < 1e-15);
        assert!(distance(&t.a22(), &-w.v_adj()) < 1e-15);
        assert_eq!(operator_norm(&t.a12()), 0.0);
        assert_eq!(operator_norm(&t.a21()), 0.0);
    }

    #[test]
    fn canonicalize_examples() {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let eta = sample_disc(&ctx, 1, 0.5);
        let p = homogeneous(&eta);
        assert_eq!(canonicalize(&p, &ctx, &tol).unwrap(), p);
        let two = PPoint::new(identity(3) * c64(2.0, 0.0), eta.matrix() * c64(2.0, 0.0));
        assert!(distance(&canonicalize(&two, &ctx, &tol).unwrap().eta, eta.matrix()) < 1e-15);

        let mut rng = rng_from_seed(2);
        let mut c = zeros(3, 3);
        c.view_mut((0, 0), (2, 2)).copy_from(&well_conditioned(&mut rng, 2));
        c[(2, 2)] = c64(0.7, -0.2);
        let q = PPoint::new(c.clone(), &c * eta.matrix());
        assert!(distance(&canonicalize(&q, &ctx, &tol).unwrap().eta, eta.matrix()) < 1e-13);

        let singular = PPoint::new(zeros(3, 3), eta.matrix().clone());
        assert!(matches!(canonicalize(&singular, &ctx, &tol), Err(Error::SingularU)));
    }

    #[test]
    fn corrupted_matrix_is_detected() {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let g = DiscAutomorphism::random(&ctx, &mut rng_from_seed(3), 0.6, &tol).unwrap();
        let t = rep_matrix(&g);
        assert!(pseudo_unitary_defect(&t) < 1e-12);
        let mut bad = t.matrix().clone();
        for i in 0..3 {
            for j in 0..3 {
                bad[(i, j)] *= c64(2.0, 0.0);
            }
        }
        let bad = RepMatrix::from_matrix(3, 4, bad).unwrap();
        assert!(pseudo_unitary_defect(&bad) >= 3.0);
    }

    #[test]
    fn identities_scalar() {
        let tol = Tolerance::default();
        let gamma = Intertwiner::from_matrix_unchecked(CMatrix::from_element(1, 1, c64(0.6, 0.0)));
        let d = neumann_identities_defect(&gamma, &tol).unwrap();
        assert!(d.iter().all(|&x| x < 1e-15), "{d:?}");
    }
}
