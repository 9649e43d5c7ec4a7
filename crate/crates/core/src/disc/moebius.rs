use crate::error::{Error, Result};
use crate::intertwiners::Intertwiner;
use crate::linalg::{hermitian_inv_sqrt, hermitian_sqrt, identity, operator_norm, CMatrix, Tolerance};

/// `g_γ(η*) = Δ_γ (I − η*γ)⁻¹ (γ* − η*) Δ_{γ*}⁻¹` with the defect operators
/// `Δ_γ = (I − γ*γ)^{1/2}` on `H` and `Δ_{γ*} = (I − γγ*)^{1/2}` on `E⊗H`
/// cached.
#[derive(Clone, Debug)]
pub struct MoebiusMap {
    gamma: Intertwiner,
    delta: CMatrix,
    delta_inv: CMatrix,
    delta_star: CMatrix,
    delta_star_inv: CMatrix,
}

impl MoebiusMap {
    /// Fails with [`Error::OutsideDisc`] when `‖γ*‖ > 1 − margin`.
    pub fn new(gamma: &Intertwiner, tol: &Tolerance) -> Result<Self> {
        let norm = gamma.norm();
        let limit = tol.radius();
        if norm > limit * (1.0 + 1e-12) {
            return Err(Error::OutsideDisc { norm, limit });
        }
        let g = gamma.matrix();
        let (dh, deh) = g.shape();
        let p = identity(dh) - g * g.adjoint();
        let q = identity(deh) - g.adjoint() * g;
        Ok(MoebiusMap {
            gamma: gamma.clone(),
            delta: hermitian_sqrt(&p, tol)?,
            delta_inv: hermitian_inv_sqrt(&p, tol)?,
            delta_star: hermitian_sqrt(&q, tol)?,
            delta_star_inv: hermitian_inv_sqrt(&q, tol)?,
        })
    }

    /// `γ*`.
    pub fn gamma(&self) -> &Intertwiner {
        &self.gamma
    }

    /// `Δ_γ` on `H`.
    pub fn delta(&self) -> &CMatrix {
        &self.delta
    }

    pub fn delta_inv(&self) -> &CMatrix {
        &self.delta_inv
    }

    /// `Δ_{γ*}` on `E⊗H`.
    pub fn delta_star(&self) -> &CMatrix {
        &self.delta_star
    }

    pub fn delta_star_inv(&self) -> &CMatrix {
        &self.delta_star_inv
    }

    pub fn apply_matrix(&self, eta: &CMatrix) -> Result<CMatrix> {
        let norm = operator_norm(eta);
        if norm >= 1.0 {
            return Err(Error::OutsideDisc { norm, limit: 1.0 });
        }
        let g = self.gamma.matrix();
        let resolvent = identity(g.nrows()) - eta * g.adjoint();
        let x = resolvent
            .lu()
            .solve(&(g - eta))
            .ok_or(Error::SingularResolvent)?;
        Ok(&self.delta * x * &self.delta_star_inv)
    }

    pub fn apply(&self, eta: &Intertwiner) -> Result<Intertwiner> {
        self.apply_matrix(eta.matrix())
            .map(Intertwiner::from_matrix_unchecked)
    }
}

/// One-shot `g_γ(η*)`.
pub fn moebius_apply(gamma: &Intertwiner, eta: &Intertwiner, tol: &Tolerance) -> Result<Intertwiner> {
    MoebiusMap::new(gamma, tol)?.apply(eta)
}
