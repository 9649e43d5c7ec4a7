use rand::Rng;

use super::isometry::AdmissibleIsometry;
use super::moebius::MoebiusMap;
use crate::correspondence::CorrespondenceContext;
use crate::error::{Error, Result};
use crate::intertwiners::{sample_ball_with, Intertwiner, IntertwinerSpace};
use crate::linalg::{operator_norm, zeros, CMatrix, Tolerance};
use crate::matrix_rep::rep_matrix;

/// Canonical automorphism `g = ω ∘ g_γ` with `γ* = g⁻¹(0)*`.
#[derive(Clone, Debug)]
pub struct DiscAutomorphism {
    omega: AdmissibleIsometry,
    moebius: MoebiusMap,
}

impl DiscAutomorphism {
    pub fn new(omega: AdmissibleIsometry, gamma: &Intertwiner, tol: &Tolerance) -> Result<Self> {
        if omega.u().nrows() != gamma.matrix().nrows() || omega.v_adj().nrows() != gamma.matrix().ncols() {
            return Err(Error::ShapeMismatch {
                expected: (omega.u().nrows(), omega.v_adj().nrows()),
                found: gamma.matrix().shape(),
            });
        }
        Ok(DiscAutomorphism {
            omega,
            moebius: MoebiusMap::new(gamma, tol)?,
        })
    }

    /// The Möbius map `g_γ` itself (`u = I`, `v = I`).
    pub fn moebius(space: &dyn IntertwinerSpace, gamma: &Intertwiner, tol: &Tolerance) -> Result<Self> {
        Self::new(AdmissibleIsometry::identity(space), gamma, tol)
    }

    /// The linear map `η* ↦ ω(η*)`. Since `g_0 = −id`, its canonical isometry
    /// factor is `−ω`.
    pub fn from_isometry(space: &dyn IntertwinerSpace, omega: &AdmissibleIsometry) -> Self {
        DiscAutomorphism {
            omega: omega.negated(),
            moebius: zero_moebius(space),
        }
    }

    /// The identity map, canonically `(−id) ∘ g_0`.
    pub fn identity(space: &dyn IntertwinerSpace) -> Self {
        DiscAutomorphism {
            omega: AdmissibleIsometry::minus_identity(space),
            moebius: zero_moebius(space),
        }
    }

    /// `g_0 = −id`.
    pub fn minus_identity(space: &dyn IntertwinerSpace) -> Self {
        DiscAutomorphism {
            omega: AdmissibleIsometry::identity(space),
            moebius: zero_moebius(space),
        }
    }

    /// Random canonical automorphism: admissible `ω` and `γ*` in the ball of
    /// radius `radius_cap`.
    pub fn random<R: Rng + ?Sized>(
        ctx: &CorrespondenceContext,
        rng: &mut R,
        radius_cap: f64,
        tol: &Tolerance,
    ) -> Result<Self> {
        let omega = AdmissibleIsometry::random(ctx, rng);
        let gamma = sample_ball_with(ctx, rng, radius_cap);
        Self::new(omega, &gamma, tol)
    }

    pub fn omega(&self) -> &AdmissibleIsometry {
        &self.omega
    }

    /// `γ* = g⁻¹(0)*`.
    pub fn gamma(&self) -> &Intertwiner {
        self.moebius.gamma()
    }

    pub fn moebius_map(&self) -> &MoebiusMap {
        &self.moebius
    }

    /// `u · g_γ(η*) · v*`.
    pub fn apply(&self, eta: &Intertwiner) -> Result<Intertwiner> {
        Ok(self.omega.apply(&self.moebius.apply(eta)?))
    }

    /// `g⁻¹ = g_γ ∘ ω⁻¹ = ω⁻¹ ∘ g_{ω(γ)}`, canonically `(ω⁻¹, ω(γ*))`.
    pub fn inverse(&self, tol: &Tolerance) -> Result<Self> {
        let omega = self.omega.inverse();
        let gamma = self.omega.apply(self.gamma());
        Self::new(omega, &gamma, tol)
    }

    /// Extensional distance: `max(‖γ₁* − γ₂*‖, max_k ‖ω₁(B_k) − ω₂(B_k)‖)`.
    pub fn distance(&self, other: &DiscAutomorphism, space: &dyn IntertwinerSpace) -> f64 {
        self.gamma()
            .distance(other.gamma())
            .max(self.omega.distance(&other.omega, space))
    }

    pub fn is_identity(&self, space: &dyn IntertwinerSpace, tol: &Tolerance) -> bool {
        self.distance(&Self::identity(space), space) <= tol.scaled(space.dim_h() + space.dim_eh())
    }

    /// `max_p ‖self(p) − other(p)‖` over the given points.
    pub fn map_distance(&self, other: &DiscAutomorphism, points: &[Intertwiner]) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in points {
            worst = worst.max(self.apply(p)?.distance(&other.apply(p)?));
        }
        Ok(worst)
    }
}

fn zero_moebius(space: &dyn IntertwinerSpace) -> MoebiusMap {
    MoebiusMap::new(
        &Intertwiner::from_matrix_unchecked(zeros(space.dim_h(), space.dim_eh())),
        &Tolerance::default(),
    )
    .expect("the zero parameter is always admissible")
}

/// Canonical form of `g₂ ∘ g₁`.
pub fn compose(g2: &DiscAutomorphism, g1: &DiscAutomorphism, tol: &Tolerance) -> Result<DiscAutomorphism> {
    canonical_decomposition(&[g2, g1], tol)
}

/// Canonical `(ω, γ*)` of the composite `f_n ∘ ⋯ ∘ f_1`, where `factors`
/// lists the maps outermost first (`[f_n, …, f_1]`).
///
/// `γ* = h⁻¹(0)` is obtained by pushing `0` through the factor inverses. The
/// isometry part comes from the block matrices: under the reversed product
/// `Ψ(a ∘ b) = T_b T_a`, the matrix `T_{g_γ} · T_{f_1} ⋯ T_{f_n}` represents
/// `ω = h ∘ g_γ` and is block diagonal `diag(u*, v*)`.
pub fn canonical_decomposition(
    factors: &[&DiscAutomorphism],
    tol: &Tolerance,
) -> Result<DiscAutomorphism> {
    let last = factors
        .first()
        .ok_or_else(|| Error::Numerical("empty composite".into()))?;
    let (dh, deh) = last.gamma().matrix().shape();

    let mut point = Intertwiner::from_matrix_unchecked(zeros(dh, deh));
    for f in factors {
        point = f.inverse(tol)?.apply(&point)?;
    }
    let gamma = point;
    let moebius = MoebiusMap::new(&gamma, tol)?;

    let mut t = rep_matrix(&DiscAutomorphism {
        omega: AdmissibleIsometry::from_parts(CMatrix::identity(dh, dh), CMatrix::identity(deh, deh)),
        moebius: moebius.clone(),
    })
    .into_matrix();
    for f in factors.iter().rev() {
        t *= rep_matrix(f).into_matrix();
    }
    let off = operator_norm(&t.view((0, dh), (dh, deh)).clone_owned())
        .max(operator_norm(&t.view((dh, 0), (deh, dh)).clone_owned()));
    if off > 1e3 * tol.scaled(dh + deh) {
        return Err(Error::Numerical(format!(
            "isometry factor is not block diagonal (off-diagonal norm {off:e})"
        )));
    }
    let u = t.view((0, 0), (dh, dh)).adjoint();
    let v_adj = t.view((dh, dh), (deh, deh)).clone_owned();
    Ok(DiscAutomorphism {
        omega: AdmissibleIsometry::from_parts(u, v_adj),
        moebius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::random::rng_from_seed;

    #[test]
    fn identity_and_minus_identity() {
        let ctx = fixtures::two_vertex();
        let eta = sample_disc(&ctx, 1, 0.6);
        let id = DiscAutomorphism::identity(&ctx);
        assert!(id.apply(&eta).unwrap().distance(&eta) < 1e-15);
        let m = DiscAutomorphism::minus_identity(&ctx);
        assert!(m.apply(&eta).unwrap().distance(&eta.neg()) < 1e-15);
    }

    #[test]
    fn pure_isometry_applies_omega() {
        let ctx = fixtures::two_vertex();
        let w = AdmissibleIsometry::random(&ctx, &mut rng_from_seed(1));
        let g = DiscAutomorphism::from_isometry(&ctx, &w);
        let eta = sample_disc(&ctx, 2, 0.6);
        assert!(g.apply(&eta).unwrap().distance(&w.apply(&eta)) < 1e-14);
    }

    #[test]
    fn compose_laws() {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(21);
        let g = DiscAutomorphism::random(&ctx, &mut rng, 0.5, &tol).unwrap();
        let id = DiscAutomorphism::identity(&ctx);
        assert!(compose(&g, &id, &tol).unwrap().distance(&g, &ctx) < 1e-12);
        assert!(compose(&id, &g, &tol).unwrap().distance(&g, &ctx) < 1e-12);

        let gamma = sample_disc(&ctx, 4, 0.7);
        let gg = DiscAutomorphism::moebius(&ctx, &gamma, &tol).unwrap();
        assert!(compose(&gg, &gg, &tol).unwrap().is_identity(&ctx, &tol));

        let inv = g.inverse(&tol).unwrap();
        assert!(compose(&inv, &g, &tol).unwrap().is_identity(&ctx, &tol));
        assert!(compose(&g, &inv, &tol).unwrap().is_identity(&ctx, &tol));
    }

    #[test]
    fn homogeneity() {
        let ctx = fixtures::four_vertex();
        let tol = Tolerance::default();
        let e1 = sample_disc(&ctx, 1, 0.4);
        let e2 = sample_disc(&ctx, 2, 0.4);
        let g1 = DiscAutomorphism::moebius(&ctx, &e1, &tol).unwrap();
        let g2 = DiscAutomorphism::moebius(&ctx, &e2, &tol).unwrap();
        let h = compose(&g2, &g1, &tol).unwrap();
        assert!(h.apply(&e1).unwrap().distance(&e2) < 1e-12);
    }
}
