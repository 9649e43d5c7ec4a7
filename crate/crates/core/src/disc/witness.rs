use serde::{Deserialize, Serialize};

use super::automorphism::DiscAutomorphism;
use super::isometry::AdmissibleIsometry;
use crate::correspondence::CorrespondenceContext;
use crate::error::{Error, Result};
use crate::intertwiners::{center_basis, sample_disc_with, CenterBasis, Intertwiner, IntertwinerSpace};
use crate::linalg::{
    c64, least_squares, operator_norm, unitary_defect, vectorize, zeros, CMatrix, Tolerance,
};
use crate::random::rng_from_seed;

/// Which branch of the center argument produced the witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    /// `g⁻¹(0) ≠ 0`: `h = g_0` and the point is `g⁻¹(0)*`.
    MovesOrigin,
    /// `g(0) = 0`: `h = g_p` for a point `p` with `g(p) ≠ p`.
    FixesOrigin,
}

/// An automorphism `h` and a point `p` with `g(h(p)) ≠ h(g(p))`.
#[derive(Clone, Debug)]
pub struct CommutatorWitness {
    pub h: DiscAutomorphism,
    pub point: Intertwiner,
    pub commutator_norm: f64,
    pub case: WitnessCase,
}

fn commutator_at(g: &DiscAutomorphism, h: &DiscAutomorphism, p: &Intertwiner) -> Result<f64> {
    Ok(g.apply(&h.apply(p)?)?.distance(&h.apply(&g.apply(p)?)?))
}

/// Finds `h` not commuting with `g`, following the two cases of the
/// argument that the center of the automorphism group is trivial.
pub fn noncommuting_witness(
    g: &DiscAutomorphism,
    space: &dyn IntertwinerSpace,
    tol: &Tolerance,
) -> Result<CommutatorWitness> {
    let scale = tol.scaled(space.dim_h() + space.dim_eh());
    if g.gamma().norm() > scale {
        let h = DiscAutomorphism::minus_identity(space);
        let point = g.gamma().clone();
        let commutator_norm = commutator_at(g, &h, &point)?;
        if commutator_norm > scale {
            return Ok(CommutatorWitness {
                h,
                point,
                commutator_norm,
                case: WitnessCase::MovesOrigin,
            });
        }
    }
    let t = 0.5;
    let mut best: Option<(f64, Intertwiner)> = None;
    let candidates = space.basis().iter().enumerate().flat_map(|(k, b)| {
        let next = &space.basis()[(k + 1) % space.basis().len()];
        [b * c64(t, 0.0), (b + next * c64(0.0, 1.0)) * c64(t / 2.0, 0.0)]
    });
    for m in candidates {
        let p = Intertwiner::from_matrix_unchecked(m);
        let moved = g.apply(&p)?.distance(&p);
        if best.as_ref().is_none_or(|(d, _)| moved > *d) {
            best = Some((moved, p));
        }
    }
    match best {
        Some((moved, point)) if moved > scale => {
            let h = DiscAutomorphism::moebius(space, &point, tol)?;
            let commutator_norm = commutator_at(g, &h, &point)?;
            Ok(CommutatorWitness {
                h,
                point,
                commutator_norm,
                case: WitnessCase::FixesOrigin,
            })
        }
        _ => Err(Error::GIsIdentity),
    }
}

/// Outcome of testing whether `g` has the Hardy-automorphism form
/// `g(η*) = g_γ(η*)(U⊗I_H)` with `γ*` central and `U` a unitary on `E`
/// preserving `𝔷(E)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardyMembership {
    /// Operator-norm distance of `γ*` from the span of the center.
    pub center_residual: f64,
    /// Relative least-squares residual of `ω(B_k) = B_k(U⊗I)` over the basis.
    pub form_residual: f64,
    /// `‖U*U − I‖` of the recovered edge matrix.
    pub unitary_defect: f64,
    /// Largest entry of `U` mapping a loop to a non-loop edge.
    pub loop_leak: f64,
    pub accepted: bool,
}

/// Edge pairs `(e', e)` with `s(e') = s(e)`: the possible nonzero entries of
/// a right-module map `U` on `E`.
fn edge_pairs(ctx: &CorrespondenceContext) -> Vec<(usize, usize)> {
    let edges = ctx.graph().edges();
    let mut out = Vec::new();
    for e in 0..edges.len() {
        for f in 0..edges.len() {
            if edges[e].source == edges[f].source {
                out.push((f, e));
            }
        }
    }
    out
}

/// `(U⊗I)` for the elementary `U = E_{e', e}`: identity from the `e'`-block to
/// the `e`-block position, i.e. block `(e', e)`.
fn edge_unit_on_eh(ctx: &CorrespondenceContext, row: usize, col: usize) -> CMatrix {
    let mut m = zeros(ctx.dim_eh(), ctx.dim_eh());
    let (r, c) = (ctx.eh_range(row), ctx.eh_range(col));
    for (i, j) in r.zip(c) {
        m[(i, j)] = c64(1.0, 0.0);
    }
    m
}

pub fn hardy_membership(
    ctx: &CorrespondenceContext,
    center: &CenterBasis,
    g: &DiscAutomorphism,
    tol: &Tolerance,
) -> Result<HardyMembership> {
    let dim = ctx.dim_h() + ctx.dim_eh();
    let accept = tol.scaled(dim);
    let center_residual = center.distance(g.gamma().matrix());

    let pairs = edge_pairs(ctx);
    let basis = ctx.basis();
    let block = ctx.dim_h() * ctx.dim_eh();
    let mut a = zeros(block * basis.len(), pairs.len());
    let mut rhs = zeros(block * basis.len(), 1);
    for (k, b) in basis.iter().enumerate() {
        for (p, &(row, col)) in pairs.iter().enumerate() {
            let col_vec = vectorize(&(b * edge_unit_on_eh(ctx, row, col)));
            a.view_mut((k * block, p), (block, 1)).copy_from(&col_vec);
        }
        rhs.view_mut((k * block, 0), (block, 1))
            .copy_from(&vectorize(&g.omega().apply_matrix(b)));
    }
    let (form_residual, unitary_def, loop_leak) = if pairs.is_empty() || basis.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let x = least_squares(&a, &rhs, tol)?;
        let residual = operator_norm(&(&a * &x - &rhs)) / operator_norm(&rhs).max(1.0);
        let n = ctx.num_edges();
        let mut u = zeros(n, n);
        for (p, &(row, col)) in pairs.iter().enumerate() {
            u[(row, col)] = x[(p, 0)];
        }
        let edges = ctx.graph().edges();
        let mut leak = 0.0f64;
        for e in 0..n {
            for f in 0..n {
                if edges[e].is_loop() && !edges[f].is_loop() {
                    leak = leak.max(u[(f, e)].norm());
                }
            }
        }
        (residual, unitary_defect(&u), leak)
    };
    Ok(HardyMembership {
        center_residual,
        form_residual,
        unitary_defect: unitary_def,
        loop_leak,
        accepted: center_residual <= accept
            && form_residual <= accept
            && unitary_def <= accept
            && loop_leak <= accept,
    })
}

/// Whether `g` has the form of an automorphism implemented by the Hardy
/// algebra.
pub fn implements_hardy_automorphism(
    ctx: &CorrespondenceContext,
    g: &DiscAutomorphism,
    tol: &Tolerance,
) -> Result<bool> {
    let center = center_basis(ctx, tol);
    Ok(hardy_membership(ctx, &center, g, tol)?.accepted)
}

/// Result of the search for a certificate that the Hardy-automorphism
/// subgroup (or the isometry subgroup) is not normal.
#[derive(Clone, Debug)]
pub enum NormalityOutcome {
    /// `γ*` central but `ω(γ*) = (ω∘g_γ∘ω⁻¹)(0)` not central, at operator-norm
    /// distance `distance` from the center.
    CenterBreaking {
        omega: AdmissibleIsometry,
        gamma: Intertwiner,
        distance: f64,
        trials: usize,
    },
    /// Loop-free case: the center is `{0}` and `g_γ ∘ (−id) ∘ g_γ` moves `0`
    /// to `g_γ(−γ*)`, so isometries are not normalised by `g_γ`.
    IsometriesNotNormal {
        omega: AdmissibleIsometry,
        gamma: Intertwiner,
        image_norm: f64,
    },
    /// No certificate found within the trial budget. This is not a disproof.
    Inconclusive { trials: usize },
}

/// Searches for a normality counterexample.
///
/// Requires edges; a graph with loops additionally needs some multiplicity
/// `m_v ≥ 2`. Loop-free graphs take the isometry-subgroup path.
pub fn normality_witness(
    ctx: &CorrespondenceContext,
    seed: u64,
    max_trials: usize,
    tol: &Tolerance,
) -> Result<NormalityOutcome> {
    if ctx.num_edges() == 0 {
        return Err(Error::HypothesesNotMet("the graph has no edges".into()));
    }
    let mut rng = rng_from_seed(seed);
    if !ctx.graph().has_loops() {
        let omega = AdmissibleIsometry::minus_identity(ctx);
        let gamma = sample_disc_with(ctx, &mut rng, 0.5);
        let g = DiscAutomorphism::moebius(ctx, &gamma, tol)?;
        let image = g.apply(&omega.apply(&g.apply(&Intertwiner::zero(ctx))?))?;
        return Ok(NormalityOutcome::IsometriesNotNormal {
            omega,
            gamma,
            image_norm: image.norm(),
        });
    }
    if ctx.multiplicities().iter().all(|&m| m < 2) {
        return Err(Error::HypothesesNotMet(
            "every vertex has multiplicity 1".into(),
        ));
    }
    let center = center_basis(ctx, tol);
    if center.is_empty() {
        return Err(Error::HypothesesNotMet("the center is trivial".into()));
    }
    for trial in 1..=max_trials {
        let mut c = zeros(ctx.dim_h(), ctx.dim_eh());
        for b in center.elements() {
            c += b.matrix() * crate::random::complex_gaussian(&mut rng);
        }
        let norm = operator_norm(&c);
        if norm == 0.0 {
            continue;
        }
        let gamma = Intertwiner::from_matrix_unchecked(c * c64(0.5 / norm, 0.0));
        let omega = AdmissibleIsometry::random(ctx, &mut rng);
        let distance = center.distance(&omega.apply_matrix(gamma.matrix()));
        if distance > 1e-3 {
            return Ok(NormalityOutcome::CenterBreaking {
                omega,
                gamma,
                distance,
                trials: trial,
            });
        }
    }
    Ok(NormalityOutcome::Inconclusive { trials: max_trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::random::rng_from_seed;

    #[test]
    fn witness_cases() {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let gamma = sample_disc(&ctx, 3, 0.5);
        let g = DiscAutomorphism::moebius(&ctx, &gamma, &tol).unwrap();
        let w = noncommuting_witness(&g, &ctx, &tol).unwrap();
        assert_eq!(w.case, WitnessCase::MovesOrigin);
        assert!(w.commutator_norm > 1e-6);

        let omega = AdmissibleIsometry::random(&ctx, &mut rng_from_seed(3));
        let g = DiscAutomorphism::from_isometry(&ctx, &omega);
        let w = noncommuting_witness(&g, &ctx, &tol).unwrap();
        assert_eq!(w.case, WitnessCase::FixesOrigin);
        assert!(w.commutator_norm > 1e-6);

        assert!(matches!(
            noncommuting_witness(&DiscAutomorphism::identity(&ctx), &ctx, &tol),
            Err(Error::GIsIdentity)
        ));
    }

    #[test]
    fn hardy_examples() {
        let tol = Tolerance::default();
        let ctx = fixtures::two_vertex();
        assert!(implements_hardy_automorphism(&ctx, &DiscAutomorphism::identity(&ctx), &tol).unwrap());
        let gamma = sample_disc(&ctx, 9, 0.5);
        let g = DiscAutomorphism::moebius(&ctx, &gamma, &tol).unwrap();
        assert!(!implements_hardy_automorphism(&ctx, &g, &tol).unwrap());

        let s = fixtures::scalar_case();
        let mut rng = rng_from_seed(4);
        for _ in 0..10 {
            let g = DiscAutomorphism::random(&s, &mut rng, 0.9, &tol).unwrap();
            assert!(implements_hardy_automorphism(&s, &g, &tol).unwrap());
        }
    }

    #[test]
    fn normality_examples() {
        let tol = Tolerance::default();
        match normality_witness(&fixtures::two_vertex(), 1, 500, &tol).unwrap() {
            NormalityOutcome::CenterBreaking { distance, .. } => assert!(distance > 1e-3),
            other => panic!("unexpected {other:?}"),
        }
        match normality_witness(&fixtures::three_cycle(), 1, 500, &tol).unwrap() {
            NormalityOutcome::IsometriesNotNormal { image_norm, .. } => assert!(image_norm > 1e-3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            normality_witness(&fixtures::scalar_case(), 1, 500, &tol),
            Err(Error::HypothesesNotMet(_))
        ));
    }
}
