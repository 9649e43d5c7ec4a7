use discgrp::correspondence::AlgebraElement;
use discgrp::fixtures;
use discgrp::hardy_eval::FockTruncation;
use discgrp::intertwiners::{
    center_basis, is_intertwiner, pattern, sample_ball_with, IntertwinerSpace,
};
use discgrp::linalg::{
    c64, hermitian_inv_sqrt, hermitian_sqrt, identity, nullspace_basis, operator_norm, zeros,
    Tolerance,
};
use discgrp::matrix_rep::{act, homogeneous, rep_matrix, PPoint, RepClass};
use discgrp::random::{complex_gaussian, gaussian_matrix, rng_from_seed, well_conditioned};
use discgrp::{
    build_morita, compose, AdmissibleIsometry, CorrespondenceContext, DiscAutomorphism,
    MoebiusMap,
};
use proptest::prelude::*;

fn context(i: usize) -> CorrespondenceContext {
    let all = fixtures::sourceless();
    all[i % all.len()].1.clone()
}

fn algebra(ctx: &CorrespondenceContext, seed: u64) -> AlgebraElement {
    let mut rng = rng_from_seed(seed);
    AlgebraElement((0..ctx.num_vertices()).map(|_| complex_gaussian(&mut rng)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inv_sqrt_inverts_sqrt(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n);
        let p = &a * a.adjoint() + identity(n) * c64(0.1, 0.0);
        let tol = Tolerance::default();
        let s = hermitian_sqrt(&p, &tol).unwrap();
        let si = hermitian_inv_sqrt(&p, &tol).unwrap();
        prop_assert!(operator_norm(&(&s * &s - &p)) <= 1e-9 * operator_norm(&p).max(1.0));
        prop_assert!(operator_norm(&(&s * &si - identity(n))) <= 1e-8);
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, n);
        prop_assert!(operator_norm(&(&a * &b)) <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-12));
    }

    #[test]
    fn nullspace_is_orthonormal(seed in any::<u64>(), rows in 1usize..5, extra in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let cols = rows + extra;
        let l = gaussian_matrix(&mut rng, rows, cols);
        let basis = nullspace_basis(&l, &Tolerance::default());
        prop_assert_eq!(basis.len(), extra);
        for (i, x) in basis.iter().enumerate() {
            prop_assert!(operator_norm(&(&l * x)) <= 1e-9);
            for (j, y) in basis.iter().enumerate() {
                let ip = (x.adjoint() * y)[(0, 0)];
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - c64(expected, 0.0)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn actions_are_homomorphisms(i in 0usize..5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let ctx = context(i);
        let (a, b) = (algebra(&ctx, s1), algebra(&ctx, s2));
        let ab = a.mul(&b);
        prop_assert!(operator_norm(&(ctx.sigma_op(&ab) - ctx.sigma_op(&a) * ctx.sigma_op(&b))) <= 1e-12);
        prop_assert!(operator_norm(&(ctx.phi_tensor_op(&ab) - ctx.phi_tensor_op(&a) * ctx.phi_tensor_op(&b))) <= 1e-12);
        prop_assert!(operator_norm(&(ctx.sigma_op(&a.adjoint()) - ctx.sigma_op(&a).adjoint())) <= 1e-12);
    }

    #[test]
    fn commutant_basis_commutes(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let a = algebra(&ctx, s);
        for c in ctx.commutant_basis() {
            prop_assert!(operator_norm(&(&c * ctx.sigma_op(&a) - ctx.sigma_op(&a) * &c)) <= 1e-12);
            let ce = ctx.commutant_on_eh(&c);
            prop_assert!(operator_norm(&(&ce * ctx.phi_tensor_op(&a) - ctx.phi_tensor_op(&a) * &ce)) <= 1e-12);
        }
    }

    #[test]
    fn pattern_matches_relation(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let tol = Tolerance::default();
        let pat = pattern(&ctx);
        let mut rng = rng_from_seed(s);
        for v in 0..ctx.num_vertices() {
            for e in 0..ctx.num_edges() {
                let (rv, re) = (ctx.h_range(v), ctx.eh_range(e));
                let mut m = zeros(ctx.dim_h(), ctx.dim_eh());
                m.view_mut((rv.start, re.start), (rv.len(), re.len()))
                    .copy_from(&gaussian_matrix(&mut rng, rv.len(), re.len()));
                prop_assert_eq!(is_intertwiner(&ctx, &m, &tol).unwrap(), pat.is_allowed(v, e));
            }
        }
        let total: usize = pat.cells().iter()
            .map(|&(v, e)| ctx.h_range(v).len() * ctx.eh_range(e).len())
            .sum();
        prop_assert_eq!(total, ctx.dimension());
    }

    #[test]
    fn closure_under_adjoint_products(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let mut rng = rng_from_seed(s);
        let x = sample_ball_with(&ctx, &mut rng, 0.9);
        let y = sample_ball_with(&ctx, &mut rng, 0.9);
        let a = algebra(&ctx, s ^ 1);
        let xy = x.matrix() * y.adjoint();
        prop_assert!(operator_norm(&(&xy * ctx.sigma_op(&a) - ctx.sigma_op(&a) * &xy)) <= 1e-12);
        let yx = y.adjoint() * x.matrix();
        prop_assert!(operator_norm(&(&yx * ctx.phi_tensor_op(&a) - ctx.phi_tensor_op(&a) * &yx)) <= 1e-12);
    }

    #[test]
    fn moebius_is_involutive(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(s);
        let gamma = sample_ball_with(&ctx, &mut rng, 0.9);
        let eta = sample_ball_with(&ctx, &mut rng, 0.9);
        let g = MoebiusMap::new(&gamma, &tol).unwrap();
        let image = g.apply(&eta).unwrap();
        prop_assert!(image.norm() < 1.0);
        prop_assert!(g.apply(&image).unwrap().distance(&eta) <= 1e-9);
    }

    #[test]
    fn isometries_preserve_norm(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let mut rng = rng_from_seed(s);
        let w = AdmissibleIsometry::random(&ctx, &mut rng);
        let eta = sample_ball_with(&ctx, &mut rng, 0.9);
        prop_assert!((w.apply(&eta).norm() - eta.norm()).abs() <= 1e-12);
        prop_assert!(w.unitarity_defect() <= 1e-12);
    }

    #[test]
    fn composition_is_associative(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(s);
        let f = DiscAutomorphism::random(&ctx, &mut rng, 0.4, &tol).unwrap();
        let g = DiscAutomorphism::random(&ctx, &mut rng, 0.4, &tol).unwrap();
        let h = DiscAutomorphism::random(&ctx, &mut rng, 0.4, &tol).unwrap();
        let left = compose(&compose(&f, &g, &tol).unwrap(), &h, &tol).unwrap();
        let right = compose(&f, &compose(&g, &h, &tol).unwrap(), &tol).unwrap();
        prop_assert!(left.distance(&right, &ctx) <= 1e-9);
        let id = compose(&f, &f.inverse(&tol).unwrap(), &tol).unwrap();
        prop_assert!(id.is_identity(&ctx, &tol));
    }

    #[test]
    fn action_depends_only_on_class(i in 0usize..5, s in any::<u64>()) {
        let ctx = context(i);
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(s);
        let g = DiscAutomorphism::random(&ctx, &mut rng, 0.6, &tol).unwrap();
        let eta = sample_ball_with(&ctx, &mut rng, 0.9);
        let mut c = zeros(ctx.dim_h(), ctx.dim_h());
        for v in 0..ctx.num_vertices() {
            let r = ctx.h_range(v);
            c.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&well_conditioned(&mut rng, r.len()));
        }
        let t = rep_matrix(&g);
        let a = act(&homogeneous(&eta), &t, &ctx, &tol).unwrap();
        let b = act(&PPoint::new(c.clone(), &c * eta.matrix()), &t, &ctx, &tol).unwrap();
        prop_assert!(operator_norm(&(a.eta - b.eta)) <= 1e-9);
        let scaled = RepClass { rep: discgrp::RepMatrix::from_matrix(ctx.dim_h(), ctx.dim_eh(), t.matrix() * c64(0.0, 2.0)).unwrap() };
        prop_assert!(scaled.distance(&RepClass::of(&g), &ctx, &tol).unwrap() <= 1e-9);
    }

    #[test]
    fn center_elements_commute_with_edges(i in 0usize..5) {
        let ctx = context(i);
        let tol = Tolerance::default();
        let center = center_basis(&ctx, &tol);
        for b in center.elements() {
            prop_assert!(discgrp::intertwiners::center_defect(&ctx, b.matrix()) <= 1e-10);
            prop_assert!(ctx.intertwining_defect(b.matrix()) <= 1e-10);
        }
    }

    #[test]
    fn morita_transport_is_isometric(s in any::<u64>(), k in 1usize..3) {
        let ctx = fixtures::two_vertex();
        let tol = Tolerance::default();
        let m = build_morita(&ctx, &[k, 1], &tol).unwrap();
        let mut rng = rng_from_seed(s);
        let eta = sample_ball_with(&ctx, &mut rng, 0.9);
        let x = m.transport(&eta);
        prop_assert!((x.norm() - eta.norm()).abs() <= 1e-10);
        prop_assert!(m.transport_back(&x).distance(&eta) <= 1e-10);
    }

    #[test]
    fn fock_creation_is_covariant(i in 0usize..5, s in any::<u64>(), order in 1usize..4) {
        let ctx = context(i);
        let fock = FockTruncation::new(&ctx, order);
        let mut rng = rng_from_seed(s);
        let xi: Vec<_> = (0..ctx.num_edges()).map(|_| complex_gaussian(&mut rng)).collect();
        let a = algebra(&ctx, s ^ 7);
        let t = fock.creation_matrix(&xi);
        let left = fock.phi_infinity(&a) * &t - fock.creation_matrix(&fock.left_on_edges(&a, &xi));
        let right = &t * fock.phi_infinity(&a) - fock.creation_matrix(&fock.right_on_edges(&a, &xi));
        prop_assert!(operator_norm(&left) <= 1e-12);
        prop_assert!(operator_norm(&right) <= 1e-12);
        prop_assert!(operator_norm(&t) <= fock.module_norm(&xi) * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn fock_level_counts_follow_paths() {
    let ctx = fixtures::two_vertex();
    let fock = FockTruncation::new(&ctx, 3);
    let counts: Vec<_> = (0..=3).map(|n| fock.paths_at(n)).collect();
    assert_eq!(counts, vec![2, 2, 2, 2]);
}
