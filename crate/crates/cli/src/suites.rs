use discgrp::correspondence::AlgebraElement;
use discgrp::disc::hardy_membership;
use discgrp::hardy_eval::{evaluate, TensorPolynomial};
use discgrp::intertwiners::{center_basis, sample_ball_with, IntertwinerSpace};
use discgrp::linalg::{c64, identity, operator_norm, span_rank, try_inverse, zeros, CMatrix, Tolerance};
use discgrp::matrix_rep::{
    act, homogeneous, neumann_identities_defect, op_product, pseudo_unitary_defect, rep_inverse,
    rep_matrix, PPoint, RepClass,
};
use discgrp::random::{complex_gaussian, haar_unitary, rng_from_seed, well_conditioned, DiscRng};
use discgrp::{
    build_morita, canonical_decomposition, compose, noncommuting_witness, normality_witness,
    AdmissibleIsometry, CorrespondenceContext, DiscAutomorphism, Error, Intertwiner,
    NormalityOutcome,
};
use rand::Rng;
use serde_json::json;

use crate::config::{trial_seed, RunConfig, Suite};
use crate::report::{automorphism_json, automorphism_json_dense, dense, intertwiner_json, isometry_json, Reproducer, SuiteRun};

/// Cap on the random search of the normality suite.
pub const NORMALITY_TRIAL_CAP: usize = 500;

/// Smallest commutator norm accepted as a non-commuting certificate.
const COMMUTATOR_FLOOR: f64 = 1e-6;

/// Smallest distance accepted as a normality certificate.
const WITNESS_FLOOR: f64 = 1e-3;

/// Residual limit for map identities: ten times the absolute tolerance.
fn map_limit(tol: &Tolerance) -> f64 {
    10.0 * tol.abs_tol
}

pub struct SuiteInput<'a> {
    pub ctx: &'a CorrespondenceContext,
    pub cfg: &'a RunConfig,
    pub ranks: &'a [usize],
}

/// Runs `body` once per trial with a derived seed; errors become failures
/// of the check `name`.
fn per_trial<F>(run: &mut SuiteRun, input: &SuiteInput, suite: Suite, name: &str, mut body: F)
where
    F: FnMut(&mut SuiteRun, &mut DiscRng, &Reproducer) -> discgrp::Result<()>,
{
    for t in 0..input.cfg.trials {
        let seed = trial_seed(input.cfg.seed, suite, t);
        let mut rng = rng_from_seed(seed);
        let repro = Reproducer::new(seed, t);
        if let Err(e) = body(run, &mut rng, &repro) {
            run.error(name, &e, &repro);
        }
    }
}

/// Checks that must hold before a suite runs.
pub fn hypotheses(suite: Suite, ctx: &CorrespondenceContext) -> Result<(), String> {
    let g = ctx.graph();
    match suite {
        Suite::Isometry if g.has_sources() => {
            let names: Vec<_> = g.sources().iter().map(|&v| g.vertices()[v].clone()).collect();
            Err(format!("the graph has source vertices: {}", names.join(", ")))
        }
        Suite::Normality if g.num_edges() == 0 => Err("the graph has no edges".into()),
        Suite::Normality if g.has_loops() && ctx.multiplicities().iter().all(|&m| m == 1) => {
            Err("the graph has loops but every multiplicity is 1".into())
        }
        Suite::Center if g.num_edges() == 0 => Err("the graph has no edges".into()),
        _ => Ok(()),
    }
}

pub fn run_suite(suite: Suite, input: &SuiteInput) -> Result<SuiteRun, Error> {
    let mut run = SuiteRun::new();
    match suite {
        Suite::Moebius => moebius(&mut run, input),
        Suite::Matrixrep => matrixrep(&mut run, input),
        Suite::Pseudo => pseudo(&mut run, input),
        Suite::Center => center(&mut run, input),
        Suite::Isometry => isometry(&mut run, input),
        Suite::Normality => normality(&mut run, input)?,
        Suite::Morita => morita(&mut run, input)?,
        Suite::Eval => eval(&mut run, input),
        Suite::All => unreachable!("`all` is expanded before dispatch"),
    }
    Ok(run)
}

fn moebius(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let lim = map_limit(&tol);
    per_trial(run, input, Suite::Moebius, "moebius", |run, rng, base| {
        let gamma = sample_ball_with(ctx, rng, tol.radius());
        let eta = sample_ball_with(ctx, rng, 0.95);
        let repro = base.with(json!({
            "gamma": intertwiner_json(ctx, &gamma),
            "eta": intertwiner_json(ctx, &eta),
        }));
        let g = DiscAutomorphism::moebius(ctx, &gamma, &tol)?;
        let image = g.apply(&eta)?;
        run.at_most("involution", g.apply(&image)?.distance(&eta), lim, &repro);
        run.at_most("zero_to_gamma", g.apply(&Intertwiner::zero(ctx))?.distance(&gamma), lim, &repro);
        run.at_most("gamma_to_zero", g.apply(&gamma)?.norm(), lim, &repro);
        run.at_most("closure", ctx.intertwining_defect(image.matrix()), lim, &repro);
        run.above("image_gap_to_sphere", 1.0 - image.norm(), 0.0, &repro);

        let omega = AdmissibleIsometry::random(ctx, rng);
        let w = DiscAutomorphism::from_isometry(ctx, &omega);
        let d = canonical_decomposition(&[&w, &g], &tol)?;
        let repro = repro.with(json!({
            "gamma": intertwiner_json(ctx, &gamma),
            "omega": isometry_json(&omega),
        }));
        run.at_most(
            "decomposition_round_trip",
            d.gamma().distance(&gamma).max(d.omega().distance(&omega, ctx)),
            lim,
            &repro,
        );
        Ok(())
    });
}

fn random_commutant(ctx: &CorrespondenceContext, rng: &mut DiscRng) -> CMatrix {
    let mut c = zeros(ctx.dim_h(), ctx.dim_h());
    for v in 0..ctx.num_vertices() {
        let r = ctx.h_range(v);
        c.view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(&well_conditioned(rng, r.len()));
    }
    c
}

fn matrixrep(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let lim = map_limit(&tol);
    per_trial(run, input, Suite::Matrixrep, "matrixrep", |run, rng, base| {
        let g = DiscAutomorphism::random(ctx, rng, 0.6, &tol)?;
        let f = DiscAutomorphism::random(ctx, rng, 0.4, &tol)?;
        let eta = sample_ball_with(ctx, rng, 0.9);
        let repro = base.with(json!({
            "g": automorphism_json(ctx, &g),
            "f": automorphism_json(ctx, &f),
            "eta": intertwiner_json(ctx, &eta),
        }));
        let t = rep_matrix(&g);
        let expected = g.apply(&eta)?;
        let got = act(&homogeneous(&eta), &t, ctx, &tol)?;
        run.at_most("action_matches_apply", operator_norm(&(got.eta - expected.matrix())), lim, &repro);

        let c = random_commutant(ctx, rng);
        let other = act(&PPoint::new(c.clone(), &c * eta.matrix()), &t, ctx, &tol)?;
        run.at_most(
            "representative_independence",
            operator_norm(&(other.eta - expected.matrix())),
            lim,
            &repro,
        );

        let gf = compose(&g, &f, &tol)?;
        let product = op_product(&RepClass::of(&g), &RepClass::of(&f));
        run.at_most("homomorphism", product.distance(&RepClass::of(&gf), ctx, &tol)?, lim, &repro);
        Ok(())
    });
}

fn pseudo(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let lim = map_limit(&tol);
    per_trial(run, input, Suite::Pseudo, "pseudo", |run, rng, base| {
        let g = DiscAutomorphism::random(ctx, rng, tol.radius(), &tol)?;
        let repro = base.with(json!({ "g": automorphism_json(ctx, &g) }));
        let t = rep_matrix(&g);
        run.at_most("pseudo_unitarity", pseudo_unitary_defect(&t), lim, &repro);
        let ids = neumann_identities_defect(g.gamma(), &tol)?;
        run.at_most("neumann_identities", ids.iter().cloned().fold(0.0, f64::max), tol.abs_tol, &repro);
        let class = RepClass::of(&g);
        let inv = rep_inverse(&class, &tol)?;
        let lu = try_inverse(t.matrix()).ok_or(Error::Numerical("representation matrix is singular".into()))?;
        run.at_most("closed_form_inverse", operator_norm(&(inv.rep.matrix() - lu)), lim, &repro);
        Ok(())
    });
}

fn center(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    per_trial(run, input, Suite::Center, "center", |run, rng, base| {
        let g = match rng.random_range(0..3) {
            0 => DiscAutomorphism::random(ctx, rng, 0.8, &tol)?,
            1 => DiscAutomorphism::from_isometry(ctx, &AdmissibleIsometry::random(ctx, rng)),
            _ => DiscAutomorphism::moebius(ctx, &sample_ball_with(ctx, rng, 0.8), &tol)?,
        };
        if g.is_identity(ctx, &tol) {
            return Ok(());
        }
        let repro = base.with(json!({ "g": automorphism_json(ctx, &g) }));
        let w = noncommuting_witness(&g, ctx, &tol)?;
        let recomputed = g
            .apply(&w.h.apply(&w.point)?)?
            .distance(&w.h.apply(&g.apply(&w.point)?)?);
        run.above("commutator", recomputed.min(w.commutator_norm), COMMUTATOR_FLOOR, &repro);
        if run.witnesses.len() < 3 {
            run.witnesses.push(json!({
                "g": automorphism_json(ctx, &g),
                "h": automorphism_json(ctx, &w.h),
                "point": intertwiner_json(ctx, &w.point),
                "commutator_norm": recomputed,
                "case": w.case,
            }));
        }
        Ok(())
    });
}

fn central_element(ctx: &CorrespondenceContext, basis: &[Intertwiner], rng: &mut DiscRng, norm: f64) -> Intertwiner {
    let mut m = zeros(ctx.dim_h(), ctx.dim_eh());
    for b in basis {
        m += b.matrix() * complex_gaussian(rng);
    }
    let n = operator_norm(&m);
    if n > 0.0 {
        m *= c64(norm / n, 0.0);
    }
    Intertwiner::from_matrix_unchecked(m)
}

/// `η* ↦ η*(U⊗I_H)` with `U` a Haar unitary on each class of parallel edges.
fn hardy_form_isometry(ctx: &CorrespondenceContext, rng: &mut DiscRng) -> Result<AdmissibleIsometry, Error> {
    let edges = ctx.graph().edges();
    let mut v_adj = zeros(ctx.dim_eh(), ctx.dim_eh());
    let mut seen = vec![false; edges.len()];
    for e in 0..edges.len() {
        if seen[e] {
            continue;
        }
        let class: Vec<usize> = (e..edges.len())
            .filter(|&f| edges[f].source == edges[e].source && edges[f].range == edges[e].range)
            .collect();
        let u = haar_unitary(rng, class.len());
        for (a, &f) in class.iter().enumerate() {
            seen[f] = true;
            for (b, &h) in class.iter().enumerate() {
                for (i, j) in ctx.eh_range(f).zip(ctx.eh_range(h)) {
                    v_adj[(i, j)] = u[(a, b)];
                }
            }
        }
    }
    AdmissibleIsometry::new(ctx, identity(ctx.dim_h()), v_adj)
}

fn isometry(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let center = center_basis(ctx, &tol);
    per_trial(run, input, Suite::Isometry, "isometry", |run, rng, base| {
        let omega = AdmissibleIsometry::random(ctx, rng);
        let gamma = central_element(ctx, center.elements(), rng, 0.5);
        let repro = base.with(json!({
            "omega": isometry_json(&omega),
            "gamma": intertwiner_json(ctx, &gamma),
        }));
        run.at_most("basis_preservation", omega.preservation_defect(ctx), tol.abs_tol, &repro);
        run.at_most("unitarity", omega.unitarity_defect(), tol.abs_tol, &repro);
        let violations = omega.structure_violations(ctx, &tol);
        run.at_most("structure_violations", violations.len() as f64, 0.0, &repro);

        let hardy = hardy_form_isometry(ctx, rng)?;
        let repro = repro.with(json!({
            "omega": isometry_json(&hardy),
            "gamma": intertwiner_json(ctx, &gamma),
        }));
        let g = DiscAutomorphism::new(hardy, &gamma, &tol)?;
        let m = hardy_membership(ctx, &center, &g, &tol)?;
        run.at_most("hardy_form_rejected", if m.accepted { 0.0 } else { 1.0 }, 0.0, &repro);
        Ok(())
    });
}

fn normality(run: &mut SuiteRun, input: &SuiteInput) -> Result<(), Error> {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let seed = trial_seed(input.cfg.seed, Suite::Normality, 0);
    let repro = Reproducer::new(seed, 0).with(json!({ "max_trials": NORMALITY_TRIAL_CAP }));
    match normality_witness(ctx, seed, NORMALITY_TRIAL_CAP, &tol)? {
        NormalityOutcome::CenterBreaking { omega, gamma, distance, trials } => {
            let g = DiscAutomorphism::moebius(ctx, &gamma, &tol)?;
            let w = DiscAutomorphism::from_isometry(ctx, &omega);
            let conj = compose(&compose(&w, &g, &tol)?, &w.inverse(&tol)?, &tol)?;
            let moved = conj.apply(&Intertwiner::zero(ctx))?;
            let center = center_basis(ctx, &tol);
            run.above("conjugate_outside_center", center.distance(moved.matrix()), WITNESS_FLOOR, &repro);
            run.at_most("gamma_central", center.distance(gamma.matrix()), tol.abs_tol, &repro);
            run.at_most(
                "omega_violations",
                omega.structure_violations(ctx, &tol).len() as f64,
                0.0,
                &repro,
            );
            run.witnesses.push(json!({
                "kind": "center_breaking",
                "omega": isometry_json(&omega),
                "gamma": intertwiner_json(ctx, &gamma),
                "distance": distance,
                "trials": trials,
            }));
        }
        NormalityOutcome::IsometriesNotNormal { omega, gamma, image_norm } => {
            let g = DiscAutomorphism::moebius(ctx, &gamma, &tol)?;
            let independent = g.apply(&gamma.neg())?.norm();
            run.above("conjugate_moves_origin", independent.min(image_norm), WITNESS_FLOOR, &repro);
            run.witnesses.push(json!({
                "kind": "isometries_not_normal",
                "omega": isometry_json(&omega),
                "gamma": intertwiner_json(ctx, &gamma),
                "image_norm": image_norm,
            }));
        }
        NormalityOutcome::Inconclusive { trials } => {
            run.mark_inconclusive(format!("no certificate within {trials} trials; not a disproof"));
        }
    }
    Ok(())
}

fn morita(run: &mut SuiteRun, input: &SuiteInput) -> Result<(), Error> {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    let lim = map_limit(&tol);
    let mut rank_sets = vec![vec![1; ctx.num_vertices()]];
    if input.ranks != rank_sets[0].as_slice() {
        rank_sets.push(input.ranks.to_vec());
    }
    for ranks in rank_sets {
        let m = build_morita(ctx, &ranks, &tol)?;
        let target = m.target();
        let label = ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let images: Vec<_> = ctx.basis().iter().map(|b| m.transport_matrix(b)).collect();
        let rank = span_rank(&images, &tol);
        let seed = trial_seed(input.cfg.seed, Suite::Morita, usize::MAX);
        let repro = Reproducer::new(seed, 0).with(json!({ "ranks": ranks }));
        run.at_most(
            &format!("[{label}] transported_rank_deficit"),
            (target.dimension() as f64 - rank as f64).abs().max((ctx.dimension() as f64 - rank as f64).abs()),
            0.0,
            &repro,
        );
        run.at_most(&format!("[{label}] bimodule_map"), m.bimodule_defect(), tol.abs_tol, &repro);
        run.witnesses.push(serde_json::to_value(m.summary()).expect("summary is serializable"));

        let points_x: Vec<_> = {
            let mut rng = rng_from_seed(seed);
            (0..4).map(|_| sample_ball_with(target, &mut rng, 0.8)).collect()
        };
        let points: Vec<_> = {
            let mut rng = rng_from_seed(seed ^ 1);
            (0..4).map(|_| sample_ball_with(ctx, &mut rng, 0.8)).collect()
        };
        per_trial(run, input, Suite::Morita, "morita", |run, rng, base| {
            let eta = sample_ball_with(ctx, rng, 0.95);
            let g = DiscAutomorphism::random(ctx, rng, 0.45, &tol)?;
            let h = DiscAutomorphism::random(ctx, rng, 0.45, &tol)?;
            let gx = m.random_target_automorphism(rng, 0.45, &tol)?;
            let eta_x = sample_ball_with(target, rng, 0.8);
            let repro = base.with(json!({
                "ranks": ranks,
                "eta": intertwiner_json(ctx, &eta),
                "g": automorphism_json(ctx, &g),
                "h": automorphism_json(ctx, &h),
                "g_x": automorphism_json_dense(&gx),
                "eta_x": dense(eta_x.matrix()),
            }));
            let x = m.transport(&eta);
            run.at_most(&format!("[{label}] norm_preserved"), (x.norm() - eta.norm()).abs(), tol.abs_tol, &repro);
            run.at_most(&format!("[{label}] transported_relation"), target.intertwining_defect(x.matrix()), tol.abs_tol, &repro);

            let fg = m.functor_f(&g, &tol)?;
            let fh = m.functor_f(&h, &tol)?;
            let f_gh = m.functor_f(&compose(&g, &h, &tol)?, &tol)?;
            let composed = compose(&fg, &fh, &tol)?;
            run.at_most(&format!("[{label}] functor_f_composition"), f_gh.map_distance(&composed, &points_x)?, lim, &repro);
            run.at_most(&format!("[{label}] g_after_f"), m.functor_g(&fg, &tol)?.map_distance(&g, &points)?, lim, &repro);
            run.at_most(
                &format!("[{label}] f_after_g"),
                m.functor_f(&m.functor_g(&gx, &tol)?, &tol)?.map_distance(&gx, &points_x)?,
                lim,
                &repro,
            );
            let (eps, lam) = m.naturality_defect(&g, &eta, &tol)?;
            let lam_x = m.lambda_square_defect(&gx, &eta_x, &tol)?;
            run.at_most(&format!("[{label}] epsilon_square"), eps, lim, &repro);
            run.at_most(&format!("[{label}] lambda_square"), lam.max(lam_x), lim, &repro);
            Ok(())
        });
    }
    Ok(())
}

fn random_polynomial(ctx: &CorrespondenceContext, rng: &mut DiscRng, degree: usize) -> TensorPolynomial {
    let a = AlgebraElement((0..ctx.num_vertices()).map(|_| complex_gaussian(rng)).collect());
    let mut p = TensorPolynomial::algebra(ctx, &a);
    if ctx.num_edges() == 0 {
        return p;
    }
    for _ in 0..4 {
        let len = rng.random_range(1..=degree);
        let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..ctx.num_edges())).collect();
        p = p.add(&TensorPolynomial::word(ctx, complex_gaussian(rng), &word));
    }
    p
}

fn eval(run: &mut SuiteRun, input: &SuiteInput) {
    let ctx = input.ctx;
    let tol = input.cfg.tol;
    per_trial(run, input, Suite::Eval, "eval", |run, rng, base| {
        let eta = sample_ball_with(ctx, rng, 0.95);
        let p = random_polynomial(ctx, rng, 3);
        let q = random_polynomial(ctx, rng, 3);
        let (s, t) = (complex_gaussian(rng), complex_gaussian(rng));
        let repro = base.with(json!({
            "eta": intertwiner_json(ctx, &eta),
            "p": p.display(ctx).to_string(),
            "q": q.display(ctx).to_string(),
        }));
        let ep = evaluate(ctx, &p, &eta);
        let eq = evaluate(ctx, &q, &eta);
        let scale = operator_norm(&ep).max(1.0) * operator_norm(&eq).max(1.0);
        let pq = evaluate(ctx, &p.mul(&q, ctx), &eta);
        run.at_most("multiplicative", operator_norm(&(pq - &ep * &eq)) / scale, tol.abs_tol, &repro);
        let lin = evaluate(ctx, &p.scale(s).add(&q.scale(t)), &eta);
        let scale = operator_norm(&ep).max(operator_norm(&eq)).max(1.0);
        run.at_most("linear", operator_norm(&(lin - (&ep * s + &eq * t))) / scale, tol.abs_tol, &repro);
        let reparsed = TensorPolynomial::parse(ctx, &p.display(ctx).to_string())?;
        let scale = operator_norm(&ep).max(1.0);
        run.at_most(
            "parse_round_trip",
            operator_norm(&(evaluate(ctx, &reparsed, &eta) - &ep)) / scale,
            tol.abs_tol,
            &repro,
        );

        let g = DiscAutomorphism::random(ctx, rng, 0.6, &tol)?;
        let moved = g.apply(&eta)?;
        let (mp, mq) = (evaluate(ctx, &p, &moved), evaluate(ctx, &q, &moved));
        let scale = operator_norm(&mp).max(1.0) * operator_norm(&mq).max(1.0);
        let mpq = evaluate(ctx, &p.mul(&q, ctx), &moved);
        run.at_most("pulled_back_multiplicative", operator_norm(&(mpq - mp * mq)) / scale, tol.abs_tol, &repro);
        Ok(())
    });
}
