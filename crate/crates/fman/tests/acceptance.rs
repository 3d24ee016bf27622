//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`). Tolerances
//! are pinned here, not configurable.

use fman::constructions::{self, check_deformed_connection, gallery, DeformationParams};
use fman::expr::{parse_expr, Func, ScalarExpr};
use fman::manifold::{MetricFManifold, PointCtx};
use fman::sample::{random_vectors, sample_points};
use fman::tensor::{codifferential_1form_with_frame, codifferential_2form_with_frame};
use fman::trans_s::{self, CharacteristicFunctions};
use fman::verify::{CheckConfig, Label, Verifier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(n: u32, desc: &str, pass: bool, detail: String) {
    println!(
        "criterion {n:>2} [{}]: {desc} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {desc} - {detail}");
}

fn points_of(man: &MetricFManifold) -> Vec<Vec<f64>> {
    sample_points(man.chart(), 64, 0)
}

fn ctxs_of(man: &MetricFManifold) -> Vec<PointCtx> {
    points_of(man)
        .iter()
        .map(|p| man.point_ctx(p).unwrap())
        .collect()
}

fn verifier_of(man: &MetricFManifold) -> Verifier<'_> {
    Verifier::new(man, CheckConfig::default()).unwrap()
}

fn trans_s_gallery() -> Vec<(&'static str, MetricFManifold)> {
    gallery::all_manifold_names()
        .into_iter()
        .filter_map(|name| {
            let man = gallery::manifold(name).unwrap();
            let is_trans = verifier_of(&man).classify().has(Label::TransS);
            is_trans.then_some((name, man))
        })
        .collect()
}

#[test]
fn criterion_01_axiom_suite() {
    let mut worst: f64 = 0.0;
    let mut all_pass = true;
    let names = gallery::all_manifold_names();
    assert!(names.len() >= 6, "gallery must hold at least 6 manifolds");
    for name in &names {
        let man = gallery::manifold(name).unwrap();
        let report = man.check_axioms(&points_of(&man), 1e-8);
        all_pass &= report.passed();
        for c in &report.checks {
            if c.tolerance > 0.0 {
                worst = worst.max(c.max_residual);
            }
        }
    }
    criterion(
        1,
        "all gallery manifolds pass the axiom suite at 64 points, tol 1e-8",
        all_pass,
        format!("{} manifolds, worst residual {worst:.3e}", names.len()),
    );
}

/// Deterministic random expression over `dim` coordinates with bounded depth.
fn random_expr(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> ScalarExpr {
    if depth == 0 || rng.random_range(0..10) < 2 {
        return if rng.random_bool(0.5) {
            ScalarExpr::constant(rng.random_range(-2.0..2.0))
        } else {
            let i = rng.random_range(0..dim);
            ScalarExpr::coord(format!("c{i}"), i)
        };
    }
    let a = random_expr(rng, dim, depth - 1);
    let b = random_expr(rng, dim, depth - 1);
    match rng.random_range(0..12) {
        0 => a.add(&b),
        1 => a.sub(&b),
        2 => a.mul(&b),
        3 => a.div(&b),
        4 => a.neg(),
        5 => a.powi(rng.random_range(0..4)),
        6 => a.apply(Func::Sin),
        7 => a.apply(Func::Cos),
        8 => a.apply(Func::Exp),
        9 => a.apply(Func::Sinh),
        // Guarded positive arguments for log/sqrt/real pow.
        10 => a.mul(&a).add(&ScalarExpr::constant(0.5)).apply(Func::Log),
        _ => a
            .mul(&a)
            .add(&ScalarExpr::constant(0.25))
            .powf(rng.random_range(-1.5..1.5)),
    }
}

#[test]
fn criterion_02_ad_versus_finite_differences() {
    let dim = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    while accepted < 1000 {
        attempts += 1;
        assert!(attempts < 100_000, "generator starved");
        let e = random_expr(&mut rng, dim, 4);
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.9..0.9)).collect();
        let Ok(jet) = e.eval_jet2(&p) else { continue };
        let scale = jet
            .gradient
            .iter()
            .chain(jet.hessian.iter())
            .fold(jet.value.abs(), |acc, v| acc.max(v.abs()));
        if scale > 1e3 {
            continue; // outside the finite-difference oracle's validity
        }
        let h = 1e-5;
        let mut ok = true;
        let mut grad_ok = true;
        for i in 0..dim {
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[i] += h;
            minus[i] -= h;
            let (Ok(fp), Ok(fm)) = (e.eval_value(&plus), e.eval_value(&minus)) else {
                ok = false;
                break;
            };
            let fd = (fp - fm) / (2.0 * h);
            let err = (jet.gradient[i] - fd).abs() / (1.0 + jet.gradient[i].abs());
            worst_grad = worst_grad.max(err);
            grad_ok &= err <= 1e-5;
        }
        if !ok {
            continue;
        }
        let h2 = 1e-4;
        let mut hess_ok = true;
        'outer: for i in 0..dim {
            for j in 0..dim {
                let mut pp = p.clone();
                let mut pm = p.clone();
                let mut mp = p.clone();
                let mut mm = p.clone();
                pp[i] += h2;
                pp[j] += h2;
                pm[i] += h2;
                pm[j] -= h2;
                mp[i] -= h2;
                mp[j] += h2;
                mm[i] -= h2;
                mm[j] -= h2;
                let vals = [
                    e.eval_value(&pp),
                    e.eval_value(&pm),
                    e.eval_value(&mp),
                    e.eval_value(&mm),
                ];
                let [Ok(vpp), Ok(vpm), Ok(vmp), Ok(vmm)] = vals else {
                    ok = false;
                    break 'outer;
                };
                let fd = (vpp - vpm - vmp + vmm) / (4.0 * h2 * h2);
                let err = (jet.hessian[(i, j)] - fd).abs() / (1.0 + jet.hessian[(i, j)].abs());
                worst_hess = worst_hess.max(err);
                hess_ok &= err <= 1e-3;
            }
        }
        if !ok {
            continue;
        }
        accepted += 1;
        assert!(
            grad_ok && hess_ok,
            "AD/FD mismatch for `{e}` at {p:?} (grad err {worst_grad:.2e}, hess err {worst_hess:.2e})"
        );
    }
    criterion(
        2,
        "1000 expression/point pairs: jets match central differences",
        accepted == 1000,
        format!("worst gradient err {worst_grad:.2e}, worst hessian err {worst_hess:.2e}"),
    );
}

#[test]
fn criterion_03_codifferential_theorem_values() {
    let mut worst: f64 = 0.0;
    let man = gallery::manifold("standard_S(1,2)").unwrap();
    for ctx in ctxs_of(&man) {
        let delta_f = codifferential_2form_with_frame(&ctx.nabla_big_f, &ctx.frame);
        for xi in &ctx.xi {
            worst = worst.max((delta_f.dot(xi) - 2.0).abs());
        }
        for ne in &ctx.nabla_eta {
            worst = worst.max(codifferential_1form_with_frame(ne, &ctx.frame).abs());
        }
    }
    let man = gallery::manifold("kenmotsu(2)").unwrap();
    for ctx in ctxs_of(&man) {
        let delta_eta = codifferential_1form_with_frame(&ctx.nabla_eta[0], &ctx.frame);
        worst = worst.max((delta_eta - (-4.0)).abs());
    }
    criterion(
        3,
        "(delta F)(xi_i) = 2n alpha_i and delta eta_i = -2n beta_i on standard_S(1,2) and kenmotsu(2)",
        worst <= 1e-6,
        format!("worst deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_04_three_route_extraction() {
    let mut worst_disagreement: f64 = 0.0;
    let items = trans_s_gallery();
    assert!(!items.is_empty());
    for (name, man) in &items {
        let verifier = verifier_of(man);
        let d = verifier.route_disagreement().unwrap();
        worst_disagreement = worst_disagreement.max(d);
        assert!(d <= 1e-6, "{name}: route disagreement {d:.3e}");
    }
    let check_values = |name: &str, alpha: f64, beta: f64| {
        let man = gallery::manifold(name).unwrap();
        for ctx in ctxs_of(&man).iter().take(16) {
            let cf = trans_s::extract_pointwise(&man, ctx).unwrap().cf;
            for i in 0..man.s() {
                assert!((cf.alpha[i] - alpha).abs() <= 1e-6, "{name} alpha_{i}");
                assert!((cf.beta[i] - beta).abs() <= 1e-6, "{name} beta_{i}");
            }
        }
    };
    check_values("standard_S", 1.0, 0.0);
    check_values("kenmotsu", 0.0, 1.0);
    check_values("euclidean_C", 0.0, 0.0);
    criterion(
        4,
        "three extraction routes agree on all trans-S gallery manifolds",
        true,
        format!(
            "{} trans-S manifolds, worst disagreement {worst_disagreement:.3e}",
            items.len()
        ),
    );
}

#[test]
fn criterion_05_normality_characterization() {
    // The non-normal warp: defining identity holds, the xi-derivative
    // identity fails in the flat slots, the normality tensor is visibly
    // nonzero.
    let man = gallery::manifold("warped_almost").unwrap();
    let ctxs = ctxs_of(&man);
    let mut fit_worst: f64 = 0.0;
    let mut eq34_flat_worst: f64 = 0.0;
    let mut normality_worst: f64 = 0.0;
    for ctx in &ctxs {
        let ex = trans_s::extract_pointwise(&man, ctx).unwrap();
        fit_worst = fit_worst.max(ex.raw_residual);
        let basis = man.build_f_basis(ctx).unwrap();
        for x in &basis {
            let fx = &ctx.fmat * x;
            let f2x = &ctx.fmat * &fx;
            // Flat slots i <= s = 1: here i = 0.
            let lhs = ctx.nabla_xi_apply(0, x);
            let rhs = -&fx * ex.cf.alpha[0] - f2x * ex.cf.beta[0];
            eq34_flat_worst = eq34_flat_worst.max((lhs - rhs).amax());
        }
        normality_worst = normality_worst.max(man.normality_components(ctx).max_abs());
    }
    let labels = verifier_of(&man).classify();
    let verdict_ok =
        labels.has(Label::AlmostTransS) && !labels.has(Label::TransS) && !labels.has(Label::Normal);

    // Both directions of the characterization across the gallery.
    let mut bidirectional = true;
    let mut checked = 0;
    for name in gallery::all_manifold_names() {
        let man = gallery::manifold(name).unwrap();
        let verifier = verifier_of(&man);
        if !verifier.classify().has(Label::AlmostTransS) {
            continue;
        }
        checked += 1;
        let samples: Vec<(PointCtx, CharacteristicFunctions)> = ctxs_of(&man)
            .into_iter()
            .map(|ctx| {
                let cf = trans_s::extract_pointwise(&man, &ctx).unwrap().cf;
                (ctx, cf)
            })
            .collect();
        let (eq34, _) = trans_s::check_xi_derivative(&man, &samples, 1e-8).unwrap();
        let normal = samples
            .iter()
            .map(|(ctx, _)| man.normality_components(ctx).max_abs())
            .fold(0.0f64, f64::max)
            <= 1e-8;
        if eq34.pass != normal {
            bidirectional = false;
            eprintln!(
                "characterization mismatch on {name}: eq34 {} normal {normal}",
                eq34.pass
            );
        }
    }
    criterion(
        5,
        "almost-trans-S-not-trans-S verdict on the non-constant warp; characterization biconditional",
        fit_worst <= 1e-8
            && eq34_flat_worst >= 1e-3
            && normality_worst >= 1e-3
            && verdict_ok
            && bidirectional
            && checked >= 5,
        format!(
            "fit {fit_worst:.2e}, xi-derivative defect {eq34_flat_worst:.2e}, \
             normality {normality_worst:.2e}, {checked} manifolds in biconditional"
        ),
    );
}

#[test]
fn criterion_06_derived_identities() {
    let mut worst: f64 = 0.0;
    let items = trans_s_gallery();
    for (name, man) in &items {
        let samples: Vec<(PointCtx, CharacteristicFunctions)> = ctxs_of(man)
            .into_iter()
            .map(|ctx| {
                let cf = trans_s::extract_pointwise(man, &ctx).unwrap().cf;
                (ctx, cf)
            })
            .collect();
        for entry in trans_s::check_prop_identities(&samples, 1e-7) {
            worst = worst.max(entry.max_residual);
            assert!(
                entry.pass,
                "{name}: {} residual {:.3e}",
                entry.name, entry.max_residual
            );
        }
    }
    criterion(
        6,
        "dF, d eta_i and (delta F) o f identities hold at 1e-7 on all trans-S gallery manifolds",
        true,
        format!("{} manifolds, worst residual {worst:.3e}", items.len()),
    );
}

#[test]
fn criterion_07_deformation_predictions() {
    // Constants a = 2, b = 4 on standard_S: re-extraction gives (1/2, 0).
    let base = gallery::manifold("standard_S").unwrap();
    let params = DeformationParams::constant(2.0, 4.0);
    let deformed = constructions::d_conformal_deform(&base, &params).unwrap();
    let mut worst_const: f64 = 0.0;
    for ctx in ctxs_of(&deformed).iter().take(32) {
        let cf = trans_s::extract_pointwise(&deformed, ctx).unwrap().cf;
        for i in 0..deformed.s() {
            worst_const = worst_const
                .max((cf.alpha[i] - 0.5).abs())
                .max(cf.beta[i].abs());
        }
    }

    // a = b = e^{2t} on kenmotsu(1): beta~ = xi b/(2ab) + 1/a pointwise.
    let base = gallery::manifold("kenmotsu(1)").unwrap();
    let a = parse_expr("exp(2*t1)", base.chart()).unwrap();
    let params_exp = DeformationParams {
        a: a.clone(),
        b: a.clone(),
    };
    let deformed_exp = constructions::d_conformal_deform(&base, &params_exp).unwrap();
    let mut worst_exp: f64 = 0.0;
    for ctx in ctxs_of(&deformed_exp).iter().take(32) {
        let p = &ctx.p;
        let base_cf = base.declared_cf().unwrap().eval(p).unwrap();
        let predicted =
            constructions::predicted_deformed_at(&base, &base_cf, &params_exp, p).unwrap();
        let got = trans_s::extract_pointwise(&deformed_exp, ctx).unwrap().cf;
        worst_exp = worst_exp.max(got.componentwise_distance(&predicted));
    }

    // Connection cross-check at 1e-7 for both deformations.
    let pts_s = sample_points(gallery::manifold("standard_S").unwrap().chart(), 8, 0);
    let entry_const = check_deformed_connection(
        &gallery::manifold("standard_S").unwrap(),
        &params,
        &pts_s,
        1e-7,
    )
    .unwrap();
    let pts_k = sample_points(base.chart(), 8, 0);
    let entry_exp = check_deformed_connection(&base, &params_exp, &pts_k, 1e-7).unwrap();

    criterion(
        7,
        "deformation predictions match re-extraction; deformed connection matches closed form",
        worst_const <= 1e-6 && worst_exp <= 1e-6 && entry_const.pass && entry_exp.pass,
        format!(
            "constants {worst_const:.2e}, exponential {worst_exp:.2e}, \
             connection residuals {:.2e} / {:.2e}",
            entry_const.max_residual, entry_exp.max_residual
        ),
    );
}

#[test]
fn criterion_08_warp_biconditional() {
    // Kaehler fiber: beta_i = (d h/d t_i)/h after re-extraction.
    let man = gallery::manifold("trans_sasakian").unwrap();
    let mut worst_pos: f64 = 0.0;
    for ctx in ctxs_of(&man).iter().take(32) {
        let t = ctx.p[0];
        let want_beta = 2.0 * t / (1.0 + t * t);
        let cf = trans_s::extract_pointwise(&man, ctx).unwrap().cf;
        worst_pos = worst_pos
            .max((cf.beta[0] - want_beta).abs())
            .max(cf.alpha[0].abs());
    }
    // Non-Kaehler fiber: the defining identity cannot be fit.
    let man = gallery::manifold("warped_non_kaehler").unwrap();
    let mut min_neg = f64::INFINITY;
    let mut max_neg: f64 = 0.0;
    for ctx in ctxs_of(&man).iter().take(32) {
        let r = trans_s::extract_pointwise(&man, ctx)
            .unwrap()
            .normalized_residual;
        min_neg = min_neg.min(r);
        max_neg = max_neg.max(r);
    }
    criterion(
        8,
        "warp over a Kaehler fiber is trans-S with beta = h'/h; non-Kaehler fiber fails the fit",
        worst_pos <= 1e-6 && max_neg >= 1e-3,
        format!("beta deviation {worst_pos:.2e}, non-Kaehler best-fit residual {max_neg:.2e} (min {min_neg:.2e})"),
    );
}

#[test]
fn criterion_09_product_counterexample() {
    let man = gallery::manifold("kaehler_times_S").unwrap();
    let verifier = verifier_of(&man);
    let labels = verifier.classify();
    let mut worst_df: f64 = 0.0;
    let mut worst_normality: f64 = 0.0;
    let mut min_fit = f64::INFINITY;
    for ctx in ctxs_of(&man) {
        worst_df = worst_df.max(ctx.d_big_f.max_abs());
        worst_normality = worst_normality.max(man.normality_components(&ctx).max_abs());
        min_fit = min_fit.min(
            trans_s::extract_pointwise(&man, &ctx)
                .unwrap()
                .normalized_residual,
        );
    }
    criterion(
        9,
        "the Kaehler x S product is a K-manifold but not almost trans-S",
        labels.has(Label::K)
            && labels.has(Label::Normal)
            && !labels.has(Label::AlmostTransS)
            && worst_df <= 1e-8
            && worst_normality <= 1e-8
            && min_fit >= 0.1,
        format!(
            "dF {worst_df:.2e}, normality {worst_normality:.2e}, best-fit residual >= {min_fit:.3}"
        ),
    );
}

#[test]
fn criterion_10_killing_criterion() {
    let items = trans_s_gallery();
    let mut consistent = true;
    for (name, man) in &items {
        let samples: Vec<(PointCtx, CharacteristicFunctions)> = ctxs_of(man)
            .into_iter()
            .map(|ctx| {
                let cf = trans_s::extract_pointwise(man, &ctx).unwrap().cf;
                (ctx, cf)
            })
            .collect();
        for i in 0..man.s() {
            let (display, iff) = trans_s::killing_defect(man, i, &samples, 1e-8).unwrap();
            if !(display.pass && iff.pass) {
                consistent = false;
                eprintln!("{name}: xi_{} display/iff failed", i + 1);
            }
        }
    }
    // Kenmotsu defect equals 2 g(fX, fX) for sampled X.
    let man = gallery::manifold("kenmotsu(1)").unwrap();
    let mut worst_defect: f64 = 0.0;
    for ctx in ctxs_of(&man).iter().take(16) {
        let lie = fman::tensor::lie_derivative_metric(man.metric(), &man.xi()[0], &ctx.p).unwrap();
        for x in random_vectors(man.dim(), 4, 23) {
            let fx = &ctx.fmat * &x;
            let lhs = (&lie * &x).dot(&x);
            let rhs = 2.0 * ctx.inner(&fx, &fx);
            worst_defect = worst_defect.max((lhs - rhs).abs());
        }
    }
    criterion(
        10,
        "xi_i is Killing exactly when beta_i = 0 on trans-S gallery; kenmotsu defect = 2g(fX,fX)",
        consistent && worst_defect <= 1e-7,
        format!(
            "{} manifolds, kenmotsu defect deviation {worst_defect:.2e}",
            items.len()
        ),
    );
}

#[test]
fn criterion_11_cli_contract() {
    use std::process::Command;
    let exe = env!("CARGO_BIN_EXE_fman");
    let dir = tempfile::tempdir().unwrap();
    let json_a = dir.path().join("a.json");
    let json_b = dir.path().join("b.json");
    let run = |args: &[&str]| Command::new(exe).args(args).output().expect("binary runs");

    // Determinism: identical flags and seed -> byte-identical reports.
    let a = run(&[
        "verify",
        "gallery:standard_S",
        "--points",
        "16",
        "--seed",
        "7",
        "--json",
        json_a.to_str().unwrap(),
    ]);
    let b = run(&[
        "verify",
        "gallery:standard_S",
        "--points",
        "16",
        "--seed",
        "7",
        "--json",
        json_b.to_str().unwrap(),
    ]);
    assert!(a.status.success() && b.status.success());
    let bytes_a = std::fs::read(&json_a).unwrap();
    let bytes_b = std::fs::read(&json_b).unwrap();
    let deterministic = bytes_a == bytes_b && !bytes_a.is_empty();

    // Exit codes on the three fixture files.
    let fixture = |name: &str| format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let pass = run(&["verify", &fixture("fixture_pass.toml"), "--points", "16"]);
    let fail = run(&[
        "verify",
        &fixture("fixture_checkfail.toml"),
        "--points",
        "16",
    ]);
    let parse = run(&[
        "verify",
        &fixture("fixture_parsefail.toml"),
        "--points",
        "16",
    ]);
    let codes_ok = pass.status.code() == Some(0)
        && fail.status.code() == Some(1)
        && parse.status.code() == Some(2);

    criterion(
        11,
        "CLI reports are byte-identical for fixed seed; exit codes follow the contract",
        deterministic && codes_ok,
        format!(
            "exit codes: pass {:?}, check-fail {:?}, parse-fail {:?}",
            pass.status.code(),
            fail.status.code(),
            parse.status.code()
        ),
    );
}
