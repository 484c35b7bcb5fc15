//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the report is always printed.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use jetvar::jetcalc::{divergence, total_derivative_multi};
use jetvar::numeric::{
    check_critical, check_onshell_symmetry, check_second_variation, finite_diff_variation, Domain,
    NumericConfig, NumericSection, VariationConfig,
};
use jetvar::textio::{parse_expr, parse_problem, plain, source_from_json};
use jetvar::variational::{
    adjoint, contract, euler_lagrange, helmholtz, helmholtz_report, hessian, jacobi,
    second_variation_decomposition, BilinearForm,
};
use jetvar::{Coord, Expr, JetContext, JetVar, Lagrangian, MultiIndex, SourceForm, VerticalField};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parse(src: &str, ctx: &JetContext) -> Expr {
    parse_expr(src, ctx).unwrap()
}

fn oscillator() -> (JetContext, Lagrangian) {
    let ctx = JetContext::new(["t"], ["y"]).unwrap();
    let l = Lagrangian::new(parse("1/2*(y_t^2 - y^2)", &ctx));
    (ctx, l)
}

fn flat_geodesics() -> (JetContext, Lagrangian) {
    let ctx = JetContext::new(["t"], ["q1", "q2"]).unwrap();
    let l = Lagrangian::new(parse("1/2*(q1_t^2 + q2_t^2)", &ctx));
    (ctx, l)
}

fn section(
    ctx: &JetContext,
    comps: &[&str],
    domain: Domain,
    cfg: &NumericConfig,
) -> NumericSection {
    let comps = comps.iter().map(|c| parse(c, ctx)).collect();
    NumericSection::new(ctx, comps, domain, cfg).unwrap()
}

fn zero_to_pi() -> Domain {
    Domain::new(vec![(Expr::zero(), Expr::pi())]).unwrap()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn jetvar(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_jetvar"))
        .args(args)
        .output()
        .unwrap()
}

fn temp_problem(src: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

const GEODESIC: &str = "\
context {
  base t
  fields q1, q2
  function g11(q1, q2); function g12(q1, q2); function g22(q1, q2)
}
lagrangian L = 1/2*(g11(q1, q2)*q1_t^2 + 2*g12(q1, q2)*q1_t*q2_t + g22(q1, q2)*q2_t^2)
";

/// `e_a = −[g_ab q̈^b + Γ_abc q̇^b q̇^c]` with
/// `Γ_abc = ½(∂_c g_ab + ∂_b g_ac − ∂_a g_bc)`.
fn criterion_1() -> Outcome {
    let file = temp_problem(GEODESIC);
    let out = jetvar(&[
        "el",
        file.path().to_str().unwrap(),
        "--format",
        "structured",
    ]);
    ensure(out.status.success(), || {
        format!("el exited {:?}", out.status.code())
    })?;
    let ctx = parse_problem(GEODESIC).unwrap().context;
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = source_from_json(&json["euler_lagrange"], &ctx).map_err(|e| e.to_string())?;

    let names = [["g11", "g12"], ["g12", "g22"]];
    let g = |a: usize, b: usize| parse(&format!("{}(q1, q2)", names[a][b]), &ctx);
    let d = |f: &Expr, c: usize| f.partial(&Coord::Jet(JetVar::base_value(c, 1)));
    let qd = |a: usize| Expr::jet(JetVar::new(a, MultiIndex::new(vec![1])));
    let qdd = |a: usize| Expr::jet(JetVar::new(a, MultiIndex::new(vec![2])));
    let half = |x: Expr| x.scale(&jetvar::textio::parse_rational("0.5").unwrap());
    let christoffel =
        |a: usize, b: usize, c: usize| half(&(&d(&g(a, b), c) + &d(&g(a, c), b)) - &d(&g(b, c), a));
    let expected = SourceForm::new(
        (0..2)
            .map(|a| {
                let mut acc = Expr::zero();
                for b in 0..2 {
                    acc += &(&g(a, b) * &qdd(b));
                    for c in 0..2 {
                        acc += &(&christoffel(a, b, c) * &(&qd(b) * &qd(c)));
                    }
                }
                -acc
            })
            .collect(),
    );
    for a in 0..2 {
        let diff = e.component(a) - expected.component(a);
        ensure(diff.is_zero(), || {
            format!("e_{} differs by {}", a + 1, plain(&diff, &ctx))
        })?;
    }
    Ok(format!("{} terms in e_1", e.component(0).len()))
}

fn random_shape(rng: &mut rand_chacha::ChaCha8Rng) -> (usize, usize) {
    (rng.gen_range(1..=2), rng.gen_range(1..=2))
}

fn criterion_2() -> Outcome {
    let mut rng = common::rng(2);
    for k in 0..50 {
        let (n, m) = random_shape(&mut rng);
        let ctx = common::context(n, m);
        let l = Lagrangian::new(common::polynomial(&mut rng, n, m, 2, 6));
        let h = helmholtz(&ctx, &euler_lagrange(&ctx, &l));
        ensure(h.is_zero(), || {
            format!("case {k}: λ = {}", plain(l.density(), &ctx))
        })?;
    }
    Ok("50 Lagrangians".into())
}

fn criterion_3() -> Outcome {
    let mut rng = common::rng(3);
    for k in 0..50 {
        let (n, m) = random_shape(&mut rng);
        let ctx = common::context(n, m);
        let current: Vec<Expr> = (0..n)
            .map(|_| common::polynomial(&mut rng, n, m, 2, 4))
            .collect();
        let e = euler_lagrange(&ctx, &Lagrangian::new(divergence(&current)));
        ensure(e.is_zero(), || {
            format!("case {k}: nonzero Euler–Lagrange form")
        })?;
    }
    Ok("50 currents".into())
}

fn criterion_4() -> Outcome {
    let ctx = JetContext::new(["t"], ["y"]).unwrap();
    let r = helmholtz_report(&ctx, &SourceForm::new(vec![parse("y_t", &ctx)]));
    let h1 = r.tilde.get(0, 0, &MultiIndex::new(vec![1]));
    ensure(h1 == Expr::int(2), || {
        format!("H^(t)_11 = {}", plain(&h1, &ctx))
    })?;
    ensure(r.verdict() == "not locally variational", || {
        r.verdict().into()
    })?;
    let r = helmholtz_report(&ctx, &SourceForm::new(vec![parse("y_tt", &ctx)]));
    ensure(r.tilde.is_zero(), || "H is nonzero for y_tt".into())?;
    ensure(r.verdict() == "locally variational", || r.verdict().into())?;
    Ok("H = 2 for y_t, 0 for y_tt".into())
}

fn criterion_5() -> Outcome {
    let mut rng = common::rng(5);
    for k in 0..20 {
        let (n, m) = random_shape(&mut rng);
        let ctx = common::context(n, m);
        let l = Lagrangian::new(common::polynomial(&mut rng, n, m, 2, 4));
        let x1 = common::field(&mut rng, n, m, 1);
        let x2 = common::field(&mut rng, n, m, 1);
        let split =
            second_variation_decomposition(&ctx, &l, &x1, &x2).map_err(|e| e.to_string())?;
        let h = hessian(&ctx, &l, &x1, &x2).map_err(|e| e.to_string())?;
        let residual = &(&split.first + &split.second) - h.density();
        ensure(residual.is_zero(), || {
            format!("case {k}: S1 + S2 − hessian ≠ 0")
        })?;
        let rebuilt = split.ideal.expand(&split.euler_lagrange);
        ensure(rebuilt == split.first, || {
            format!("case {k}: S1 is not the tracked ideal combination")
        })?;
    }
    Ok("20 triples".into())
}

/// Compactly supported random fields, second variation against both
/// morphisms.
fn second_variation_cases(
    ctx: &JetContext,
    l: &Lagrangian,
    s: &NumericSection,
    cfg: &NumericConfig,
    seed: u64,
    cases: usize,
) -> Result<f64, String> {
    let mut rng = common::rng(seed);
    let mut worst = 0.0f64;
    for k in 0..cases {
        let fields = [
            common::smooth_field(&mut rng, ctx.m()),
            common::smooth_field(&mut rng, ctx.m()),
        ];
        let vc = VariationConfig::linear(&fields, s.domain(), cfg).map_err(|e| e.to_string())?;
        let r = check_second_variation(ctx, l, s, &vc, cfg).map_err(|e| e.to_string())?;
        ensure(r.agrees, || format!("case {k}: {r:?}"))?;
        worst = worst
            .max(relative(r.finite_difference, r.vertical_differential))
            .max(relative(r.finite_difference, r.jacobi));
    }
    Ok(worst)
}

fn criterion_6() -> Outcome {
    let (ctx, l) = oscillator();
    let cfg = NumericConfig::default();
    let s = section(&ctx, &["sin(t)"], zero_to_pi(), &cfg);
    let worst = second_variation_cases(&ctx, &l, &s, &cfg, 6, 5)?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let cfg = NumericConfig::default();
    let mut rng = common::rng(7);
    let mut worst = 0.0f64;
    let cases = [
        (oscillator(), vec!["sin(t)"], zero_to_pi()),
        (flat_geodesics(), vec!["1 + 2*t", "3 - t"], Domain::unit(1)),
    ];
    for ((ctx, l), comps, domain) in cases {
        let s = section(&ctx, &comps, domain, &cfg);
        for _ in 0..3 {
            let bump = |f: VerticalField| s.domain().compactly_supported(&f).unwrap();
            let x1 = bump(common::smooth_field(&mut rng, ctx.m()));
            let x2 = bump(common::smooth_field(&mut rng, ctx.m()));
            let r =
                check_onshell_symmetry(&ctx, &l, &s, &x1, &x2, &cfg).map_err(|e| e.to_string())?;
            ensure(r.symmetric, || format!("{r:?}"))?;
            worst = worst.max(relative(r.lhs, r.rhs));
        }
    }

    let (ctx, l) = oscillator();
    let bad = section(&ctx, &["t"], zero_to_pi(), &cfg);
    let crit = check_critical(&ctx, &l, &bad, &cfg).map_err(|e| e.to_string())?;
    ensure(!crit.critical && crit.residual > 1.0, || {
        format!("{crit:?}")
    })?;
    let xi = VerticalField::new(vec![Expr::one()]);
    let vc = VariationConfig::linear(&[xi], bad.domain(), &cfg).map_err(|e| e.to_string())?;
    let fd = finite_diff_variation(&l, &bad, &vc, 1).map_err(|e| e.to_string())?;
    ensure(fd.abs() > 1e-3, || {
        format!("first variation {fd:e} on a non-critical section")
    })?;

    let file = temp_problem(
        "context { base t; fields y }\nlagrangian L = 1/2*(y_t^2 - y^2)\nsection s = t\n",
    );
    let code = jetvar(&["check-critical", file.path().to_str().unwrap()])
        .status
        .code();
    ensure(code == Some(3), || {
        format!("check-critical exited {code:?}")
    })?;
    Ok(format!(
        "max relative asymmetry {worst:.1e}; off-shell exit 3"
    ))
}

fn criterion_8() -> Outcome {
    let cfg = NumericConfig::default();
    let mut rng = common::rng(8);
    let mut worst = 0.0f64;
    let cases = [
        (oscillator(), vec!["sin(t)"], zero_to_pi()),
        (flat_geodesics(), vec!["1 + 2*t", "3 - t"], Domain::unit(1)),
        (flat_geodesics(), vec!["-t/2", "5*t"], zero_to_pi()),
    ];
    for ((ctx, l), comps, domain) in cases {
        let s = section(&ctx, &comps, domain, &cfg);
        for _ in 0..5 {
            let xi = common::smooth_field(&mut rng, ctx.m());
            let vc = VariationConfig::linear(&[xi], s.domain(), &cfg).map_err(|e| e.to_string())?;
            let fd = finite_diff_variation(&l, &s, &vc, 1).map_err(|e| e.to_string())?;
            ensure(fd.abs() <= 1e-8, || format!("first variation {fd:e}"))?;
            worst = worst.max(fd.abs());
        }
    }
    Ok(format!("max |first variation| {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let ctx = JetContext::new(["x"], ["y"]).unwrap();
    let l = Lagrangian::new(parse("1/2*y_xx^2", &ctx));
    let e = euler_lagrange(&ctx, &l);
    ensure(e.components() == [parse("y_xxxx", &ctx)], || {
        format!("e = {}", plain(e.component(0), &ctx))
    })?;
    let four = MultiIndex::new(vec![4]);
    let j = jacobi(&ctx, &l);
    ensure(
        j == BilinearForm::zero(1, 1).with(0, 0, four.clone(), Expr::one()),
        || "Jacobi form is not η ↦ η_xxxx".into(),
    )?;
    let eta = parse("sin(y)*x^3 + y_x", &ctx);
    let applied = contract(
        &VerticalField::new(vec![Expr::one()]),
        &VerticalField::new(vec![eta.clone()]),
        &j,
    );
    ensure(applied == total_derivative_multi(&eta, &four), || {
        "contraction is not D_xxxx".into()
    })?;

    let cfg = NumericConfig::default();
    let s = section(&ctx, &["x^3"], Domain::unit(1), &cfg);
    let worst = second_variation_cases(&ctx, &l, &s, &cfg, 9, 3)?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = common::rng(10);
    for k in 0..50 {
        let (n, m) = random_shape(&mut rng);
        let a = common::form(&mut rng, n, m, 3);
        ensure(adjoint(&adjoint(&a)) == a, || {
            format!("case {k}: adjoint is not an involution")
        })?;
    }
    Ok("50 forms".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("geodesic Euler–Lagrange fixture", criterion_1),
        ("Helmholtz vanishes on Euler–Lagrange forms", criterion_2),
        ("divergences have zero Euler–Lagrange form", criterion_3),
        ("non-variational source detection", criterion_4),
        ("second-variation split identity", criterion_5),
        ("second variation, numeric", criterion_6),
        ("on-shell symmetry", criterion_7),
        ("criticality oracle", criterion_8),
        ("higher-order reach", criterion_9),
        ("adjoint involution", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {:>2}: {name} ({detail}; {secs:.2} s)",
                k + 1
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {why} ({secs:.2} s)", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
