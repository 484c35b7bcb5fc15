//! Problem file → symbolic computation → printing and numeric checks,
//! through the public API only.

use jetvar::numeric::{
    action, check_critical, check_first_variation, check_second_variation, Domain, NumericConfig,
    NumericSection, VariationConfig,
};
use jetvar::textio::{
    expr_from_json, expr_to_json, form_from_json, form_to_json, parse_expr, parse_problem, plain,
    print_form, print_source, Format,
};
use jetvar::variational::{
    adjoint, euler_lagrange, helmholtz_report, jacobi, quotient_variation, vertical_differential,
};
use jetvar::{Lagrangian, SourceForm};
use proptest::prelude::*;

const KDV: &str = "\
# Korteweg–de Vries in potential form: u = w_x
context { base t, x; fields w }
lagrangian L = 1/2*w_x*w_t + w_x^3 - 1/2*w_xx^2
source kdv = w_xt + 6*w_x*w_xx + w_xxxx
";

#[test]
fn potential_kdv() {
    let f = parse_problem(KDV).unwrap();
    let ctx = &f.context;
    let e = euler_lagrange(ctx, &f.lagrangians["L"]);
    assert_eq!(
        print_source(&e, ctx, Format::Plain),
        "e_1 = -6*w_x*w_xx - w_tx - w_xxxx"
    );
    assert_eq!(e.component(0), &-f.sources["kdv"].component(0));
    assert!(helmholtz_report(ctx, &f.sources["kdv"]).locally_variational);
    assert_eq!(
        jacobi(ctx, &f.lagrangians["L"]),
        vertical_differential(ctx, &f.lagrangians["L"])
    );
}

#[test]
fn non_variational_heat_equation() {
    let f = parse_problem("context { base t, x; fields u }\nsource heat = u_t - u_xx").unwrap();
    let r = helmholtz_report(&f.context, &f.sources["heat"]);
    assert_eq!(r.verdict(), "not locally variational");
    assert_eq!(
        print_form(&r.tilde, "H", &f.context, Format::Plain),
        "H[1,1,{t}] = 2"
    );
}

#[test]
fn structured_round_trip_of_computed_objects() {
    let f = parse_problem(KDV).unwrap();
    let ctx = &f.context;
    let v = vertical_differential(ctx, &f.lagrangians["L"]);
    assert_eq!(form_from_json(&form_to_json(&v, ctx), ctx).unwrap(), v);
    let adj = adjoint(&v);
    assert_eq!(form_from_json(&form_to_json(&adj, ctx), ctx).unwrap(), adj);
    let density = f.lagrangians["L"].density();
    assert_eq!(
        &expr_from_json(&expr_to_json(density, ctx), ctx).unwrap(),
        density
    );
}

#[test]
fn oscillator_file_drives_the_numeric_oracle() {
    let f = parse_problem(
        "context { base t; fields y }
         lagrangian L = 1/2*(y_t^2 - y^2)
         section s = sin(t)
         variation a = 1; variation b = t^2
         numeric { domain [0, pi]; nodes 48; step 1e-3; tol 1e-6 }",
    )
    .unwrap();
    let ctx = &f.context;
    let l = &f.lagrangians["L"];
    let cfg = NumericConfig {
        nodes: f.numeric.nodes.unwrap(),
        ..NumericConfig::default()
    };
    let domain = Domain::new(f.numeric.domain.clone().unwrap()).unwrap();
    let s = NumericSection::new(ctx, f.sections["s"].clone(), domain, &cfg).unwrap();
    assert!(action(l, &s).unwrap().abs() < 1e-12);
    assert!(check_critical(ctx, l, &s, &cfg).unwrap().critical);
    let fields = [f.variations["a"].clone(), f.variations["b"].clone()];
    let vc = VariationConfig::linear(&fields, s.domain(), &cfg).unwrap();
    assert!(
        check_first_variation(ctx, l, &s, &vc, &cfg)
            .unwrap()
            .finite_difference
            .abs()
            < 1e-10
    );
    assert!(
        check_second_variation(ctx, l, &s, &vc, &cfg)
            .unwrap()
            .agrees
    );
}

#[test]
fn quotient_variation_along_a_coordinate_field_is_the_source_component() {
    let f = parse_problem("context { base t; fields y }\nlagrangian L = y_t^2*y + sin(y)").unwrap();
    let ctx = &f.context;
    let l = &f.lagrangians["L"];
    let xi = jetvar::VerticalField::coordinate(0, 1);
    let q = quotient_variation(ctx, l, &[xi]).unwrap();
    assert_eq!(q.density(), euler_lagrange(ctx, l).component(0));
    assert_eq!(plain(q.density(), ctx), "cos(y) - 2*y*y_tt - y_t^2");
}

fn arb_density() -> impl Strategy<Value = String> {
    let atom = prop_oneof![
        Just("y"),
        Just("y_t"),
        Just("y_tt"),
        Just("t"),
        Just("sin(y)"),
        Just("exp(y_t)"),
    ];
    prop::collection::vec((-3i32..=3, atom.clone(), atom), 1..5).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, a, b)| format!("{c}*{a}*{b}"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn printed_euler_lagrange_forms_reparse(src in arb_density()) {
        let ctx = parse_problem("context { base t; fields y }").unwrap().context;
        let l = Lagrangian::new(parse_expr(&src, &ctx).unwrap());
        let e = euler_lagrange(&ctx, &l);
        let text = plain(e.component(0), &ctx);
        prop_assert_eq!(SourceForm::new(vec![parse_expr(&text, &ctx).unwrap()]), e);
    }
}
