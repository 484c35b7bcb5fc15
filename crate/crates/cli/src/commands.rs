use std::fmt;

use indexmap::IndexMap;
use jetvar::numeric::{
    check_critical, check_onshell_symmetry, check_second_variation, finite_diff_variation,
    CriticalReport, Domain, NumericConfig, NumericError, NumericSection, VariationConfig,
};
use jetvar::textio::{parse_problem, ProblemFile};
use jetvar::variational::{
    adjoint, contract_source, euler_lagrange, helmholtz_report, jacobi, quotient_variation,
    second_variation_decomposition, vertical_differential, BilinearForm, OnShell, VariationalError,
};
use jetvar::{Lagrangian, SourceForm, VerticalField};

use crate::report::{Item, Report};
use crate::Common;

pub enum CliError {
    Usage(String),
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Semantic(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Semantic(m) => f.write_str(m),
        }
    }
}

impl From<VariationalError> for CliError {
    fn from(e: VariationalError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

pub struct Outcome {
    pub text: String,
    /// Set when a numeric check did not pass.
    pub failure: Option<String>,
}

fn select<'a, T>(
    map: &'a IndexMap<String, T>,
    what: &str,
    flag: &str,
    name: Option<&str>,
) -> Result<(&'a str, &'a T), CliError> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| CliError::Semantic(format!("no {what} named `{n}`"))),
        None => match map.len() {
            1 => Ok(map
                .get_index(0)
                .map(|(k, v)| (k.as_str(), v))
                .expect("one entry")),
            0 => Err(CliError::Semantic(format!("the file defines no {what}"))),
            _ => Err(CliError::Semantic(format!(
                "several {what}s are defined; choose one with --{flag}"
            ))),
        },
    }
}

fn fields<'a>(
    file: &'a ProblemFile,
    args: &Common,
    count: Option<usize>,
) -> Result<Vec<(&'a str, &'a VerticalField)>, CliError> {
    let names: Vec<&str> = if args.fields.is_empty() {
        file.variations.keys().map(String::as_str).collect()
    } else {
        args.fields.iter().map(String::as_str).collect()
    };
    let selected = names
        .iter()
        .map(|n| select(&file.variations, "variation", "fields", Some(n)))
        .collect::<Result<Vec<_>, _>>()?;
    match count {
        Some(k) if selected.len() != k => Err(CliError::Semantic(format!(
            "expected {k} variation field(s), got {}; choose them with --fields",
            selected.len()
        ))),
        _ if selected.is_empty() => Err(CliError::Semantic(
            "no variation fields; define `variation` statements".into(),
        )),
        _ => Ok(selected),
    }
}

fn config(file: &ProblemFile, args: &Common) -> Result<NumericConfig, CliError> {
    let mut c = NumericConfig::default();
    let s = &file.numeric;
    c.nodes = args.nodes.or(s.nodes).unwrap_or(c.nodes);
    c.step = args.step.or(s.step).unwrap_or(c.step);
    c.rel_tol = args.tol.or(s.tol).unwrap_or(c.rel_tol);
    if c.nodes == 0 {
        return Err(CliError::Usage("--nodes must be positive".into()));
    }
    if !(c.step.is_finite() && c.step > 0.0 && c.rel_tol.is_finite() && c.rel_tol > 0.0) {
        return Err(CliError::Usage("--step and --tol must be positive".into()));
    }
    Ok(c)
}

fn domain(file: &ProblemFile) -> Result<Domain, CliError> {
    match &file.numeric.domain {
        Some(d) => Ok(Domain::new(d.clone())?),
        None => Ok(Domain::unit(file.context.n())),
    }
}

fn section(
    file: &ProblemFile,
    args: &Common,
    cfg: &NumericConfig,
) -> Result<(String, NumericSection), CliError> {
    let (name, comps) = select(
        &file.sections,
        "section",
        "section",
        args.section.as_deref(),
    )?;
    let s = NumericSection::new(&file.context, comps.clone(), domain(file)?, cfg)?;
    Ok((name.to_string(), s))
}

fn critical_item(r: &CriticalReport) -> Item {
    Item::Group(vec![
        ("residual".into(), Item::Number(r.residual)),
        (
            "per_component".into(),
            Item::Numbers(r.per_component.clone()),
        ),
        ("critical".into(), Item::Flag(r.critical)),
    ])
}

pub fn run(command: &str, args: &Common) -> Result<Outcome, CliError> {
    let src = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?;
    let file = parse_problem(&src)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?;
    let ctx = &file.context;
    let mut report = Report::new(command);
    let mut failure = None;
    let lagrangian = |r: &mut Report| -> Result<Lagrangian, CliError> {
        let (name, l) = select(
            &file.lagrangians,
            "lagrangian",
            "lagrangian",
            args.lagrangian.as_deref(),
        )?;
        r.meta("lagrangian", name);
        Ok(l.clone())
    };

    match command {
        "el" => {
            let l = lagrangian(&mut report)?;
            report.push("euler_lagrange", Item::Source(euler_lagrange(ctx, &l)));
        }
        "jacobi" => {
            let l = lagrangian(&mut report)?;
            let v = vertical_differential(ctx, &l);
            let j = jacobi(ctx, &l);
            let diff = v.sub(&j);
            report.push("vertical_differential", Item::Form("V", v));
            report.push("jacobi", Item::Form("J", j));
            report.push("self_adjoint", Item::Flag(diff.is_zero()));
            report.push("difference", Item::Form("V - J", diff.clone()));
            let rules = if args.onshell.is_some() || !file.onshell.is_empty() {
                Some(select(
                    &file.onshell,
                    "onshell rule set",
                    "onshell",
                    args.onshell.as_deref(),
                )?)
            } else {
                None
            };
            if let Some((name, rules)) = rules {
                report.meta("onshell", name);
                let reduced = reduce_form(rules, &diff)?;
                report.push(
                    "on_shell",
                    Item::Group(vec![
                        ("self_adjoint".into(), Item::Flag(reduced.is_zero())),
                        ("difference".into(), Item::Form("V - J", reduced)),
                    ]),
                );
            }
        }
        "helmholtz" => {
            let e: SourceForm = match (&args.source, &args.lagrangian) {
                (None, Some(_)) => euler_lagrange(ctx, &lagrangian(&mut report)?),
                (None, None) if file.sources.is_empty() && !file.lagrangians.is_empty() => {
                    euler_lagrange(ctx, &lagrangian(&mut report)?)
                }
                _ => {
                    let (name, e) =
                        select(&file.sources, "source", "source", args.source.as_deref())?;
                    report.meta("source", name);
                    e.clone()
                }
            };
            if e.len() != ctx.m() {
                return Err(CliError::Semantic(format!(
                    "the source form has {} components for {} fields",
                    e.len(),
                    ctx.m()
                )));
            }
            let h = helmholtz_report(ctx, &e);
            report.push("source", Item::Source(e));
            report.push("helmholtz", Item::Form("H", h.tilde.clone()));
            report.push("skew", Item::Form("K", h.skew.clone()));
            report.push("locally_variational", Item::Flag(h.locally_variational));
            report.push("verdict", Item::Text(h.verdict().into()));
        }
        "hessian" => {
            let l = lagrangian(&mut report)?;
            let f = fields(&file, args, Some(2))?;
            report.meta("fields", format!("{},{}", f[0].0, f[1].0));
            let split = second_variation_decomposition(ctx, &l, f[0].1, f[1].1)?;
            let hess = quotient_variation(ctx, &l, &[f[0].1.clone(), f[1].1.clone()])?;
            report.push("hessian", Item::Expr(hess.density().clone()));
            report.push("euler_lagrange", Item::Source(split.euler_lagrange));
            report.push("first", Item::Expr(split.first));
            report.push("first_ideal", Item::Ideal(split.ideal));
            report.push("second", Item::Expr(split.second));
        }
        "variation" => {
            let l = lagrangian(&mut report)?;
            let f = fields(&file, args, None)?;
            let names: Vec<&str> = f.iter().map(|(n, _)| *n).collect();
            report.meta("fields", names.join(","));
            let xs: Vec<VerticalField> = f.iter().map(|(_, x)| (*x).clone()).collect();
            let q = quotient_variation(ctx, &l, &xs)?;
            report.push("variation", Item::Expr(q.density().clone()));
        }
        "check-critical" => {
            let l = lagrangian(&mut report)?;
            let cfg = config(&file, args)?;
            let (name, s) = section(&file, args, &cfg)?;
            report.meta("section", name);
            let r = check_critical(ctx, &l, &s, &cfg)?;
            if !args.fields.is_empty() {
                let e = euler_lagrange(ctx, &l);
                let mut group = Vec::new();
                for (n, x) in fields(&file, args, None)? {
                    let vc = VariationConfig::linear(std::slice::from_ref(x), s.domain(), &cfg)?;
                    let fd = finite_diff_variation(&l, &s, &vc, 1)?;
                    let symbolic = s.integrate(&contract_source(vc.flows[0].generator(), &e))?;
                    group.push((
                        n.to_string(),
                        Item::Group(vec![
                            ("finite_difference".into(), Item::Number(fd)),
                            ("symbolic".into(), Item::Number(symbolic)),
                        ]),
                    ));
                }
                report.push("first_variation", Item::Group(group));
            }
            if !r.critical {
                failure = Some(format!(
                    "Euler–Lagrange residual {} exceeds {:e}",
                    r.residual, cfg.abs_tol
                ));
            }
            report.push("criticality", critical_item(&r));
        }
        "second-var" => {
            let l = lagrangian(&mut report)?;
            let cfg = config(&file, args)?;
            let (name, s) = section(&file, args, &cfg)?;
            report.meta("section", name);
            let f = fields(&file, args, Some(2))?;
            report.meta("fields", format!("{},{}", f[0].0, f[1].0));
            let raw = [f[0].1.clone(), f[1].1.clone()];
            let vc = VariationConfig::linear(&raw, s.domain(), &cfg)?;
            let r = check_critical(ctx, &l, &s, &cfg)?;
            report.push("criticality", critical_item(&r));
            if !r.critical {
                failure = Some(format!(
                    "the section is not critical (residual {})",
                    r.residual
                ));
            } else {
                let sv = check_second_variation(ctx, &l, &s, &vc, &cfg)?;
                let g = vc.generators();
                let sym = check_onshell_symmetry(ctx, &l, &s, &g[0], &g[1], &cfg)?;
                report.push(
                    "second_variation",
                    Item::Group(vec![
                        (
                            "finite_difference".into(),
                            Item::Number(sv.finite_difference),
                        ),
                        (
                            "vertical_differential".into(),
                            Item::Number(sv.vertical_differential),
                        ),
                        ("jacobi".into(), Item::Number(sv.jacobi)),
                        ("agrees".into(), Item::Flag(sv.agrees)),
                    ]),
                );
                report.push(
                    "symmetry",
                    Item::Group(vec![
                        ("lhs".into(), Item::Number(sym.lhs)),
                        ("rhs".into(), Item::Number(sym.rhs)),
                        ("difference".into(), Item::Number(sym.difference)),
                        ("pointwise".into(), Item::Number(sym.pointwise)),
                        ("symmetric".into(), Item::Flag(sym.symmetric)),
                    ]),
                );
                if !sv.agrees {
                    failure = Some("finite-difference second variation disagrees".into());
                } else if !sym.symmetric {
                    failure = Some("on-shell contractions are not symmetric".into());
                }
            }
        }
        "adjoint" => {
            let (name, a) = select(&file.forms, "form", "form", args.form.as_deref())?;
            report.meta("form", name);
            report.push("form", Item::Form("A", a.clone()));
            report.push("adjoint", Item::Form("A*", adjoint(a)));
        }
        other => return Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
    Ok(Outcome {
        text: report.render(ctx, args.format),
        failure,
    })
}

fn reduce_form(rules: &OnShell, a: &BilinearForm) -> Result<BilinearForm, CliError> {
    let mut out = BilinearForm::zero(a.n(), a.m());
    for (k, v) in a.entries() {
        out.add(k.clone(), rules.reduce(v)?);
    }
    Ok(out)
}
