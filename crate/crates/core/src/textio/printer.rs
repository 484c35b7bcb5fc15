use num_rational::BigRational;
use num_traits::{One, Signed};

use super::structured::{form_to_json, source_to_json};
use super::{expr_to_json, Format};
use crate::expr::{Atom, ElemFn, Expr, JetContext, JetVar, Monomial};
use crate::multiindex::MultiIndex;
use crate::variational::{BilinearForm, SourceForm};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Plain,
    Latex,
}

/// Plain rendering; parses back to the same expression.
pub fn plain(e: &Expr, ctx: &JetContext) -> String {
    render(e, ctx, Style::Plain)
}

pub fn latex(e: &Expr, ctx: &JetContext) -> String {
    render(e, ctx, Style::Latex)
}

pub fn print_expr(e: &Expr, ctx: &JetContext, fmt: Format) -> String {
    match fmt {
        Format::Plain => plain(e, ctx),
        Format::Latex => latex(e, ctx),
        Format::Structured => pretty(&expr_to_json(e, ctx)),
    }
}

/// One line `e_i = …` per component.
pub fn print_source(e: &SourceForm, ctx: &JetContext, fmt: Format) -> String {
    let line = |i: usize, c: &Expr| match fmt {
        Format::Latex => format!("e_{{{}}} = {}", i + 1, latex(c, ctx)),
        _ => format!("e_{} = {}", i + 1, plain(c, ctx)),
    };
    match fmt {
        Format::Structured => pretty(&source_to_json(e, ctx)),
        _ => e
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| line(i, c))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// One line `NAME[i,j,{σ}] = …` per non-zero component, or `NAME = 0`.
pub fn print_form(a: &BilinearForm, name: &str, ctx: &JetContext, fmt: Format) -> String {
    if fmt == Format::Structured {
        return pretty(&form_to_json(a, ctx));
    }
    if a.is_zero() {
        return format!("{name} = 0");
    }
    a.entries()
        .map(|(k, v)| match fmt {
            Format::Latex => {
                let sup = if k.sigma.is_zero() {
                    String::new()
                } else {
                    format!("^{{{}}}", render_multi_index(&k.sigma, ctx, Format::Latex))
                };
                format!(
                    "{name}{sup}_{{{} {}}} = {}",
                    k.i + 1,
                    k.j + 1,
                    latex(v, ctx)
                )
            }
            _ => format!(
                "{name}[{},{},{{{}}}] = {}",
                k.i + 1,
                k.j + 1,
                render_multi_index(&k.sigma, ctx, Format::Plain),
                plain(v, ctx)
            ),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Base names of `σ`: juxtaposed when all are single letters, otherwise
/// separated by spaces (thin spaces in LaTeX).
pub fn render_multi_index(sigma: &MultiIndex, ctx: &JetContext, fmt: Format) -> String {
    let sep = match (ctx.single_letter_base(), fmt) {
        (true, _) => "",
        (false, Format::Latex) => "\\,",
        (false, _) => " ",
    };
    sigma.render(ctx.base_names(), sep)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise")
}

fn render(e: &Expr, ctx: &JetContext, style: Style) -> String {
    // Positive terms first, each group in canonical order.
    let (pos, neg): (Vec<_>, Vec<_>) = e.terms().partition(|(_, c)| c.is_positive());
    let mut out = String::new();
    for (k, (m, c)) in pos.into_iter().chain(neg).enumerate() {
        let body = term(m, &c.abs(), ctx, style);
        match (k, c.is_negative()) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn term(m: &Monomial, c: &BigRational, ctx: &JetContext, style: Style) -> String {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (atom, k) in m.factors() {
        let (base, k) = match atom {
            // Plain text keeps `(p)^-k` so that parsing rebuilds the same
            // reciprocal atom rather than the inverse of the expanded power.
            Atom::Recip(p) if style == Style::Plain => {
                num.push(format!("({})^{}", render(p, ctx, style), -k));
                continue;
            }
            Atom::Recip(p) => (format!("\\left({}\\right)", render(p, ctx, style)), -k),
            _ => (atom_string(atom, ctx, style), *k),
        };
        let bucket = if k > 0 { &mut num } else { &mut den };
        bucket.push(power(&base, k.abs(), style));
    }
    match style {
        Style::Plain => {
            let mut s = String::new();
            if !c.is_one() || num.is_empty() {
                s.push_str(&rational(c, style));
                if !num.is_empty() {
                    s.push('*');
                }
            }
            s.push_str(&num.join("*"));
            for d in den {
                s.push('/');
                s.push_str(&d);
            }
            s
        }
        Style::Latex => {
            let body = if den.is_empty() {
                num.join(" ")
            } else {
                let top = if num.is_empty() {
                    "1".to_string()
                } else {
                    num.join(" ")
                };
                format!("\\frac{{{}}}{{{}}}", top, den.join(" "))
            };
            if body.is_empty() {
                rational(c, style)
            } else if c.is_one() {
                body
            } else {
                format!("{} {}", rational(c, style), body)
            }
        }
    }
}

fn rational(c: &BigRational, style: Style) -> String {
    if c.is_integer() {
        return c.numer().to_string();
    }
    match style {
        Style::Plain => format!("{}/{}", c.numer(), c.denom()),
        Style::Latex => format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom()),
    }
}

fn power(base: &str, k: i32, style: Style) -> String {
    match (k, style) {
        (1, _) => base.to_string(),
        (_, Style::Plain) => format!("{base}^{k}"),
        (_, Style::Latex) => format!("{base}^{{{k}}}"),
    }
}

fn jet_string(v: &JetVar, ctx: &JetContext, style: Style) -> String {
    let name = &ctx.field_names()[v.field];
    if v.sigma.is_zero() {
        return name.clone();
    }
    let fmt = if style == Style::Latex {
        Format::Latex
    } else {
        Format::Plain
    };
    let sigma = render_multi_index(&v.sigma, ctx, fmt);
    if style == Style::Plain && ctx.single_letter_base() {
        format!("{name}_{sigma}")
    } else {
        format!("{name}_{{{sigma}}}")
    }
}

fn atom_string(atom: &Atom, ctx: &JetContext, style: Style) -> String {
    match (atom, style) {
        (Atom::Pi, Style::Plain) => "pi".into(),
        (Atom::Pi, Style::Latex) => "\\pi".into(),
        (Atom::Base(l), _) => ctx.base_names()[*l].clone(),
        (Atom::Jet(v), _) => jet_string(v, ctx, style),
        (Atom::Apply(f, a), Style::Plain) => format!("{}({})", f.name(), render(a, ctx, style)),
        (Atom::Apply(ElemFn::Sqrt, a), Style::Latex) => {
            format!("\\sqrt{{{}}}", render(a, ctx, style))
        }
        (Atom::Apply(f, a), Style::Latex) => {
            format!("\\{}\\left({}\\right)", f.name(), render(a, ctx, style))
        }
        (Atom::Opaque(app), _) => {
            let args = app
                .args
                .iter()
                .map(|a| render(a, ctx, style))
                .collect::<Vec<_>>()
                .join(", ");
            let positions: Vec<String> = app
                .partials
                .iter()
                .enumerate()
                .flat_map(|(k, &c)| std::iter::repeat_n((k + 1).to_string(), c as usize))
                .collect();
            match style {
                Style::Plain if positions.is_empty() => format!("{}({args})", app.name),
                Style::Plain => format!("{}_{{{}}}({args})", app.name, positions.join(" ")),
                Style::Latex if positions.is_empty() => {
                    format!("{}\\left({args}\\right)", app.name)
                }
                Style::Latex => format!(
                    "\\left(\\partial_{{{}}} {}\\left({args}\\right)\\right)",
                    positions.join(" "),
                    app.name
                ),
            }
        }
        (Atom::Recip(p), _) => format!("({})^{{-1}}", render(p, ctx, style)),
    }
}
