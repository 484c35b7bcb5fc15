//! Command results as an ordered list of named values, rendered either as
//! JSON or as plain/LaTeX text.

use jetvar::textio::{
    expr_to_json, form_to_json, print_expr, print_form, print_source, render_multi_index,
    source_to_json, Format,
};
use jetvar::variational::{BilinearForm, IdealCombination, SourceForm};
use jetvar::{Expr, JetContext};
use serde_json::{json, Map, Value};

pub enum Item {
    Text(String),
    Number(f64),
    Numbers(Vec<f64>),
    Flag(bool),
    Expr(Expr),
    Source(SourceForm),
    /// A bilinear form with the symbol used in text output.
    Form(&'static str, BilinearForm),
    Ideal(IdealCombination),
    Group(Vec<(String, Item)>),
}

pub struct Report {
    /// Only in the structured output.
    meta: Vec<(String, String)>,
    items: Vec<(String, Item)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            meta: vec![("command".into(), command.into())],
            items: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, key: &str, item: Item) {
        self.items.push((key.into(), item));
    }

    pub fn render(&self, ctx: &JetContext, fmt: Format) -> String {
        match fmt {
            Format::Structured => {
                let mut obj = Map::new();
                for (k, v) in &self.meta {
                    obj.insert(k.clone(), Value::String(v.clone()));
                }
                for (k, item) in &self.items {
                    obj.insert(k.clone(), to_json(item, ctx));
                }
                let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
                out.push('\n');
                out
            }
            _ => {
                let mut lines = Vec::new();
                for (k, item) in &self.items {
                    text(k, item, ctx, fmt, 0, &mut lines);
                }
                let mut out = lines.join("\n");
                out.push('\n');
                out
            }
        }
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn ideal_terms(c: &IdealCombination) -> impl Iterator<Item = (usize, &jetvar::MultiIndex, &Expr)> {
    c.terms().map(|((i, rho), e)| (*i, rho, e))
}

fn to_json(item: &Item, ctx: &JetContext) -> Value {
    match item {
        Item::Text(s) => Value::String(s.clone()),
        Item::Number(x) => number(*x),
        Item::Numbers(xs) => Value::Array(xs.iter().map(|x| number(*x)).collect()),
        Item::Flag(b) => Value::Bool(*b),
        Item::Expr(e) => expr_to_json(e, ctx),
        Item::Source(e) => source_to_json(e, ctx),
        Item::Form(_, a) => form_to_json(a, ctx),
        Item::Ideal(c) => Value::Array(
            ideal_terms(c)
                .map(|(i, rho, e)| {
                    json!({
                        "field": i + 1,
                        "sigma": rho.variables().iter().map(|&l| ctx.base_names()[l].clone()).collect::<Vec<_>>(),
                        "coefficient": expr_to_json(e, ctx),
                    })
                })
                .collect(),
        ),
        Item::Group(items) => Value::Object(
            items
                .iter()
                .map(|(k, v)| (k.clone(), to_json(v, ctx)))
                .collect(),
        ),
    }
}

fn decimal(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn text(
    key: &str,
    item: &Item,
    ctx: &JetContext,
    fmt: Format,
    depth: usize,
    out: &mut Vec<String>,
) {
    let start = out.len();
    match item {
        Item::Text(s) => out.push(format!("{key}: {s}")),
        Item::Number(x) => out.push(format!("{key}: {}", decimal(*x))),
        Item::Numbers(xs) => {
            let xs: Vec<_> = xs.iter().map(|x| decimal(*x)).collect();
            out.push(format!("{key}: [{}]", xs.join(", ")));
        }
        Item::Flag(b) => out.push(format!("{key}: {b}")),
        Item::Expr(e) => out.push(format!("{key} = {}", print_expr(e, ctx, fmt))),
        Item::Source(e) => out.push(print_source(e, ctx, fmt)),
        Item::Form(sym, a) => out.push(print_form(a, sym, ctx, fmt)),
        Item::Ideal(c) => {
            let terms: Vec<_> = ideal_terms(c)
                .map(|(i, rho, e)| {
                    let d = if rho.is_zero() {
                        String::new()
                    } else {
                        format!("D_{{{}}} ", render_multi_index(rho, ctx, fmt))
                    };
                    match fmt {
                        Format::Latex => format!(
                            "\\left({}\\right) {d}e_{{{}}}",
                            print_expr(e, ctx, fmt),
                            i + 1
                        ),
                        _ => format!("({}) {d}e_{}", print_expr(e, ctx, fmt), i + 1),
                    }
                })
                .collect();
            let body = if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            };
            out.push(format!("{key} = {body}"));
        }
        Item::Group(items) => {
            out.push(format!("[{key}]"));
            for (k, v) in items {
                text(k, v, ctx, fmt, 1, out);
            }
        }
    }
    let pad = "  ".repeat(depth);
    for line in &mut out[start..] {
        *line = line
            .lines()
            .map(|l| format!("{pad}{l}"))
            .collect::<Vec<_>>()
            .join("\n");
    }
}
