//! Lossless JSON serialisation. Every node is an object with a `kind`
//! field; coordinates and functions are referenced by name, so decoding
//! needs the context the expression was written against.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use super::parse_rational;
use crate::expr::{simplify, ElemFn, Expr, JetContext, JetVar, Tree};
use crate::multiindex::MultiIndex;
use crate::variational::{BilinearForm, FormIndex, SourceForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("structured input: {0}")]
pub struct StructuredError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, StructuredError> {
    Err(StructuredError(msg.into()))
}

pub fn expr_to_json(e: &Expr, ctx: &JetContext) -> Value {
    tree_to_json(&e.to_tree(), ctx)
}

fn sigma_names(sigma: &MultiIndex, ctx: &JetContext) -> Value {
    Value::from(
        sigma
            .variables()
            .into_iter()
            .map(|l| ctx.base_names()[l].clone())
            .collect::<Vec<_>>(),
    )
}

fn tree_to_json(t: &Tree, ctx: &JetContext) -> Value {
    match t {
        Tree::Num(c) => json!({"kind": "rational", "value": c.to_string()}),
        Tree::Pi => json!({"kind": "pi"}),
        Tree::Base(l) => json!({"kind": "base", "name": ctx.base_names()[*l]}),
        Tree::Jet(v) => json!({
            "kind": "jet",
            "field": ctx.field_names()[v.field],
            "derivatives": sigma_names(&v.sigma, ctx),
        }),
        Tree::Sum(items) => json!({
            "kind": "sum",
            "terms": items.iter().map(|i| tree_to_json(i, ctx)).collect::<Vec<_>>(),
        }),
        Tree::Product(items) => json!({
            "kind": "product",
            "factors": items.iter().map(|i| tree_to_json(i, ctx)).collect::<Vec<_>>(),
        }),
        Tree::Neg(a) => tree_to_json(
            &Tree::Product(vec![Tree::Num(-BigRational::one()), (**a).clone()]),
            ctx,
        ),
        Tree::Div(a, b) => tree_to_json(
            &Tree::Product(vec![(**a).clone(), Tree::Pow(b.clone(), -1)]),
            ctx,
        ),
        Tree::Pow(a, k) => json!({"kind": "pow", "base": tree_to_json(a, ctx), "exponent": k}),
        Tree::Apply(f, a) => json!({
            "kind": "apply",
            "function": f.name(),
            "argument": tree_to_json(a, ctx),
        }),
        Tree::Opaque {
            name,
            partials,
            args,
        } => json!({
            "kind": "opaque",
            "name": name,
            "partials": partials,
            "arguments": args.iter().map(|a| tree_to_json(a, ctx)).collect::<Vec<_>>(),
        }),
    }
}

pub fn expr_from_json(v: &Value, ctx: &JetContext) -> Result<Expr, StructuredError> {
    let tree = tree_from_json(v, ctx)?;
    simplify(&tree).map_err(|e| StructuredError(e.to_string()))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, StructuredError> {
    v.get(key)
        .ok_or_else(|| StructuredError(format!("missing key `{key}`")))
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str, StructuredError> {
    field(v, key)?
        .as_str()
        .ok_or_else(|| StructuredError(format!("`{key}` must be a string")))
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, StructuredError> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| StructuredError(format!("`{key}` must be an array")))
}

fn index(v: &Value, key: &str) -> Result<u64, StructuredError> {
    field(v, key)?
        .as_u64()
        .ok_or_else(|| StructuredError(format!("`{key}` must be a non-negative integer")))
}

fn rational_value(s: &str) -> Result<BigRational, StructuredError> {
    let parsed = match s.split_once('/') {
        Some((p, q)) => match (p.trim().parse(), q.trim().parse()) {
            (Ok(p), Ok(q)) if !num_bigint::BigInt::is_zero(&q) => Some(BigRational::new(p, q)),
            _ => None,
        },
        None => s
            .strip_prefix('-')
            .map(|rest| parse_rational(rest).map(|r| -r))
            .unwrap_or_else(|| parse_rational(s)),
    };
    parsed.ok_or_else(|| StructuredError(format!("invalid rational `{s}`")))
}

fn derivatives(names: &[Value], ctx: &JetContext) -> Result<MultiIndex, StructuredError> {
    let mut counts = vec![0u32; ctx.n()];
    for n in names {
        let name = n
            .as_str()
            .ok_or_else(|| StructuredError("derivative names must be strings".into()))?;
        let l = ctx
            .base_index(name)
            .ok_or_else(|| StructuredError(format!("unknown base variable `{name}`")))?;
        counts[l] += 1;
    }
    Ok(MultiIndex::new(counts))
}

fn tree_from_json(v: &Value, ctx: &JetContext) -> Result<Tree, StructuredError> {
    let list = |key: &str| -> Result<Vec<Tree>, StructuredError> {
        array(v, key)?
            .iter()
            .map(|t| tree_from_json(t, ctx))
            .collect()
    };
    Ok(match string(v, "kind")? {
        "rational" => Tree::Num(rational_value(string(v, "value")?)?),
        "pi" => Tree::Pi,
        "base" => {
            let name = string(v, "name")?;
            Tree::Base(
                ctx.base_index(name)
                    .ok_or_else(|| StructuredError(format!("unknown base variable `{name}`")))?,
            )
        }
        "jet" => {
            let name = string(v, "field")?;
            let i = ctx
                .field_index(name)
                .ok_or_else(|| StructuredError(format!("unknown field `{name}`")))?;
            Tree::Jet(JetVar::new(i, derivatives(array(v, "derivatives")?, ctx)?))
        }
        "sum" => Tree::Sum(list("terms")?),
        "product" => Tree::Product(list("factors")?),
        "pow" => {
            let k = field(v, "exponent")?
                .as_i64()
                .and_then(|k| i32::try_from(k).ok())
                .ok_or_else(|| StructuredError("`exponent` must be a 32-bit integer".into()))?;
            Tree::Pow(Box::new(tree_from_json(field(v, "base")?, ctx)?), k)
        }
        "apply" => {
            let name = string(v, "function")?;
            let f = ElemFn::from_name(name)
                .ok_or_else(|| StructuredError(format!("unknown function `{name}`")))?;
            Tree::Apply(f, Box::new(tree_from_json(field(v, "argument")?, ctx)?))
        }
        "opaque" => {
            let name = string(v, "name")?;
            let decl = ctx
                .function(name)
                .ok_or_else(|| StructuredError(format!("unknown function `{name}`")))?;
            let args = list("arguments")?;
            let partials = array(v, "partials")?
                .iter()
                .map(|p| p.as_u64().and_then(|p| u32::try_from(p).ok()))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| StructuredError("`partials` must hold small integers".into()))?;
            if args.len() != decl.args.len() || partials.len() != args.len() {
                return err(format!("`{name}` takes {} arguments", decl.args.len()));
            }
            Tree::Opaque {
                name: name.to_string(),
                partials,
                args,
            }
        }
        other => return err(format!("unknown kind `{other}`")),
    })
}

pub fn source_to_json(e: &SourceForm, ctx: &JetContext) -> Value {
    json!({
        "kind": "source_form",
        "components": e.components().iter().map(|c| expr_to_json(c, ctx)).collect::<Vec<_>>(),
    })
}

pub fn source_from_json(v: &Value, ctx: &JetContext) -> Result<SourceForm, StructuredError> {
    if string(v, "kind")? != "source_form" {
        return err("expected kind `source_form`");
    }
    let components = array(v, "components")?
        .iter()
        .map(|c| expr_from_json(c, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    if components.len() != ctx.m() {
        return err(format!("expected {} components", ctx.m()));
    }
    Ok(SourceForm::new(components))
}

/// Indices `i`, `j` are 1-based, as in the text renderings.
pub fn form_to_json(a: &BilinearForm, ctx: &JetContext) -> Value {
    json!({
        "kind": "bilinear_form",
        "entries": a.entries().map(|(k, v)| json!({
            "i": k.i + 1,
            "j": k.j + 1,
            "sigma": sigma_names(&k.sigma, ctx),
            "value": expr_to_json(v, ctx),
        })).collect::<Vec<_>>(),
    })
}

pub fn form_from_json(v: &Value, ctx: &JetContext) -> Result<BilinearForm, StructuredError> {
    if string(v, "kind")? != "bilinear_form" {
        return err("expected kind `bilinear_form`");
    }
    let mut out = BilinearForm::zero(ctx.n(), ctx.m());
    for entry in array(v, "entries")? {
        let slot = |key| -> Result<usize, StructuredError> {
            let k = index(entry, key)? as usize;
            if k == 0 || k > ctx.m() {
                return err(format!("`{key}` out of range"));
            }
            Ok(k - 1)
        };
        let sigma = derivatives(array(entry, "sigma")?, ctx)?;
        let value = expr_from_json(field(entry, "value")?, ctx)?;
        out.add(FormIndex::new(slot("i")?, slot("j")?, sigma), value);
    }
    Ok(out)
}
