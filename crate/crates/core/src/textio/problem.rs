use indexmap::IndexMap;

use super::lexer::Tok;
use super::parser::Parser;
use super::{ParseError, ParseErrorKind, Pos};
use crate::expr::{Expr, JetContext, JetVar};
use crate::jetcalc::VerticalField;
use crate::variational::{BilinearForm, FormIndex, Lagrangian, OnShell, SourceForm};

/// Values from the `numeric` block; unset entries fall back to defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericSettings {
    /// Exact interval end points, one pair per base variable.
    pub domain: Option<Vec<(Expr, Expr)>>,
    pub nodes: Option<usize>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
}

/// A parsed problem file. Named items keep their order of appearance.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub context: JetContext,
    pub lagrangians: IndexMap<String, Lagrangian>,
    pub sources: IndexMap<String, SourceForm>,
    /// Closed-form sections, one expression in the base variables per field.
    pub sections: IndexMap<String, Vec<Expr>>,
    pub variations: IndexMap<String, VerticalField>,
    pub forms: IndexMap<String, BilinearForm>,
    pub onshell: IndexMap<String, OnShell>,
    pub numeric: NumericSettings,
}

/// Parses a problem file:
///
/// ```text
/// context { base t; fields y }
/// lagrangian L = 1/2*(y_t^2 - y^2)
/// section s = sin(t)
/// variation xi = 1
/// numeric { domain [0, pi]; nodes 64; step 1e-3; tol 1e-6 }
/// ```
///
/// Statements end at a newline or `;`; newlines inside brackets are ignored.
pub fn parse_problem(src: &str) -> Result<ProblemFile, ParseError> {
    let mut p = Parser::new(src)?;
    skip_separators(&mut p);
    let context = match p.peek() {
        Tok::Ident(k) if k == "context" => context_block(&mut p)?,
        _ => {
            let pos = p.pos();
            return Err(ParseError::new(
                pos,
                ParseErrorKind::Invalid("a problem file starts with a `context` block".into()),
            ));
        }
    };
    let mut file = ProblemFile {
        context,
        lagrangians: IndexMap::new(),
        sources: IndexMap::new(),
        sections: IndexMap::new(),
        variations: IndexMap::new(),
        forms: IndexMap::new(),
        onshell: IndexMap::new(),
        numeric: NumericSettings::default(),
    };
    let mut seen_numeric = false;
    loop {
        end_statement(&mut p)?;
        skip_separators(&mut p);
        if p.peek() == &Tok::Eof {
            return Ok(file);
        }
        let (keyword, pos) = p.ident("a statement keyword")?;
        let ctx = &file.context;
        match keyword.as_str() {
            "lagrangian" => {
                let (name, npos) = assignment_name(&mut p)?;
                let l = Lagrangian::new(p.expr(ctx)?);
                insert(&mut file.lagrangians, name, l, npos)?;
            }
            "source" => {
                let (name, npos) = assignment_name(&mut p)?;
                let items = components(&mut p, ctx, npos)?;
                insert(&mut file.sources, name, SourceForm::new(items), npos)?;
            }
            "section" => {
                let (name, npos) = assignment_name(&mut p)?;
                let items = components(&mut p, ctx, npos)?;
                if items.iter().any(|e| !e.is_base_only()) {
                    return Err(ParseError::new(
                        npos,
                        ParseErrorKind::Invalid(format!(
                            "section `{name}` must depend on base variables only"
                        )),
                    ));
                }
                insert(&mut file.sections, name, items, npos)?;
            }
            "variation" => {
                let (name, npos) = assignment_name(&mut p)?;
                let items = components(&mut p, ctx, npos)?;
                insert(&mut file.variations, name, VerticalField::new(items), npos)?;
            }
            "form" => {
                let (name, npos) = p.ident("a form name")?;
                let form = form_block(&mut p, ctx)?;
                insert(&mut file.forms, name, form, npos)?;
            }
            "onshell" => {
                let (name, npos) = p.ident("a rule-set name")?;
                let rules = onshell_block(&mut p, ctx)?;
                insert(&mut file.onshell, name, rules, npos)?;
            }
            "numeric" => {
                if seen_numeric {
                    return Err(invalid(pos, "only one `numeric` block is allowed"));
                }
                seen_numeric = true;
                file.numeric = numeric_block(&mut p, ctx)?;
            }
            "context" => return Err(invalid(pos, "the `context` block may appear only once")),
            other => return Err(invalid(pos, &format!("unknown statement `{other}`"))),
        }
    }
}

fn invalid(pos: Pos, msg: &str) -> ParseError {
    ParseError::new(pos, ParseErrorKind::Invalid(msg.to_string()))
}

fn insert<T>(
    map: &mut IndexMap<String, T>,
    name: String,
    value: T,
    pos: Pos,
) -> Result<(), ParseError> {
    if map.contains_key(&name) {
        return Err(invalid(pos, &format!("`{name}` is defined twice")));
    }
    map.insert(name, value);
    Ok(())
}

fn skip_separators(p: &mut Parser) {
    while matches!(p.peek(), Tok::Newline | Tok::Semi) {
        p.bump();
    }
}

fn end_statement(p: &mut Parser) -> Result<(), ParseError> {
    match p.peek() {
        Tok::Newline | Tok::Semi | Tok::Eof => Ok(()),
        _ => Err(p.unexpected("end of statement")),
    }
}

fn assignment_name(p: &mut Parser) -> Result<(String, Pos), ParseError> {
    let name = p.ident("a name")?;
    p.expect(Tok::Equals, "`=`")?;
    Ok(name)
}

// `expr` or `[expr, ...]`, one entry per field.
fn components(p: &mut Parser, ctx: &JetContext, pos: Pos) -> Result<Vec<Expr>, ParseError> {
    let items = if p.peek() == &Tok::LBracket {
        p.open(Tok::LBracket, "`[`")?;
        let mut items = vec![p.expr(ctx)?];
        while p.eat(&Tok::Comma) {
            items.push(p.expr(ctx)?);
        }
        p.close(Tok::RBracket, "`,` or `]`")?;
        items
    } else {
        vec![p.expr(ctx)?]
    };
    if items.len() != ctx.m() {
        return Err(invalid(
            pos,
            &format!(
                "expected {} component(s), one per field, got {}",
                ctx.m(),
                items.len()
            ),
        ));
    }
    Ok(items)
}

// Runs `item` for each entry of a `{ ... }` block whose entries are
// separated by newlines or `;`.
fn block(
    p: &mut Parser,
    mut item: impl FnMut(&mut Parser) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    p.expect(Tok::LBrace, "`{`")?;
    loop {
        skip_separators(p);
        if p.eat(&Tok::RBrace) {
            return Ok(());
        }
        item(p)?;
        if !matches!(p.peek(), Tok::Newline | Tok::Semi | Tok::RBrace) {
            return Err(p.unexpected("`;`, end of line or `}`"));
        }
    }
}

fn names(p: &mut Parser) -> Result<Vec<String>, ParseError> {
    let mut out = vec![p.ident("a name")?.0];
    loop {
        p.eat(&Tok::Comma);
        match p.peek().clone() {
            Tok::Ident(s) => {
                p.bump();
                out.push(s);
            }
            _ => return Ok(out),
        }
    }
}

fn context_block(p: &mut Parser) -> Result<JetContext, ParseError> {
    let (_, pos) = p.ident("`context`")?;
    let mut base = None;
    let mut fields = None;
    let mut functions: Vec<(String, Vec<String>, Pos)> = Vec::new();
    block(p, |p| {
        let (key, kpos) = p.ident("`base`, `fields` or `function`")?;
        match key.as_str() {
            "base" if base.is_none() => base = Some(names(p)?),
            "fields" if fields.is_none() => fields = Some(names(p)?),
            "function" => {
                let (name, fpos) = p.ident("a function name")?;
                p.open(Tok::LParen, "`(`")?;
                let args = if p.peek() == &Tok::RParen {
                    Vec::new()
                } else {
                    names(p)?
                };
                p.close(Tok::RParen, "`)`")?;
                functions.push((name, args, fpos));
            }
            "base" | "fields" => return Err(invalid(kpos, &format!("`{key}` is declared twice"))),
            other => return Err(invalid(kpos, &format!("unknown context entry `{other}`"))),
        }
        Ok(())
    })?;
    let (Some(base), Some(fields)) = (base, fields) else {
        return Err(invalid(pos, "the context needs both `base` and `fields`"));
    };
    let mut ctx = JetContext::new(base, fields).map_err(|e| ParseError::new(pos, e.into()))?;
    for (name, args, fpos) in functions {
        ctx.declare_function(&name, &args)
            .map_err(|e| ParseError::new(fpos, e.into()))?;
    }
    Ok(ctx)
}

fn one_based(p: &mut Parser, m: usize) -> Result<usize, ParseError> {
    let (s, pos) = p.number()?;
    match s.parse::<usize>() {
        Ok(k) if (1..=m).contains(&k) => Ok(k - 1),
        _ => Err(invalid(
            pos,
            &format!("field index must be between 1 and {m}"),
        )),
    }
}

// Entries `[i,j,{σ}] = expr`, optionally prefixed by a name as printed.
fn form_block(p: &mut Parser, ctx: &JetContext) -> Result<BilinearForm, ParseError> {
    let mut form = BilinearForm::zero(ctx.n(), ctx.m());
    block(p, |p| {
        if matches!(p.peek(), Tok::Ident(_)) {
            p.bump();
        }
        p.open(Tok::LBracket, "`[`")?;
        let i = one_based(p, ctx.m())?;
        p.expect(Tok::Comma, "`,`")?;
        let j = one_based(p, ctx.m())?;
        p.expect(Tok::Comma, "`,`")?;
        let sigma = p.braced_multi_index(ctx)?;
        p.close(Tok::RBracket, "`]`")?;
        p.expect(Tok::Equals, "`=`")?;
        form.add(FormIndex::new(i, j, sigma), p.expr(ctx)?);
        Ok(())
    })?;
    Ok(form)
}

// Entries `y_tt = -y`: a jet coordinate solved for in terms of others.
fn onshell_block(p: &mut Parser, ctx: &JetContext) -> Result<OnShell, ParseError> {
    let mut rules: Vec<(JetVar, Expr)> = Vec::new();
    block(p, |p| {
        let pos = p.pos();
        let lhs = p.primary(ctx)?;
        let var = match lhs.jet_vars().into_iter().next() {
            Some(v) if lhs == Expr::jet(v.clone()) => v,
            _ => {
                return Err(invalid(
                    pos,
                    "the left side of a rule must be a jet coordinate",
                ))
            }
        };
        if rules.iter().any(|(v, _)| v.field == var.field) {
            return Err(invalid(pos, "at most one rule per field"));
        }
        p.expect(Tok::Equals, "`=`")?;
        let rhs = p.expr(ctx)?;
        rules.push((var, rhs));
        Ok(())
    })?;
    Ok(OnShell::new(rules))
}

fn float(p: &mut Parser) -> Result<f64, ParseError> {
    let (s, pos) = p.number()?;
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| invalid(pos, &format!("`{s}` must be a positive number")))
}

fn numeric_block(p: &mut Parser, ctx: &JetContext) -> Result<NumericSettings, ParseError> {
    let mut out = NumericSettings::default();
    block(p, |p| {
        let (key, kpos) = p.ident("`domain`, `nodes`, `step` or `tol`")?;
        match key.as_str() {
            "domain" => {
                let mut intervals = Vec::new();
                loop {
                    let ipos = p.open(Tok::LBracket, "`[`")?;
                    let a = p.expr(ctx)?;
                    p.expect(Tok::Comma, "`,`")?;
                    let b = p.expr(ctx)?;
                    p.close(Tok::RBracket, "`]`")?;
                    let (va, vb) = match (a.eval_constant(), b.eval_constant()) {
                        (Ok(va), Ok(vb)) => (va, vb),
                        _ => return Err(invalid(ipos, "interval end points must be constants")),
                    };
                    if va >= vb {
                        return Err(invalid(ipos, "empty interval"));
                    }
                    intervals.push((a, b));
                    match p.peek() {
                        Tok::Comma => {
                            p.bump();
                        }
                        Tok::Ident(x) if x == "x" => {
                            p.bump();
                        }
                        _ => break,
                    }
                }
                if intervals.len() != ctx.n() {
                    return Err(invalid(
                        kpos,
                        &format!(
                            "the domain needs {} interval(s), one per base variable",
                            ctx.n()
                        ),
                    ));
                }
                out.domain = Some(intervals);
            }
            "nodes" => {
                let (s, pos) = p.number()?;
                out.nodes = Some(
                    s.parse::<usize>()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| invalid(pos, "`nodes` must be a positive integer"))?,
                );
            }
            "step" => out.step = Some(float(p)?),
            "tol" => out.tol = Some(float(p)?),
            other => return Err(invalid(kpos, &format!("unknown numeric setting `{other}`"))),
        }
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use crate::textio::{parse_expr, plain};

    const OSCILLATOR: &str = "\
# harmonic oscillator
context {
  base t
  fields y
}
lagrangian L = 1/2*(y_t^2
                  - y^2)
section s = sin(t); section bad = t
variation xi = t*(pi - t)
numeric { domain [0, pi]; nodes 32; step 1e-3; tol 1e-6 }
onshell crit { y_tt = -y }
form A {
  A[1,1,{t}] = 1
  [1,1,{}] = y
}
";

    #[test]
    fn parses_all_statements() {
        let f = parse_problem(OSCILLATOR).unwrap();
        let ctx = &f.context;
        assert_eq!(
            plain(f.lagrangians["L"].density(), ctx),
            "1/2*y_t^2 - 1/2*y^2"
        );
        assert_eq!(f.sections.keys().collect::<Vec<_>>(), ["s", "bad"]);
        assert_eq!(f.variations["xi"].len(), 1);
        assert_eq!(f.numeric.nodes, Some(32));
        assert_eq!(f.numeric.step, Some(1e-3));
        let dom = f.numeric.domain.as_ref().unwrap();
        assert_eq!(dom[0].1, Expr::pi());
        let rules = f.onshell["crit"].rules();
        assert_eq!(rules[0].0, JetVar::new(0, MultiIndex::new(vec![2])));
        let a = &f.forms["A"];
        assert_eq!(a.get(0, 0, &MultiIndex::new(vec![1])), Expr::one());
        assert_eq!(
            a.get(0, 0, &MultiIndex::zero(1)),
            parse_expr("y", ctx).unwrap()
        );
    }

    #[test]
    fn multi_field_context() {
        let src = "context { base t; fields q1, q2; function g(q1, q2) }\n\
                   lagrangian L = 1/2*g(q1,q2)*q1_t^2\n\
                   section s = [t, 2*t]\n\
                   source e = [q1_tt, 0]";
        let f = parse_problem(src).unwrap();
        assert_eq!(f.context.m(), 2);
        assert_eq!(f.sections["s"].len(), 2);
        assert_eq!(f.sources["e"].len(), 2);
    }

    fn error_at(src: &str) -> (usize, usize) {
        let e = parse_problem(src).unwrap_err();
        (e.pos.line, e.pos.col)
    }

    #[test]
    fn diagnostics() {
        assert_eq!(error_at("lagrangian L = y"), (1, 1));
        assert_eq!(
            error_at("context { base t; fields y }\nlagrangian L = y + w"),
            (2, 20)
        );
        assert_eq!(
            error_at("context { base t; fields y }\nsection s = y"),
            (2, 9)
        );
        assert_eq!(
            error_at("context { base t; fields y }\nsource e = [y, y]"),
            (2, 8)
        );
        assert_eq!(error_at("context { base t; fields y }\nfoo x = 1"), (2, 1));
        assert_eq!(
            error_at("context { base t; fields y }\nlagrangian L = y y"),
            (2, 18)
        );
        assert_eq!(
            error_at("context { base t; fields y }\nlagrangian L = 1\nlagrangian L = 2"),
            (3, 12)
        );
        assert_eq!(error_at("context { base t; fields t }"), (1, 1));
        assert_eq!(
            error_at("context { base t; fields y }\nnumeric { domain [1, 0] }"),
            (2, 18)
        );
        assert_eq!(
            error_at("context { base t; fields y }\nonshell r { y + 1 = 0 }"),
            (2, 15)
        );
        assert_eq!(
            error_at("context { base t; fields y }\nonshell r { 2 = y }"),
            (2, 13)
        );
    }
}
