use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Atom, ElemFn, Expr, ExprError, JetVar, OpaqueApp};

/// Unsimplified expression tree, as produced by the parser and consumed by
/// the structured serialisation.
#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Num(BigRational),
    Pi,
    Base(usize),
    Jet(JetVar),
    Sum(Vec<Tree>),
    Product(Vec<Tree>),
    Neg(Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, i32),
    Apply(ElemFn, Box<Tree>),
    Opaque {
        name: String,
        partials: Vec<u32>,
        args: Vec<Tree>,
    },
}

/// Lowers a tree to canonical form. Fails only on division by an
/// expression that is identically zero.
pub fn simplify(t: &Tree) -> Result<Expr, ExprError> {
    Ok(match t {
        Tree::Num(c) => Expr::constant(c.clone()),
        Tree::Pi => Expr::pi(),
        Tree::Base(l) => Expr::base(*l),
        Tree::Jet(v) => Expr::jet(v.clone()),
        Tree::Sum(items) => {
            let mut acc = Expr::zero();
            for it in items {
                acc += simplify(it)?;
            }
            acc
        }
        Tree::Product(items) => {
            let mut acc = Expr::one();
            for it in items {
                acc = &acc * &simplify(it)?;
            }
            acc
        }
        Tree::Neg(a) => -simplify(a)?,
        Tree::Div(a, b) => simplify(a)?.div(&simplify(b)?)?,
        Tree::Pow(a, k) => simplify(a)?.pow(*k)?,
        Tree::Apply(f, a) => Expr::apply(*f, simplify(a)?),
        Tree::Opaque {
            name,
            partials,
            args,
        } => {
            let args = args.iter().map(simplify).collect::<Result<Vec<_>, _>>()?;
            Expr::opaque(OpaqueApp {
                name: name.as_str().into(),
                partials: partials.clone(),
                args,
            })
        }
    })
}

impl Expr {
    /// The canonical form as a tree: a sum of products of a coefficient and
    /// atom powers. `simplify(&e.to_tree()) == e`.
    pub fn to_tree(&self) -> Tree {
        let mut terms: Vec<Tree> = self
            .terms()
            .map(|(m, c)| {
                let mut factors = Vec::new();
                if !c.is_one() || m.is_one() {
                    factors.push(Tree::Num(c.clone()));
                }
                for (atom, k) in m.factors() {
                    factors.push(atom_power_tree(atom, *k));
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    Tree::Product(factors)
                }
            })
            .collect();
        match terms.len() {
            0 => Tree::Num(BigRational::zero()),
            1 => terms.pop().unwrap(),
            _ => Tree::Sum(terms),
        }
    }
}

fn atom_power_tree(atom: &Atom, k: i32) -> Tree {
    let (base, k) = match atom {
        Atom::Recip(p) => (p.to_tree(), -k),
        _ => (atom_tree(atom), k),
    };
    if k == 1 {
        base
    } else {
        Tree::Pow(Box::new(base), k)
    }
}

fn atom_tree(atom: &Atom) -> Tree {
    match atom {
        Atom::Pi => Tree::Pi,
        Atom::Base(l) => Tree::Base(*l),
        Atom::Jet(v) => Tree::Jet(v.clone()),
        Atom::Apply(f, a) => Tree::Apply(*f, Box::new(a.to_tree())),
        Atom::Opaque(app) => Tree::Opaque {
            name: app.name.to_string(),
            partials: app.partials.clone(),
            args: app.args.iter().map(Expr::to_tree).collect(),
        },
        Atom::Recip(p) => Tree::Pow(Box::new(p.to_tree()), -1),
    }
}
