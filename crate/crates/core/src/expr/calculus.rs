//! Derivations, partial derivatives and substitution on canonical expressions.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Atom, Coord, ElemFn, Expr, ExprError, JetVar};

impl Expr {
    /// Applies the derivation determined by its values on coordinates,
    /// extended to functions by the chain rule. Both the formal partials
    /// `∂/∂c` and the total derivatives `D_λ` are derivations of this kind.
    pub fn derivation(&self, leaf: &dyn Fn(&Coord) -> Expr) -> Expr {
        let mut cache: HashMap<&Atom, Expr> = HashMap::new();
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            for (idx, (atom, k)) in m.factors().iter().enumerate() {
                let d = cache
                    .entry(atom)
                    .or_insert_with(|| atom_derivation(atom, leaf));
                if d.is_zero() {
                    continue;
                }
                let coeff = c * BigRational::from_integer(BigInt::from(*k));
                let rest = Expr::monomial(m.lowered(idx), coeff);
                out += &rest * &*d;
            }
        }
        out
    }

    /// Formal partial derivative with every coordinate independent.
    pub fn partial(&self, c: &Coord) -> Expr {
        self.derivation(&|l: &Coord| if l == c { Expr::one() } else { Expr::zero() })
    }

    pub fn partial_jet(&self, v: &JetVar) -> Expr {
        self.partial(&Coord::Jet(v.clone()))
    }

    /// Simultaneous substitution of coordinates; unmapped coordinates stay.
    pub fn substitute(&self, map: &dyn Fn(&Coord) -> Option<Expr>) -> Result<Expr, ExprError> {
        let mut cache: HashMap<&Atom, Expr> = HashMap::new();
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            let mut term = Expr::constant(c.clone());
            for (atom, k) in m.factors() {
                let value = match cache.get(atom) {
                    Some(v) => v.clone(),
                    None => {
                        let v = substitute_atom(atom, map)?;
                        cache.insert(atom, v.clone());
                        v
                    }
                };
                term = &term * &value.pow(*k)?;
            }
            out += term;
        }
        Ok(out)
    }

    /// Substitution from an explicit table.
    pub fn substitute_map(&self, bindings: &HashMap<Coord, Expr>) -> Result<Expr, ExprError> {
        self.substitute(&|c| bindings.get(c).cloned())
    }

    /// Substitution that must eliminate every jet coordinate.
    pub fn ground(&self, bindings: &HashMap<Coord, Expr>) -> Result<Expr, ExprError> {
        let out = self.substitute_map(bindings)?;
        if let Some(v) = out.jet_vars().into_iter().next() {
            return Err(ExprError::Unbound(format!("{v:?}")));
        }
        Ok(out)
    }

    /// Every coordinate occurring anywhere in the expression, including
    /// inside function arguments.
    pub fn coords(&self) -> BTreeSet<Coord> {
        let mut out = BTreeSet::new();
        self.collect_coords(&mut out);
        out
    }

    fn collect_coords(&self, out: &mut BTreeSet<Coord>) {
        for (m, _) in self.terms() {
            for (atom, _) in m.factors() {
                match atom {
                    Atom::Pi => {}
                    Atom::Base(l) => {
                        out.insert(Coord::Base(*l));
                    }
                    Atom::Jet(v) => {
                        out.insert(Coord::Jet(v.clone()));
                    }
                    Atom::Apply(_, a) | Atom::Recip(a) => a.collect_coords(out),
                    Atom::Opaque(app) => app.args.iter().for_each(|a| a.collect_coords(out)),
                }
            }
        }
    }

    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        self.coords()
            .into_iter()
            .filter_map(|c| match c {
                Coord::Jet(v) => Some(v),
                Coord::Base(_) => None,
            })
            .collect()
    }

    /// Largest `|σ|` among jet coordinates, 0 if there are none.
    pub fn jet_order(&self) -> u32 {
        self.jet_vars().iter().map(JetVar::order).max().unwrap_or(0)
    }

    /// True when no jet coordinate occurs (a function on the base).
    pub fn is_base_only(&self) -> bool {
        self.jet_vars().is_empty()
    }
}

fn atom_derivation(atom: &Atom, leaf: &dyn Fn(&Coord) -> Expr) -> Expr {
    match atom {
        Atom::Pi => Expr::zero(),
        Atom::Base(l) => leaf(&Coord::Base(*l)),
        Atom::Jet(v) => leaf(&Coord::Jet(v.clone())),
        Atom::Apply(f, a) => {
            let da = a.derivation(leaf);
            if da.is_zero() {
                Expr::zero()
            } else {
                &elementary_derivative(*f, a) * &da
            }
        }
        Atom::Opaque(app) => {
            let mut out = Expr::zero();
            for (k, arg) in app.args.iter().enumerate() {
                let da = arg.derivation(leaf);
                if !da.is_zero() {
                    out += &Expr::opaque(app.differentiated(k)) * &da;
                }
            }
            out
        }
        Atom::Recip(p) => {
            let dp = p.derivation(leaf);
            if dp.is_zero() {
                Expr::zero()
            } else {
                -(&Expr::atom_pow(atom.clone(), 2) * &dp)
            }
        }
    }
}

// Only called when the argument has a non-zero derivative, hence is not a
// constant and in particular not zero.
fn elementary_derivative(f: ElemFn, a: &Arc<Expr>) -> Expr {
    match f {
        ElemFn::Sin => Expr::cos((**a).clone()),
        ElemFn::Cos => -Expr::sin((**a).clone()),
        ElemFn::Exp => Expr::from_atom(Atom::Apply(ElemFn::Exp, a.clone())),
        ElemFn::Log => a.inverse().expect("non-constant argument"),
        ElemFn::Sqrt => Expr::atom_pow(Atom::Apply(ElemFn::Sqrt, a.clone()), -1)
            .scale(&BigRational::new(BigInt::from(1), BigInt::from(2))),
    }
}

fn substitute_atom(atom: &Atom, map: &dyn Fn(&Coord) -> Option<Expr>) -> Result<Expr, ExprError> {
    Ok(match atom {
        Atom::Pi => Expr::pi(),
        Atom::Base(l) => map(&Coord::Base(*l)).unwrap_or_else(|| Expr::base(*l)),
        Atom::Jet(v) => map(&Coord::Jet(v.clone())).unwrap_or_else(|| Expr::jet(v.clone())),
        Atom::Apply(f, a) => Expr::apply(*f, a.substitute(map)?),
        Atom::Opaque(app) => {
            let mut new = (**app).clone();
            new.args = app
                .args
                .iter()
                .map(|a| a.substitute(map))
                .collect::<Result<_, _>>()?;
            Expr::opaque(new)
        }
        Atom::Recip(p) => p.substitute(map)?.inverse()?,
    })
}
