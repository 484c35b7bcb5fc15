//! Floating-point evaluation of canonical expressions.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Atom, Coord, ElemFn, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("opaque function `{0}` has no numeric definition")]
    Opaque(String),
    #[error("no value supplied for coordinate {0}")]
    Unbound(String),
    #[error("non-finite value produced")]
    NonFinite,
}

/// Expression compiled to `f64` coefficients with a fixed slot per
/// coordinate. Evaluation is reentrant.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    slots: Vec<Coord>,
    root: Node,
}

#[derive(Debug, Clone)]
struct Node {
    atoms: Vec<CAtom>,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

#[derive(Debug, Clone)]
enum CAtom {
    Pi,
    Slot(usize),
    Apply(ElemFn, Node),
    Recip(Node),
}

impl CompiledExpr {
    pub fn new(e: &Expr) -> Result<Self, EvalError> {
        let mut slots = Vec::new();
        let mut index = HashMap::new();
        let root = compile_node(e, &mut slots, &mut index)?;
        Ok(CompiledExpr { slots, root })
    }

    /// Coordinates in slot order; `eval` expects one value per slot.
    pub fn slots(&self) -> &[Coord] {
        &self.slots
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        assert_eq!(values.len(), self.slots.len(), "one value per slot");
        let v = eval_node(&self.root, values)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn eval_with(&self, env: &dyn Fn(&Coord) -> Option<f64>) -> Result<f64, EvalError> {
        let values = self
            .slots
            .iter()
            .map(|c| env(c).ok_or_else(|| EvalError::Unbound(format!("{c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&values)
    }
}

impl Expr {
    pub fn eval(&self, env: &dyn Fn(&Coord) -> Option<f64>) -> Result<f64, EvalError> {
        CompiledExpr::new(self)?.eval_with(env)
    }

    /// Numeric value of a coordinate-free expression such as `pi/2`.
    pub fn eval_constant(&self) -> Result<f64, EvalError> {
        self.eval(&|_| None)
    }
}

fn compile_node(
    e: &Expr,
    slots: &mut Vec<Coord>,
    index: &mut HashMap<Coord, usize>,
) -> Result<Node, EvalError> {
    let mut atoms = Vec::new();
    let mut atom_index: HashMap<&Atom, usize> = HashMap::new();
    let mut terms = Vec::with_capacity(e.len());
    for (m, c) in e.terms() {
        let coeff = c.to_f64().ok_or(EvalError::NonFinite)?;
        let mut factors = Vec::with_capacity(m.factors().len());
        for (atom, k) in m.factors() {
            let id = match atom_index.get(atom) {
                Some(&id) => id,
                None => {
                    let compiled = match atom {
                        Atom::Pi => CAtom::Pi,
                        Atom::Base(l) => CAtom::Slot(slot(Coord::Base(*l), slots, index)),
                        Atom::Jet(v) => CAtom::Slot(slot(Coord::Jet(v.clone()), slots, index)),
                        Atom::Apply(f, a) => CAtom::Apply(*f, compile_node(a, slots, index)?),
                        Atom::Recip(p) => CAtom::Recip(compile_node(p, slots, index)?),
                        Atom::Opaque(app) => return Err(EvalError::Opaque(app.name.to_string())),
                    };
                    atoms.push(compiled);
                    atom_index.insert(atom, atoms.len() - 1);
                    atoms.len() - 1
                }
            };
            factors.push((id, *k));
        }
        terms.push((coeff, factors));
    }
    Ok(Node { atoms, terms })
}

fn slot(c: Coord, slots: &mut Vec<Coord>, index: &mut HashMap<Coord, usize>) -> usize {
    *index.entry(c.clone()).or_insert_with(|| {
        slots.push(c);
        slots.len() - 1
    })
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, EvalError> {
    let mut atom_values = Vec::with_capacity(node.atoms.len());
    for a in &node.atoms {
        let v = match a {
            CAtom::Pi => std::f64::consts::PI,
            CAtom::Slot(s) => values[*s],
            CAtom::Apply(f, arg) => {
                let x = eval_node(arg, values)?;
                match f {
                    ElemFn::Sin => x.sin(),
                    ElemFn::Cos => x.cos(),
                    ElemFn::Exp => x.exp(),
                    ElemFn::Log if x > 0.0 => x.ln(),
                    ElemFn::Log => {
                        return Err(EvalError::Domain {
                            func: "log",
                            value: x,
                        })
                    }
                    ElemFn::Sqrt if x >= 0.0 => x.sqrt(),
                    ElemFn::Sqrt => {
                        return Err(EvalError::Domain {
                            func: "sqrt",
                            value: x,
                        })
                    }
                }
            }
            CAtom::Recip(p) => {
                let x = eval_node(p, values)?;
                if x == 0.0 {
                    return Err(EvalError::Domain {
                        func: "reciprocal",
                        value: x,
                    });
                }
                1.0 / x
            }
        };
        atom_values.push(v);
    }
    let mut sum = 0.0;
    for (c, factors) in &node.terms {
        let mut t = *c;
        for (id, k) in factors {
            let base = atom_values[*id];
            if *k < 0 && base == 0.0 {
                return Err(EvalError::Domain {
                    func: "reciprocal",
                    value: 0.0,
                });
            }
            t *= base.powi(*k);
        }
        sum += t;
    }
    Ok(sum)
}
