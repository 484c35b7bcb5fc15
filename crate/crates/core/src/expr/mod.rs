//! Exact symbolic expressions over jet coordinates.
//!
//! Every [`Expr`] is kept in canonical form: a finite sum of monomials with
//! rational coefficients. The generators of the polynomial ring are
//! [`Atom`]s: base coordinates, jet coordinates, the constant `pi`,
//! elementary function applications, opaque function applications and
//! reciprocals of non-monomial expressions. Atoms are compared structurally,
//! so `sin(y)^2 + cos(y)^2` stays as written while `y*y_t - y_t*y` is zero.
//!
//! Raw, unsimplified input lives in [`Tree`]; [`simplify`] lowers it.

mod calculus;
mod context;
mod eval;
mod tree;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::multiindex::MultiIndex;

pub use context::{ContextError, JetContext, OpaqueDecl};
pub use eval::{CompiledExpr, EvalError};
pub use tree::{simplify, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("unbound coordinate {0} remains after substitution")]
    Unbound(String),
}

/// Jet coordinate `y^i_σ`; `field` is the zero-based fiber index.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct JetVar {
    pub field: usize,
    pub sigma: MultiIndex,
}

impl JetVar {
    pub fn new(field: usize, sigma: MultiIndex) -> Self {
        JetVar { field, sigma }
    }

    /// `y^i` itself.
    pub fn base_value(field: usize, n: usize) -> Self {
        JetVar::new(field, MultiIndex::zero(n))
    }

    pub fn order(&self) -> u32 {
        self.sigma.order()
    }

    /// `y^i_{σ+λ}`.
    pub fn raised(&self, lambda: usize) -> Self {
        JetVar::new(self.field, self.sigma.raised(lambda))
    }
}

// Jet order first, then fiber index, then the multi-index.
impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then(self.field.cmp(&other.field))
            .then_with(|| self.sigma.cmp(&other.sigma))
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A coordinate designator: `x^λ` or `y^i_σ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Coord {
    Base(usize),
    Jet(JetVar),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ElemFn {
    Cos,
    Exp,
    Log,
    Sin,
    Sqrt,
}

impl ElemFn {
    pub fn name(self) -> &'static str {
        match self {
            ElemFn::Cos => "cos",
            ElemFn::Exp => "exp",
            ElemFn::Log => "log",
            ElemFn::Sin => "sin",
            ElemFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "cos" => ElemFn::Cos,
            "exp" => ElemFn::Exp,
            "log" => ElemFn::Log,
            "sin" => ElemFn::Sin,
            "sqrt" => ElemFn::Sqrt,
            _ => return None,
        })
    }
}

/// Application of a declared opaque function, possibly formally
/// differentiated: `partials[k]` counts derivatives in argument `k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OpaqueApp {
    pub name: Arc<str>,
    pub partials: Vec<u32>,
    pub args: Vec<Expr>,
}

impl OpaqueApp {
    pub fn new(name: impl Into<Arc<str>>, args: Vec<Expr>) -> Self {
        let partials = vec![0; args.len()];
        OpaqueApp {
            name: name.into(),
            partials,
            args,
        }
    }

    pub fn differentiated(&self, arg: usize) -> Self {
        let mut app = self.clone();
        app.partials[arg] += 1;
        app
    }
}

/// Polynomial generator. The declaration order fixes the atom order used for
/// printing: constants, base coordinates, jet coordinates, then functions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    Pi,
    Base(usize),
    Jet(JetVar),
    Apply(ElemFn, Arc<Expr>),
    Opaque(Arc<OpaqueApp>),
    /// `1/p` for a non-monomial `p` normalised to leading coefficient 1.
    Recip(Arc<Expr>),
}

/// Power product of atoms, sorted by atom, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, k)| *k as i64).sum()
    }

    fn single(atom: Atom, k: i32) -> Self {
        if k == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(atom, k)])
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let k = self.0[i].1 + other.0[j].1;
                    if k != 0 {
                        out.push((self.0[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// The monomial with the exponent of factor `idx` lowered by one.
    fn lowered(&self, idx: usize) -> Monomial {
        let mut out = self.0.clone();
        out[idx].1 -= 1;
        if out[idx].1 == 0 {
            out.remove(idx);
        }
        Monomial(out)
    }
}

/// Higher total degree first; within a degree, the monomial whose smallest
/// atom is smaller comes first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            for ((a, ka), (b, kb)) in self.0.iter().zip(&other.0) {
                let c = a.cmp(b).then(kb.cmp(ka));
                if c != Ordering::Equal {
                    return c;
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical symbolic expression.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn constant(c: BigRational) -> Self {
        Expr::monomial(Monomial::one(), c)
    }

    pub fn pi() -> Self {
        Expr::from_atom(Atom::Pi)
    }

    pub fn base(lambda: usize) -> Self {
        Expr::from_atom(Atom::Base(lambda))
    }

    pub fn jet(var: JetVar) -> Self {
        Expr::from_atom(Atom::Jet(var))
    }

    pub fn coord(c: &Coord) -> Self {
        match c {
            Coord::Base(l) => Expr::base(*l),
            Coord::Jet(v) => Expr::jet(v.clone()),
        }
    }

    /// `y^i`, the zero-order jet coordinate of field `i` in base dimension `n`.
    pub fn field(i: usize, n: usize) -> Self {
        Expr::jet(JetVar::base_value(i, n))
    }

    pub fn from_atom(atom: Atom) -> Self {
        Expr::atom_pow(atom, 1)
    }

    pub(crate) fn atom_pow(atom: Atom, k: i32) -> Self {
        Expr::monomial(Monomial::single(atom, k), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn opaque(app: OpaqueApp) -> Self {
        Expr::from_atom(Atom::Opaque(Arc::new(app)))
    }

    /// Elementary function application with folding of the trivial constant
    /// cases (`sin 0`, `cos 0`, `exp 0`, `log 1`, `sqrt 0`, `sqrt 1`).
    pub fn apply(f: ElemFn, arg: Expr) -> Self {
        if let Some(c) = arg.as_constant() {
            match f {
                ElemFn::Sin | ElemFn::Sqrt if c.is_zero() => return Expr::zero(),
                ElemFn::Cos | ElemFn::Exp if c.is_zero() => return Expr::one(),
                ElemFn::Log | ElemFn::Sqrt if c.is_one() => {
                    return if f == ElemFn::Log {
                        Expr::zero()
                    } else {
                        Expr::one()
                    }
                }
                _ => {}
            }
        }
        Expr::from_atom(Atom::Apply(f, Arc::new(arg)))
    }

    pub fn sin(arg: Expr) -> Self {
        Expr::apply(ElemFn::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Expr::apply(ElemFn::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::apply(ElemFn::Exp, arg)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value if the expression is constant (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Expr {
        self.scale(&BigRational::from_integer(BigInt::from(c)))
    }

    /// Multiplicative inverse. Monomials invert exactly; any other non-zero
    /// expression `c·p` (leading coefficient `c`) becomes `c⁻¹·Recip(p)`.
    pub fn inverse(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let mut out = Expr::constant(c.recip());
            for (atom, k) in &m.0 {
                let factor = match atom {
                    Atom::Recip(p) => p.pow_nonneg(*k as u32),
                    _ => Expr::atom_pow(atom.clone(), -k),
                };
                out = &out * &factor;
            }
            return Ok(out);
        }
        let lead = self.terms.values().next().unwrap().clone();
        let normalised = self.scale(&lead.recip());
        Ok(Expr::from_atom(Atom::Recip(Arc::new(normalised))).scale(&lead.recip()))
    }

    pub fn pow(&self, k: i32) -> Result<Expr, ExprError> {
        if k >= 0 {
            Ok(self.pow_nonneg(k as u32))
        } else {
            Ok(self.inverse()?.pow_nonneg(k.unsigned_abs()))
        }
    }

    fn pow_nonneg(&self, mut k: u32) -> Expr {
        let mut result = Expr::one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &other.inverse()?)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut acc = Expr::zero();
        for e in items {
            acc += &e;
        }
        acc
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Leading coefficient in canonical order, zero for the zero expression.
    pub fn leading_coefficient(&self) -> BigRational {
        self.terms
            .values()
            .next()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_negative_leading(&self) -> bool {
        self.leading_coefficient().is_negative()
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (a, e) in &m.0 {
                write!(f, "*{a:?}^{e}")?;
            }
        }
        Ok(())
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(n: usize) -> Expr {
        Expr::field(0, n)
    }

    fn yt() -> Expr {
        Expr::jet(JetVar::new(0, MultiIndex::new(vec![1])))
    }

    #[test]
    fn cancellation_to_zero() {
        let e = &(&y(1) * &yt()) + &(&yt() * &y(1)) - (&y(1) * &yt()).scale_int(2);
        assert!(e.is_zero());
    }

    #[test]
    fn collects_like_terms() {
        let x = Expr::base(0);
        let e = &(&y(1) + &y(1)) * &x;
        let expected = (&x * &y(1)).scale_int(2);
        assert_eq!(e, expected);
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn trig_identity_is_not_applied() {
        let s = Expr::sin(y(1));
        let c = Expr::cos(y(1));
        let e = &(&s * &s) + &(&c * &c);
        assert_eq!(e.len(), 2);
        assert!(!e.is_constant());
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        let z = &y(1) - &y(1);
        assert_eq!(z.inverse(), Err(ExprError::DivisionByZero));
        assert_eq!(Expr::one().div(&z), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn monomial_inverse_is_exact() {
        let m = (&y(1) * &yt()).scale_int(3);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Expr::one());
    }

    #[test]
    fn recip_normalises_leading_coefficient() {
        // 1/(2y + 2) = 1/2 * Recip(y + 1)
        let p = &y(1).scale_int(2) + &Expr::int(2);
        let inv = p.inverse().unwrap();
        let q = &y(1) + &Expr::one();
        assert_eq!(
            inv,
            q.inverse()
                .unwrap()
                .scale(&BigRational::new(1.into(), 2.into()))
        );
        // Recip(p)^-1 expands back to p.
        assert_eq!(inv.inverse().unwrap(), p);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let p = &y(1) + &Expr::one();
        let cube = p.pow(3).unwrap();
        assert_eq!(cube, &(&p * &p) * &p);
        assert_eq!(p.pow(0).unwrap(), Expr::one());
    }

    #[test]
    fn canonical_order_prints_degree_first() {
        // y^2 + 2y + 1 keeps highest degree first
        let p = (&y(1) + &Expr::one()).pow(2).unwrap();
        let degrees: Vec<i64> = p.terms().map(|(m, _)| m.degree()).collect();
        assert_eq!(degrees, vec![2, 1, 0]);
    }
}
