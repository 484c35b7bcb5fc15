//! Euler–Lagrange, Helmholtz and Jacobi morphisms, formal adjoints and
//! iterated quotient variations.
//!
//! Bilinear forms `A^σ_{ij} ω^i_σ ⊗ ω^j` act on pairs of vertical fields by
//! `ξ₁ ⌋ jξ₂ ⌋ A = ξ₁^j D_σ(ξ₂^i) A^σ_{ij}`: the multi-index acts on the
//! second field, whose component index is the first of the pair `(i, j)`.
//! The first field enters undifferentiated.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Coord, Expr, ExprError, JetContext, JetVar};
use crate::jetcalc::{total_derivative_multi, VerticalField};
use crate::multiindex::{enumerate_up_to, MultiIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariationalError {
    #[error("at least one variation field is required")]
    NoFields,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("on-shell reduction did not terminate within {0} rounds")]
    NonTerminating(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Lagrangian `λ = L v_X`, stored by its density `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lagrangian {
    density: Expr,
}

impl Lagrangian {
    pub fn new(density: Expr) -> Self {
        Lagrangian { density }
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn order(&self) -> u32 {
        self.density.jet_order()
    }
}

/// Source form `e_i ω^i ∧ v_X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceForm {
    components: Vec<Expr>,
}

impl SourceForm {
    pub fn new(components: Vec<Expr>) -> Self {
        SourceForm { components }
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.components
            .iter()
            .map(Expr::jet_order)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}

/// Position `(i, j, σ)` of a component `A^σ_{ij}`: `i` is the differentiated
/// slot, `j` the undifferentiated one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormIndex {
    pub i: usize,
    pub j: usize,
    pub sigma: MultiIndex,
}

impl FormIndex {
    pub fn new(i: usize, j: usize, sigma: MultiIndex) -> Self {
        FormIndex { i, j, sigma }
    }
}

/// Finitely supported bilinear form `A^σ_{ij} ω^i_σ ⊗ ω^j ⊗ v_X`. Only
/// non-zero components are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearForm {
    n: usize,
    m: usize,
    entries: BTreeMap<FormIndex, Expr>,
}

impl BilinearForm {
    pub fn zero(n: usize, m: usize) -> Self {
        BilinearForm {
            n,
            m,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Adds `value` to the component at `index`.
    pub fn add(&mut self, index: FormIndex, value: Expr) {
        debug_assert!(index.i < self.m && index.j < self.m && index.sigma.dim() == self.n);
        if value.is_zero() {
            return;
        }
        match self.entries.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &value;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn with(mut self, i: usize, j: usize, sigma: MultiIndex, value: Expr) -> Self {
        self.add(FormIndex::new(i, j, sigma), value);
        self
    }

    pub fn get(&self, i: usize, j: usize, sigma: &MultiIndex) -> Expr {
        self.entries
            .get(&FormIndex::new(i, j, sigma.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FormIndex, &Expr)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `|σ|` with a non-zero component.
    pub fn order(&self) -> u32 {
        self.entries
            .keys()
            .map(|k| k.sigma.order())
            .max()
            .unwrap_or(0)
    }

    pub fn sub(&self, other: &BilinearForm) -> BilinearForm {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add(k.clone(), -v);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> BilinearForm {
        let mut out = BilinearForm::zero(self.n, self.m);
        for (k, v) in &self.entries {
            out.add(k.clone(), v.scale(c));
        }
        out
    }

    fn from_entries(
        n: usize,
        m: usize,
        items: impl IntoIterator<Item = (FormIndex, Expr)>,
    ) -> Self {
        let mut out = BilinearForm::zero(n, m);
        for (k, v) in items {
            out.add(k, v);
        }
        out
    }
}

fn signed(e: Expr, order: u32) -> Expr {
    if order % 2 == 1 {
        -e
    } else {
        e
    }
}

fn big(c: num_bigint::BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(c))
}

/// `e_i = Σ_σ (−1)^{|σ|} D_σ(∂^σ_i L)`, summed over the coordinates of `L`.
pub fn euler_lagrange(ctx: &JetContext, lagrangian: &Lagrangian) -> SourceForm {
    let l = lagrangian.density();
    let vars: Vec<JetVar> = l.jet_vars().into_iter().collect();
    let components = (0..ctx.m())
        .into_par_iter()
        .map(|i| {
            Expr::sum(vars.iter().filter(|v| v.field == i).map(|v| {
                signed(
                    total_derivative_multi(&l.partial_jet(v), &v.sigma),
                    v.order(),
                )
            }))
        })
        .collect();
    SourceForm::new(components)
}

/// Linearisation of a source form: `V^σ_{ij} = ∂^σ_i e_j`, so that
/// `ξ₁ ⌋ jξ₂ ⌋ V = ξ₁^j D_σ(ξ₂^i) ∂^σ_i e_j`.
pub fn linearization(ctx: &JetContext, e: &SourceForm) -> BilinearForm {
    let entries: Vec<(FormIndex, Expr)> = e
        .components()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(j, ej)| {
            ej.jet_vars()
                .into_iter()
                .map(|v| {
                    (
                        FormIndex::new(v.field, j, v.sigma.clone()),
                        ej.partial_jet(&v),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    BilinearForm::from_entries(ctx.n(), ctx.m(), entries)
}

/// Vertical differential `VE(λ)` of the Euler–Lagrange morphism.
pub fn vertical_differential(ctx: &JetContext, lagrangian: &Lagrangian) -> BilinearForm {
    linearization(ctx, &euler_lagrange(ctx, lagrangian))
}

/// Jacobi morphism `VE(λ)*`.
pub fn jacobi(ctx: &JetContext, lagrangian: &Lagrangian) -> BilinearForm {
    adjoint(&vertical_differential(ctx, lagrangian))
}

/// Formal adjoint under integration by parts:
/// `A*^ρ_{ji} = Σ_{σ ⊇ ρ} (−1)^{|σ|} (σ choose ρ) D_{σ−ρ}(A^σ_{ij})`.
pub fn adjoint(a: &BilinearForm) -> BilinearForm {
    let entries: Vec<(FormIndex, Expr)> = a
        .entries
        .par_iter()
        .flat_map_iter(|(k, v)| {
            k.sigma
                .sub_indices()
                .into_iter()
                .map(|rho| {
                    let diff = k.sigma.difference(&rho).expect("sub-index");
                    let term = total_derivative_multi(v, &diff).scale(&big(k.sigma.binomial(&rho)));
                    (FormIndex::new(k.j, k.i, rho), signed(term, k.sigma.order()))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    BilinearForm::from_entries(a.n, a.m, entries)
}

/// Helmholtz form `H̃` of a source form:
/// `H^σ_{ij} = ∂^σ_i e_j − Σ_ρ (−1)^{|σ+ρ|} ((σ+ρ) choose ρ) D_ρ ∂^{σ+ρ}_j e_i`,
/// with `ρ` running while `|σ+ρ|` does not exceed the order of `e`.
pub fn helmholtz(ctx: &JetContext, e: &SourceForm) -> BilinearForm {
    let order = e.order();
    let (n, m) = (ctx.n(), ctx.m());
    let mut slots = Vec::new();
    for sigma in enumerate_up_to(n, order) {
        for i in 0..m {
            for j in 0..m {
                slots.push((i, j, sigma.clone()));
            }
        }
    }
    let entries: Vec<(FormIndex, Expr)> = slots
        .into_par_iter()
        .map(|(i, j, sigma)| {
            let mut h = e.component(j).partial_jet(&JetVar::new(i, sigma.clone()));
            for rho in enumerate_up_to(n, order - sigma.order()) {
                let tau = sigma.union(&rho).expect("same dimension");
                let inner = e.component(i).partial_jet(&JetVar::new(j, tau.clone()));
                if inner.is_zero() {
                    continue;
                }
                let term = total_derivative_multi(&inner, &rho).scale(&big(tau.binomial(&rho)));
                h = &h - &signed(term, tau.order());
            }
            (FormIndex::new(i, j, sigma), h)
        })
        .collect();
    BilinearForm::from_entries(n, m, entries)
}

/// `H̃` together with its skew part `½(H̃ − H̃*)` and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelmholtzReport {
    pub tilde: BilinearForm,
    pub skew: BilinearForm,
    pub locally_variational: bool,
}

impl HelmholtzReport {
    pub fn verdict(&self) -> &'static str {
        if self.locally_variational {
            "locally variational"
        } else {
            "not locally variational"
        }
    }
}

pub fn helmholtz_report(ctx: &JetContext, e: &SourceForm) -> HelmholtzReport {
    let tilde = helmholtz(ctx, e);
    let half = BigRational::new(1.into(), 2.into());
    let skew = tilde.sub(&adjoint(&tilde)).scale(&half);
    HelmholtzReport {
        locally_variational: tilde.is_zero(),
        tilde,
        skew,
    }
}

/// `ξ ⌋ e = ξ^i e_i`.
pub fn contract_source(xi: &VerticalField, e: &SourceForm) -> Expr {
    Expr::sum(
        xi.components()
            .iter()
            .zip(e.components())
            .map(|(x, c)| x * c),
    )
}

/// `ξ₁ ⌋ jξ₂ ⌋ A = ξ₁^j D_σ(ξ₂^i) A^σ_{ij}`.
pub fn contract(xi1: &VerticalField, xi2: &VerticalField, a: &BilinearForm) -> Expr {
    let mut prolonged: HashMap<(usize, &MultiIndex), Expr> = HashMap::new();
    let mut out = Expr::zero();
    for (k, v) in a.entries() {
        let left = xi1.component(k.j);
        if left.is_zero() {
            continue;
        }
        let right = prolonged
            .entry((k.i, &k.sigma))
            .or_insert_with(|| total_derivative_multi(xi2.component(k.i), &k.sigma));
        out += &(left * &*right) * v;
    }
    out
}

fn check_field(ctx: &JetContext, xi: &VerticalField) -> Result<(), VariationalError> {
    if xi.len() != ctx.m() {
        return Err(VariationalError::ComponentCount {
            expected: ctx.m(),
            got: xi.len(),
        });
    }
    Ok(())
}

/// `Ξ₁ ⌋ E(Ξ₂ ⌋ E(⋯ Ξ_k ⌋ E(λ)⋯))`.
pub fn quotient_variation(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    fields: &[VerticalField],
) -> Result<Lagrangian, VariationalError> {
    let (last, rest) = fields.split_last().ok_or(VariationalError::NoFields)?;
    for xi in fields {
        check_field(ctx, xi)?;
    }
    let mut density = contract_source(last, &euler_lagrange(ctx, lagrangian));
    for xi in rest.iter().rev() {
        density = contract_source(xi, &euler_lagrange(ctx, &Lagrangian::new(density)));
    }
    Ok(Lagrangian::new(density))
}

/// Hessian morphism `Ξ₁ ⌋ E(Ξ₂ ⌋ E(λ))`.
pub fn hessian(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    xi1: &VerticalField,
    xi2: &VerticalField,
) -> Result<Lagrangian, VariationalError> {
    quotient_variation(ctx, lagrangian, &[xi1.clone(), xi2.clone()])
}

/// Coefficients `c_{i,ρ}` of an element `Σ c_{i,ρ} D_ρ(e_i)` of the
/// differential ideal generated by a source form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdealCombination {
    terms: BTreeMap<(usize, MultiIndex), Expr>,
}

impl IdealCombination {
    fn add(&mut self, i: usize, rho: MultiIndex, c: Expr) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, rho)).or_insert_with(Expr::zero);
        *slot += &c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, MultiIndex), &Expr)> {
        self.terms.iter().filter(|(_, c)| !c.is_zero())
    }

    /// Reassembles `Σ c_{i,ρ} D_ρ(e_i)`.
    pub fn expand(&self, e: &SourceForm) -> Expr {
        Expr::sum(
            self.terms()
                .map(|((i, rho), c)| c * &total_derivative_multi(e.component(*i), rho)),
        )
    }
}

/// Split of the Hessian into a part vanishing on critical sections and the
/// Jacobi contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondVariationSplit {
    /// `(−1)^{|σ|} Ξ₁^j D_σ(∂^σ_j Ξ₂^i e_i)`.
    pub first: Expr,
    /// `(−1)^{|σ|} Ξ₁^j D_σ(Ξ₂^i ∂^σ_j e_i)`.
    pub second: Expr,
    /// `first` written as a combination of the `D_ρ(e_i)`.
    pub ideal: IdealCombination,
    pub euler_lagrange: SourceForm,
}

pub fn second_variation_decomposition(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    xi1: &VerticalField,
    xi2: &VerticalField,
) -> Result<SecondVariationSplit, VariationalError> {
    check_field(ctx, xi1)?;
    check_field(ctx, xi2)?;
    let e = euler_lagrange(ctx, lagrangian);
    let mut first = Expr::zero();
    let mut second = Expr::zero();
    let mut ideal = IdealCombination::default();
    for (j, left) in xi1.components().iter().enumerate() {
        if left.is_zero() {
            continue;
        }
        for (i, (x2, ei)) in xi2.components().iter().zip(e.components()).enumerate() {
            for v in x2.jet_vars().into_iter().filter(|v| v.field == j) {
                let a = x2.partial_jet(&v);
                let inner = total_derivative_multi(&(&a * ei), &v.sigma);
                first += &signed(left * &inner, v.order());
                for rho in v.sigma.sub_indices() {
                    let diff = v.sigma.difference(&rho).expect("sub-index");
                    let c = total_derivative_multi(&a, &diff).scale(&big(v.sigma.binomial(&rho)));
                    ideal.add(i, rho, signed(left * &c, v.order()));
                }
            }
            for v in ei.jet_vars().into_iter().filter(|v| v.field == j) {
                let inner = total_derivative_multi(&(x2 * &ei.partial_jet(&v)), &v.sigma);
                second += &signed(left * &inner, v.order());
            }
        }
    }
    Ok(SecondVariationSplit {
        first,
        second,
        ideal,
        euler_lagrange: e,
    })
}

const MAX_REDUCTION_DEPTH: usize = 64;

/// Critical-section relations solved for chosen jet coordinates, e.g.
/// `y_tt ↦ −y`, applied together with all their total-derivative
/// prolongations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OnShell {
    rules: Vec<(JetVar, Expr)>,
}

impl OnShell {
    pub fn new(rules: Vec<(JetVar, Expr)>) -> Self {
        OnShell { rules }
    }

    pub fn rules(&self) -> &[(JetVar, Expr)] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn rule_for(&self, v: &JetVar) -> Option<(&JetVar, &Expr)> {
        self.rules
            .iter()
            .find(|(lhs, _)| lhs.field == v.field && v.sigma.contains(&lhs.sigma))
            .map(|(l, r)| (l, r))
    }

    /// Replaces every `y^i_κ` with `κ ⊇ τ` for a rule `y^i_τ ↦ R` by
    /// `D_{κ−τ} R`, recursively, until no rule applies.
    pub fn reduce(&self, e: &Expr) -> Result<Expr, VariationalError> {
        let mut memo = HashMap::new();
        self.reduce_depth(e, 0, &mut memo)
    }

    fn reduce_depth(
        &self,
        e: &Expr,
        depth: usize,
        memo: &mut HashMap<JetVar, Expr>,
    ) -> Result<Expr, VariationalError> {
        if depth > MAX_REDUCTION_DEPTH {
            return Err(VariationalError::NonTerminating(MAX_REDUCTION_DEPTH));
        }
        let mut bindings = HashMap::new();
        for v in e.jet_vars() {
            if let Some(value) = memo.get(&v) {
                bindings.insert(Coord::Jet(v), value.clone());
                continue;
            }
            if let Some((lhs, rhs)) = self.rule_for(&v) {
                let diff = v.sigma.difference(&lhs.sigma).expect("contained");
                let value =
                    self.reduce_depth(&total_derivative_multi(rhs, &diff), depth + 1, memo)?;
                memo.insert(v.clone(), value.clone());
                bindings.insert(Coord::Jet(v), value);
            }
        }
        if bindings.is_empty() {
            return Ok(e.clone());
        }
        Ok(e.substitute_map(&bindings)?)
    }
}
