//! Numerical oracle: jet expressions along prolonged closed-form sections,
//! action integrals by Gauss–Legendre quadrature, and variations of the
//! action computed literally as finite differences along flows.

pub mod quadrature;

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{CompiledExpr, Coord, EvalError, Expr, ExprError, JetContext, JetVar};
use crate::jetcalc::VerticalField;
use crate::textio::parse_rational;
use crate::variational::{
    contract, contract_source, euler_lagrange, jacobi, vertical_differential, Lagrangian,
    VariationalError,
};
use quadrature::TensorRule;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("expression has jet order {needed}, the section is prolonged to order {available}")]
    InsufficientOrder { needed: u32, available: u32 },
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("{0} must depend on base variables only")]
    NotBaseOnly(String),
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("only first and second variations are supported, got order {0}")]
    VariationOrder(usize),
    #[error("the section is not critical (residual {})", .0.residual)]
    NotCritical(Box<CriticalReport>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

/// Quadrature, finite-difference and acceptance parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericConfig {
    /// Gauss–Legendre nodes per axis.
    pub nodes: usize,
    /// Finite-difference step in the flow parameters.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Highest jet order available along a section.
    pub prolongation: u32,
    /// Combine steps `h` and `h/2` by Richardson extrapolation.
    pub richardson: bool,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            nodes: 64,
            step: 1e-3,
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            prolongation: 8,
            richardson: false,
        }
    }
}

impl NumericConfig {
    /// `|a − b| ≤ max(rel · max(|a|, |b|), abs)`.
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= (self.rel_tol * a.abs().max(b.abs())).max(self.abs_tol)
    }
}

/// Axis-aligned box with exact end points (so `π` stays symbolic in the
/// bump factor).
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    intervals: Vec<(Expr, Expr)>,
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(intervals: Vec<(Expr, Expr)>) -> Result<Self, NumericError> {
        let mut bounds = Vec::with_capacity(intervals.len());
        for (a, b) in &intervals {
            let (fa, fb) = (a.eval_constant()?, b.eval_constant()?);
            if fa.partial_cmp(&fb) != Some(std::cmp::Ordering::Less) {
                return Err(NumericError::Domain(format!("[{fa}, {fb}] is empty")));
            }
            bounds.push((fa, fb));
        }
        if intervals.is_empty() {
            return Err(NumericError::Domain("no intervals".into()));
        }
        Ok(Domain { intervals, bounds })
    }

    /// `[0, 1]^n`.
    pub fn unit(n: usize) -> Self {
        Domain::new(vec![(Expr::zero(), Expr::one()); n]).expect("unit box")
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(Expr, Expr)] {
        &self.intervals
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// `Π_λ ((x^λ − a_λ)(b_λ − x^λ))⁴ / ((b_λ − a_λ)/2)⁸`: peak 1 at the
    /// centre, vanishing to fourth order on the boundary.
    pub fn bump(&self) -> Expr {
        let mut out = Expr::one();
        for (l, (a, b)) in self.intervals.iter().enumerate() {
            let x = Expr::base(l);
            let factor = &(&x - a) * &(b - &x);
            let half = (b - a).scale(&BigRational::new(1.into(), 2.into()));
            let peak = half.pow(8).expect("non-negative power");
            let scaled = match peak.inverse() {
                Ok(inv) => &factor.pow(4).expect("non-negative power") * &inv,
                Err(_) => unreachable!("non-empty interval"),
            };
            out = &out * &scaled;
        }
        out
    }

    /// Multiplies every component of a base-only field by the bump factor.
    pub fn compactly_supported(&self, xi: &VerticalField) -> Result<VerticalField, NumericError> {
        if xi.components().iter().any(|c| !c.is_base_only()) {
            return Err(NumericError::NotBaseOnly("a variation field".into()));
        }
        Ok(xi.scaled(&self.bump()))
    }
}

/// Closed-form section `s` over a box with its quadrature rule. The
/// prolongation `(j_r s)^i_σ = ∂_σ s^i` is computed symbolically and
/// evaluated in double precision.
#[derive(Debug, Clone)]
pub struct NumericSection {
    n: usize,
    components: Vec<Expr>,
    domain: Domain,
    order: u32,
    rule: Arc<TensorRule>,
}

/// An expression compiled against a section: jet slots are filled from
/// compiled partial derivatives of the section components.
struct Pullback {
    expr: CompiledExpr,
    sources: Vec<Source>,
}

enum Source {
    Base(usize),
    Derivative(CompiledExpr),
}

impl Pullback {
    fn eval(&self, pt: &[f64]) -> Result<f64, EvalError> {
        let at = |c: &Coord| match c {
            Coord::Base(l) => pt.get(*l).copied(),
            Coord::Jet(_) => None,
        };
        let values = self
            .sources
            .iter()
            .map(|s| match s {
                Source::Base(l) => Ok(pt[*l]),
                Source::Derivative(c) => c.eval_with(&at),
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.expr.eval(&values)
    }
}

impl NumericSection {
    pub fn new(
        ctx: &JetContext,
        components: Vec<Expr>,
        domain: Domain,
        config: &NumericConfig,
    ) -> Result<Self, NumericError> {
        if components.len() != ctx.m() {
            return Err(NumericError::ComponentCount {
                expected: ctx.m(),
                got: components.len(),
            });
        }
        if domain.dim() != ctx.n() {
            return Err(NumericError::Domain(format!(
                "{} intervals for {} base variables",
                domain.dim(),
                ctx.n()
            )));
        }
        if components.iter().any(|c| !c.is_base_only()) {
            return Err(NumericError::NotBaseOnly("a section".into()));
        }
        let rule = Arc::new(TensorRule::new(domain.bounds(), config.nodes));
        Ok(NumericSection {
            n: ctx.n(),
            components,
            domain,
            order: config.prolongation,
            rule,
        })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rule(&self) -> &TensorRule {
        &self.rule
    }

    /// The same box and quadrature with other components.
    pub fn with_components(&self, components: Vec<Expr>) -> Result<Self, NumericError> {
        if components.len() != self.components.len() {
            return Err(NumericError::ComponentCount {
                expected: self.components.len(),
                got: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_base_only()) {
            return Err(NumericError::NotBaseOnly("a deformed section".into()));
        }
        Ok(NumericSection {
            components,
            ..self.clone()
        })
    }

    /// `∂_σ s^i` as a symbolic expression in the base variables.
    pub fn prolongation(&self, v: &JetVar) -> Result<Expr, NumericError> {
        if v.order() > self.order {
            return Err(NumericError::InsufficientOrder {
                needed: v.order(),
                available: self.order,
            });
        }
        let mut out = self.components[v.field].clone();
        for l in v.sigma.variables() {
            out = out.partial(&Coord::Base(l));
        }
        Ok(out)
    }

    /// `e ∘ j s` as an expression in the base variables.
    pub fn pull_back(&self, e: &Expr) -> Result<Expr, NumericError> {
        self.check_order(e)?;
        let mut table = std::collections::HashMap::new();
        for v in e.jet_vars() {
            table.insert(Coord::Jet(v.clone()), self.prolongation(&v)?);
        }
        Ok(e.substitute_map(&table)?)
    }

    fn check_order(&self, e: &Expr) -> Result<(), NumericError> {
        let needed = e.jet_order();
        if needed > self.order {
            return Err(NumericError::InsufficientOrder {
                needed,
                available: self.order,
            });
        }
        Ok(())
    }

    fn compile(&self, e: &Expr) -> Result<Pullback, NumericError> {
        self.check_order(e)?;
        let expr = CompiledExpr::new(e)?;
        let sources = expr
            .slots()
            .iter()
            .map(|c| match c {
                Coord::Base(l) => Ok(Source::Base(*l)),
                Coord::Jet(v) => Ok(Source::Derivative(CompiledExpr::new(
                    &self.prolongation(v)?,
                )?)),
            })
            .collect::<Result<Vec<_>, NumericError>>()?;
        Ok(Pullback { expr, sources })
    }

    /// Value of `e` along the prolonged section at `pt`.
    pub fn eval(&self, e: &Expr, pt: &[f64]) -> Result<f64, NumericError> {
        assert_eq!(pt.len(), self.n, "one coordinate per base variable");
        Ok(self.compile(e)?.eval(pt)?)
    }

    /// `∫_U e ∘ j s` by the tensor Gauss–Legendre rule.
    pub fn integrate(&self, e: &Expr) -> Result<f64, NumericError> {
        let p = self.compile(e)?;
        Ok(self.rule.integrate(|pt| p.eval(pt))?)
    }

    /// Largest `|e ∘ j s|` over the quadrature nodes.
    pub fn max_abs(&self, e: &Expr) -> Result<f64, NumericError> {
        let p = self.compile(e)?;
        let values = self.rule.map(|pt| p.eval(pt))?;
        Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// Value of `e` along the prolonged section at `pt`.
pub fn eval_on_section(e: &Expr, s: &NumericSection, pt: &[f64]) -> Result<f64, NumericError> {
    s.eval(e, pt)
}

/// Action `∫_U (j_r s)^* λ`.
pub fn action(lagrangian: &Lagrangian, s: &NumericSection) -> Result<f64, NumericError> {
    s.integrate(lagrangian.density())
}

/// One-parameter family of sections through `s` at `t = 0`, generated by a
/// vertical field.
pub trait Flow: Send + Sync {
    /// Components of `ψ_t ∘ s`.
    fn deform(&self, components: &[Expr], t: &BigRational) -> Result<Vec<Expr>, NumericError>;

    /// The generating vertical field.
    fn generator(&self) -> &VerticalField;
}

/// `s ↦ s + t·ξ` for a field depending on base variables only.
#[derive(Debug, Clone)]
pub struct LinearShift {
    field: VerticalField,
}

impl LinearShift {
    pub fn new(field: VerticalField) -> Result<Self, NumericError> {
        if field.components().iter().any(|c| !c.is_base_only()) {
            return Err(NumericError::NotBaseOnly(
                "a linear shift (use a custom flow for fiber-dependent fields)".into(),
            ));
        }
        Ok(LinearShift { field })
    }
}

impl Flow for LinearShift {
    fn deform(&self, components: &[Expr], t: &BigRational) -> Result<Vec<Expr>, NumericError> {
        Ok(components
            .iter()
            .zip(self.field.components())
            .map(|(s, x)| s + &x.scale(t))
            .collect())
    }

    fn generator(&self) -> &VerticalField {
        &self.field
    }
}

/// Flows `ψ^1, …, ψ^i` and the finite-difference step.
pub struct VariationConfig {
    pub flows: Vec<Box<dyn Flow>>,
    pub step: f64,
    pub richardson: bool,
}

impl VariationConfig {
    /// Linear shifts along the given base-only fields, each multiplied by
    /// the bump factor of `domain`.
    pub fn linear(
        fields: &[VerticalField],
        domain: &Domain,
        config: &NumericConfig,
    ) -> Result<Self, NumericError> {
        let flows = fields
            .iter()
            .map(|f| {
                Ok(Box::new(LinearShift::new(domain.compactly_supported(f)?)?) as Box<dyn Flow>)
            })
            .collect::<Result<Vec<_>, NumericError>>()?;
        Ok(VariationConfig {
            flows,
            step: config.step,
            richardson: config.richardson,
        })
    }

    /// Generating fields, in flow order.
    pub fn generators(&self) -> Vec<VerticalField> {
        self.flows.iter().map(|f| f.generator().clone()).collect()
    }
}

fn exact_step(h: f64) -> BigRational {
    parse_rational(&format!("{h:e}"))
        .or_else(|| BigRational::from_float(h))
        .expect("finite step")
}

fn deformed_action(
    lagrangian: &Lagrangian,
    s: &NumericSection,
    flows: &[Box<dyn Flow>],
    ts: &[BigRational],
) -> Result<f64, NumericError> {
    let mut comps = s.components().to_vec();
    for (flow, t) in flows.iter().zip(ts) {
        comps = flow.deform(&comps, t)?;
    }
    action(lagrangian, &s.with_components(comps)?)
}

fn central_difference(
    lagrangian: &Lagrangian,
    s: &NumericSection,
    flows: &[Box<dyn Flow>],
    h: f64,
) -> Result<f64, NumericError> {
    let t = exact_step(h);
    let hf = num_traits::ToPrimitive::to_f64(&t).expect("finite");
    let a = |ts: &[BigRational]| deformed_action(lagrangian, s, flows, ts);
    match flows.len() {
        1 => Ok((a(std::slice::from_ref(&t))? - a(&[-t.clone()])?) / (2.0 * hf)),
        2 => {
            let (p, m) = (t.clone(), -t);
            let pp = a(&[p.clone(), p.clone()])?;
            let pm = a(&[p.clone(), m.clone()])?;
            let mp = a(&[m.clone(), p])?;
            let mm = a(&[m.clone(), m])?;
            Ok((pp - pm - mp + mm) / (4.0 * hf * hf))
        }
        k => Err(NumericError::VariationOrder(k)),
    }
}

/// `∂^i/∂t_1…∂t_i A(ψ^i_{t_i} ∘ … ∘ ψ^1_{t_1} ∘ s)` at `t = 0` by central
/// differences, for `i ∈ {1, 2}`.
pub fn finite_diff_variation(
    lagrangian: &Lagrangian,
    s: &NumericSection,
    vc: &VariationConfig,
    order: usize,
) -> Result<f64, NumericError> {
    if !(1..=2).contains(&order) || vc.flows.len() < order {
        return Err(NumericError::VariationOrder(order));
    }
    let flows = &vc.flows[..order];
    let d = central_difference(lagrangian, s, flows, vc.step)?;
    if !vc.richardson {
        return Ok(d);
    }
    let d2 = central_difference(lagrangian, s, flows, vc.step / 2.0)?;
    Ok((4.0 * d2 - d) / 3.0)
}

/// Residual of the Euler–Lagrange expressions along a section.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport {
    /// `max_i max_nodes |e_i ∘ j s|`.
    pub residual: f64,
    pub per_component: Vec<f64>,
    pub critical: bool,
}

pub fn check_critical(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    s: &NumericSection,
    config: &NumericConfig,
) -> Result<CriticalReport, NumericError> {
    let e = euler_lagrange(ctx, lagrangian);
    let per_component = e
        .components()
        .iter()
        .map(|c| s.max_abs(c))
        .collect::<Result<Vec<_>, _>>()?;
    let residual = per_component.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(CriticalReport {
        critical: residual <= config.abs_tol,
        residual,
        per_component,
    })
}

/// Integrated contractions `ξ₁ ⌋ jξ₂ ⌋ VE(λ)` and `ξ₂ ⌋ jξ₁ ⌋ VE(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    /// Largest pointwise difference of the two integrands over the nodes;
    /// reported for inspection, it need not vanish.
    pub pointwise: f64,
    pub symmetric: bool,
}

/// On a critical section, compares both orders of contraction of the
/// vertical differential with compactly supported fields. The fields are
/// used as given; combine them with [`Domain::compactly_supported`] first.
pub fn check_onshell_symmetry(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    s: &NumericSection,
    xi1: &VerticalField,
    xi2: &VerticalField,
    config: &NumericConfig,
) -> Result<SymmetryReport, NumericError> {
    let report = check_critical(ctx, lagrangian, s, config)?;
    if !report.critical {
        return Err(NumericError::NotCritical(Box::new(report)));
    }
    let v = vertical_differential(ctx, lagrangian);
    let a = contract(xi1, xi2, &v);
    let b = contract(xi2, xi1, &v);
    let lhs = s.integrate(&a)?;
    let rhs = s.integrate(&b)?;
    let pointwise = s.max_abs(&(&a - &b))?;
    Ok(SymmetryReport {
        lhs,
        rhs,
        difference: lhs - rhs,
        pointwise,
        symmetric: config.close(lhs, rhs),
    })
}

/// Second variation by finite differences against the integrated
/// contractions with `VE(λ)` and with the Jacobi morphism `VE(λ)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondVariationReport {
    pub finite_difference: f64,
    pub vertical_differential: f64,
    pub jacobi: f64,
    pub agrees: bool,
}

pub fn check_second_variation(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    s: &NumericSection,
    vc: &VariationConfig,
    config: &NumericConfig,
) -> Result<SecondVariationReport, NumericError> {
    let report = check_critical(ctx, lagrangian, s, config)?;
    if !report.critical {
        return Err(NumericError::NotCritical(Box::new(report)));
    }
    let fd = finite_diff_variation(lagrangian, s, vc, 2)?;
    let fields = vc.generators();
    let v = s.integrate(&contract(
        &fields[0],
        &fields[1],
        &vertical_differential(ctx, lagrangian),
    ))?;
    let j = s.integrate(&contract(&fields[0], &fields[1], &jacobi(ctx, lagrangian)))?;
    Ok(SecondVariationReport {
        finite_difference: fd,
        vertical_differential: v,
        jacobi: j,
        agrees: config.close(fd, v) && config.close(fd, j),
    })
}

/// First variation by finite differences against `∫ ξ ⌋ E(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstVariationReport {
    pub finite_difference: f64,
    pub symbolic: f64,
    pub agrees: bool,
}

pub fn check_first_variation(
    ctx: &JetContext,
    lagrangian: &Lagrangian,
    s: &NumericSection,
    vc: &VariationConfig,
    config: &NumericConfig,
) -> Result<FirstVariationReport, NumericError> {
    let fd = finite_diff_variation(lagrangian, s, vc, 1)?;
    let xi = vc.flows[0].generator();
    let symbolic = s.integrate(&contract_source(xi, &euler_lagrange(ctx, lagrangian)))?;
    Ok(FirstVariationReport {
        finite_difference: fd,
        symbolic,
        agrees: config.close(fd, symbolic),
    })
}
