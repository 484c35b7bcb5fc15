//! Contact calculus on jet spaces: total derivatives, prolongation of
//! vertical vector fields, horizontal and vertical differentials of functions.

use std::collections::BTreeMap;

use crate::expr::{Coord, Expr, JetContext, JetVar};
use crate::multiindex::{enumerate_up_to, MultiIndex};

/// Total derivative `D_λ e = ∂_λ e + y^j_{σ+λ} ∂^σ_j e`.
///
/// Realised as the derivation sending `x^μ ↦ δ^μ_λ` and `y^j_σ ↦ y^j_{σ+λ}`;
/// the chain rule through functions supplies the sum over every occurring
/// jet coordinate.
pub fn total_derivative(e: &Expr, lambda: usize) -> Expr {
    e.derivation(&|c: &Coord| match c {
        Coord::Base(mu) if *mu == lambda => Expr::one(),
        Coord::Base(_) => Expr::zero(),
        Coord::Jet(v) => Expr::jet(v.raised(lambda)),
    })
}

/// Iterated total derivative `D_σ`; `D_0` is the identity.
pub fn total_derivative_multi(e: &Expr, sigma: &MultiIndex) -> Expr {
    sigma
        .variables()
        .into_iter()
        .fold(e.clone(), |acc, lambda| total_derivative(&acc, lambda))
}

/// Total divergence `D_λ J^λ` of a current with `n` components.
pub fn divergence(current: &[Expr]) -> Expr {
    Expr::sum(
        current
            .iter()
            .enumerate()
            .map(|(lambda, j)| total_derivative(j, lambda)),
    )
}

/// Vertical vector field `ξ = ξ^i ∂_i`. Components may depend on jet
/// coordinates of any order (generalised fields).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalField {
    components: Vec<Expr>,
}

impl VerticalField {
    pub fn new(components: Vec<Expr>) -> Self {
        VerticalField { components }
    }

    /// Coordinate field `∂_{y^i}` in a context with `m` fields.
    pub fn coordinate(i: usize, m: usize) -> Self {
        let mut components = vec![Expr::zero(); m];
        components[i] = Expr::one();
        VerticalField { components }
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

    /// Multiplies every component by `f`.
    pub fn scaled(&self, f: &Expr) -> Self {
        VerticalField::new(self.components.iter().map(|c| c * f).collect())
    }
}

/// `j_r ξ = D_σ ξ^i ∂^σ_i` for `|σ| ≤ r`, keyed by the jet coordinate `y^i_σ`.
pub fn prolong(ctx: &JetContext, xi: &VerticalField, r: u32) -> BTreeMap<JetVar, Expr> {
    let mut out = BTreeMap::new();
    for (i, comp) in xi.components().iter().enumerate() {
        for sigma in enumerate_up_to(ctx.n(), r) {
            let d = total_derivative_multi(comp, &sigma);
            out.insert(JetVar::new(i, sigma), d);
        }
    }
    out
}

/// Coefficients of `d_H f = D_λ f d^λ`.
pub fn d_h(ctx: &JetContext, f: &Expr) -> Vec<Expr> {
    (0..ctx.n())
        .map(|lambda| total_derivative(f, lambda))
        .collect()
}

/// Non-zero coefficients of `d_V f = ∂^σ_i f ω^i_σ`.
pub fn d_v(f: &Expr) -> BTreeMap<JetVar, Expr> {
    f.jet_vars()
        .into_iter()
        .filter_map(|v| {
            let d = f.partial_jet(&v);
            (!d.is_zero()).then_some((v, d))
        })
        .collect()
}
