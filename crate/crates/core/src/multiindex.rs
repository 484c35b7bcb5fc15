//! Symmetric multi-indices labelling jet coordinates and iterated total
//! derivatives.
//!
//! A multi-index stores how many times each base variable is differentiated,
//! so `y_{x1 x1 x2}` carries the counts `(2, 1)`. Partial derivatives commute,
//! which makes the count representation the only one needed.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultiIndexError {
    #[error("incompatible base spaces: dimension {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("multi-index {sub} is not contained in {sup}")]
    NotContained { sub: String, sup: String },
    #[error("base variable index {index} out of range for dimension {dim}")]
    OutOfRange { index: usize, dim: usize },
}

/// Derivative counts `(σ_1, …, σ_n)`, one entry per base variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    /// The zero multi-index in dimension `n`.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "base dimension must be at least 1");
        MultiIndex { counts: vec![0; n] }
    }

    pub fn new(counts: Vec<u32>) -> Self {
        assert!(!counts.is_empty(), "base dimension must be at least 1");
        MultiIndex { counts }
    }

    /// Unit multi-index `1_λ` selecting base variable `lambda`.
    pub fn unit(n: usize, lambda: usize) -> Self {
        let mut m = Self::zero(n);
        m.counts[lambda] = 1;
        m
    }

    /// Builds the multi-index from a list of base-variable indices,
    /// e.g. `[0, 0, 1]` gives `(2, 1)`.
    pub fn from_variables(n: usize, vars: &[usize]) -> Result<Self, MultiIndexError> {
        let mut m = Self::zero(n);
        for &v in vars {
            if v >= n {
                return Err(MultiIndexError::OutOfRange { index: v, dim: n });
            }
            m.counts[v] += 1;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, lambda: usize) -> u32 {
        self.counts[lambda]
    }

    /// `|σ| = σ_1 + … + σ_n`.
    pub fn order(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// `σ! = σ_1! ⋯ σ_n!`.
    pub fn factorial(&self) -> BigUint {
        self.counts
            .iter()
            .map(|&c| factorial(c))
            .fold(BigUint::one(), |acc, f| acc * f)
    }

    /// Componentwise sum `(σ, ρ)`.
    pub fn union(&self, other: &MultiIndex) -> Result<MultiIndex, MultiIndexError> {
        self.check_dim(other)?;
        Ok(MultiIndex {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `σ + 1_λ`.
    pub fn raised(&self, lambda: usize) -> MultiIndex {
        let mut m = self.clone();
        m.counts[lambda] += 1;
        m
    }

    /// True when `other ≤ self` componentwise.
    pub fn contains(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.counts.iter().zip(&other.counts).all(|(a, b)| a >= b)
    }

    /// `σ − ρ`, defined when `ρ ≤ σ`.
    pub fn difference(&self, other: &MultiIndex) -> Result<MultiIndex, MultiIndexError> {
        self.check_dim(other)?;
        if !self.contains(other) {
            return Err(MultiIndexError::NotContained {
                sub: format!("{other:?}"),
                sup: format!("{self:?}"),
            });
        }
        Ok(MultiIndex {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Multi-index binomial `(σ choose ρ) = Π_μ C(σ_μ, ρ_μ)`; zero when `ρ ≰ σ`.
    pub fn binomial(&self, rho: &MultiIndex) -> BigUint {
        if !self.contains(rho) {
            return BigUint::from(0u32);
        }
        self.counts
            .iter()
            .zip(&rho.counts)
            .map(|(&s, &r)| binomial(s, r))
            .fold(BigUint::one(), |acc, b| acc * b)
    }

    /// All `ρ` with `ρ ≤ σ` componentwise, in graded-lex order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (lambda, &c) in self.counts.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for base in &out {
                for k in 0..=c {
                    let mut m = base.clone();
                    m.counts[lambda] = k;
                    next.push(m);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Sequence of base-variable indices realising this multi-index,
    /// e.g. `(2, 1)` gives `[0, 0, 1]`.
    pub fn variables(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(lambda, &c)| std::iter::repeat_n(lambda, c as usize))
            .collect()
    }

    /// Renders `σ` as a juxtaposition of base names, `"x1 x1 x2"` for `(2, 1)`.
    pub fn render<S: AsRef<str>>(&self, names: &[S], sep: &str) -> String {
        self.variables()
            .into_iter()
            .map(|v| names[v].as_ref())
            .collect::<Vec<_>>()
            .join(sep)
    }

    fn check_dim(&self, other: &MultiIndex) -> Result<(), MultiIndexError> {
        if self.dim() != other.dim() {
            return Err(MultiIndexError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Graded-lex: lower order first, then the index that differentiates earlier
/// base variables more often, so `(2,0) < (1,1) < (0,2)`.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.counts.cmp(&self.counts))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.counts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of dimension `n` with exactly order `k`, graded-lex.
pub fn enumerate_exact(n: usize, k: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "base dimension must be at least 1");
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fill(&mut counts, 0, k, &mut out);
    out
}

// Emits compositions of `rest` into counts[pos..] with earlier slots largest first.
fn fill(counts: &mut Vec<u32>, pos: usize, rest: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == counts.len() {
        counts[pos] = rest;
        out.push(MultiIndex::new(counts.clone()));
        return;
    }
    for c in (0..=rest).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, rest - c, out);
    }
    counts[pos] = 0;
}

/// All multi-indices of dimension `n` with order at most `k`, graded-lex,
/// `C(n + k, k)` of them.
pub fn enumerate_up_to(n: usize, k: u32) -> Vec<MultiIndex> {
    (0..=k).flat_map(|d| enumerate_exact(n, d)).collect()
}

pub(crate) fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub(crate) fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn mi(c: &[u32]) -> MultiIndex {
        MultiIndex::new(c.to_vec())
    }

    #[test]
    fn order_examples() {
        assert_eq!(mi(&[0, 0]).order(), 0);
        assert_eq!(mi(&[2, 1]).order(), 3);
        assert_eq!(mi(&[5, 0, 3]).order(), 8);
    }

    #[test]
    fn union_examples() {
        assert_eq!(mi(&[1, 0]).union(&mi(&[0, 1])).unwrap(), mi(&[1, 1]));
        assert_eq!(mi(&[2, 1]).union(&mi(&[1, 1])).unwrap(), mi(&[3, 2]));
        let s = mi(&[4, 2]);
        assert_eq!(s.union(&MultiIndex::zero(2)).unwrap(), s);
        assert_eq!(
            mi(&[1]).union(&mi(&[1, 0])),
            Err(MultiIndexError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(mi(&[0, 0]).factorial(), BigUint::from(1u32));
        assert_eq!(mi(&[3, 2]).factorial(), BigUint::from(12u32));
        assert_eq!(mi(&[1, 1, 1]).factorial(), BigUint::from(1u32));
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_up_to(1, 2), vec![mi(&[0]), mi(&[1]), mi(&[2])]);
        assert_eq!(
            enumerate_up_to(2, 1),
            vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]
        );
        assert_eq!(enumerate_up_to(2, 2).len(), 6);
    }

    // Brute force: every count vector in [0, k]^n filtered by order.
    fn brute_force(n: usize, k: u32) -> BTreeSet<Vec<u32>> {
        let mut all = BTreeSet::new();
        let total = (k as usize + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push((c % (k as usize + 1)) as u32);
                c /= k as usize + 1;
            }
            if v.iter().sum::<u32>() <= k {
                all.insert(v);
            }
        }
        all
    }

    #[test]
    fn enumeration_matches_brute_force_and_binomial_count() {
        for n in 1..=6usize {
            for k in 0..=6u32 {
                let listed = enumerate_up_to(n, k);
                let set: BTreeSet<Vec<u32>> = listed.iter().map(|m| m.counts().to_vec()).collect();
                assert_eq!(set.len(), listed.len(), "duplicates for n={n} k={k}");
                assert_eq!(set, brute_force(n, k));
                assert_eq!(
                    BigUint::from(listed.len()),
                    binomial(n as u32 + k, k),
                    "count for n={n} k={k}"
                );
                assert!(
                    listed.windows(2).all(|w| w[0] < w[1]),
                    "not graded-lex sorted"
                );
            }
        }
    }

    #[test]
    fn graded_lex_order() {
        let v = enumerate_exact(2, 2);
        assert_eq!(v, vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]);
    }

    #[test]
    fn binomial_and_sub_indices() {
        let s = mi(&[2, 1]);
        assert_eq!(s.binomial(&mi(&[1, 1])), BigUint::from(2u32));
        assert_eq!(s.binomial(&mi(&[0, 2])), BigUint::from(0u32));
        assert_eq!(s.sub_indices().len(), 6);
        assert_eq!(s.difference(&mi(&[1, 0])).unwrap(), mi(&[1, 1]));
        assert!(s.difference(&mi(&[3, 0])).is_err());
    }

    #[test]
    fn render_names() {
        assert_eq!(mi(&[2, 1]).render(&["x1", "x2"], " "), "x1 x1 x2");
        assert_eq!(mi(&[0, 0]).render(&["x1", "x2"], " "), "");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb(n: usize) -> impl Strategy<Value = MultiIndex> {
            proptest::collection::vec(0u32..6, n).prop_map(MultiIndex::new)
        }

        proptest! {
            #[test]
            fn union_laws((a, b, c) in (1usize..4).prop_flat_map(|n| (arb(n), arb(n), arb(n)))) {
                prop_assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
                prop_assert_eq!(
                    a.union(&b).unwrap().union(&c).unwrap(),
                    a.union(&b.union(&c).unwrap()).unwrap()
                );
                prop_assert_eq!(a.union(&MultiIndex::zero(a.dim())).unwrap(), a.clone());
                prop_assert_eq!(a.union(&b).unwrap().order(), a.order() + b.order());
            }
        }
    }
}
