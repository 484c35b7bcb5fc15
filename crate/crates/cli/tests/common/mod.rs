//! Seeded random generators for jet expressions, fields and forms.

#![allow(dead_code)]

use jetvar::variational::{BilinearForm, FormIndex};
use jetvar::{Expr, JetContext, JetVar, MultiIndex, VerticalField};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Base context with `n` variables `x1…` and `m` fields `u1…`.
pub fn context(n: usize, m: usize) -> JetContext {
    let base: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
    let fields: Vec<String> = (1..=m).map(|k| format!("u{k}")).collect();
    JetContext::new(base, fields).unwrap()
}

/// Uniform multi-index of order at most `r` in `n` variables.
pub fn multi_index(rng: &mut ChaCha8Rng, n: usize, r: u32) -> MultiIndex {
    let order = rng.gen_range(0..=r);
    let mut counts = vec![0u32; n];
    for _ in 0..order {
        counts[rng.gen_range(0..n)] += 1;
    }
    MultiIndex::new(counts)
}

fn factor(rng: &mut ChaCha8Rng, n: usize, m: usize, r: u32) -> Expr {
    if rng.gen_bool(0.2) {
        Expr::base(rng.gen_range(0..n))
    } else {
        Expr::jet(JetVar::new(rng.gen_range(0..m), multi_index(rng, n, r)))
    }
}

fn coefficient(rng: &mut ChaCha8Rng) -> Expr {
    let num = loop {
        let k = rng.gen_range(-4i64..=4);
        if k != 0 {
            break k;
        }
    };
    Expr::ratio(num, rng.gen_range(1i64..=3))
}

/// Polynomial with 1 to `max_terms` monomials of 1 to 3 factors, each a base
/// variable or a jet coordinate of order at most `r`.
pub fn polynomial(rng: &mut ChaCha8Rng, n: usize, m: usize, r: u32, max_terms: usize) -> Expr {
    let terms = rng.gen_range(1..=max_terms);
    Expr::sum((0..terms).map(|_| {
        let k = rng.gen_range(1..=3);
        (0..k).fold(coefficient(rng), |acc, _| &acc * &factor(rng, n, m, r))
    }))
}

pub fn field(rng: &mut ChaCha8Rng, n: usize, m: usize, r: u32) -> VerticalField {
    VerticalField::new((0..m).map(|_| polynomial(rng, n, m, r, 3)).collect())
}

pub fn form(rng: &mut ChaCha8Rng, n: usize, m: usize, r: u32) -> BilinearForm {
    let mut a = BilinearForm::zero(n, m);
    for _ in 0..rng.gen_range(1..=5) {
        let index = FormIndex::new(
            rng.gen_range(0..m),
            rng.gen_range(0..m),
            multi_index(rng, n, r),
        );
        a.add(index, polynomial(rng, n, m, 2, 3));
    }
    a
}

/// Base-only smooth function `a + b·x + c·sin(k·x)` of the first variable
/// (per component), for compactly supported variations.
pub fn smooth_field(rng: &mut ChaCha8Rng, m: usize) -> VerticalField {
    let x = Expr::base(0);
    VerticalField::new(
        (0..m)
            .map(|_| {
                let a = Expr::ratio(rng.gen_range(-5..=5), 2);
                let b = &Expr::ratio(rng.gen_range(-5..=5), 3) * &x;
                let k = Expr::int(rng.gen_range(1..=3));
                let c = &Expr::ratio(rng.gen_range(-5..=5), 4) * &Expr::sin(&k * &x);
                &(&a + &b) + &c
            })
            .collect(),
    )
}
