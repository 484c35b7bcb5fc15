//! Gauss–Legendre rules and their tensor products over boxes.

use rayon::prelude::*;

/// Nodes (ascending) and weights of the `n`-point rule on `[-1, 1]`, by
/// Newton iteration on `P_n` from Tricomi's initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Tensor-product rule with `n` nodes per axis over an axis-aligned box.
#[derive(Debug, Clone)]
pub struct TensorRule {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TensorRule {
    pub fn new(bounds: &[(f64, f64)], n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = vec![Vec::with_capacity(bounds.len())];
        let mut weights = vec![1.0];
        for &(a, b) in bounds {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut next_points = Vec::with_capacity(points.len() * n);
            let mut next_weights = Vec::with_capacity(points.len() * n);
            for (p, pw) in points.iter().zip(&weights) {
                for (xi, wi) in x.iter().zip(&w) {
                    let mut q = p.clone();
                    q.push(mid + half * xi);
                    next_points.push(q);
                    next_weights.push(pw * wi * half);
                }
            }
            points = next_points;
            weights = next_weights;
        }
        TensorRule { points, weights }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Evaluates `f` at every node (in parallel) and returns the values in
    /// node order.
    pub fn map<E: Send>(&self, f: impl Fn(&[f64]) -> Result<f64, E> + Sync) -> Result<Vec<f64>, E> {
        self.points.par_iter().map(|p| f(p)).collect()
    }

    /// `Σ w_k f(x_k)`, summed in node order so results are reproducible.
    pub fn integrate<E: Send>(
        &self,
        f: impl Fn(&[f64]) -> Result<f64, E> + Sync,
    ) -> Result<f64, E> {
        let values = self.map(f)?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}
