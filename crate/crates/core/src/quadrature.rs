//! Quadrature rules: composite trapezoid on a uniform grid and Gauss–Legendre.

use crate::error::{check_len, Error, Result};
use crate::mesh::Grid1D;

/// A one-dimensional quadrature rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite trapezoidal rule of nodal values on `grid`.
pub fn trapezoid_integrate(f_values: &[f64], grid: &Grid1D) -> Result<f64> {
    check_len(grid.n_nodes(), f_values.len())?;
    let h = grid.h();
    Ok(f_values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum())
}

/// Trapezoid weights for each node of `grid` (`h/2` at the ends, `h` inside).
pub fn trapezoid_weights(grid: &Grid1D) -> Vec<f64> {
    let h = grid.h();
    let n = grid.n_nodes();
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// `n`-point Gauss–Legendre rule mapped affinely onto `[a, b]`.
///
/// Nodes are the roots of `P_n`, found by Newton iteration from the
/// Chebyshev-like initial guess `cos(pi (i - 1/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("gauss_legendre needs n >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "gauss_legendre needs a < b, got [{a}, {b}]"
        )));
    }
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ref_nodes[i] = -x;
        ref_nodes[n - 1 - i] = x;
        ref_weights[i] = w;
        ref_weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: ref_nodes.iter().map(|&x| mid + half * x).collect(),
        weights: ref_weights.iter().map(|&w| half * w).collect(),
        interval: (a, b),
    })
}

/// Three-term recurrence for `P_n(x)` and `P_n'(x)`.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
