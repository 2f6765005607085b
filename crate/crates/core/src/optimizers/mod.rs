//! Gradient descent, projected gradient descent, BFGS and L-BFGS.
//!
//! Gradients passed around here are Riesz representers in the chosen
//! [`Metric`]: `df(x)[v] = <g, v>_W`. Norms, stopping tests and quasi-Newton
//! updates all use that same inner product.

mod bfgs;
mod gd;
mod lbfgs;
mod line_search;
mod metric;

pub use bfgs::bfgs;
pub use gd::{armijo_gd, projected_gd, StopRule};
pub use lbfgs::lbfgs;
pub use line_search::{armijo_backtrack, wolfe_search, LineSearchConfig};
pub use metric::Metric;

use crate::error::Result;

/// A differentiable objective. `value_grad` returns the value alongside the gradient.
pub trait Problem {
    fn value(&mut self, x: &[f64]) -> Result<f64>;
    fn value_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Adapts a pair of plain closures into a [`Problem`].
pub struct FnProblem<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> Problem for FnProblem<F, G>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn value_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok(((self.f)(x), (self.g)(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIter,
    LineSearchFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIter => "max_iter",
            Termination::LineSearchFailure => "line_search_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    pub iterations: usize,
    pub objective_evals: usize,
    pub gradient_evals: usize,
    pub final_value: f64,
    pub final_grad_norm: f64,
    pub termination: Termination,
}

/// Wraps a problem and counts calls. A `value_grad` call counts as one
/// objective evaluation and one gradient evaluation.
pub(crate) struct Counted<'a, P: ?Sized> {
    inner: &'a mut P,
    pub objective_evals: usize,
    pub gradient_evals: usize,
}

impl<'a, P: Problem + ?Sized> Counted<'a, P> {
    pub fn new(inner: &'a mut P) -> Self {
        Self {
            inner,
            objective_evals: 0,
            gradient_evals: 0,
        }
    }

    pub fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.objective_evals += 1;
        self.inner.value(x)
    }

    pub fn value_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.objective_evals += 1;
        self.gradient_evals += 1;
        self.inner.value_grad(x)
    }

    pub fn report(
        &self,
        iterations: usize,
        value: f64,
        grad_norm: f64,
        termination: Termination,
    ) -> OptimizerReport {
        OptimizerReport {
            iterations,
            objective_evals: self.objective_evals,
            gradient_evals: self.gradient_evals,
            final_value: value,
            final_grad_norm: grad_norm,
            termination,
        }
    }
}

pub(crate) fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
