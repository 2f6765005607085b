use super::line_search::armijo_inner;
use super::{Counted, LineSearchConfig, Metric, OptimizerReport, Problem, Termination};
use crate::error::Result;

/// Stopping test for (projected) gradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// `|<x, g>_W| < tol`, checked from the first iteration on.
    InnerProduct,
    /// `||g||_W < tol`.
    GradientNorm,
    /// `||x - P(x - g)||_W < tol`.
    ProjectedStep,
    /// For `x = (z, t)` with `z = x[..n_control]`: `|<z, g_z>_W| < tol` and the
    /// projected step restricted to `t` below `tol`. Assumes `W` is block diagonal.
    ControlInnerProduct { n_control: usize },
}

/// Gradient descent with Armijo backtracking, stopping on `|<x, grad f>_W| < tol`.
pub fn armijo_gd<P: Problem + ?Sized>(
    problem: &mut P,
    x0: &[f64],
    tol: f64,
    metric: &Metric,
    ls: &LineSearchConfig,
    max_iter: usize,
) -> Result<(Vec<f64>, OptimizerReport)> {
    projected_gd(
        problem,
        &|_: &mut Vec<f64>| {},
        x0,
        tol,
        StopRule::InnerProduct,
        metric,
        ls,
        max_iter,
    )
}

/// Projected gradient descent: trial points `P(x - s g)` with Armijo backtracking.
/// Each search starts from `step_growth` times the last accepted step.
#[allow(clippy::too_many_arguments)]
pub fn projected_gd<P, Proj>(
    problem: &mut P,
    project: &Proj,
    x0: &[f64],
    tol: f64,
    rule: StopRule,
    metric: &Metric,
    ls: &LineSearchConfig,
    max_iter: usize,
) -> Result<(Vec<f64>, OptimizerReport)>
where
    P: Problem + ?Sized,
    Proj: Fn(&mut Vec<f64>),
{
    ls.validate()?;
    let mut counted = Counted::new(problem);
    let mut x = x0.to_vec();
    project(&mut x);
    let (mut fx, mut g) = counted.value_grad(&x)?;
    let mut step = ls.initial_step;
    let mut iter = 0;
    loop {
        let gnorm = metric.norm(&g);
        let converged = gnorm == 0.0
            || match rule {
                StopRule::InnerProduct => iter > 0 && metric.dot(&x, &g).abs() < tol,
                StopRule::GradientNorm => gnorm < tol,
                StopRule::ProjectedStep => {
                    let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
                    project(&mut y);
                    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                    metric.norm(&diff) < tol
                }
                StopRule::ControlInnerProduct { n_control } => {
                    let n = n_control.min(x.len());
                    let mut xz = x.clone();
                    xz[n..].iter_mut().for_each(|v| *v = 0.0);
                    let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
                    project(&mut y);
                    let mut diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                    diff[..n].iter_mut().for_each(|v| *v = 0.0);
                    iter > 0 && metric.dot(&xz, &g).abs() < tol && metric.norm(&diff) < tol
                }
            };
        if converged {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::Tolerance)));
        }
        if iter >= max_iter {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::MaxIter)));
        }
        let accepted = armijo_inner(&mut counted, metric, project, &x, fx, &g, step, ls)?;
        let Some(acc) = accepted else {
            return Ok((
                x,
                counted.report(iter, fx, gnorm, Termination::LineSearchFailure),
            ));
        };
        // A step that no longer moves the iterate cannot make progress.
        if acc.x == x {
            return Ok((
                x,
                counted.report(iter, fx, gnorm, Termination::LineSearchFailure),
            ));
        }
        step = acc.step * ls.step_growth;
        x = acc.x;
        let (f_new, g_new) = counted.value_grad(&x)?;
        fx = f_new;
        g = g_new;
        iter += 1;
    }
}
