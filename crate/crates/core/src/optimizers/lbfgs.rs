use std::collections::VecDeque;

use super::line_search::wolfe_inner;
use super::{sub, Counted, LineSearchConfig, Metric, OptimizerReport, Problem, Termination};
use crate::error::{Error, Result};

/// Limited-memory BFGS (two-loop recursion in the metric `W`) with a strong
/// Wolfe line search and initial scaling `<s,y>/<y,y>` from the newest pair.
pub fn lbfgs<P: Problem + ?Sized>(
    problem: &mut P,
    x0: &[f64],
    gtol: f64,
    m: usize,
    metric: &Metric,
    ls: &LineSearchConfig,
    max_iter: usize,
) -> Result<(Vec<f64>, OptimizerReport)> {
    ls.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "history size must be positive".into(),
        ));
    }
    let mut counted = Counted::new(problem);
    let mut x = x0.to_vec();
    let (mut fx, mut g) = counted.value_grad(&x)?;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(m);
    let mut iter = 0;
    loop {
        let gnorm = metric.norm(&g);
        if gnorm < gtol {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::Tolerance)));
        }
        if iter >= max_iter {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::MaxIter)));
        }
        let mut d = two_loop(&hist, &g, metric);
        if !(metric.dot(&g, &d) < 0.0) {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
        }
        let step0 = if hist.is_empty() {
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };
        let mut found = wolfe_inner(&mut counted, metric, &x, fx, &g, &d, step0, ls)?;
        if found.is_none() && !hist.is_empty() {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            found = wolfe_inner(
                &mut counted,
                metric,
                &x,
                fx,
                &g,
                &d,
                (1.0 / gnorm).min(1.0),
                ls,
            )?;
        }
        let Some(pt) = found else {
            return Ok((
                x,
                counted.report(iter, fx, gnorm, Termination::LineSearchFailure),
            ));
        };
        let s = sub(&pt.x, &x);
        let y = sub(&pt.grad, &g);
        let sy = metric.dot(&s, &y);
        if sy > 1e-10 * metric.norm(&s) * metric.norm(&y) {
            if hist.len() == m {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = pt.x;
        fx = pt.value;
        g = pt.grad;
        iter += 1;
    }
}

fn two_loop(hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64], metric: &Metric) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; hist.len()];
    for (k, (s, y, rho)) in hist.iter().enumerate().rev() {
        let a = rho * metric.dot(s, &q);
        alphas[k] = a;
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = metric.dot(s, y) / metric.dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (k, (s, y, rho)) in hist.iter().enumerate() {
        let b = rho * metric.dot(y, &q);
        q.iter_mut()
            .zip(s)
            .for_each(|(qi, si)| *qi += (alphas[k] - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{bfgs, FnProblem};

    fn quadratic(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let a = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            2.0 + i as f64
                        } else {
                            0.3 / (1.0 + (i as f64 - j as f64).abs())
                        }
                    })
                    .collect()
            })
            .collect();
        let b = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        (a, b)
    }

    #[test]
    fn matches_bfgs_on_quadratic() {
        let (a, b) = quadratic(6);
        let f = |x: &[f64]| {
            let ax: Vec<f64> = a
                .iter()
                .map(|r| r.iter().zip(x).map(|(u, v)| u * v).sum())
                .collect();
            0.5 * x.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>()
                - x.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>()
        };
        let g = |x: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(&b)
                .map(|(r, bi)| r.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - bi)
                .collect()
        };
        let ls = LineSearchConfig::default();
        let (_, r1) = lbfgs(
            &mut FnProblem { f, g },
            &[0.0; 6],
            1e-9,
            8,
            &Metric::Euclidean,
            &ls,
            200,
        )
        .unwrap();
        let (_, r2) = bfgs(
            &mut FnProblem { f, g },
            &[0.0; 6],
            1e-9,
            &Metric::Euclidean,
            &ls,
            200,
        )
        .unwrap();
        assert!((r1.final_value - r2.final_value).abs() <= 1e-10);
    }

    #[test]
    fn rosenbrock_with_history_seven() {
        let mut p = FnProblem {
            f: |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            g: |x: &[f64]| {
                vec![
                    -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                    200.0 * (x[1] - x[0] * x[0]),
                ]
            },
        };
        let (x, rep) = lbfgs(
            &mut p,
            &[-1.2, 1.0],
            1e-9,
            7,
            &Metric::Euclidean,
            &Default::default(),
            500,
        )
        .unwrap();
        assert_eq!(rep.termination, Termination::Tolerance);
        assert!(((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)).sqrt() <= 1e-5);
    }

    #[test]
    fn zero_gradient_start_and_bad_history() {
        let mut p = FnProblem {
            f: |x: &[f64]| x[0] * x[0],
            g: |x: &[f64]| vec![2.0 * x[0]],
        };
        let (_, rep) = lbfgs(
            &mut p,
            &[0.0],
            1e-8,
            7,
            &Metric::Euclidean,
            &Default::default(),
            10,
        )
        .unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(lbfgs(
            &mut p,
            &[1.0],
            1e-8,
            0,
            &Metric::Euclidean,
            &Default::default(),
            10
        )
        .is_err());
    }

    #[test]
    fn deterministic_runs() {
        let f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (v - i as f64).powi(4) + v * v)
                .sum::<f64>()
        };
        let g = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| 4.0 * (v - i as f64).powi(3) + 2.0 * v)
                .collect::<Vec<_>>()
        };
        let a = lbfgs(
            &mut FnProblem { f, g },
            &[1.0; 10],
            1e-8,
            7,
            &Metric::Euclidean,
            &Default::default(),
            200,
        )
        .unwrap();
        let b = lbfgs(
            &mut FnProblem { f, g },
            &[1.0; 10],
            1e-8,
            7,
            &Metric::Euclidean,
            &Default::default(),
            200,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
