use super::line_search::wolfe_inner;
use super::{sub, Counted, LineSearchConfig, Metric, OptimizerReport, Problem, Termination};
use crate::error::Result;

/// Dense BFGS on the inverse Hessian with a strong Wolfe line search.
///
/// The update is the metric form `H+ = (I - r s (Wy)^T) H (I - r y (Ws)^T) + r s (Ws)^T`
/// with `r = 1 / <s, y>_W`. Pairs with `<s, y>_W <= 1e-10 ||s|| ||y||` are skipped.
/// `H` starts as the identity and is rescaled by `<s,y>/<y,y>` before the first
/// update. A non-descent direction or a failed search resets `H` to the identity.
pub fn bfgs<P: Problem + ?Sized>(
    problem: &mut P,
    x0: &[f64],
    gtol: f64,
    metric: &Metric,
    ls: &LineSearchConfig,
    max_iter: usize,
) -> Result<(Vec<f64>, OptimizerReport)> {
    ls.validate()?;
    let n = x0.len();
    let mut counted = Counted::new(problem);
    let mut x = x0.to_vec();
    let (mut fx, mut g) = counted.value_grad(&x)?;
    let mut h = identity(n);
    let mut fresh = true;
    let mut iter = 0;
    loop {
        let gnorm = metric.norm(&g);
        if gnorm < gtol {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::Tolerance)));
        }
        if iter >= max_iter {
            return Ok((x, counted.report(iter, fx, gnorm, Termination::MaxIter)));
        }
        let mut d: Vec<f64> = matvec(&h, &g, n).into_iter().map(|v| -v).collect();
        if !(metric.dot(&g, &d) < 0.0) {
            h = identity(n);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
        }
        let step0 = if fresh { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut found = wolfe_inner(&mut counted, metric, &x, fx, &g, &d, step0, ls)?;
        if found.is_none() && !fresh {
            h = identity(n);
            fresh = true;
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
            if fresh {
                let scale = sy / metric.dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
                fresh = false;
            }
            update(
                &mut h,
                &s,
                &y,
                &metric.apply(&s),
                &metric.apply(&y),
                1.0 / sy,
                n,
            );
        }
        x = pt.x;
        fx = pt.value;
        g = pt.grad;
        iter += 1;
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn matvec(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            h[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

fn update(h: &mut [f64], s: &[f64], y: &[f64], ws: &[f64], wy: &[f64], rho: f64, n: usize) {
    let hy = matvec(h, y, n);
    let mut wyh = vec![0.0; n];
    for i in 0..n {
        let row = &h[i * n..(i + 1) * n];
        for (j, v) in row.iter().enumerate() {
            wyh[j] += wy[i] * v;
        }
    }
    let c: f64 = wy.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let k = rho * rho * c + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * s[i] * wyh[j] - rho * hy[i] * ws[j] + k * s[i] * ws[j];
        }
    }
}
