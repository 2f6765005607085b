use super::{axpy, Counted, Metric, Problem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchConfig {
    pub armijo_c1: f64,
    pub backtrack_factor: f64,
    pub wolfe_c2: f64,
    pub max_backtracks: usize,
    /// First trial step of the first iteration.
    pub initial_step: f64,
    /// Backtracking searches start from the previous accepted step times this factor.
    pub step_growth: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            armijo_c1: 1e-4,
            backtrack_factor: 0.5,
            wolfe_c2: 0.9,
            max_backtracks: 50,
            initial_step: 1.0,
            step_growth: 2.0,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.armijo_c1
            && self.armijo_c1 < self.wolfe_c2
            && self.wolfe_c2 < 1.0
            && 0.0 < self.backtrack_factor
            && self.backtrack_factor < 1.0
            && self.initial_step > 0.0
            && self.step_growth >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid line search config {self:?}"
            )))
        }
    }
}

pub(crate) struct Accepted {
    pub step: f64,
    pub x: Vec<f64>,
    pub value: f64,
}

/// Backtracking on the projected arc `x(s) = P(x - s g)`, accepting the first
/// step with `f(x(s)) <= f(x) + c1 <g, x(s) - x>_W`.
pub fn armijo_backtrack<P, Proj>(
    problem: &mut P,
    metric: &Metric,
    project: &Proj,
    x: &[f64],
    fx: f64,
    g: &[f64],
    step0: f64,
    ls: &LineSearchConfig,
) -> Result<Option<(f64, Vec<f64>, f64)>>
where
    P: Problem + ?Sized,
    Proj: Fn(&mut Vec<f64>),
{
    let mut counted = Counted::new(problem);
    Ok(
        armijo_inner(&mut counted, metric, project, x, fx, g, step0, ls)?
            .map(|a| (a.step, a.x, a.value)),
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn armijo_inner<P, Proj>(
    problem: &mut Counted<P>,
    metric: &Metric,
    project: &Proj,
    x: &[f64],
    fx: f64,
    g: &[f64],
    step0: f64,
    ls: &LineSearchConfig,
) -> Result<Option<Accepted>>
where
    P: Problem + ?Sized,
    Proj: Fn(&mut Vec<f64>),
{
    let mut step = step0;
    for _ in 0..=ls.max_backtracks {
        let mut trial = axpy(x, -step, g);
        project(&mut trial);
        let moved: Vec<f64> = trial.iter().zip(x).map(|(a, b)| a - b).collect();
        let decrease = metric.dot(g, &moved);
        let value = problem.value(&trial)?;
        if value.is_finite() && value <= fx + ls.armijo_c1 * decrease {
            return Ok(Some(Accepted {
                step,
                x: trial,
                value,
            }));
        }
        step *= ls.backtrack_factor;
    }
    Ok(None)
}

pub(crate) struct WolfePoint {
    pub step: f64,
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Strong Wolfe line search along `d` (bracketing then zoom with safeguarded
/// quadratic interpolation). `max_backtracks` caps the total number of trials.
pub fn wolfe_search<P: Problem + ?Sized>(
    problem: &mut P,
    metric: &Metric,
    x: &[f64],
    fx: f64,
    g: &[f64],
    d: &[f64],
    step0: f64,
    ls: &LineSearchConfig,
) -> Result<Option<(f64, Vec<f64>, f64)>> {
    let mut counted = Counted::new(problem);
    Ok(wolfe_inner(&mut counted, metric, x, fx, g, d, step0, ls)?.map(|w| (w.step, w.x, w.value)))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn wolfe_inner<P: Problem + ?Sized>(
    problem: &mut Counted<P>,
    metric: &Metric,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    step0: f64,
    ls: &LineSearchConfig,
) -> Result<Option<WolfePoint>> {
    let dphi0 = metric.dot(g0, d);
    if !(dphi0 < 0.0) {
        return Ok(None);
    }
    let (c1, c2) = (ls.armijo_c1, ls.wolfe_c2);
    let mut evals = 0;
    let eval = |problem: &mut Counted<P>, a: f64| -> Result<(Vec<f64>, f64, Vec<f64>, f64)> {
        let xa = axpy(x, a, d);
        let (f, g) = problem.value_grad(&xa)?;
        let dphi = metric.dot(&g, d);
        Ok((xa, f, g, dphi))
    };

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut dphi_prev = dphi0;
    let mut a = step0;
    let (mut lo, mut hi);
    let (mut f_lo, mut dphi_lo, mut f_hi);
    loop {
        if evals >= ls.max_backtracks {
            return Ok(None);
        }
        evals += 1;
        let (xa, f, g, dphi) = eval(problem, a)?;
        if !f.is_finite() || f > f0 + c1 * a * dphi0 || (evals > 1 && f >= f_prev) {
            lo = a_prev;
            f_lo = f_prev;
            dphi_lo = dphi_prev;
            hi = a;
            f_hi = f;
            break;
        }
        if dphi.abs() <= -c2 * dphi0 {
            return Ok(Some(WolfePoint {
                step: a,
                x: xa,
                value: f,
                grad: g,
            }));
        }
        if dphi >= 0.0 {
            lo = a;
            f_lo = f;
            dphi_lo = dphi;
            hi = a_prev;
            f_hi = f_prev;
            break;
        }
        a_prev = a;
        f_prev = f;
        dphi_prev = dphi;
        a *= 2.0;
    }

    // zoom
    let mut best: Option<WolfePoint> = None;
    while evals < ls.max_backtracks {
        evals += 1;
        let width = hi - lo;
        let mut trial = f64::NAN;
        if f_hi.is_finite() {
            let denom = 2.0 * (f_hi - f_lo - dphi_lo * width);
            if denom > 0.0 {
                trial = lo - dphi_lo * width * width / denom;
            }
        }
        let (a_min, a_max) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let margin = 0.1 * (a_max - a_min);
        if !trial.is_finite() || trial < a_min + margin || trial > a_max - margin {
            trial = 0.5 * (lo + hi);
        }
        let (xa, f, g, dphi) = eval(problem, trial)?;
        if !f.is_finite() || f > f0 + c1 * trial * dphi0 || f >= f_lo {
            hi = trial;
            f_hi = f;
        } else {
            if dphi.abs() <= -c2 * dphi0 {
                return Ok(Some(WolfePoint {
                    step: trial,
                    x: xa,
                    value: f,
                    grad: g,
                }));
            }
            if dphi * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = trial;
            f_lo = f;
            dphi_lo = dphi;
            best = Some(WolfePoint {
                step: trial,
                x: xa,
                value: f,
                grad: g,
            });
        }
        if (hi - lo).abs() <= 1e-16 * lo.abs().max(1.0) {
            break;
        }
    }
    // Fall back to the best sufficient-decrease point found during the zoom.
    Ok(best)
}
