//! A one-dimensional stochastic program on `[0, 1]` whose minimizer jumps
//! under an arbitrarily small corruption, and its Rockafellian relaxation.
//!
//! `g(x, xi) = (1 - x)/2 + xi x`. The clean law is `xi = 0`; the corrupted law puts
//! mass `eps` on `1/eps`. With `t1 = -t2` eliminated the relaxation reads
//! `Phi(x, t2) = (1 - x)/2 + (eps + t2) x / eps + theta t2^2`, `t2 in [-eps, 1 - eps]`.

use crate::error::{Error, Result};
use crate::optimizers::{
    projected_gd, LineSearchConfig, Metric, OptimizerReport, Problem, StopRule,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotivatingInstance {
    pub eps: f64,
    pub theta: f64,
}

impl MotivatingInstance {
    pub fn new(eps: f64, theta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "theta must be positive, got {theta}"
            )));
        }
        Ok(Self { eps, theta })
    }

    /// Bounds on `t2` that keep `p + t` a probability vector.
    pub fn t2_bounds(&self) -> (f64, f64) {
        (-self.eps, 1.0 - self.eps)
    }

    pub fn rockafellian(&self, x: f64, t2: f64) -> Result<f64> {
        let (lo, hi) = self.t2_bounds();
        if !(lo..=hi).contains(&t2) {
            return Err(Error::Infeasible(format!("t2 = {t2} outside [{lo}, {hi}]")));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!("x = {x} outside [0, 1]")));
        }
        Ok(phi_corrupted(x, self.eps) + t2 * x / self.eps + self.theta * t2 * t2)
    }

    fn gradient(&self, x: f64, t2: f64) -> [f64; 2] {
        [
            -0.5 + (self.eps + t2) / self.eps,
            x / self.eps + 2.0 * self.theta * t2,
        ]
    }
}

pub fn phi_uncorrupted(x: f64) -> f64 {
    0.5 * (1.0 - x)
}

/// `(1 - x)/2 + x`, i.e. `(1 + x)/2`; independent of `eps`.
pub fn phi_corrupted(x: f64, _eps: f64) -> f64 {
    0.5 * (1.0 - x) + x
}

/// Minimizer and perturbation `(x, (t1, t2))`.
pub type MotivatingSolution = (f64, [f64; 2]);

/// The stated closed form `x = 1`, `t = (eps, -eps)`, valid under `theta < (eps/2)^-2`.
pub fn solve_rockafellian_closed_form(inst: &MotivatingInstance) -> Result<MotivatingSolution> {
    let threshold = (inst.eps / 2.0).powi(-2);
    if inst.theta >= threshold {
        return Err(Error::InvalidArgument(format!(
            "closed form requires theta < {threshold}, got {}",
            inst.theta
        )));
    }
    Ok((1.0, [inst.eps, -inst.eps]))
}

/// Exact global minimizer by elimination of `t2`.
///
/// For fixed `x` the best `t2` is `clamp(-x / (2 theta eps), -eps, 1 - eps)`; the
/// resulting function of `x` is concave, so the minimum sits at `x = 0` or `x = 1`.
pub fn exact_global_minimizer(inst: &MotivatingInstance) -> MotivatingSolution {
    let (lo, hi) = inst.t2_bounds();
    let t_at_one = (-1.0 / (2.0 * inst.theta * inst.eps)).clamp(lo, hi);
    let v1 = (inst.eps + t_at_one) / inst.eps + inst.theta * t_at_one * t_at_one;
    let v0 = 0.5;
    if v1 < v0 {
        (1.0, [-t_at_one, t_at_one])
    } else {
        (0.0, [0.0, 0.0])
    }
}

struct Relaxed(MotivatingInstance);

impl Problem for Relaxed {
    fn value(&mut self, v: &[f64]) -> Result<f64> {
        self.0.rockafellian(v[0], v[1])
    }

    fn value_grad(&mut self, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((
            self.0.rockafellian(v[0], v[1])?,
            self.0.gradient(v[0], v[1]).to_vec(),
        ))
    }
}

/// Projected gradient descent on `(x, t2)` from `(1, 0)`.
pub fn solve_rockafellian_numeric(inst: &MotivatingInstance) -> Result<MotivatingSolution> {
    Ok(solve_rockafellian_with_report(inst)?.0)
}

/// As [`solve_rockafellian_numeric`], also returning the optimizer counters.
pub fn solve_rockafellian_with_report(
    inst: &MotivatingInstance,
) -> Result<(MotivatingSolution, OptimizerReport)> {
    let (lo, hi) = inst.t2_bounds();
    let project = |v: &mut Vec<f64>| {
        v[0] = v[0].clamp(0.0, 1.0);
        v[1] = v[1].clamp(lo, hi);
    };
    let (v, report) = projected_gd(
        &mut Relaxed(*inst),
        &project,
        &[1.0, 0.0],
        1e-12,
        StopRule::ProjectedStep,
        &Metric::Euclidean,
        &LineSearchConfig::default(),
        100_000,
    )?;
    Ok(((v[0], [-v[1], v[1]]), report))
}

/// Exhaustive search over `x` and `t2` on a grid of spacing `step`.
pub fn grid_search(inst: &MotivatingInstance, step: f64) -> MotivatingSolution {
    let (lo, hi) = inst.t2_bounds();
    let nx = (1.0 / step).round() as usize;
    let nt = ((hi - lo) / step).round() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nx {
        let x = i as f64 / nx as f64;
        for k in 0..=nt {
            let t2 = lo + (hi - lo) * k as f64 / nt as f64;
            let v = 0.5 * (1.0 - x) + (inst.eps + t2) * x / inst.eps + inst.theta * t2 * t2;
            if v < best.0 {
                best = (v, x, t2);
            }
        }
    }
    (best.1, [-best.2, best.2])
}
