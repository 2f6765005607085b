//! Alternating minimization of a Rockafellian `Phi(z, t)`: a quasi-Newton
//! z-step with `t` frozen, then a t-step with `z` frozen, until successive
//! `t` iterates are close.

use crate::error::Result;
use crate::lp::{solve_t_lp, TSubproblem};
use crate::objectives::{
    t_subproblem_costs, Saa1D, SupportProblem2D, SupportTStep, SupportZStep, WeightedSaa,
};
use crate::optimizers::{
    bfgs, lbfgs, projected_gd, LineSearchConfig, OptimizerReport, StopRule, Termination,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AdiConfig {
    pub t_tol: f64,
    pub max_outer: usize,
    pub z_gtol: f64,
    pub z_max_iter: usize,
    /// History size for L-BFGS z-steps.
    pub lbfgs_m: usize,
    pub t_inner_tol: f64,
    pub t_max_iter: usize,
    pub line_search: LineSearchConfig,
    /// Keep `t = 0` throughout (reduces the driver to the corrupted solve).
    pub freeze_t: bool,
}

impl Default for AdiConfig {
    fn default() -> Self {
        Self {
            t_tol: 1e-5,
            max_outer: 50,
            z_gtol: 1e-5,
            z_max_iter: 10_000,
            lbfgs_m: 7,
            t_inner_tol: 1e-6,
            t_max_iter: 1000,
            line_search: LineSearchConfig::default(),
            freeze_t: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Z,
    T,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Z => "z",
            Phase::T => "t",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub outer_iter: usize,
    pub phase: Phase,
    /// `Phi(z, t)` after this half-step (evaluated outside the optimizer counters).
    pub objective: f64,
    /// Distance between successive `t` iterates (t rows only).
    pub t_distance: Option<f64>,
    pub report: OptimizerReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdiTermination {
    Tolerance,
    MaxOuter,
    InnerFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiResult {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub termination: AdiTermination,
}

impl AdiResult {
    pub fn z_reports(&self) -> impl Iterator<Item = &OptimizerReport> {
        self.trace
            .iter()
            .filter(|r| r.phase == Phase::Z)
            .map(|r| &r.report)
    }
}

/// A Rockafellian that can be split into z- and t-subproblems.
pub trait AdiProblem {
    fn n_t(&self) -> usize;
    fn objective(&self, z: &[f64], t: &[f64]) -> Result<f64>;
    fn z_step(&self, z0: &[f64], t: &[f64], cfg: &AdiConfig)
        -> Result<(Vec<f64>, OptimizerReport)>;
    fn t_step(&self, z: &[f64], t0: &[f64], cfg: &AdiConfig)
        -> Result<(Vec<f64>, OptimizerReport)>;
    fn t_distance(&self, a: &[f64], b: &[f64]) -> f64;
}

fn failed(r: &OptimizerReport) -> bool {
    r.termination != Termination::Tolerance
}

/// Start from `t = 0`, warm-start each z-step from the previous control.
pub fn run_adi<P: AdiProblem + ?Sized>(
    problem: &P,
    z0: &[f64],
    cfg: &AdiConfig,
) -> Result<AdiResult> {
    let mut z = z0.to_vec();
    let mut t = vec![0.0; problem.n_t()];
    let mut trace = Vec::new();
    let mut consecutive_failures = 0;
    for outer in 1..=cfg.max_outer.max(1) {
        let (z_new, rep) = problem.z_step(&z, &t, cfg)?;
        z = z_new;
        consecutive_failures = if failed(&rep) {
            consecutive_failures + 1
        } else {
            0
        };
        trace.push(TraceRow {
            outer_iter: outer,
            phase: Phase::Z,
            objective: problem.objective(&z, &t)?,
            t_distance: None,
            report: rep,
        });
        if consecutive_failures >= 2 {
            return Ok(AdiResult {
                z,
                t,
                trace,
                termination: AdiTermination::InnerFailure,
            });
        }
        if cfg.freeze_t {
            if outer == cfg.max_outer.max(1) {
                break;
            }
            continue;
        }
        let (t_new, rep) = problem.t_step(&z, &t, cfg)?;
        let dist = problem.t_distance(&t_new, &t);
        t = t_new;
        consecutive_failures = if failed(&rep) {
            consecutive_failures + 1
        } else {
            0
        };
        trace.push(TraceRow {
            outer_iter: outer,
            phase: Phase::T,
            objective: problem.objective(&z, &t)?,
            t_distance: Some(dist),
            report: rep,
        });
        if dist < cfg.t_tol {
            return Ok(AdiResult {
                z,
                t,
                trace,
                termination: AdiTermination::Tolerance,
            });
        }
        if consecutive_failures >= 2 {
            return Ok(AdiResult {
                z,
                t,
                trace,
                termination: AdiTermination::InnerFailure,
            });
        }
    }
    Ok(AdiResult {
        z,
        t,
        trace,
        termination: AdiTermination::MaxOuter,
    })
}

/// Sample-reweighting relaxation: BFGS in `z`, exact LP in `t`, `l1` distance.
pub struct ReweightingAdi<'a> {
    pub saa: &'a Saa1D,
    pub theta: f64,
}

impl AdiProblem for ReweightingAdi<'_> {
    fn n_t(&self) -> usize {
        self.saa.n_samples()
    }

    fn objective(&self, z: &[f64], t: &[f64]) -> Result<f64> {
        crate::objectives::rock_objective_ex2(self.saa, z, t, self.theta)
    }

    fn z_step(
        &self,
        z0: &[f64],
        t: &[f64],
        cfg: &AdiConfig,
    ) -> Result<(Vec<f64>, OptimizerReport)> {
        let q = self
            .saa
            .probs()
            .iter()
            .zip(t)
            .map(|(p, t)| (p + t).max(0.0))
            .collect();
        let mut prob = WeightedSaa { saa: self.saa, q };
        bfgs(
            &mut prob,
            z0,
            cfg.z_gtol,
            &self.saa.metric(),
            &cfg.line_search,
            cfg.z_max_iter,
        )
    }

    fn t_step(
        &self,
        z: &[f64],
        _t0: &[f64],
        _cfg: &AdiConfig,
    ) -> Result<(Vec<f64>, OptimizerReport)> {
        let costs = t_subproblem_costs(self.saa, z)?;
        let sub = TSubproblem {
            costs,
            probs: self.saa.probs().to_vec(),
            theta: self.theta,
            stringent_bounds: true,
        };
        let t = solve_t_lp(&sub)?;
        let report = OptimizerReport {
            iterations: 1,
            objective_evals: 1,
            gradient_evals: 0,
            final_value: sub.objective(&t),
            final_grad_norm: 0.0,
            termination: Termination::Tolerance,
        };
        Ok((t, report))
    }

    fn t_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }
}

/// Support-shift relaxation: L-BFGS in `z`, projected gradient descent in `t`,
/// weighted `L^2` distance over the quadrature nodes.
pub struct SupportAdi<'a> {
    pub prob: &'a SupportProblem2D,
}

impl AdiProblem for SupportAdi<'_> {
    fn n_t(&self) -> usize {
        self.prob.nodes().len()
    }

    fn objective(&self, z: &[f64], t: &[f64]) -> Result<f64> {
        crate::objectives::rock_objective_ex3(self.prob, z, t)
    }

    fn z_step(
        &self,
        z0: &[f64],
        t: &[f64],
        cfg: &AdiConfig,
    ) -> Result<(Vec<f64>, OptimizerReport)> {
        let mut step = SupportZStep::new(self.prob, t.to_vec())?;
        lbfgs(
            &mut step,
            z0,
            cfg.z_gtol,
            cfg.lbfgs_m,
            &self.prob.z_metric(),
            &cfg.line_search,
            cfg.z_max_iter,
        )
    }

    fn t_step(
        &self,
        z: &[f64],
        t0: &[f64],
        cfg: &AdiConfig,
    ) -> Result<(Vec<f64>, OptimizerReport)> {
        let mut step = SupportTStep {
            prob: self.prob,
            z: z.to_vec(),
        };
        let project = |t: &mut Vec<f64>| self.prob.project_t(t);
        projected_gd(
            &mut step,
            &project,
            t0,
            cfg.t_inner_tol,
            StopRule::ProjectedStep,
            &self.prob.t_metric(),
            &cfg.line_search,
            cfg.t_max_iter,
        )
    }

    fn t_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.prob.weights())
            .map(|((x, y), w)| w * (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid1D;
    use crate::objectives::objective_saa;
    use crate::random_field::{corrupt_samples, sample_standard_normal, KklCoefficient};

    #[test]
    fn identical_samples_keep_zero_perturbation() {
        let grid = Grid1D::new(32).unwrap();
        let n = grid.n_nodes();
        let saa =
            Saa1D::from_constants(grid, &[1.0; 4], vec![0.25; 4], vec![1.0; n], 1e-4).unwrap();
        let adi = ReweightingAdi {
            saa: &saa,
            theta: 0.05,
        };
        let res = run_adi(&adi, &vec![1.0; n], &AdiConfig::default()).unwrap();
        assert_eq!(res.t, vec![0.0; 4]);
        assert_eq!(res.termination, AdiTermination::Tolerance);
        assert_eq!(res.trace.len(), 2);
        let mut plain = WeightedSaa {
            saa: &saa,
            q: vec![0.25; 4],
        };
        let (z, _) = bfgs(
            &mut plain,
            &vec![1.0; n],
            1e-5,
            &saa.metric(),
            &Default::default(),
            10_000,
        )
        .unwrap();
        assert_eq!(res.z, z);
    }

    fn kkl_problem() -> Saa1D {
        let grid = Grid1D::new(64).unwrap();
        let coef = KklCoefficient::new(0.4, 20).unwrap();
        let s = corrupt_samples(&sample_standard_normal(100, 20, 5).unwrap(), 5).unwrap();
        let n = grid.n_nodes();
        Saa1D::from_kkl(grid, &coef, &s, vec![1.0; n], 1e-4).unwrap()
    }

    #[test]
    fn frozen_t_reproduces_corrupted_solve() {
        let saa = kkl_problem();
        let n = saa.grid().n_nodes();
        let adi = ReweightingAdi {
            saa: &saa,
            theta: 0.05,
        };
        let cfg = AdiConfig {
            freeze_t: true,
            max_outer: 1,
            ..Default::default()
        };
        let res = run_adi(&adi, &vec![1.0; n], &cfg).unwrap();
        let mut plain = WeightedSaa {
            saa: &saa,
            q: saa.probs().to_vec(),
        };
        let (z, _) = bfgs(
            &mut plain,
            &vec![1.0; n],
            1e-5,
            &saa.metric(),
            &Default::default(),
            10_000,
        )
        .unwrap();
        assert_eq!(res.z, z);
        assert!(res.t.iter().all(|&t| t == 0.0));
        assert!((res.trace[0].objective - objective_saa(&saa, &z).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn objective_trace_nonincreasing() {
        let saa = kkl_problem();
        let n = saa.grid().n_nodes();
        let adi = ReweightingAdi {
            saa: &saa,
            theta: 0.05,
        };
        let res = run_adi(&adi, &vec![1.0; n], &AdiConfig::default()).unwrap();
        assert_eq!(res.termination, AdiTermination::Tolerance);
        let mut prev = adi.objective(&vec![1.0; n], &vec![0.0; 100]).unwrap();
        for row in &res.trace {
            assert!(row.objective <= prev + 1e-10, "{row:?}");
            prev = row.objective;
            if let Some(d) = row.t_distance {
                assert!(d.is_finite());
            }
        }
        let deleted = crate::lp::deleted_flags(saa.probs(), &res.t);
        assert!(deleted[..5].iter().filter(|&&d| d).count() >= 3);
    }
}
