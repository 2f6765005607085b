use std::f64::consts::PI;
use std::path::Path;

use super::config::{Example, ExperimentConfig};
use super::metrics::{linf_distance, relative_l2_error, variance_ratio, MetricsReport, PhaseStats};
use super::output::{Cell, Table};
use crate::adi::{run_adi, AdiConfig, AdiResult, AdiTermination, ReweightingAdi, SupportAdi};
use crate::elliptic_2d::P1Space;
use crate::error::{Error, Result};
use crate::lp::deleted_flags;
use crate::mesh::{build_disk_mesh, Grid1D};
use crate::motivating::{solve_rockafellian_with_report, MotivatingInstance};
use crate::objectives::{Ex1Joint, Saa1D, SupportProblem2D, SupportZStep, WeightedSaa};
use crate::optimizers::{
    armijo_gd, bfgs, lbfgs, projected_gd, Metric, OptimizerReport, StopRule, Termination,
};
use crate::quadrature::gauss_legendre;
use crate::random_field::{corrupt_samples, sample_standard_normal, KklCoefficient, TwoAtomLaw};

/// Center of the clean parameter law for ex3.
pub const EX3_CENTER: f64 = 3.5;

pub const METRICS_HEADER: [&str; 28] = [
    "example",
    "corruption",
    "theta",
    "seed",
    "e_rel_corrupted",
    "e_rel_rock",
    "e_ratio",
    "linf_true_rock",
    "v_ratio",
    "corrupted_deleted",
    "corrupted_total",
    "clean_deleted",
    "clean_total",
    "true_iters",
    "true_obj_evals",
    "true_grad_evals",
    "true_termination",
    "corrupted_iters",
    "corrupted_obj_evals",
    "corrupted_grad_evals",
    "corrupted_termination",
    "rock_iters",
    "rock_obj_evals",
    "rock_grad_evals",
    "rock_termination",
    "adi_outer",
    "all_converged",
    "n_dof",
];
pub const T_VECTOR_HEADER: [&str; 4] = ["index", "p_or_xi", "t_star", "deleted_flag"];
pub const ADI_TRACE_HEADER: [&str; 6] = [
    "outer_iter",
    "phase",
    "objective",
    "t_distance",
    "inner_iters",
    "inner_evals",
];
pub const GAMMA_HEADER: [&str; 8] = [
    "k",
    "eps",
    "theta",
    "t2",
    "distance_l2",
    "rock_iters",
    "rock_termination",
    "converged",
];

fn controls_header(two_d: bool) -> Vec<&'static str> {
    let mut h = if two_d { vec!["x", "y"] } else { vec!["x"] };
    h.extend(["z_true", "z_corrupted", "z_rock"]);
    h
}

fn states_header(two_d: bool) -> Vec<&'static str> {
    let mut h = if two_d { vec!["x", "y"] } else { vec!["x"] };
    h.extend(["Eu_true", "Eu_corrupted", "Eu_rock"]);
    h
}

/// Everything one run produces; `write` lays it out as the five CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub metrics: MetricsReport,
    pub z_true: Vec<f64>,
    pub z_corrupted: Vec<f64>,
    pub z_rock: Vec<f64>,
    pub t_star: Vec<f64>,
    pub controls: Table,
    pub states: Table,
    pub t_vector: Table,
    pub adi_trace: Table,
}

impl ExperimentOutput {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.controls.write(&dir.join("controls.csv"))?;
        self.states.write(&dir.join("states.csv"))?;
        self.t_vector.write(&dir.join("t_vector.csv"))?;
        metrics_table(std::slice::from_ref(&self.metrics)).write(&dir.join("metrics.csv"))?;
        self.adi_trace.write(&dir.join("adi_trace.csv"))
    }
}

fn stats_cells(s: &PhaseStats) -> [Cell; 4] {
    [
        s.iterations.into(),
        s.objective_evals.into(),
        s.gradient_evals.into(),
        s.termination.as_str().into(),
    ]
}

/// One row per report, columns as in [`METRICS_HEADER`].
pub fn metrics_table(reports: &[MetricsReport]) -> Table {
    let mut t = Table::new(&METRICS_HEADER);
    for r in reports {
        let mut row: Vec<Cell> = vec![
            r.example.as_str().into(),
            r.corruption.into(),
            r.theta.into(),
            Cell::Int(r.seed as i64),
            r.e_rel_corrupted.into(),
            r.e_rel_rock.into(),
            r.e_ratio.into(),
            r.linf_true_rock.into(),
            r.v_ratio.into(),
            r.corrupted_deleted.map(|c| c.0).into(),
            r.corrupted_deleted.map(|c| c.1).into(),
            r.clean_deleted.map(|c| c.0).into(),
            r.clean_deleted.map(|c| c.1).into(),
        ];
        row.extend(stats_cells(&r.true_stats));
        row.extend(stats_cells(&r.corrupted_stats));
        row.extend(stats_cells(&r.rock_stats));
        row.push(r.adi_outer.into());
        row.push(Cell::Int(r.all_converged() as i64));
        row.push(r.n_dof.into());
        t.push(row);
    }
    t
}

fn adi_config(cfg: &ExperimentConfig) -> AdiConfig {
    AdiConfig {
        t_tol: cfg.t_tol,
        max_outer: cfg.max_outer,
        z_gtol: cfg.z_gtol,
        z_max_iter: cfg.z_max_iter,
        lbfgs_m: cfg.lbfgs_m,
        t_inner_tol: cfg.t_inner_tol,
        t_max_iter: cfg.t_max_iter,
        line_search: cfg.line_search.clone(),
        freeze_t: false,
    }
}

fn adi_termination_str(t: AdiTermination) -> &'static str {
    match t {
        AdiTermination::Tolerance => "tolerance",
        AdiTermination::MaxOuter => "max_outer",
        AdiTermination::InnerFailure => "inner_failure",
    }
}

fn trace_table(res: &AdiResult) -> Table {
    let mut t = Table::new(&ADI_TRACE_HEADER);
    for row in &res.trace {
        t.push(vec![
            row.outer_iter.into(),
            row.phase.as_str().into(),
            row.objective.into(),
            row.t_distance.into(),
            row.report.iterations.into(),
            row.report.objective_evals.into(),
        ]);
    }
    t
}

/// A single-solve "trace" for the jointly optimized relaxations.
fn joint_trace(report: &OptimizerReport) -> Table {
    let mut t = Table::new(&ADI_TRACE_HEADER);
    t.push(vec![
        1usize.into(),
        "joint".into(),
        report.final_value.into(),
        Cell::Empty,
        report.iterations.into(),
        report.objective_evals.into(),
    ]);
    t
}

fn solved(report: &OptimizerReport) -> PhaseStats {
    PhaseStats::from_report(report)
}

fn closed_form_stats() -> PhaseStats {
    PhaseStats {
        iterations: 0,
        objective_evals: 0,
        gradient_evals: 0,
        termination: Termination::Tolerance.as_str().to_string(),
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

fn sine_target(grid: &Grid1D) -> Vec<f64> {
    grid.nodes().iter().map(|&x| (PI * x).sin()).collect()
}

fn count_deleted(flags: &[bool], range: std::ops::Range<usize>) -> (usize, usize) {
    let total = range.len();
    (flags[range].iter().filter(|&&f| f).count(), total)
}

struct Baseline {
    z_true: Vec<f64>,
    true_stats: PhaseStats,
    z_corrupted: Vec<f64>,
    corrupted_stats: PhaseStats,
}

enum Setup {
    Motivating,
    Ex1 {
        clean: Saa1D,
        corrupted: Saa1D,
    },
    Ex2 {
        clean: Saa1D,
        corrupted: Saa1D,
        n_corrupted: usize,
    },
    Ex3 {
        truth: SupportProblem2D,
        corrupted: SupportProblem2D,
    },
}

/// True and corrupted solves, shared by every theta of a sweep.
struct Prepared {
    cfg: ExperimentConfig,
    setup: Setup,
    base: Baseline,
}

fn ex1_problems(cfg: &ExperimentConfig, eps: f64) -> Result<(Saa1D, Saa1D)> {
    let grid = Grid1D::new(cfg.n_cells)?;
    let target = sine_target(&grid);
    let law = TwoAtomLaw::new(eps)?;
    let clean = Saa1D::from_constants(
        grid.clone(),
        &law.atoms[1..],
        vec![1.0],
        target.clone(),
        cfg.alpha,
    )?;
    let corrupted = Saa1D::from_two_atoms(grid, &law, target, cfg.alpha)?;
    Ok((clean, corrupted))
}

fn gd_solve(cfg: &ExperimentConfig, saa: &Saa1D) -> Result<(Vec<f64>, OptimizerReport)> {
    let z0 = vec![1.0; saa.grid().n_nodes()];
    let mut prob = WeightedSaa {
        saa,
        q: saa.probs().to_vec(),
    };
    armijo_gd(
        &mut prob,
        &z0,
        cfg.gd_tol,
        &saa.metric(),
        &cfg.line_search,
        cfg.gd_max_iter,
    )
}

fn bfgs_solve(cfg: &ExperimentConfig, saa: &Saa1D) -> Result<(Vec<f64>, OptimizerReport)> {
    let z0 = vec![1.0; saa.grid().n_nodes()];
    let mut prob = WeightedSaa {
        saa,
        q: saa.probs().to_vec(),
    };
    bfgs(
        &mut prob,
        &z0,
        cfg.z_gtol,
        &saa.metric(),
        &cfg.line_search,
        cfg.z_max_iter,
    )
}

fn lbfgs_solve(
    cfg: &ExperimentConfig,
    prob: &SupportProblem2D,
) -> Result<(Vec<f64>, OptimizerReport)> {
    let z0 = vec![1.0; prob.space().n_dof()];
    let mut step = SupportZStep::new(prob, vec![0.0; prob.nodes().len()])?;
    lbfgs(
        &mut step,
        &z0,
        cfg.z_gtol,
        cfg.lbfgs_m,
        &prob.z_metric(),
        &cfg.line_search,
        cfg.z_max_iter,
    )
}

fn ex3_problems(
    cfg: &ExperimentConfig,
    theta: f64,
) -> Result<(SupportProblem2D, SupportProblem2D)> {
    let delta = cfg.corruption;
    let space = P1Space::new(build_disk_mesh(cfg.target_dof)?);
    let target = vec![1.0; space.n_dof()];
    let rule = gauss_legendre(cfg.quad_nodes, EX3_CENTER - delta, EX3_CENTER + delta)?;
    let weights: Vec<f64> = rule.weights.iter().map(|w| w / (2.0 * delta)).collect();
    let truth = SupportProblem2D::new(
        space.clone(),
        vec![EX3_CENTER],
        vec![1.0],
        (EX3_CENTER, EX3_CENTER),
        target.clone(),
        cfg.alpha,
        theta,
    )?;
    let corrupted = SupportProblem2D::new(
        space,
        rule.nodes,
        weights,
        (EX3_CENTER - delta, EX3_CENTER + delta),
        target,
        cfg.alpha,
        theta,
    )?;
    Ok((truth, corrupted))
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (setup, base) = match cfg.example {
        Example::Motivating => (
            Setup::Motivating,
            Baseline {
                z_true: vec![1.0],
                true_stats: closed_form_stats(),
                z_corrupted: vec![0.0],
                corrupted_stats: closed_form_stats(),
            },
        ),
        Example::Ex1 => {
            let (clean, corrupted) = ex1_problems(cfg, cfg.corruption)?;
            let (z_true, rt) = gd_solve(cfg, &clean)?;
            let (z_corrupted, rc) = gd_solve(cfg, &corrupted)?;
            (
                Setup::Ex1 { clean, corrupted },
                Baseline {
                    z_true,
                    true_stats: solved(&rt),
                    z_corrupted,
                    corrupted_stats: solved(&rc),
                },
            )
        }
        Example::Ex2 => {
            let grid = Grid1D::new(cfg.n_cells)?;
            let coef = KklCoefficient::new(cfg.sigma, cfg.kkl_modes)?;
            let samples = sample_standard_normal(cfg.n_samples, cfg.kkl_modes, cfg.seed)?;
            let n_corrupted = cfg.n_corrupted();
            let bad = corrupt_samples(&samples, n_corrupted)?;
            let target = vec![1.0; grid.n_nodes()];
            let clean = Saa1D::from_kkl(grid.clone(), &coef, &samples, target.clone(), cfg.alpha)?;
            let corrupted = Saa1D::from_kkl(grid, &coef, &bad, target, cfg.alpha)?;
            let (z_true, rt) = bfgs_solve(cfg, &clean)?;
            let (z_corrupted, rc) = bfgs_solve(cfg, &corrupted)?;
            (
                Setup::Ex2 {
                    clean,
                    corrupted,
                    n_corrupted,
                },
                Baseline {
                    z_true,
                    true_stats: solved(&rt),
                    z_corrupted,
                    corrupted_stats: solved(&rc),
                },
            )
        }
        Example::Ex3 => {
            let (truth, corrupted) = ex3_problems(cfg, cfg.theta)?;
            let (z_true, rt) = lbfgs_solve(cfg, &truth)?;
            let (z_corrupted, rc) = lbfgs_solve(cfg, &corrupted)?;
            (
                Setup::Ex3 { truth, corrupted },
                Baseline {
                    z_true,
                    true_stats: solved(&rt),
                    z_corrupted,
                    corrupted_stats: solved(&rc),
                },
            )
        }
    };
    Ok(Prepared {
        cfg: cfg.clone(),
        setup,
        base,
    })
}

/// Projected gradient descent on the joint `(z, t2)` two-atom relaxation.
fn ex1_rock(
    cfg: &ExperimentConfig,
    saa: &Saa1D,
    theta: f64,
) -> Result<(Vec<f64>, f64, OptimizerReport)> {
    let mut joint = Ex1Joint { saa, theta };
    let (lo, hi) = joint.t2_bounds();
    let metric = joint.metric();
    let mut x0 = vec![1.0; saa.grid().n_nodes()];
    x0.push(0.0);
    let project = |v: &mut Vec<f64>| {
        let last = v.len() - 1;
        v[last] = v[last].clamp(lo, hi);
    };
    let (mut x, report) = projected_gd(
        &mut joint,
        &project,
        &x0,
        cfg.gd_tol,
        StopRule::ControlInnerProduct {
            n_control: saa.grid().n_nodes(),
        },
        &metric,
        &cfg.line_search,
        cfg.gd_max_iter,
    )?;
    let t2 = x.pop().expect("joint variable is nonempty");
    Ok((x, t2, report))
}

fn table_1d(header: Vec<&str>, grid: &Grid1D, cols: [&[f64]; 3]) -> Table {
    let mut t = Table::new(&header);
    for (i, &x) in grid.nodes().iter().enumerate() {
        t.push(vec![
            x.into(),
            cols[0][i].into(),
            cols[1][i].into(),
            cols[2][i].into(),
        ]);
    }
    t
}

fn table_2d(header: Vec<&str>, space: &P1Space, cols: [&[f64]; 3]) -> Table {
    let mut t = Table::new(&header);
    for (i, v) in space.mesh().vertices.iter().enumerate() {
        t.push(vec![
            v[0].into(),
            v[1].into(),
            cols[0][i].into(),
            cols[1][i].into(),
            cols[2][i].into(),
        ]);
    }
    t
}

fn t_table(p_or_xi: &[f64], t: &[f64], flags: &[bool]) -> Table {
    let mut tab = Table::new(&T_VECTOR_HEADER);
    for i in 0..t.len() {
        tab.push(vec![
            i.into(),
            p_or_xi[i].into(),
            t[i].into(),
            Cell::Int(flags[i] as i64),
        ]);
    }
    tab
}

fn rock(prep: &Prepared, theta: f64) -> Result<ExperimentOutput> {
    let cfg = &prep.cfg;
    let base = &prep.base;
    let mut v_ratio = None;
    let mut corrupted_deleted = None;
    let mut clean_deleted = None;
    let mut adi_outer = 0;
    let n_dof;
    let (z_rock, t_star, rock_stats, metric, controls, states, t_vector, adi_trace);
    match &prep.setup {
        Setup::Motivating => {
            let inst = MotivatingInstance::new(cfg.corruption, theta)?;
            let ((x, t), report) = solve_rockafellian_with_report(&inst)?;
            z_rock = vec![x];
            t_star = t.to_vec();
            rock_stats = solved(&report);
            metric = Metric::Euclidean;
            n_dof = 1;
            let xs = [0.0];
            controls = table_1d_points(
                controls_header(false),
                &xs,
                [&base.z_true, &base.z_corrupted, &z_rock],
            );
            states = Table::new(&states_header(false));
            // the second atom (mass eps) is the corrupted one
            let p = [1.0 - cfg.corruption, cfg.corruption];
            let flags = deleted_flags(&p, &t_star);
            corrupted_deleted = Some(count_deleted(&flags, 1..2));
            clean_deleted = Some(count_deleted(&flags, 0..1));
            t_vector = t_table(&p, &t_star, &flags);
            adi_trace = joint_trace(&report);
        }
        Setup::Ex1 { clean, corrupted } => {
            let (z, t2, report) = ex1_rock(cfg, corrupted, theta)?;
            z_rock = z;
            t_star = vec![-t2, t2];
            rock_stats = solved(&report);
            metric = corrupted.metric();
            n_dof = z_rock.len();
            let p = corrupted.probs();
            let q: Vec<f64> = p
                .iter()
                .zip(&t_star)
                .map(|(p, t)| (p + t).max(0.0))
                .collect();
            let grid = corrupted.grid();
            controls = table_1d(
                controls_header(false),
                grid,
                [&base.z_true, &base.z_corrupted, &z_rock],
            );
            states = table_1d(
                states_header(false),
                grid,
                [
                    &clean.mean_state(&base.z_true, clean.probs())?,
                    &corrupted.mean_state(&base.z_corrupted, p)?,
                    &corrupted.mean_state(&z_rock, &q)?,
                ],
            );
            let flags = deleted_flags(p, &t_star);
            corrupted_deleted = Some(count_deleted(&flags, 0..1));
            clean_deleted = Some(count_deleted(&flags, 1..2));
            t_vector = t_table(p, &t_star, &flags);
            adi_trace = joint_trace(&report);
        }
        Setup::Ex2 {
            clean,
            corrupted,
            n_corrupted,
        } => {
            let adi = ReweightingAdi {
                saa: corrupted,
                theta,
            };
            let z0 = vec![1.0; corrupted.grid().n_nodes()];
            let res = run_adi(&adi, &z0, &adi_config(cfg))?;
            adi_outer = res.trace.last().map_or(0, |r| r.outer_iter);
            rock_stats = PhaseStats::sum(
                res.trace.iter().map(|r| &r.report),
                adi_termination_str(res.termination),
            );
            adi_trace = trace_table(&res);
            z_rock = res.z;
            t_star = res.t;
            metric = corrupted.metric();
            n_dof = z_rock.len();
            let p = corrupted.probs();
            let q: Vec<f64> = p
                .iter()
                .zip(&t_star)
                .map(|(p, t)| (p + t).max(0.0))
                .collect();
            let grid = corrupted.grid();
            controls = table_1d(
                controls_header(false),
                grid,
                [&base.z_true, &base.z_corrupted, &z_rock],
            );
            states = table_1d(
                states_header(false),
                grid,
                [
                    &clean.mean_state(&base.z_true, clean.probs())?,
                    &corrupted.mean_state(&base.z_corrupted, p)?,
                    &corrupted.mean_state(&z_rock, &q)?,
                ],
            );
            let flags = deleted_flags(p, &t_star);
            corrupted_deleted = Some(count_deleted(&flags, 0..*n_corrupted));
            clean_deleted = Some(count_deleted(&flags, *n_corrupted..p.len()));
            t_vector = t_table(p, &t_star, &flags);
        }
        Setup::Ex3 { truth, corrupted } => {
            let prob = corrupted.clone().with_theta(theta);
            let z0 = vec![1.0; prob.space().n_dof()];
            let res = run_adi(&SupportAdi { prob: &prob }, &z0, &adi_config(cfg))?;
            adi_outer = res.trace.last().map_or(0, |r| r.outer_iter);
            rock_stats = PhaseStats::sum(
                res.trace.iter().map(|r| &r.report),
                adi_termination_str(res.termination),
            );
            adi_trace = trace_table(&res);
            z_rock = res.z;
            t_star = res.t;
            metric = prob.z_metric();
            n_dof = z_rock.len();
            let zeros = vec![0.0; prob.nodes().len()];
            let norms_corrupted = prob.state_norms(&base.z_corrupted, &zeros)?;
            let norms_rock = prob.state_norms(&z_rock, &t_star)?;
            v_ratio = Some(variance_ratio(
                &norms_corrupted,
                &norms_rock,
                prob.weights(),
            )?);
            let space = prob.space();
            controls = table_2d(
                controls_header(true),
                space,
                [&base.z_true, &base.z_corrupted, &z_rock],
            );
            states = table_2d(
                states_header(true),
                space,
                [
                    &truth.mean_state(&base.z_true, &[0.0])?,
                    &prob.mean_state(&base.z_corrupted, &zeros)?,
                    &prob.mean_state(&z_rock, &t_star)?,
                ],
            );
            t_vector = t_table(prob.nodes(), &t_star, &vec![false; t_star.len()]);
        }
    }
    let e_rel_corrupted = relative_l2_error(&base.z_corrupted, &base.z_true, &metric)?;
    let e_rel_rock = relative_l2_error(&z_rock, &base.z_true, &metric)?;
    let metrics = MetricsReport {
        example: cfg.example.to_string(),
        corruption: cfg.corruption,
        theta,
        seed: cfg.seed,
        e_rel_corrupted,
        e_rel_rock,
        e_ratio: ratio(e_rel_corrupted, e_rel_rock),
        linf_true_rock: linf_distance(&base.z_true, &z_rock),
        v_ratio,
        corrupted_deleted,
        clean_deleted,
        true_stats: base.true_stats.clone(),
        corrupted_stats: base.corrupted_stats.clone(),
        rock_stats,
        adi_outer,
        n_dof,
    };
    Ok(ExperimentOutput {
        metrics,
        z_true: base.z_true.clone(),
        z_corrupted: base.z_corrupted.clone(),
        z_rock,
        t_star,
        controls,
        states,
        t_vector,
        adi_trace,
    })
}

fn table_1d_points(header: Vec<&str>, xs: &[f64], cols: [&[f64]; 3]) -> Table {
    let mut t = Table::new(&header);
    for (i, &x) in xs.iter().enumerate() {
        t.push(vec![
            x.into(),
            cols[0][i].into(),
            cols[1][i].into(),
            cols[2][i].into(),
        ]);
    }
    t
}

/// True, corrupted and relaxed solves for `cfg`; writes the CSV files when
/// `cfg.output_dir` is set.
pub fn run_example(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let prep = prepare(cfg)?;
    let out = rock(&prep, cfg.theta)?;
    if let Some(dir) = &cfg.output_dir {
        out.write(dir)?;
    }
    Ok(out)
}

/// One relaxed solve per theta, sharing the true and corrupted solves.
/// With an output directory, writes `sweep.csv` plus one subdirectory per theta.
pub fn theta_sweep(cfg: &ExperimentConfig, thetas: &[f64]) -> Result<Vec<ExperimentOutput>> {
    if thetas.is_empty() {
        return Err(Error::Config("theta sweep needs at least one theta".into()));
    }
    for &th in thetas {
        let mut c = cfg.clone();
        c.theta = th;
        c.validate()?;
    }
    let prep = prepare(cfg)?;
    let outs = thetas
        .iter()
        .map(|&th| rock(&prep, th))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        let reports: Vec<MetricsReport> = outs.iter().map(|o| o.metrics.clone()).collect();
        metrics_table(&reports).write(&dir.join("sweep.csv"))?;
        for (i, o) in outs.iter().enumerate() {
            o.write(&dir.join(format!("theta_{i}")))?;
        }
    }
    Ok(outs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub k: usize,
    pub eps: f64,
    pub theta: f64,
    pub t2: f64,
    /// `||z_rock,k - z_true||` in `L^2`.
    pub distance: f64,
    pub report: OptimizerReport,
}

/// `eps_k = 2^-k`, `theta_k = eps_k^(-1/2)` for `k = 1..=k_max`.
pub fn standard_gamma_schedule(k_max: usize) -> Vec<(f64, f64)> {
    (1..=k_max)
        .map(|k| {
            let eps = 0.5f64.powi(k as i32);
            (eps, eps.powf(-0.5))
        })
        .collect()
}

/// Distance of the relaxed minimizer to the uncorrupted one along a
/// schedule of `(eps_k, theta_k)`; only the two-atom example is supported.
pub fn gamma_schedule_study(
    cfg: &ExperimentConfig,
    schedule: &[(f64, f64)],
) -> Result<Vec<GammaRow>> {
    if cfg.example != Example::Ex1 {
        return Err(Error::Config(format!(
            "gamma study is implemented for ex1, not {}",
            cfg.example
        )));
    }
    if schedule.is_empty() {
        return Err(Error::Config("empty gamma schedule".into()));
    }
    let mut rows = Vec::with_capacity(schedule.len());
    let mut z_true: Option<(Vec<f64>, Metric)> = None;
    for (k, &(eps, theta)) in schedule.iter().enumerate() {
        let mut c = cfg.clone();
        c.corruption = eps;
        c.theta = theta;
        c.validate()?;
        let (clean, corrupted) = ex1_problems(&c, eps)?;
        if z_true.is_none() {
            z_true = Some((gd_solve(&c, &clean)?.0, clean.metric()));
        }
        let (zt, metric) = z_true.as_ref().expect("set above");
        let (z, t2, report) = ex1_rock(&c, &corrupted, theta)?;
        let diff: Vec<f64> = z.iter().zip(zt).map(|(a, b)| a - b).collect();
        rows.push(GammaRow {
            k: k + 1,
            eps,
            theta,
            t2,
            distance: metric.norm(&diff),
            report,
        });
    }
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        gamma_table(&rows).write(&dir.join("gamma.csv"))?;
    }
    Ok(rows)
}

pub fn gamma_table(rows: &[GammaRow]) -> Table {
    let mut t = Table::new(&GAMMA_HEADER);
    for r in rows {
        t.push(vec![
            r.k.into(),
            r.eps.into(),
            r.theta.into(),
            r.t2.into(),
            r.distance.into(),
            r.report.iterations.into(),
            r.report.termination.as_str().into(),
            Cell::Int((r.report.termination == Termination::Tolerance) as i64),
        ]);
    }
    t
}
