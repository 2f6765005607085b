//! Property checks shared by the standalone property suite and the acceptance runner.
//! Each returns `Err(description)` on the first violation.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rockrelax::elliptic_1d::solve_state_1d;
use rockrelax::elliptic_2d::{solve_state_2d, P1Space};
use rockrelax::experiments::{run_example, Example, ExperimentConfig};
use rockrelax::lp::{enumerate_vertices, solve_t_lp, TSubproblem};
use rockrelax::mesh::{DiskMesh2D, Grid1D};
use rockrelax::motivating::{phi_corrupted, MotivatingInstance};
use rockrelax::objectives::{
    grad_z_saa, objective_saa, rock_grad_ex1, rock_grad_t_ex3, rock_grad_z_ex3, rock_objective_ex1,
    rock_objective_ex2, rock_objective_ex3, Saa1D, SupportProblem2D,
};
use rockrelax::quadrature::gauss_legendre;
use rockrelax::random_field::{
    corrupt_samples, sample_standard_normal, KklCoefficient, TwoAtomLaw,
};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_kkl(n: usize, m: usize) -> Saa1D {
    let grid = Grid1D::new(64).unwrap();
    let coef = KklCoefficient::new(0.4, 10).unwrap();
    let s = corrupt_samples(&sample_standard_normal(n, 10, 3).unwrap(), m).unwrap();
    Saa1D::from_kkl(grid, &coef, &s, vec![1.0; 65], 1e-4).unwrap()
}

fn two_atom(eps: f64) -> Saa1D {
    let grid = Grid1D::new(256).unwrap();
    let target = grid.nodes().iter().map(|&x| (PI * x).sin()).collect();
    Saa1D::from_two_atoms(grid, &TwoAtomLaw::new(eps).unwrap(), target, 1e-4).unwrap()
}

fn support_problem(rings: usize, delta: f64, theta: f64) -> SupportProblem2D {
    let space = P1Space::new(DiskMesh2D::with_rings(rings).unwrap());
    let rule = gauss_legendre(8, 3.5 - delta, 3.5 + delta).unwrap();
    let w = rule.weights.iter().map(|w| w / (2.0 * delta)).collect();
    let n = space.n_dof();
    SupportProblem2D::new(
        space,
        rule.nodes,
        w,
        (3.5 - delta, 3.5 + delta),
        vec![1.0; n],
        1e-5,
        theta,
    )
    .unwrap()
}

fn random_dir(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn central<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], w: &[f64], h: f64) -> f64 {
    let xp: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(w).map(|(a, b)| a - h * b).collect();
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// Directional derivatives of every objective against central differences.
pub fn gradients_match_finite_differences() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for saa in [small_kkl(20, 2), two_atom(0.05)] {
        let z: Vec<f64> = saa
            .grid()
            .nodes()
            .iter()
            .map(|x| 1.0 + (3.0 * x).sin())
            .collect();
        let g = grad_z_saa(&saa, &z).unwrap();
        let metric = saa.metric();
        for _ in 0..10 {
            let w = random_dir(&mut rng, z.len());
            let fd = central(
                |v| objective_saa(&saa, v).unwrap(),
                &z,
                &w,
                1e-6 * (1.0 + metric.norm(&z)),
            );
            let an = metric.dot(&g, &w);
            ensure((fd - an).abs() <= 1e-4 * an.abs().max(1e-8), || {
                format!("saa z-gradient: fd {fd} vs {an}")
            })?;
        }
    }

    let e = two_atom(0.05);
    let z: Vec<f64> = e.grid().nodes().iter().map(|x| 1.0 + 3.0 * x).collect();
    for t2 in [-0.3, 0.0, 0.02] {
        let (_, gt) = rock_grad_ex1(&e, &z, t2, 1.0).unwrap();
        let fd = central(
            |v| rock_objective_ex1(&e, &z, v[0], 1.0).unwrap(),
            &[t2],
            &[1.0],
            1e-6,
        );
        ensure((fd - gt).abs() <= 1e-6 * gt.abs().max(1.0), || {
            format!("ex1 t-derivative at {t2}: fd {fd} vs {gt}")
        })?;
    }

    let p = support_problem(8, 0.3, 0.1);
    let z: Vec<f64> = p
        .space()
        .mesh()
        .vertices
        .iter()
        .map(|v| 1.0 + v[0] - 0.5 * v[1] * v[1])
        .collect();
    let t: Vec<f64> = (0..8).map(|j| -0.005 * (j as f64 - 3.5) / 3.5).collect();
    let gt = rock_grad_t_ex3(&p, &z, &t).unwrap();
    for j in 0..8 {
        let mut e_j = vec![0.0; 8];
        e_j[j] = 1.0;
        let fd = central(|v| rock_objective_ex3(&p, &z, v).unwrap(), &t, &e_j, 1e-6);
        let an = p.weights()[j] * gt[j];
        ensure((fd - an).abs() <= 1e-5 * an.abs().max(1e-10), || {
            format!("ex3 t-gradient node {j}: fd {fd} vs {an}")
        })?;
    }
    let gz = rock_grad_z_ex3(&p, &z, &t).unwrap();
    let metric = p.z_metric();
    for _ in 0..5 {
        let w = random_dir(&mut rng, z.len());
        let fd = central(
            |v| rock_objective_ex3(&p, v, &t).unwrap(),
            &z,
            &w,
            1e-6 * (1.0 + metric.norm(&z)),
        );
        let an = metric.dot(&gz, &w);
        ensure((fd - an).abs() <= 1e-3 * an.abs().max(1e-10), || {
            format!("ex3 z-gradient: fd {fd} vs {an}")
        })?;
    }
    Ok(())
}

fn error_1d(n: usize) -> f64 {
    let g = Grid1D::new(n).unwrap();
    let z: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&x| 2.0 * PI * PI * (PI * x).sin())
        .collect();
    let u = solve_state_1d(|_| 2.0, &z, &g).unwrap();
    u.values
        .iter()
        .zip(g.nodes())
        .map(|(&u, &x)| (u - (PI * x).sin()).abs())
        .fold(0.0, f64::max)
}

fn error_2d(rings: usize) -> f64 {
    let s = P1Space::new(DiskMesh2D::with_rings(rings).unwrap());
    let z = vec![4.0; s.n_dof()];
    let u = solve_state_2d(&s, |_| 1.0, &z).unwrap();
    let err: Vec<f64> = u
        .values
        .iter()
        .zip(&s.mesh().vertices)
        .map(|(&u, v)| u - (1.0 - v[0] * v[0] - v[1] * v[1]))
        .collect();
    s.l2_norm(&err)
}

/// Error ratio per halving: 4 within 15% in 1D, within 30% in 2D.
pub fn manufactured_convergence_orders() -> Check {
    let e1: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| error_1d(n)).collect();
    for w in e1.windows(2) {
        let r = w[0] / w[1];
        ensure((r - 4.0).abs() <= 0.6, || {
            format!("1D ratio {r} from {e1:?}")
        })?;
    }
    let e2: Vec<f64> = [12, 24, 48].iter().map(|&r| error_2d(r)).collect();
    for w in e2.windows(2) {
        let r = w[0] / w[1];
        ensure((r - 4.0).abs() <= 1.2, || {
            format!("2D ratio {r} from {e2:?}")
        })?;
    }
    Ok(())
}

/// Simplex t-step against brute-force vertex enumeration on random instances.
pub fn lp_matches_vertex_enumeration(instances: usize) -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for k in 0..instances {
        let n = rng.random_range(1..=6);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        probs[0] += 1.0 - probs.iter().sum::<f64>();
        let p = TSubproblem {
            costs: (0..n).map(|_| rng.random_range(0.0..10.0)).collect(),
            probs,
            theta: rng.random_range(0.0..1.0),
            stringent_bounds: rng.random(),
        };
        if p.validate().is_err() {
            continue;
        }
        let t = solve_t_lp(&p).map_err(|e| format!("instance {k}: {e}"))?;
        let oracle = enumerate_vertices(&p).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(p.is_feasible(&t, 1e-12), || {
            format!("instance {k}: infeasible {t:?}")
        })?;
        let (a, b) = (p.objective(&t), p.objective(&oracle));
        ensure((a - b).abs() <= 1e-9, || {
            format!("instance {k}: simplex {a} vs enumeration {b}")
        })?;
    }
    Ok(())
}

/// Every relaxation equals its corrupted objective at t = 0, bit for bit.
pub fn anchoring_identities() -> Check {
    for (eps, theta) in [(0.05, 1.0), (0.2, 10.0)] {
        let inst = MotivatingInstance::new(eps, theta).unwrap();
        for x in [0.0, 0.3, 1.0] {
            let (a, b) = (inst.rockafellian(x, 0.0).unwrap(), phi_corrupted(x, eps));
            ensure(a == b, || format!("motivating at x={x}: {a} vs {b}"))?;
        }
    }
    let e = two_atom(0.05);
    let z: Vec<f64> = e.grid().nodes().iter().map(|x| 1.0 + x).collect();
    let (a, b) = (
        rock_objective_ex1(&e, &z, 0.0, 1.0).unwrap(),
        objective_saa(&e, &z).unwrap(),
    );
    ensure(a == b, || format!("ex1: {a} vs {b}"))?;
    let s = small_kkl(10, 1);
    let z: Vec<f64> = s.grid().nodes().iter().map(|x| 1.0 + x).collect();
    let (a, b) = (
        rock_objective_ex2(&s, &z, &[0.0; 10], 0.05).unwrap(),
        objective_saa(&s, &z).unwrap(),
    );
    ensure(a == b, || format!("ex2: {a} vs {b}"))?;
    let p = support_problem(6, 0.3, 0.1);
    let z: Vec<f64> = p
        .space()
        .mesh()
        .vertices
        .iter()
        .map(|v| 1.0 + v[0])
        .collect();
    let t0 = vec![0.0; 8];
    let (a, b) = (
        rock_objective_ex3(&p, &z, &t0).unwrap(),
        rock_objective_ex3(&p.clone().with_theta(0.0), &z, &t0).unwrap(),
    );
    ensure(a == b, || format!("ex3: {a} vs {b}"))
}

/// The control-to-state map is linear, and the state moves continuously with the coefficient.
pub fn solution_operator_linearity_and_continuity() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let g = Grid1D::new(64).unwrap();
    let coef = |x: f64| 1.0 + 0.5 * (7.0 * x).sin();
    for _ in 0..10 {
        let z1 = random_dir(&mut rng, 65);
        let z2 = random_dir(&mut rng, 65);
        let a = rng.random_range(-3.0..3.0);
        let zs: Vec<f64> = z1.iter().zip(&z2).map(|(p, q)| a * p + q).collect();
        let (u1, u2, us) = (
            solve_state_1d(coef, &z1, &g).unwrap().values,
            solve_state_1d(coef, &z2, &g).unwrap().values,
            solve_state_1d(coef, &zs, &g).unwrap().values,
        );
        for i in 0..65 {
            let d = us[i] - a * u1[i] - u2[i];
            ensure(d.abs() <= 1e-12, || format!("1D linearity defect {d}"))?;
        }
    }
    let z = vec![1.0; 65];
    let base = solve_state_1d(coef, &z, &g).unwrap().values;
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let u = solve_state_1d(|x| coef(x) + eps, &z, &g).unwrap().values;
        let gap = u
            .iter()
            .zip(&base)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(gap < prev && gap <= 2.0 * eps, || {
            format!("coefficient perturbation {eps}: gap {gap}")
        })?;
        prev = gap;
    }

    let s = P1Space::new(DiskMesh2D::with_rings(8).unwrap());
    let c2 = |x: [f64; 2]| 1.0 + 0.5 * x[0] * x[1];
    let n = s.n_dof();
    let z1 = random_dir(&mut rng, n);
    let z2 = random_dir(&mut rng, n);
    let zs: Vec<f64> = z1.iter().zip(&z2).map(|(p, q)| p + q).collect();
    let (u1, u2, us) = (
        solve_state_2d(&s, c2, &z1).unwrap().values,
        solve_state_2d(&s, c2, &z2).unwrap().values,
        solve_state_2d(&s, c2, &zs).unwrap().values,
    );
    for i in 0..n {
        let d = us[i] - u1[i] - u2[i];
        ensure(d.abs() <= 1e-8, || format!("2D linearity defect {d}"))?;
    }
    Ok(())
}

/// An n-point Gauss rule integrates monomials up to degree 2n - 1 exactly.
pub fn gauss_exactness() -> Check {
    for n in 1..=10 {
        let (a, b) = (3.2, 3.8);
        let rule = gauss_legendre(n, a, b).unwrap();
        for deg in 0..2 * n {
            let exact = (b.powi(deg as i32 + 1) - a.powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            let got = rule.integrate(|x| x.powi(deg as i32));
            ensure((got - exact).abs() <= 1e-11 * exact.abs().max(1.0), || {
                format!("n={n} degree {deg}: {got} vs {exact}")
            })?;
        }
        // degree 2n is the first one the rule misses
        let deg = 2 * n as i32;
        let got = rule.integrate(|x| (x - 3.5).powi(deg));
        let exact = 2.0 * 0.3f64.powi(deg + 1) / (deg as f64 + 1.0);
        ensure((got - exact).abs() > 1e-6 * exact, || {
            format!("n={n} unexpectedly exact at degree {deg}")
        })?;
    }
    Ok(())
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<Vec<u8>> {
    let out = run_example(cfg).unwrap();
    [&out.controls, &out.states, &out.t_vector, &out.adi_trace]
        .iter()
        .map(|t| t.to_csv_bytes().unwrap())
        .chain(std::iter::once(
            rockrelax::experiments::metrics_table(&[out.metrics])
                .to_csv_bytes()
                .unwrap(),
        ))
        .collect()
}

/// Same configuration and seed give byte-identical CSV output.
pub fn determinism() -> Check {
    let mut ex1 = ExperimentConfig::new(Example::Ex1);
    ex1.n_cells = 64;
    let mut ex2 = ExperimentConfig::new(Example::Ex2);
    ex2.n_samples = 60;
    ex2.n_cells = 64;
    ex2.kkl_modes = 10;
    ex2.corruption = 0.1;
    for cfg in [ExperimentConfig::new(Example::Motivating), ex1, ex2] {
        ensure(csv_bytes(&cfg) == csv_bytes(&cfg), || {
            format!("{:?} output differs between runs", cfg.example)
        })?;
    }
    Ok(())
}
