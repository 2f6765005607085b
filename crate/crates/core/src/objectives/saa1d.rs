use crate::elliptic_1d::DiffusionOperator1D;
use crate::error::{check_len, Error, Result};
use crate::mesh::Grid1D;
use crate::optimizers::{Metric, Problem};
use crate::quadrature::trapezoid_weights;
use crate::random_field::{KklCoefficient, SampleSet, TwoAtomLaw};

/// Discrete-measure objective `1/2 sum q_i ||s(xi_i, z) - u*||^2 + alpha/2 ||z||^2` on a 1D grid,
/// with `L^2` norms from the trapezoid rule. Each sample's operator is factored once.
#[derive(Debug, Clone)]
pub struct Saa1D {
    grid: Grid1D,
    weights: Vec<f64>,
    operators: Vec<DiffusionOperator1D>,
    probs: Vec<f64>,
    target: Vec<f64>,
    alpha: f64,
}

/// Value, optional gradient and per-sample costs `1/2 ||s - u*||^2` (`None` for skipped samples).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation1D {
    pub value: f64,
    pub grad: Option<Vec<f64>>,
    pub costs: Vec<Option<f64>>,
}

impl Saa1D {
    pub fn new(
        grid: Grid1D,
        operators: Vec<DiffusionOperator1D>,
        probs: Vec<f64>,
        target: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        check_len(operators.len(), probs.len())?;
        check_len(grid.n_nodes(), target.len())?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be nonnegative".into(),
            ));
        }
        let weights = trapezoid_weights(&grid);
        Ok(Self {
            grid,
            weights,
            operators,
            probs,
            target,
            alpha,
        })
    }

    /// Equal-weight sample average over the rows of `samples` for the KKL coefficient.
    pub fn from_kkl(
        grid: Grid1D,
        coef: &KklCoefficient,
        samples: &SampleSet,
        target: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let mids = grid.midpoints();
        let operators = (0..samples.n)
            .map(|i| {
                let row = samples.row(i);
                let a = mids
                    .iter()
                    .map(|&x| coef.eval(x, row))
                    .collect::<Result<Vec<_>>>()?;
                DiffusionOperator1D::new(a, &grid)
            })
            .collect::<Result<Vec<_>>>()?;
        let p = 1.0 / samples.n as f64;
        Self::new(grid, operators, vec![p; samples.n], target, alpha)
    }

    /// Constant coefficients `a = xi_i` with probabilities from the two-atom law.
    pub fn from_two_atoms(
        grid: Grid1D,
        law: &TwoAtomLaw,
        target: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        Self::from_constants(grid, &law.atoms, law.probs.to_vec(), target, alpha)
    }

    pub fn from_constants(
        grid: Grid1D,
        atoms: &[f64],
        probs: Vec<f64>,
        target: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let operators = atoms
            .iter()
            .map(|&a| DiffusionOperator1D::from_fn(|_| a, &grid))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, operators, probs, target, alpha)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn n_samples(&self) -> usize {
        self.operators.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Trapezoid-weighted inner product in which gradients are returned.
    pub fn metric(&self) -> Metric {
        Metric::Diagonal(self.weights.clone())
    }

    pub fn l2_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weights).map(|(x, w)| w * x * x).sum()
    }

    pub fn state(&self, i: usize, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.operators[i].solve(z)?.values)
    }

    /// `sum q_i s(xi_i, z)`.
    pub fn mean_state(&self, z: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_samples(), q.len())?;
        let mut mean = vec![0.0; self.grid.n_nodes()];
        for (i, &qi) in q.iter().enumerate() {
            if qi != 0.0 {
                let u = self.state(i, z)?;
                mean.iter_mut().zip(&u).for_each(|(m, v)| *m += qi * v);
            }
        }
        Ok(mean)
    }

    /// Evaluate with weights `q`. Samples with `q_i = 0` are skipped unless `all_costs`.
    /// The gradient is the Riesz representer in [`Saa1D::metric`]:
    /// `alpha z + sum q_i p_i`, where `p_i` solves the adjoint with source `u_i - u*`.
    pub fn evaluate(
        &self,
        z: &[f64],
        q: &[f64],
        with_grad: bool,
        all_costs: bool,
    ) -> Result<Evaluation1D> {
        check_len(self.grid.n_nodes(), z.len())?;
        check_len(self.n_samples(), q.len())?;
        let mut value = 0.0;
        let mut grad = with_grad.then(|| vec![0.0; z.len()]);
        let mut costs = vec![None; q.len()];
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0.0 && !all_costs {
                continue;
            }
            let u = self.state(i, z)?;
            let r: Vec<f64> = u.iter().zip(&self.target).map(|(u, t)| u - t).collect();
            let c = 0.5 * self.l2_sq(&r);
            costs[i] = Some(c);
            value += qi * c;
            if let Some(g) = grad.as_mut() {
                if qi != 0.0 {
                    let p = self.operators[i].solve(&r)?.values;
                    g.iter_mut().zip(&p).for_each(|(g, p)| *g += qi * p);
                }
            }
        }
        value += 0.5 * self.alpha * self.l2_sq(z);
        if let Some(g) = grad.as_mut() {
            g.iter_mut().zip(z).for_each(|(g, z)| *g += self.alpha * z);
        }
        Ok(Evaluation1D { value, grad, costs })
    }
}

pub fn objective_saa(saa: &Saa1D, z: &[f64]) -> Result<f64> {
    Ok(saa.evaluate(z, saa.probs(), false, false)?.value)
}

pub fn grad_z_saa(saa: &Saa1D, z: &[f64]) -> Result<Vec<f64>> {
    Ok(saa
        .evaluate(z, saa.probs(), true, false)?
        .grad
        .expect("gradient requested"))
}

/// Per-sample linear costs `c_i = 1/2 ||s(xi_i, z) - u*||^2` of the reweighting step.
pub fn t_subproblem_costs(saa: &Saa1D, z: &[f64]) -> Result<Vec<f64>> {
    let ones = vec![1.0; saa.n_samples()];
    let ev = saa.evaluate(z, &ones, false, true)?;
    Ok(ev
        .costs
        .into_iter()
        .map(|c| c.expect("all costs requested"))
        .collect())
}

/// The z-objective with sample weights frozen at `q`.
pub struct WeightedSaa<'a> {
    pub saa: &'a Saa1D,
    pub q: Vec<f64>,
}

impl Problem for WeightedSaa<'_> {
    fn value(&mut self, z: &[f64]) -> Result<f64> {
        Ok(self.saa.evaluate(z, &self.q, false, false)?.value)
    }

    fn value_grad(&mut self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ev = self.saa.evaluate(z, &self.q, true, false)?;
        Ok((ev.value, ev.grad.expect("gradient requested")))
    }
}

fn ex1_weights(saa: &Saa1D, t2: f64) -> Result<[f64; 2]> {
    if saa.n_samples() != 2 {
        return Err(Error::InvalidArgument(
            "two-atom relaxation needs exactly two samples".into(),
        ));
    }
    let p = saa.probs();
    let (lo, hi) = (-p[1], 1.0 - p[1]);
    if !(lo..=hi).contains(&t2) {
        return Err(Error::Infeasible(format!("t2 = {t2} outside [{lo}, {hi}]")));
    }
    Ok([p[0] - t2, p[1] + t2])
}

/// Two-atom Rockafellian with `t1 = -t2` eliminated: the weights become
/// `(p1 - t2, p2 + t2)` and the penalty `theta/2 ||t||^2 = theta t2^2`.
pub fn rock_objective_ex1(saa: &Saa1D, z: &[f64], t2: f64, theta: f64) -> Result<f64> {
    let q = ex1_weights(saa, t2)?;
    Ok(saa.evaluate(z, &q, false, false)?.value + theta * t2 * t2)
}

/// Gradient in `z` (Riesz, trapezoid metric) and the derivative in `t2`,
/// `1/2 (|s_2 - u*|^2 - |s_1 - u*|^2) + 2 theta t2`.
pub fn rock_grad_ex1(saa: &Saa1D, z: &[f64], t2: f64, theta: f64) -> Result<(Vec<f64>, f64)> {
    let (_, gz, gt) = ex1_value_grad(saa, z, t2, theta)?;
    Ok((gz, gt))
}

fn ex1_value_grad(saa: &Saa1D, z: &[f64], t2: f64, theta: f64) -> Result<(f64, Vec<f64>, f64)> {
    let q = ex1_weights(saa, t2)?;
    let ev = saa.evaluate(z, &q, true, true)?;
    let c1 = ev.costs[0].expect("all costs requested");
    let c2 = ev.costs[1].expect("all costs requested");
    Ok((
        ev.value + theta * t2 * t2,
        ev.grad.expect("gradient requested"),
        c2 - c1 + 2.0 * theta * t2,
    ))
}

/// Joint variable `[z_0, ..., z_n, t2]` for projected gradient descent.
pub struct Ex1Joint<'a> {
    pub saa: &'a Saa1D,
    pub theta: f64,
}

impl Ex1Joint<'_> {
    /// Trapezoid weights for `z`, unit weight for `t2`.
    pub fn metric(&self) -> Metric {
        let mut w = trapezoid_weights(self.saa.grid());
        w.push(1.0);
        Metric::Diagonal(w)
    }

    pub fn t2_bounds(&self) -> (f64, f64) {
        let p = self.saa.probs();
        (-p[1], 1.0 - p[1])
    }
}

impl Problem for Ex1Joint<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        let (z, t2) = x.split_at(x.len() - 1);
        rock_objective_ex1(self.saa, z, t2[0], self.theta)
    }

    fn value_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (z, t2) = x.split_at(x.len() - 1);
        let (v, mut g, gt) = ex1_value_grad(self.saa, z, t2[0], self.theta)?;
        g.push(gt);
        Ok((v, g))
    }
}

/// `1/2 sum (p_i + t_i) c_i(z) + alpha/2 ||z||^2 + theta ||t||_1` under
/// `sum t = 0` and `-p_i <= t_i <= min(p_i, 1 - p_i)`.
pub fn rock_objective_ex2(saa: &Saa1D, z: &[f64], t: &[f64], theta: f64) -> Result<f64> {
    check_len(saa.n_samples(), t.len())?;
    let p = saa.probs();
    let tol = 1e-12;
    let sum: f64 = t.iter().sum();
    if sum.abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "perturbation sums to {sum}, not 0"
        )));
    }
    for (i, (&ti, &pi)) in t.iter().zip(p).enumerate() {
        if ti < -pi - tol || ti > pi.min(1.0 - pi) + tol {
            return Err(Error::Infeasible(format!(
                "t[{i}] = {ti} outside its bounds"
            )));
        }
    }
    let q: Vec<f64> = p.iter().zip(t).map(|(p, t)| p + t).collect();
    let l1: f64 = t.iter().map(|v| v.abs()).sum();
    Ok(saa.evaluate(z, &q, false, false)?.value + theta * l1)
}
