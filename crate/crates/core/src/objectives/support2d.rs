use crate::elliptic_2d::{CsrMatrix, P1Space, StiffnessOperator, CG_TOL};
use crate::error::{check_len, Error, Result};
use crate::optimizers::{Metric, Problem};
use crate::random_field::{eval_osc, eval_osc_dxi};

/// Objective over a quadrature discretization of the parameter law for the
/// oscillatory coefficient on the disk:
///
/// `Phi(z, t) = 1/2 sum_j w_j ||s(xi_j + t_j, z) - u*||^2 + alpha/2 ||z||^2 + theta/2 sum_j w_j t_j^2`
///
/// with probability weights `w_j` (quadrature weights times the density) and
/// the shifted parameters confined to `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct SupportProblem2D {
    space: P1Space,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lower: f64,
    upper: f64,
    target: Vec<f64>,
    alpha: f64,
    theta: f64,
    cg_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation2D {
    pub value: f64,
    /// Riesz representer in the mass-matrix metric.
    pub grad_z: Option<Vec<f64>>,
    /// Riesz representer in the `w`-weighted metric on the nodes.
    pub grad_t: Option<Vec<f64>>,
}

impl SupportProblem2D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: P1Space,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        bounds: (f64, f64),
        target: Vec<f64>,
        alpha: f64,
        theta: f64,
    ) -> Result<Self> {
        check_len(nodes.len(), weights.len())?;
        check_len(space.n_dof(), target.len())?;
        if nodes.is_empty() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument(
                "need positive quadrature weights".into(),
            ));
        }
        if !(alpha > 0.0) || !(theta >= 0.0) {
            return Err(Error::InvalidArgument(
                "alpha must be positive and theta nonnegative".into(),
            ));
        }
        if !(bounds.0 <= bounds.1) || nodes.iter().any(|x| *x < bounds.0 || *x > bounds.1) {
            return Err(Error::InvalidArgument(
                "quadrature nodes must lie inside the bounds".into(),
            ));
        }
        Ok(Self {
            space,
            nodes,
            weights,
            lower: bounds.0,
            upper: bounds.1,
            target,
            alpha,
            theta,
            cg_tol: CG_TOL,
        })
    }

    pub fn space(&self) -> &P1Space {
        &self.space
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn z_metric(&self) -> Metric {
        Metric::Matrix(self.space.mass().clone())
    }

    pub fn t_metric(&self) -> Metric {
        Metric::Diagonal(self.weights.clone())
    }

    /// Clamp `t` so that every shifted node stays inside the bounds.
    pub fn project_t(&self, t: &mut [f64]) {
        for (tj, &xj) in t.iter_mut().zip(&self.nodes) {
            *tj = (xj + *tj).clamp(self.lower, self.upper) - xj;
        }
    }

    fn shifted(&self, t: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nodes.len(), t.len())?;
        self.nodes
            .iter()
            .zip(t)
            .enumerate()
            .map(|(j, (&x, &tj))| {
                let s = x + tj;
                if s < self.lower || s > self.upper {
                    Err(Error::Infeasible(format!(
                        "node {j}: shifted parameter {s} outside [{}, {}]",
                        self.lower, self.upper
                    )))
                } else {
                    Ok(s)
                }
            })
            .collect()
    }

    fn coefficient(&self, xi: f64) -> Result<Vec<f64>> {
        self.space.sample_coefficient(|x| eval_osc(xi, x))
    }

    /// Stiffness matrices for each shifted node.
    pub fn stiffness_for(&self, t: &[f64]) -> Result<Vec<CsrMatrix>> {
        self.shifted(t)?
            .into_iter()
            .map(|xi| self.space.stiffness_from_values(&self.coefficient(xi)?))
            .collect()
    }

    /// States `s(xi_j + t_j, z)` for every node.
    pub fn states(&self, z: &[f64], t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let ks = self.stiffness_for(t)?;
        ks.iter()
            .map(|k| Ok(self.space.solve(k, z, self.cg_tol)?.0.values))
            .collect()
    }

    /// `L^2(Omega)` norms of the node states.
    pub fn state_norms(&self, z: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .states(z, t)?
            .iter()
            .map(|u| self.space.l2_norm(u))
            .collect())
    }

    /// `sum_j w_j s(xi_j + t_j, z)`.
    pub fn mean_state(&self, z: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        let mut mean = vec![0.0; self.space.n_dof()];
        for (u, w) in self.states(z, t)?.iter().zip(&self.weights) {
            mean.iter_mut().zip(u).for_each(|(m, v)| *m += w * v);
        }
        Ok(mean)
    }

    /// Evaluate at `(z, t)` reusing `stiffness` (which must match `t`).
    pub fn evaluate_with(
        &self,
        stiffness: &[StiffnessOperator],
        z: &[f64],
        t: &[f64],
        with_grad_z: bool,
        with_grad_t: bool,
    ) -> Result<Evaluation2D> {
        check_len(self.space.n_dof(), z.len())?;
        let shifted = self.shifted(t)?;
        let mut value = 0.0;
        let mut grad_z = with_grad_z.then(|| vec![0.0; z.len()]);
        let mut grad_t = with_grad_t.then(|| vec![0.0; t.len()]);
        for (j, k) in stiffness.iter().enumerate() {
            let w = self.weights[j];
            let u = self.space.solve_with(k, z, self.cg_tol)?;
            let r: Vec<f64> = u
                .values
                .iter()
                .zip(&self.target)
                .map(|(u, t)| u - t)
                .collect();
            value += 0.5 * w * self.space.mass().inner(&r, &r);
            if with_grad_z || with_grad_t {
                let p = self.space.solve_with(k, &r, self.cg_tol)?;
                if let Some(g) = grad_z.as_mut() {
                    g.iter_mut().zip(&p.values).for_each(|(g, p)| *g += w * p);
                }
                if let Some(g) = grad_t.as_mut() {
                    let da = self
                        .space
                        .sample_coefficient(|x| eval_osc_dxi(shifted[j], x).map(|d| -d))?;
                    // da holds -da/dxi > 0, so the pairing below is -int da/dxi grad u . grad p
                    let pairing = self
                        .space
                        .weighted_gradient_pairing(&da, &u.values, &p.values);
                    g[j] = self.theta * t[j] + pairing;
                }
            }
        }
        value += 0.5 * self.alpha * self.space.mass().inner(z, z);
        value += 0.5
            * self.theta
            * t.iter()
                .zip(&self.weights)
                .map(|(t, w)| w * t * t)
                .sum::<f64>();
        if let Some(g) = grad_z.as_mut() {
            g.iter_mut().zip(z).for_each(|(g, z)| *g += self.alpha * z);
        }
        Ok(Evaluation2D {
            value,
            grad_z,
            grad_t,
        })
    }

    pub fn evaluate(
        &self,
        z: &[f64],
        t: &[f64],
        with_grad_z: bool,
        with_grad_t: bool,
    ) -> Result<Evaluation2D> {
        let ks: Vec<StiffnessOperator> = self
            .stiffness_for(t)?
            .into_iter()
            .map(StiffnessOperator::Iterative)
            .collect();
        self.evaluate_with(&ks, z, t, with_grad_z, with_grad_t)
    }
}

pub fn rock_objective_ex3(prob: &SupportProblem2D, z: &[f64], t: &[f64]) -> Result<f64> {
    Ok(prob.evaluate(z, t, false, false)?.value)
}

/// Derivative in each node value `t_j`, divided by the node weight `w_j`.
pub fn rock_grad_t_ex3(prob: &SupportProblem2D, z: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    Ok(prob
        .evaluate(z, t, false, true)?
        .grad_t
        .expect("gradient requested"))
}

pub fn rock_grad_z_ex3(prob: &SupportProblem2D, z: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    Ok(prob
        .evaluate(z, t, true, false)?
        .grad_z
        .expect("gradient requested"))
}

/// The z-objective with `t` frozen. Each node's stiffness matrix is assembled
/// and Cholesky-factored once, since every evaluation reuses it.
pub struct SupportZStep<'a> {
    prob: &'a SupportProblem2D,
    t: Vec<f64>,
    stiffness: Vec<StiffnessOperator>,
}

impl<'a> SupportZStep<'a> {
    pub fn new(prob: &'a SupportProblem2D, t: Vec<f64>) -> Result<Self> {
        let stiffness = prob
            .stiffness_for(&t)?
            .iter()
            .map(StiffnessOperator::factored)
            .collect::<Result<_>>()?;
        Ok(Self { prob, t, stiffness })
    }
}

impl Problem for SupportZStep<'_> {
    fn value(&mut self, z: &[f64]) -> Result<f64> {
        Ok(self
            .prob
            .evaluate_with(&self.stiffness, z, &self.t, false, false)?
            .value)
    }

    fn value_grad(&mut self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ev = self
            .prob
            .evaluate_with(&self.stiffness, z, &self.t, true, false)?;
        Ok((ev.value, ev.grad_z.expect("gradient requested")))
    }
}

/// The t-objective with `z` frozen.
pub struct SupportTStep<'a> {
    pub prob: &'a SupportProblem2D,
    pub z: Vec<f64>,
}

impl Problem for SupportTStep<'_> {
    fn value(&mut self, t: &[f64]) -> Result<f64> {
        Ok(self.prob.evaluate(&self.z, t, false, false)?.value)
    }

    fn value_grad(&mut self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ev = self.prob.evaluate(&self.z, t, false, true)?;
        Ok((ev.value, ev.grad_t.expect("gradient requested")))
    }
}
