//! Bounded-variable revised simplex and the sample-reweighting subproblem
//! `min sum c_i t_i + theta ||t||_1  s.t.  sum t_i = 0,  -p_i <= t_i <= u_i`.

use crate::error::{check_len, Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;

/// `min c^T x` subject to `A x = b` and `lower <= x <= upper` (all bounds finite).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedLp {
    pub costs: Vec<f64>,
    /// Constraint matrix, one dense row per equality.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    cols: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    pivots: usize,
}

impl Tableau {
    fn column(&self, j: usize) -> Vec<f64> {
        let a = &self.cols[j];
        (0..self.m)
            .map(|i| (0..self.m).map(|k| self.binv[i][k] * a[k]).sum())
            .collect()
    }

    /// Run simplex iterations for `costs` with Bland's rule. Returns the number of pivots.
    fn optimize(&mut self, costs: &[f64]) -> Result<()> {
        let n = self.cols.len();
        let max_pivots = 50 * (n + self.m) + 1000;
        loop {
            if self.pivots > max_pivots {
                return Err(Error::NonConvergence {
                    solver: "simplex",
                    iterations: self.pivots,
                    residual: f64::NAN,
                });
            }
            // duals y^T = c_B^T B^{-1}
            let y: Vec<f64> = (0..self.m)
                .map(|k| {
                    (0..self.m)
                        .map(|i| costs[self.basis[i]] * self.binv[i][k])
                        .sum()
                })
                .collect();
            let mut entering = None;
            for j in 0..n {
                if self.state[j] == State::Basic || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let d = costs[j] - self.cols[j].iter().zip(&y).map(|(a, y)| a * y).sum::<f64>();
                let scale = 1.0 + costs[j].abs();
                if (self.state[j] == State::AtLower && d < -COST_TOL * scale)
                    || (self.state[j] == State::AtUpper && d > COST_TOL * scale)
                {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let dir = if self.state[j] == State::AtLower {
                1.0
            } else {
                -1.0
            };
            let w = self.column(j);
            // basic variables move by -dir * step * w
            let mut best = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, State)> = None;
            for (i, &wi) in w.iter().enumerate() {
                let v = self.basis[i];
                let rate = -dir * wi;
                let (ratio, bound) = if rate < -PIVOT_TOL {
                    ((self.x[v] - self.lower[v]).max(0.0) / -rate, State::AtLower)
                } else if rate > PIVOT_TOL {
                    if !self.upper[v].is_finite() {
                        continue;
                    }
                    ((self.upper[v] - self.x[v]).max(0.0) / rate, State::AtUpper)
                } else {
                    continue;
                };
                let better = match leave {
                    None => ratio < best || (ratio == best && !best.is_finite()),
                    Some((li, _)) => ratio < best || (ratio == best && v < self.basis[li]),
                };
                if better || (leave.is_none() && ratio < best) {
                    best = ratio;
                    leave = Some((i, bound));
                }
            }
            if !best.is_finite() {
                return Err(Error::InvalidArgument("linear program is unbounded".into()));
            }
            for (i, &wi) in w.iter().enumerate() {
                let v = self.basis[i];
                self.x[v] -= dir * best * wi;
            }
            self.pivots += 1;
            match leave {
                None => {
                    // bound flip of the entering variable
                    self.state[j] = if dir > 0.0 {
                        State::AtUpper
                    } else {
                        State::AtLower
                    };
                    self.x[j] = if dir > 0.0 {
                        self.upper[j]
                    } else {
                        self.lower[j]
                    };
                }
                Some((r, bound)) => {
                    self.x[j] += dir * best;
                    let v = self.basis[r];
                    self.x[v] = if bound == State::AtLower {
                        self.lower[v]
                    } else {
                        self.upper[v]
                    };
                    self.state[v] = bound;
                    self.state[j] = State::Basic;
                    self.basis[r] = j;
                    let piv = w[r];
                    let row_r: Vec<f64> = self.binv[r].iter().map(|v| v / piv).collect();
                    for i in 0..self.m {
                        if i == r {
                            continue;
                        }
                        let f = w[i];
                        if f != 0.0 {
                            for k in 0..self.m {
                                self.binv[i][k] -= f * row_r[k];
                            }
                        }
                    }
                    self.binv[r] = row_r;
                }
            }
        }
    }
}

/// Two-phase bounded-variable revised simplex (dense basis inverse, Bland's rule).
pub fn solve_bounded_lp(lp: &BoundedLp) -> Result<LpSolution> {
    let n = lp.costs.len();
    let m = lp.rows.len();
    check_len(n, lp.lower.len())?;
    check_len(n, lp.upper.len())?;
    check_len(m, lp.rhs.len())?;
    for row in &lp.rows {
        check_len(n, row.len())?;
    }
    for j in 0..n {
        if !(lp.lower[j].is_finite() && lp.upper[j].is_finite()) || lp.lower[j] > lp.upper[j] {
            return Err(Error::InvalidArgument(format!(
                "bad bounds for variable {j}"
            )));
        }
    }
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| lp.rows.iter().map(|r| r[j]).collect())
        .collect();
    let mut x = lp.lower.clone();
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut state = vec![State::AtLower; n];
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let resid = lp.rhs[i] - (0..n).map(|j| lp.rows[i][j] * x[j]).sum::<f64>();
        let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
        let mut col = vec![0.0; m];
        col[i] = sign;
        cols.push(col);
        x.push(resid.abs());
        lower.push(0.0);
        upper.push(f64::INFINITY);
        state.push(State::Basic);
        basis.push(n + i);
    }
    let binv: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = vec![0.0; m];
            let sign = cols[n + i][i];
            r[i] = sign;
            r
        })
        .collect();
    let mut tab = Tableau {
        m,
        cols,
        lower,
        upper,
        x,
        state,
        basis,
        binv,
        pivots: 0,
    };
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|c| *c = 1.0);
    tab.optimize(&phase1)?;
    let infeas: f64 = tab.x[n..].iter().sum();
    let scale = 1.0 + lp.rhs.iter().map(|v| v.abs()).sum::<f64>();
    if infeas > 1e-9 * scale {
        return Err(Error::Infeasible(format!(
            "linear program infeasible (residual {infeas:e})"
        )));
    }
    for a in n..n + m {
        tab.upper[a] = 0.0;
        if tab.state[a] != State::Basic {
            tab.x[a] = 0.0;
            tab.state[a] = State::AtLower;
        }
    }
    let mut phase2 = lp.costs.clone();
    phase2.extend(std::iter::repeat(0.0).take(m));
    tab.optimize(&phase2)?;
    let xs: Vec<f64> = (0..n)
        .map(|j| tab.x[j].clamp(lp.lower[j], lp.upper[j]))
        .collect();
    let objective = xs.iter().zip(&lp.costs).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        x: xs,
        objective,
        pivots: tab.pivots,
    })
}

/// Reweighting subproblem for one fixed control.
#[derive(Debug, Clone, PartialEq)]
pub struct TSubproblem {
    pub costs: Vec<f64>,
    pub probs: Vec<f64>,
    pub theta: f64,
    /// Upper bound `min(p_i, 1 - p_i)` when set, `1 - p_i` otherwise.
    pub stringent_bounds: bool,
}

impl TSubproblem {
    pub fn validate(&self) -> Result<()> {
        check_len(self.probs.len(), self.costs.len())?;
        if self.probs.is_empty() {
            return Err(Error::InvalidArgument("empty subproblem".into()));
        }
        if !(self.theta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "theta must be nonnegative, got {}",
                self.theta
            )));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "probabilities must lie on the simplex".into(),
            ));
        }
        Ok(())
    }

    pub fn upper(&self, i: usize) -> f64 {
        let p = self.probs[i];
        if self.stringent_bounds {
            p.min(1.0 - p)
        } else {
            1.0 - p
        }
    }

    pub fn objective(&self, t: &[f64]) -> f64 {
        t.iter()
            .zip(&self.costs)
            .map(|(t, c)| c * t + self.theta * t.abs())
            .sum()
    }

    pub fn is_feasible(&self, t: &[f64], tol: f64) -> bool {
        t.len() == self.probs.len()
            && t.iter().sum::<f64>().abs() <= tol
            && t.iter()
                .enumerate()
                .all(|(i, &ti)| ti >= -self.probs[i] - tol && ti <= self.upper(i) + tol)
    }

    /// Split `t = t+ - t-` into a bounded LP over `2N` variables.
    fn split(&self) -> BoundedLp {
        let n = self.probs.len();
        let mut costs = Vec::with_capacity(2 * n);
        let mut row = Vec::with_capacity(2 * n);
        let mut upper = Vec::with_capacity(2 * n);
        for i in 0..n {
            costs.push(self.costs[i] + self.theta);
            row.push(1.0);
            upper.push(self.upper(i).max(0.0));
        }
        for i in 0..n {
            costs.push(-self.costs[i] + self.theta);
            row.push(-1.0);
            upper.push(self.probs[i]);
        }
        BoundedLp {
            costs,
            rows: vec![row],
            rhs: vec![0.0],
            lower: vec![0.0; 2 * n],
            upper,
        }
    }
}

fn merge(prob: &TSubproblem, x: &[f64]) -> Vec<f64> {
    let n = prob.probs.len();
    (0..n)
        .map(|i| (x[i] - x[n + i]).clamp(-prob.probs[i], prob.upper(i)))
        .collect()
}

/// Exact vertex solution of the reweighting subproblem.
pub fn solve_t_lp(prob: &TSubproblem) -> Result<Vec<f64>> {
    prob.validate()?;
    let sol = solve_bounded_lp(&prob.split())?;
    Ok(merge(prob, &sol.x))
}

/// Brute-force optimum over the basic feasible solutions of the split LP (`N <= 8`).
pub fn enumerate_vertices(prob: &TSubproblem) -> Result<Vec<f64>> {
    prob.validate()?;
    let n = prob.probs.len();
    if n > 8 {
        return Err(Error::InvalidArgument(format!(
            "vertex enumeration limited to N <= 8, got {n}"
        )));
    }
    let lp = prob.split();
    let nv = 2 * n;
    let row = &lp.rows[0];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for basic in 0..nv {
        for mask in 0u32..(1 << (nv - 1)) {
            let mut x = vec![0.0; nv];
            let mut bit = 0;
            for j in 0..nv {
                if j == basic {
                    continue;
                }
                x[j] = if mask >> bit & 1 == 1 {
                    lp.upper[j]
                } else {
                    lp.lower[j]
                };
                bit += 1;
            }
            let rest: f64 = (0..nv).filter(|&j| j != basic).map(|j| row[j] * x[j]).sum();
            let xb = -rest / row[basic];
            if xb < lp.lower[basic] - 1e-12 || xb > lp.upper[basic] + 1e-12 {
                continue;
            }
            x[basic] = xb.clamp(lp.lower[basic], lp.upper[basic]);
            let obj: f64 = x.iter().zip(&lp.costs).map(|(a, b)| a * b).sum();
            if best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-15) {
                best = Some((obj, x));
            }
        }
    }
    let (_, x) = best.expect("t = 0 is always a vertex-reachable feasible point");
    Ok(merge(prob, &x))
}

/// Sample `i` counts as deleted when `p_i + t_i <= 1e-9 / N`.
pub fn deleted_flags(probs: &[f64], t: &[f64]) -> Vec<bool> {
    let thresh = 1e-9 / probs.len().max(1) as f64;
    probs.iter().zip(t).map(|(p, t)| p + t <= thresh).collect()
}
