//! Second-order finite differences for `-(a u')' = z` on `(0, 1)`, `u(0) = u(1) = 0`.
//!
//! The coefficient is sampled at cell midpoints, so interior row `j` reads
//! `-[a_{j+1/2} (u_{j+1} - u_j) - a_{j-1/2} (u_j - u_{j-1})] / h^2 = z_j`.
//! The operator is symmetric, so adjoint solves reuse the same matrix.

use crate::error::{check_len, Error, Result};
use crate::mesh::Grid1D;

/// Symmetric tridiagonal system over the interior unknowns.
///
/// `lower[i]` couples rows `i + 1` and `i`; `upper[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TriDiagSystem {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        thomas_solve(&self.lower, &self.diag, &self.upper, &self.rhs)
    }
}

/// Nodal state with homogeneous Dirichlet values at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField1D {
    pub values: Vec<f64>,
}

fn check_coefficients(coef_mid: &[f64], grid: &Grid1D) -> Result<()> {
    for (j, &a) in coef_mid.iter().enumerate() {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Coercivity {
                value: a,
                location: format!("x = {}", grid.midpoints()[j]),
            });
        }
    }
    Ok(())
}

/// Assemble the interior system for midpoint coefficients and nodal source values.
pub fn assemble_1d(coef_mid: &[f64], source: &[f64], grid: &Grid1D) -> Result<TriDiagSystem> {
    check_len(grid.n_cells(), coef_mid.len())?;
    check_len(grid.n_nodes(), source.len())?;
    check_coefficients(coef_mid, grid)?;
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let m = grid.n_cells() - 1;
    let diag = (0..m)
        .map(|i| (coef_mid[i] + coef_mid[i + 1]) * inv_h2)
        .collect();
    let off: Vec<f64> = (0..m.saturating_sub(1))
        .map(|i| -coef_mid[i + 1] * inv_h2)
        .collect();
    Ok(TriDiagSystem {
        lower: off.clone(),
        diag,
        upper: off,
        rhs: source[1..=m].to_vec(),
    })
}

/// Thomas algorithm for a tridiagonal system with off-diagonals of length `n - 1`.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    check_len(n, rhs.len())?;
    check_len(n.saturating_sub(1), lower.len())?;
    check_len(n.saturating_sub(1), upper.len())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::InvalidArgument("zero pivot in row 0".into()));
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::InvalidArgument(format!("zero pivot in row {i}")));
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Factored diffusion operator for one coefficient sample.
///
/// Stores the forward-elimination multipliers so that each state or adjoint
/// solve costs a single `O(n)` sweep.
#[derive(Debug, Clone)]
pub struct DiffusionOperator1D {
    grid: Grid1D,
    coef_mid: Vec<f64>,
    // sub-diagonal entries, modified super-diagonal and pivots of the LU sweep
    lower: Vec<f64>,
    c_mod: Vec<f64>,
    pivots: Vec<f64>,
}

impl DiffusionOperator1D {
    pub fn new(coef_mid: Vec<f64>, grid: &Grid1D) -> Result<Self> {
        let zeros = vec![0.0; grid.n_nodes()];
        let sys = assemble_1d(&coef_mid, &zeros, grid)?;
        let m = sys.dim();
        let mut c_mod = vec![0.0; m];
        let mut pivots = vec![0.0; m];
        for i in 0..m {
            let p = if i == 0 {
                sys.diag[0]
            } else {
                sys.diag[i] - sys.lower[i - 1] * c_mod[i - 1]
            };
            pivots[i] = p;
            if i + 1 < m {
                c_mod[i] = sys.upper[i] / p;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            coef_mid,
            lower: sys.lower,
            c_mod,
            pivots,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(coef: F, grid: &Grid1D) -> Result<Self> {
        Self::new(grid.midpoints().into_iter().map(coef).collect(), grid)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn coef_mid(&self) -> &[f64] {
        &self.coef_mid
    }

    /// Solve with nodal right-hand side `f` (boundary entries ignored).
    pub fn solve(&self, f: &[f64]) -> Result<StateField1D> {
        check_len(self.grid.n_nodes(), f.len())?;
        let m = self.pivots.len();
        let mut u = vec![0.0; m + 2];
        let d = &mut u[1..=m];
        d[0] = f[1] / self.pivots[0];
        for i in 1..m {
            d[i] = (f[i + 1] - self.lower[i - 1] * d[i - 1]) / self.pivots[i];
        }
        for i in (0..m.saturating_sub(1)).rev() {
            d[i] -= self.c_mod[i] * d[i + 1];
        }
        Ok(StateField1D { values: u })
    }
}

/// `s(xi, z)`: state for coefficient `coef` and control `z`.
pub fn solve_state_1d<F: Fn(f64) -> f64>(
    coef: F,
    z: &[f64],
    grid: &Grid1D,
) -> Result<StateField1D> {
    let op = DiffusionOperator1D::from_fn(coef, grid)?;
    op.solve(z)
}

/// Adjoint state with right-hand side `u - u*`; the operator is self-adjoint.
pub fn solve_adjoint_1d<F: Fn(f64) -> f64>(
    coef: F,
    residual: &[f64],
    grid: &Grid1D,
) -> Result<StateField1D> {
    solve_state_1d(coef, residual, grid)
}

/// Discrete `H^1_0` seminorm `sqrt(sum_cells ((u_{j+1} - u_j) / h)^2 h)`.
pub fn h1_seminorm(u: &[f64], grid: &Grid1D) -> f64 {
    let h = grid.h();
    u.windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / h;
            d * d * h
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn single_interior_node_stencil() {
        let g = Grid1D::new(2).unwrap();
        let sys = assemble_1d(&[1.0, 1.0], &[0.0, 3.0, 0.0], &g).unwrap();
        assert_eq!(sys.diag, vec![8.0]);
        assert_eq!(sys.rhs, vec![3.0]);
        assert!(sys.lower.is_empty() && sys.upper.is_empty());
    }

    #[test]
    fn assembly_linear_in_coefficient_and_zero_source() {
        let g = Grid1D::new(8).unwrap();
        let z = vec![0.0; 9];
        let s1 = assemble_1d(&[1.0; 8], &z, &g).unwrap();
        let s2 = assemble_1d(&[2.0; 8], &z, &g).unwrap();
        for (a, b) in s1.diag.iter().zip(&s2.diag) {
            assert_eq!(2.0 * a, *b);
        }
        for (a, b) in s1.lower.iter().zip(&s2.lower) {
            assert_eq!(2.0 * a, *b);
        }
        assert!(s1.rhs.iter().all(|&r| r == 0.0));
        assert_eq!(s1.lower, s1.upper);
        assert!(s1.diag.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn rejects_non_positive_coefficient() {
        let g = Grid1D::new(4).unwrap();
        let err = assemble_1d(&[1.0, 0.0, 1.0, 1.0], &[0.0; 5], &g).unwrap_err();
        assert!(matches!(err, Error::Coercivity { .. }));
        assert!(solve_state_1d(|x| x - 0.5, &[1.0; 5], &g).is_err());
    }

    fn manufactured_error(n: usize) -> f64 {
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

    #[test]
    fn manufactured_solution() {
        assert!(manufactured_error(256) <= 5e-4);
    }

    #[test]
    fn second_order_convergence() {
        let e = [
            manufactured_error(64),
            manufactured_error(128),
            manufactured_error(256),
        ];
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() <= 0.6, "ratio {ratio}");
        }
    }

    #[test]
    fn zero_source_and_boundary_values() {
        let g = Grid1D::new(16).unwrap();
        let u = solve_state_1d(|x| 1.0 + x, &[0.0; 17], &g).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
        let u = solve_state_1d(|x| 1.0 + x, &[1.0; 17], &g).unwrap();
        assert_eq!(u.values[0], 0.0);
        assert_eq!(u.values[16], 0.0);
    }

    #[test]
    fn residual_is_tiny() {
        let g = Grid1D::new(256).unwrap();
        let coef: Vec<f64> = g
            .midpoints()
            .iter()
            .map(|&x| 1.0 + 0.5 * (7.0 * x).sin())
            .collect();
        let z: Vec<f64> = g.nodes().iter().map(|&x| (3.0 * x).cos()).collect();
        let sys = assemble_1d(&coef, &z, &g).unwrap();
        let x = sys.solve().unwrap();
        let r = sys.apply(&x);
        let num: f64 = r
            .iter()
            .zip(&sys.rhs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let den: f64 = sys.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(num / den < 1e-12);
        let op = DiffusionOperator1D::new(coef, &g).unwrap();
        let u = op.solve(&z).unwrap();
        for (a, b) in u.values[1..256].iter().zip(&x) {
            assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn adjoint_manufactured() {
        let g = Grid1D::new(256).unwrap();
        let r: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| 2.0 * PI * PI * (PI * x).sin())
            .collect();
        let p = solve_adjoint_1d(|_| 2.0, &r, &g).unwrap();
        for (&p, &x) in p.values.iter().zip(g.nodes()) {
            assert!((p - (PI * x).sin()).abs() <= 5e-4);
        }
        let p0 = solve_adjoint_1d(|_| 2.0, &[0.0; 257], &g).unwrap();
        assert!(p0.values.iter().all(|&v| v == 0.0));
    }

    /// Dense Gaussian elimination, independent of the Thomas sweep.
    fn dense_solve(sys: &TriDiagSystem) -> Vec<f64> {
        let m = sys.dim();
        let mut a = vec![vec![0.0; m + 1]; m];
        for i in 0..m {
            a[i][i] = sys.diag[i];
            if i > 0 {
                a[i][i - 1] = sys.lower[i - 1];
            }
            if i + 1 < m {
                a[i][i + 1] = sys.upper[i];
            }
            a[i][m] = sys.rhs[i];
        }
        for k in 0..m {
            for i in k + 1..m {
                let f = a[i][k] / a[k][k];
                for j in k..=m {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][m] - s) / a[i][i];
        }
        x
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn adjoint_identity(seed in proptest::collection::vec(-1.0f64..1.0, 33), shift in 0.0f64..3.0) {
            let g = Grid1D::new(32).unwrap();
            let coef = |x: f64| 1.5 + (5.0 * x + shift).sin();
            let z = seed.clone();
            let target: Vec<f64> = g.nodes().iter().map(|&x| (PI * x).sin()).collect();
            let u = solve_state_1d(coef, &z, &g).unwrap();
            let res: Vec<f64> = u.values.iter().zip(&target).map(|(a, b)| a - b).collect();
            let p = solve_adjoint_1d(coef, &res, &g).unwrap();
            // <p, z> and <u - u*, s(z)> in the interior-node inner product (h * sum);
            // boundary nodes carry zero state so the trapezoid ends drop out.
            let h = g.h();
            let lhs: f64 = (1..32).map(|j| p.values[j] * z[j] * h).sum();
            let rhs: f64 = (1..32).map(|j| res[j] * u.values[j] * h).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));

            let sys = assemble_1d(&g.midpoints().iter().map(|&x| coef(x)).collect::<Vec<_>>(), &z, &g).unwrap();
            let dense = dense_solve(&sys);
            for (a, b) in dense.iter().zip(&u.values[1..32]) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn linearity_in_control(z in proptest::collection::vec(-5.0f64..5.0, 17), w in proptest::collection::vec(-5.0f64..5.0, 17), eps in 1e-6f64..1.0) {
            let g = Grid1D::new(16).unwrap();
            let coef = |x: f64| 1.0 + x * x;
            let zeps: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
            let u = solve_state_1d(coef, &z, &g).unwrap();
            let ue = solve_state_1d(coef, &zeps, &g).unwrap();
            let uw = solve_state_1d(coef, &w, &g).unwrap();
            let diff: Vec<f64> = ue.values.iter().zip(&u.values).map(|(a, b)| a - b).collect();
            let lhs = h1_seminorm(&diff, &g);
            let rhs = eps * h1_seminorm(&uw.values, &g);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
            let z10: Vec<f64> = z.iter().map(|v| 10.0 * v).collect();
            let u10 = solve_state_1d(coef, &z10, &g).unwrap();
            for (a, b) in u10.values.iter().zip(&u.values) {
                prop_assert!((a - 10.0 * b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn control_continuity_shrinks_with_eps() {
        let g = Grid1D::new(64).unwrap();
        let z: Vec<f64> = g.nodes().iter().map(|&x| 1.0 + x).collect();
        let w: Vec<f64> = g.nodes().iter().map(|&x| (9.0 * x).cos()).collect();
        let u = solve_state_1d(|_| 1.0, &z, &g).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let eps = 10f64.powi(-k);
            let ze: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
            let ue = solve_state_1d(|_| 1.0, &ze, &g).unwrap();
            let d: Vec<f64> = ue
                .values
                .iter()
                .zip(&u.values)
                .map(|(a, b)| a - b)
                .collect();
            let n = h1_seminorm(&d, &g);
            assert!(n < prev);
            prev = n;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn coefficient_continuity_constant_stable_under_refinement() {
        // ||s(xi_eps, z) - s(xi, z)||_{H1} <= C max|a_eps - a| with C fitted on a coarse grid.
        let base = |x: f64| 1.0 + 0.5 * (4.0 * x).sin();
        let ratio = |n: usize, eps: f64| {
            let g = Grid1D::new(n).unwrap();
            let z: Vec<f64> = g.nodes().iter().map(|&x| 1.0 + x).collect();
            let u = solve_state_1d(base, &z, &g).unwrap();
            let ue = solve_state_1d(|x| base(x) + eps * (1.0 + x), &z, &g).unwrap();
            let d: Vec<f64> = ue
                .values
                .iter()
                .zip(&u.values)
                .map(|(a, b)| a - b)
                .collect();
            h1_seminorm(&d, &g) / (2.0 * eps)
        };
        let c = ratio(16, 1e-2) * 1.5;
        for n in [32, 64, 128, 256] {
            for eps in [1e-1, 1e-2, 1e-4] {
                assert!(ratio(n, eps) <= c, "n={n} eps={eps}");
            }
        }
    }
}
