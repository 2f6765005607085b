//! P1 finite elements on the ring-triangulated unit disk for
//! `-div(a grad u) = z` with `u = 0` on the boundary.

use std::collections::BTreeSet;

use crate::error::{check_len, Error, Result};
use crate::mesh::DiskMesh2D;

const NOT_FREE: usize = usize::MAX;

/// Compressed sparse row matrix. Used for the (symmetric) stiffness and mass matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

pub type SparseSPDMatrix = CsrMatrix;

impl CsrMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![1.0; dim],
        }
    }

    /// Build from dense rows, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `x^T A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[k] * y[self.col_idx[k]];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let scale = self.values[k].abs().max(1.0);
                if (self.values[k] - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients, started from zero.
///
/// Stops once `||A x - b|| / ||b|| <= tol`; gives up after `10 * dim` iterations.
pub fn solve_cg(a: &CsrMatrix, rhs: &[f64], tol: f64) -> Result<CgOutcome> {
    check_len(a.dim, rhs.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cg tolerance must be positive, got {tol}"
        )));
    }
    let n = a.dim;
    let b_norm = norm2(rhs);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut zv: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = zv.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &zv);
    let max_iter = 10 * n.max(1);
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonConvergence {
                solver: "cg",
                iterations: it,
                residual: norm2(&r) / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm2(&r) / b_norm;
        if res <= tol {
            // Confirm against the true residual to guard against recurrence drift.
            let true_res = residual_norm(a, &x, rhs) / b_norm;
            if true_res <= tol {
                return Ok(CgOutcome {
                    x,
                    iterations: it,
                    relative_residual: true_res,
                });
            }
            r = rhs.iter().zip(a.matvec(&x)).map(|(b, ax)| b - ax).collect();
        }
        for i in 0..n {
            zv[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &zv);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = zv[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        solver: "cg",
        iterations: max_iter,
        residual: residual_norm(a, &x, rhs) / b_norm,
    })
}

fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    ax.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Envelope (profile) Cholesky factor `A = L L^T` of a symmetric positive
/// definite matrix. Row `i` of `L` is stored densely from its first nonzero
/// column of `A` to the diagonal, so fill stays inside the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim;
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for i in 0..n {
            let cols = &a.col_idx[a.row_ptr[i]..a.row_ptr[i + 1]];
            first[i] = cols.iter().copied().filter(|&j| j <= i).min().unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j <= i {
                    data[start[i] + j - first[i]] = a.values[k];
                }
            }
        }
        for i in 0..n {
            let (done, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - first[i] + 1];
            for j in first[i]..i {
                let lo = first[i].max(first[j]);
                let row_j = &done[start[j]..start[j] + j - first[j] + 1];
                let s: f64 = (lo..j)
                    .map(|k| row_i[k - first[i]] * row_j[k - first[j]])
                    .sum();
                row_i[j - first[i]] = (row_i[j - first[i]] - s) / row_j[j - first[j]];
            }
            let d = row_i[i - first[i]] - row_i[..i - first[i]].iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "matrix not positive definite at row {i}"
                )));
            }
            row_i[i - first[i]] = d.sqrt();
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let f = self.first[i];
            let s: f64 = row[..i - f].iter().zip(&y[f..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - f];
        }
        for i in (0..n).rev() {
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let f = self.first[i];
            y[i] /= row[i - f];
            let xi = y[i];
            for (l, v) in row[..i - f].iter().zip(&mut y[f..i]) {
                *v -= l * xi;
            }
        }
        Ok(y)
    }
}

/// A Dirichlet-reduced stiffness matrix, either kept sparse for conjugate
/// gradients or factored once for repeated direct solves.
#[derive(Debug, Clone)]
pub enum StiffnessOperator {
    Iterative(CsrMatrix),
    Factored(EnvelopeCholesky),
}

impl StiffnessOperator {
    pub fn factored(k: &CsrMatrix) -> Result<Self> {
        Ok(StiffnessOperator::Factored(EnvelopeCholesky::factor(k)?))
    }

    pub fn solve(&self, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        match self {
            StiffnessOperator::Iterative(k) => Ok(solve_cg(k, rhs, tol)?.x),
            StiffnessOperator::Factored(l) => l.solve(rhs),
        }
    }
}

/// Unit-coefficient P1 element stiffness `area * grad(l_i) . grad(l_j)` and the area.
pub fn p1_element_stiffness(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], f64) {
    let area = 0.5
        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut grads = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        grads[i] = [
            (p[j][1] - p[k][1]) / (2.0 * area),
            (p[k][0] - p[j][0]) / (2.0 * area),
        ];
    }
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
        }
    }
    (ke, area)
}

/// Consistent P1 element mass matrix `(area / 12) [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn p1_element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Sparsity pattern plus, per triangle, the 9 positions of its local entries.
#[derive(Debug, Clone)]
struct Pattern {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    scatter: Vec<[Option<usize>; 9]>,
}

impl Pattern {
    fn build(mesh: &DiskMesh2D, index: &[usize]) -> Self {
        let dim = index.iter().filter(|&&i| i != NOT_FREE).count();
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); dim];
        for tri in &mesh.triangles {
            for &a in tri {
                for &b in tri {
                    let (ia, ib) = (index[a], index[b]);
                    if ia != NOT_FREE && ib != NOT_FREE {
                        rows[ia].insert(ib);
                    }
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for r in &rows {
            col_idx.extend(r.iter().copied());
            row_ptr.push(col_idx.len());
        }
        let scatter = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut s = [None; 9];
                for (li, &a) in tri.iter().enumerate() {
                    for (lj, &b) in tri.iter().enumerate() {
                        let (ia, ib) = (index[a], index[b]);
                        if ia != NOT_FREE && ib != NOT_FREE {
                            let row = &col_idx[row_ptr[ia]..row_ptr[ia + 1]];
                            let k = row.binary_search(&ib).expect("pattern contains entry");
                            s[3 * li + lj] = Some(row_ptr[ia] + k);
                        }
                    }
                }
                s
            })
            .collect();
        Self {
            dim,
            row_ptr,
            col_idx,
            scatter,
        }
    }

    fn assemble<F: Fn(usize) -> [[f64; 3]; 3]>(&self, element: F) -> CsrMatrix {
        let mut values = vec![0.0; self.col_idx.len()];
        for (t, s) in self.scatter.iter().enumerate() {
            let ke = element(t);
            for (l, pos) in s.iter().enumerate() {
                if let Some(p) = pos {
                    values[*p] += ke[l / 3][l % 3];
                }
            }
        }
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        }
    }
}

/// Nodal state on the disk mesh; boundary vertices hold exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField2D {
    pub values: Vec<f64>,
}

/// P1 space on a disk mesh: precomputed element data, Dirichlet numbering,
/// the full mass matrix and the free-DOF stiffness pattern.
#[derive(Debug, Clone)]
pub struct P1Space {
    mesh: DiskMesh2D,
    free_index: Vec<usize>,
    free_vertices: Vec<usize>,
    unit_stiffness: Vec<[[f64; 3]; 3]>,
    areas: Vec<f64>,
    centroids: Vec<[f64; 2]>,
    free_pattern: Pattern,
    full_pattern: Pattern,
    mass: CsrMatrix,
}

impl P1Space {
    pub fn new(mesh: DiskMesh2D) -> Self {
        let mut free_index = vec![NOT_FREE; mesh.n_dof()];
        let mut free_vertices = Vec::new();
        for (v, &b) in mesh.boundary.iter().enumerate() {
            if !b {
                free_index[v] = free_vertices.len();
                free_vertices.push(v);
            }
        }
        let all: Vec<usize> = (0..mesh.n_dof()).collect();
        let mut unit_stiffness = Vec::with_capacity(mesh.triangles.len());
        let mut areas = Vec::with_capacity(mesh.triangles.len());
        for tri in &mesh.triangles {
            let (ke, area) = p1_element_stiffness([
                mesh.vertices[tri[0]],
                mesh.vertices[tri[1]],
                mesh.vertices[tri[2]],
            ]);
            unit_stiffness.push(ke);
            areas.push(area);
        }
        let centroids = (0..mesh.triangles.len())
            .map(|t| mesh.centroid(t))
            .collect();
        let free_pattern = Pattern::build(&mesh, &free_index);
        let full_pattern = Pattern::build(&mesh, &all);
        let mass = full_pattern.assemble(|t| p1_element_mass(areas[t]));
        Self {
            mesh,
            free_index,
            free_vertices,
            unit_stiffness,
            areas,
            centroids,
            free_pattern,
            full_pattern,
            mass,
        }
    }

    pub fn mesh(&self) -> &DiskMesh2D {
        &self.mesh
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.n_dof()
    }

    pub fn n_free(&self) -> usize {
        self.free_vertices.len()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn centroids(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    pub fn n_triangles(&self) -> usize {
        self.areas.len()
    }

    /// Evaluate `coef` at every triangle centroid, checking coercivity.
    pub fn sample_coefficient<F: Fn([f64; 2]) -> Result<f64>>(&self, coef: F) -> Result<Vec<f64>> {
        self.centroids
            .iter()
            .map(|&c| {
                let a = coef(c)?;
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::Coercivity {
                        value: a,
                        location: format!("({:.4}, {:.4})", c[0], c[1]),
                    });
                }
                Ok(a)
            })
            .collect()
    }

    /// Dirichlet-reduced stiffness for per-triangle coefficient values.
    pub fn stiffness_from_values(&self, coef_tri: &[f64]) -> Result<CsrMatrix> {
        check_len(self.n_triangles(), coef_tri.len())?;
        Ok(self
            .free_pattern
            .assemble(|t| scale3(&self.unit_stiffness[t], coef_tri[t])))
    }

    /// Stiffness over all vertices (no boundary elimination).
    pub fn full_stiffness_from_values(&self, coef_tri: &[f64]) -> Result<CsrMatrix> {
        check_len(self.n_triangles(), coef_tri.len())?;
        Ok(self
            .full_pattern
            .assemble(|t| scale3(&self.unit_stiffness[t], coef_tri[t])))
    }

    /// `sum_T w_T grad(u)|_T . grad(p)|_T |T|` for per-triangle weights `w`.
    pub fn weighted_gradient_pairing(&self, w_tri: &[f64], u: &[f64], p: &[f64]) -> f64 {
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let ke = &self.unit_stiffness[t];
            let mut local = 0.0;
            for i in 0..3 {
                let mut row = 0.0;
                for j in 0..3 {
                    row += ke[i][j] * p[tri[j]];
                }
                local += u[tri[i]] * row;
            }
            s += w_tri[t] * local;
        }
        s
    }

    /// Solve `K u_f = (M f)_f` and extend by zero to the boundary.
    pub fn solve(
        &self,
        stiffness: &CsrMatrix,
        f: &[f64],
        tol: f64,
    ) -> Result<(StateField2D, usize)> {
        let rhs = self.load(f)?;
        let out = solve_cg(stiffness, &rhs, tol)?;
        Ok((self.extend(&out.x), out.iterations))
    }

    /// As [`P1Space::solve`] with either solver behind `op`.
    pub fn solve_with(&self, op: &StiffnessOperator, f: &[f64], tol: f64) -> Result<StateField2D> {
        let rhs = self.load(f)?;
        Ok(self.extend(&op.solve(&rhs, tol)?))
    }

    fn load(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_dof(), f.len())?;
        let mf = self.mass.matvec(f);
        Ok(self.free_vertices.iter().map(|&v| mf[v]).collect())
    }

    fn extend(&self, x: &[f64]) -> StateField2D {
        let mut values = vec![0.0; self.n_dof()];
        for (k, &v) in self.free_vertices.iter().enumerate() {
            values[v] = x[k];
        }
        StateField2D { values }
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.mass.inner(v, v).max(0.0).sqrt()
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.free_index[v] != NOT_FREE
    }
}

fn scale3(m: &[[f64; 3]; 3], s: f64) -> [[f64; 3]; 3] {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

/// Default CG tolerance for state and adjoint solves.
pub const CG_TOL: f64 = 1e-10;

/// P1 stiffness with coefficient `coef` at triangle centroids, Dirichlet rows and columns removed.
pub fn assemble_stiffness<F: Fn([f64; 2]) -> f64>(space: &P1Space, coef: F) -> Result<CsrMatrix> {
    let values = space.sample_coefficient(|x| Ok(coef(x)))?;
    space.stiffness_from_values(&values)
}

/// Consistent P1 mass matrix over all vertices.
pub fn assemble_mass(space: &P1Space) -> CsrMatrix {
    space.mass().clone()
}

pub fn solve_state_2d<F: Fn([f64; 2]) -> f64>(
    space: &P1Space,
    coef: F,
    z: &[f64],
) -> Result<StateField2D> {
    let k = assemble_stiffness(space, coef)?;
    Ok(space.solve(&k, z, CG_TOL)?.0)
}

/// Adjoint with right-hand side `M (u - u*)`; same stiffness as the state.
pub fn solve_adjoint_2d<F: Fn([f64; 2]) -> f64>(
    space: &P1Space,
    coef: F,
    residual: &[f64],
) -> Result<StateField2D> {
    solve_state_2d(space, coef, residual)
}
