//! Spatial meshes: a uniform grid on `[0, 1]` and a ring triangulation of the unit disk.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform grid `x_j = j h` on `[0, 1]`, `h = 1 / n_cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one cell".into(),
            ));
        }
        let h = 1.0 / n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells).map(|j| j as f64 * h).collect();
        nodes[n_cells] = 1.0;
        Ok(Self { n_cells, nodes })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cell midpoints `x_{j+1/2}`, one per cell.
    pub fn midpoints(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self::new(256).expect("256 cells is a valid grid")
    }
}

/// P1 triangulation of the unit disk built from concentric rings.
///
/// Ring `k` (radius `k / R`) carries `6k` equally spaced vertices; vertex 0 is
/// the centre. Neighbouring rings are stitched by merging their angular
/// orderings, which gives `6 R^2` counter-clockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskMesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    rings: usize,
}

impl DiskMesh2D {
    /// Mesh with exactly `rings` rings (`1 + 3 R (R + 1)` vertices).
    pub fn with_rings(rings: usize) -> Result<Self> {
        if rings == 0 {
            return Err(Error::InvalidArgument(
                "disk mesh needs at least one ring".into(),
            ));
        }
        let mut vertices = vec![[0.0, 0.0]];
        let mut boundary = vec![false];
        let mut ring_start = vec![0usize];
        for k in 1..=rings {
            ring_start.push(vertices.len());
            let n = 6 * k;
            let r = k as f64 / rings as f64;
            for j in 0..n {
                let phi = 2.0 * PI * j as f64 / n as f64;
                if k == rings {
                    vertices.push([phi.cos(), phi.sin()]);
                } else {
                    vertices.push([r * phi.cos(), r * phi.sin()]);
                }
                boundary.push(k == rings);
            }
        }

        let mut triangles = Vec::with_capacity(6 * rings * rings);
        for j in 0..6 {
            triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
        }
        for k in 2..=rings {
            let (ni, no) = (6 * (k - 1), 6 * k);
            let (si, so) = (ring_start[k - 1], ring_start[k]);
            let (mut i, mut j) = (0usize, 0usize);
            while i < ni || j < no {
                // Compare next angular positions i+1 / ni against j+1 / no exactly.
                let advance_outer = i == ni || (j < no && (j + 1) * ni <= (i + 1) * no);
                if advance_outer {
                    triangles.push([si + i % ni, so + j, so + (j + 1) % no]);
                    j += 1;
                } else {
                    triangles.push([si + i, so + j % no, si + (i + 1) % ni]);
                    i += 1;
                }
            }
        }

        Ok(Self {
            vertices,
            triangles,
            boundary,
            rings,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.vertices.len()
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }
}

/// Ring mesh whose vertex count is closest to `target_dof`.
pub fn build_disk_mesh(target_dof: usize) -> Result<DiskMesh2D> {
    if target_dof < 10 {
        return Err(Error::InvalidArgument(format!(
            "disk mesh needs target_dof >= 10, got {target_dof}"
        )));
    }
    let count = |r: usize| 1 + 3 * r * (r + 1);
    let mut rings = 1;
    while count(rings + 1) <= target_dof {
        rings += 1;
    }
    if count(rings + 1).abs_diff(target_dof) < count(rings).abs_diff(target_dof) {
        rings += 1;
    }
    DiskMesh2D::with_rings(rings)
}
