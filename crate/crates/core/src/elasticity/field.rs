//! Q1 vector fields: evaluation, stresses, boundary forces and error norms.

use std::sync::Arc;

use rayon::prelude::*;

use super::shape;
use super::Material;
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh};
use crate::quadrature::{box_rule, GaussLegendre};

/// A vector field known in closed form. `gradient[i][j] = ∂u_i/∂x_j`.
pub trait AnalyticField: Send + Sync {
    fn value(&self, x: &[f64; 3]) -> [f64; 3];
    fn gradient(&self, x: &[f64; 3]) -> [[f64; 3]; 3];
}

/// `u(x) = offset + A x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub offset: [f64; 3],
    pub matrix: [[f64; 3]; 3],
}

impl LinearField {
    pub fn translation(t: [f64; 3]) -> Self {
        Self { offset: t, matrix: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Self { offset: [0.0; 3], matrix: m }
    }
}

impl AnalyticField for LinearField {
    fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut v = self.offset;
        for (i, vi) in v.iter_mut().enumerate() {
            for j in 0..3 {
                *vi += self.matrix[i][j] * x[j];
            }
        }
        v
    }

    fn gradient(&self, _x: &[f64; 3]) -> [[f64; 3]; 3] {
        self.matrix
    }
}

/// Stress `2μ e(u) + λ tr(e) I` from a displacement gradient, restricted to
/// the leading `dim × dim` block.
pub fn stress_from_gradient(dim: usize, material: &Material, g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let div: f64 = (0..dim).map(|k| g[k][k]).sum();
    let mut s = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            s[i][j] = material.mu * (g[i][j] + g[j][i]);
        }
        s[i][i] += material.lambda * div;
    }
    s
}

/// Q1 coefficient vector on a mesh, one value per `(node, component)`.
#[derive(Debug, Clone)]
pub struct Field {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), mesh.n_nodes() * mesh.dim(), "coefficient vector length");
        Self { mesh, values }
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_nodes() * mesh.dim();
        Self { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant. Hanging nodes take the constrained value, so the
    /// result is conforming.
    pub fn interpolate(mesh: Arc<Mesh>, f: &dyn AnalyticField) -> Self {
        let dim = mesh.dim();
        let mut values = vec![0.0; mesh.n_nodes() * dim];
        for (n, x) in mesh.nodes().iter().enumerate() {
            let v = f.value(x);
            values[n * dim..n * dim + dim].copy_from_slice(&v[..dim]);
        }
        for (&n, masters) in mesh.hanging_nodes() {
            for c in 0..dim {
                values[n * dim + c] = masters.iter().map(|&(m, w)| w * values[m * dim + c]).sum();
            }
        }
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node_value(&self, node: usize) -> [f64; 3] {
        let d = self.mesh.dim();
        let mut v = [0.0; 3];
        v[..d].copy_from_slice(&self.values[node * d..node * d + d]);
        v
    }

    fn value_in_cell(&self, cell: &Cell, x: &[f64; 3]) -> [f64; 3] {
        let dim = self.mesh.dim();
        let phi = shape::values(dim, &cell.lo, &cell.hi, x);
        let mut v = [0.0; 3];
        for (a, &n) in cell.nodes[..1 << dim].iter().enumerate() {
            for c in 0..dim {
                v[c] += phi[a] * self.values[n * dim + c];
            }
        }
        v
    }

    fn gradient_in_cell(&self, cell: &Cell, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let dim = self.mesh.dim();
        let dphi = shape::gradients(dim, &cell.lo, &cell.hi, x);
        let mut g = [[0.0; 3]; 3];
        for (a, &n) in cell.nodes[..1 << dim].iter().enumerate() {
            for c in 0..dim {
                let u = self.values[n * dim + c];
                for k in 0..dim {
                    g[c][k] += u * dphi[a][k];
                }
            }
        }
        g
    }

    pub fn evaluate(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        let c = self.mesh.locate_cell(x)?;
        Ok(self.value_in_cell(&self.mesh.cells()[c], x))
    }

    pub fn gradient(&self, x: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
        let c = self.mesh.locate_cell(x)?;
        Ok(self.gradient_in_cell(&self.mesh.cells()[c], x))
    }

    pub fn evaluate_stress(&self, material: &Material, x: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
        let g = self.gradient(x)?;
        Ok(stress_from_gradient(self.mesh.dim(), material, &g))
    }

    /// Gauss points (two per facet axis) on every boundary facet with the
    /// given face id, paired with the owning cell.
    fn facet_points(&self, face: usize) -> Result<Vec<(usize, [f64; 3], f64)>> {
        let dim = self.mesh.dim();
        if face >= 2 * dim {
            return Err(Error::UnknownFace(face));
        }
        let axis = face / 2;
        let upper = face % 2 == 1;
        let rule = GaussLegendre::new(2);
        let mut points = Vec::new();
        for bf in self.mesh.boundary_faces().iter().filter(|bf| bf.face == face) {
            let cell = &self.mesh.cells()[bf.cell];
            let plane = if upper { cell.hi[axis] } else { cell.lo[axis] };
            let tangential: Vec<usize> = (0..dim).filter(|&k| k != axis).collect();
            let per_axis: Vec<Vec<(f64, f64)>> = tangential
                .iter()
                .map(|&k| rule.on_interval(cell.lo[k], cell.hi[k]).collect())
                .collect();
            if dim == 2 {
                for &(t, w) in &per_axis[0] {
                    let mut x = [0.0; 3];
                    x[axis] = plane;
                    x[tangential[0]] = t;
                    points.push((bf.cell, x, w));
                }
            } else {
                for &(t1, w1) in &per_axis[1] {
                    for &(t0, w0) in &per_axis[0] {
                        let mut x = [0.0; 3];
                        x[axis] = plane;
                        x[tangential[0]] = t0;
                        x[tangential[1]] = t1;
                        points.push((bf.cell, x, w0 * w1));
                    }
                }
            }
        }
        Ok(points)
    }

    /// `∫ σ(u_h) n` over all boundary facets with the given face id, `n`
    /// the outward unit normal.
    pub fn face_force(&self, material: &Material, face: usize) -> Result<[f64; 3]> {
        let dim = self.mesh.dim();
        let axis = face / 2;
        let sign = if face % 2 == 1 { 1.0 } else { -1.0 };
        let mut force = [0.0; 3];
        for (c, x, w) in self.facet_points(face)? {
            let g = self.gradient_in_cell(&self.mesh.cells()[c], &x);
            let s = stress_from_gradient(dim, material, &g);
            for i in 0..dim {
                force[i] += w * s[i][axis] * sign;
            }
        }
        Ok(force)
    }

    /// Mean of `u_h` over a boundary face.
    pub fn face_average(&self, face: usize) -> Result<[f64; 3]> {
        let mut sum = [0.0; 3];
        let mut area = 0.0;
        for (c, x, w) in self.facet_points(face)? {
            let u = self.value_in_cell(&self.mesh.cells()[c], &x);
            for i in 0..3 {
                sum[i] += w * u[i];
            }
            area += w;
        }
        Ok(sum.map(|v| v / area))
    }

    /// `(‖u − u_h‖_L2, |u − u_h|_H1)` with order-3 Gauss quadrature per
    /// axis. Cells whose center lies within `mask_radius` of any of
    /// `centers` are skipped when `mask_radius > 0`.
    pub fn error_norms(&self, exact: &dyn AnalyticField, mask_radius: f64, centers: &[[f64; 3]]) -> (f64, f64) {
        let dim = self.mesh.dim();
        let per_cell: Vec<(f64, f64)> = self
            .mesh
            .cells()
            .par_iter()
            .map(|cell| {
                if mask_radius > 0.0 {
                    let c = cell.center();
                    if centers.iter().any(|q| crate::mesh::dist(&c, q) <= mask_radius) {
                        return (0.0, 0.0);
                    }
                }
                let mut l2 = 0.0;
                let mut h1 = 0.0;
                for (x, w) in box_rule(dim, 3, &cell.lo, &cell.hi) {
                    let u = exact.value(&x);
                    let gu = exact.gradient(&x);
                    let uh = self.value_in_cell(cell, &x);
                    let guh = self.gradient_in_cell(cell, &x);
                    for i in 0..dim {
                        l2 += w * (u[i] - uh[i]).powi(2);
                        for j in 0..dim {
                            h1 += w * (gu[i][j] - guh[i][j]).powi(2);
                        }
                    }
                }
                (l2, h1)
            })
            .collect();
        let (l2, h1) = per_cell.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        (l2.sqrt(), h1.sqrt())
    }
}
