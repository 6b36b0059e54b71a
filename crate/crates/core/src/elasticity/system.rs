//! Degree-of-freedom numbering, stiffness assembly and Dirichlet elimination.

use std::collections::HashMap;
use std::sync::Arc;

use super::field::{AnalyticField, Field};
use super::shape;
use super::solver::{conjugate_gradient, SolveReport, SolverSettings};
use super::sparse::CsrMatrix;
use super::Material;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::box_rule;

/// Maps `(node, component)` to the global index `node * dim + component`
/// and carries the hanging-node constraints of the mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    dim: usize,
    n_nodes: usize,
    /// For every node, the free nodes it is expressed through.
    expansion: Vec<Vec<(usize, f64)>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let expansion = (0..mesh.n_nodes())
            .map(|n| match mesh.hanging_nodes().get(&n) {
                Some(m) => m.clone(),
                None => vec![(n, 1.0)],
            })
            .collect();
        Self { dim: mesh.dim(), n_nodes: mesh.n_nodes(), expansion }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.dim
    }

    pub fn index(&self, node: usize, component: usize) -> usize {
        node * self.dim + component
    }

    pub fn is_constrained_node(&self, node: usize) -> bool {
        let e = &self.expansion[node];
        !(e.len() == 1 && e[0].0 == node)
    }

    pub fn expansion(&self, node: usize) -> &[(usize, f64)] {
        &self.expansion[node]
    }

    /// Scatter a cell-local load vector (ordered `corner * dim + component`)
    /// into `rhs`, redistributing hanging-node entries to their masters.
    pub fn add_local(&self, cell_nodes: &[usize], local: &[f64], rhs: &mut [f64]) {
        let d = self.dim;
        for (a, &node) in cell_nodes.iter().enumerate() {
            for &(m, w) in &self.expansion[node] {
                for c in 0..d {
                    rhs[m * d + c] += w * local[a * d + c];
                }
            }
        }
    }

    /// Overwrite hanging-node entries with the interpolation of their masters.
    pub fn distribute(&self, values: &mut [f64]) {
        let d = self.dim;
        for n in 0..self.n_nodes {
            if self.is_constrained_node(n) {
                for c in 0..d {
                    let v: f64 = self.expansion[n].iter().map(|&(m, w)| w * values[m * d + c]).sum();
                    values[n * d + c] = v;
                }
            }
        }
    }
}

/// Condition imposed on one face of the root box.
#[derive(Clone)]
pub enum FaceCondition {
    ClampedZero,
    DirichletField(Arc<dyn AnalyticField>),
    TractionFree,
}

impl std::fmt::Debug for FaceCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaceCondition::ClampedZero => write!(f, "ClampedZero"),
            FaceCondition::DirichletField(_) => write!(f, "DirichletField(..)"),
            FaceCondition::TractionFree => write!(f, "TractionFree"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    /// Indexed by face id (−x, +x, −y, +y, −z, +z).
    pub faces: Vec<FaceCondition>,
    pub allow_pure_neumann: bool,
}

impl BoundarySpec {
    pub fn uniform(dim: usize, condition: FaceCondition) -> Self {
        Self { faces: vec![condition; 2 * dim], allow_pure_neumann: false }
    }

    pub fn clamped(dim: usize) -> Self {
        Self::uniform(dim, FaceCondition::ClampedZero)
    }
}

/// Assembled linear system `K U = b` over all node dofs. Rows of
/// constrained (hanging or Dirichlet) dofs are identity rows.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub mesh: Arc<Mesh>,
    pub dofs: DofMap,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dirichlet values, set by [`SparseSystem::apply_bc`].
    pub fixed: Vec<Option<f64>>,
}

/// Element stiffness of a Q1 box element of the given edge lengths, with
/// local ordering `corner * dim + component`.
pub fn element_stiffness(dim: usize, size: [f64; 3], material: &Material, order: usize) -> Vec<f64> {
    let nc = 1 << dim;
    let nd = nc * dim;
    let lo = [0.0; 3];
    let hi = [size[0], size[1], if dim == 3 { size[2] } else { 1.0 }];
    let mut ke = vec![0.0; nd * nd];
    let (mu, lambda) = (material.mu, material.lambda);
    for (x, w) in box_rule(dim, order, &lo, &hi) {
        let g = shape::gradients(dim, &lo, &hi, &x);
        for a in 0..nc {
            for b in 0..nc {
                let dot: f64 = (0..dim).map(|k| g[a][k] * g[b][k]).sum();
                for c in 0..dim {
                    for d in 0..dim {
                        let mut v = mu * g[b][c] * g[a][d] + lambda * g[a][c] * g[b][d];
                        if c == d {
                            v += mu * dot;
                        }
                        ke[(a * dim + c) * nd + b * dim + d] += w * v;
                    }
                }
            }
        }
    }
    ke
}

/// Assemble the Q1 stiffness matrix with order-2 Gauss quadrature per axis
/// and hanging-node condensation. The right-hand side is zero.
pub fn assemble_stiffness(mesh: Arc<Mesh>, material: &Material) -> SparseSystem {
    let dofs = DofMap::new(&mesh);
    let dim = mesh.dim();
    let nc = mesh.nodes_per_cell();

    // node graph through expanded masters
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_nodes()];
    let mut masters: Vec<usize> = Vec::with_capacity(32);
    for cell in mesh.cells() {
        masters.clear();
        for &n in &cell.nodes[..nc] {
            masters.extend(dofs.expansion(n).iter().map(|e| e.0));
        }
        masters.sort_unstable();
        masters.dedup();
        for &m in &masters {
            graph[m].extend_from_slice(&masters);
        }
    }
    let rows: Vec<Vec<usize>> = graph
        .into_iter()
        .enumerate()
        .flat_map(|(n, mut nb)| {
            if nb.is_empty() {
                nb.push(n);
            }
            nb.sort_unstable();
            nb.dedup();
            let cols: Vec<usize> = nb.iter().flat_map(|&m| (0..dim).map(move |d| m * dim + d)).collect();
            std::iter::repeat_n(cols, dim)
        })
        .collect();
    let mut matrix = CsrMatrix::from_pattern(rows);

    let mut cache: HashMap<u32, Vec<f64>> = HashMap::new();
    let nd = nc * dim;
    for cell in mesh.cells() {
        let ke = cache
            .entry(cell.level)
            .or_insert_with(|| element_stiffness(dim, cell.size(), material, 2));
        let nodes = &cell.nodes[..nc];
        let plain = nodes.iter().all(|&n| !dofs.is_constrained_node(n));
        if plain {
            for a in 0..nc {
                for c in 0..dim {
                    let i = nodes[a] * dim + c;
                    let row = (a * dim + c) * nd;
                    for b in 0..nc {
                        for d in 0..dim {
                            matrix.add(i, nodes[b] * dim + d, ke[row + b * dim + d]);
                        }
                    }
                }
            }
        } else {
            for a in 0..nc {
                for c in 0..dim {
                    let row = (a * dim + c) * nd;
                    for &(ma, wa) in dofs.expansion(nodes[a]) {
                        for b in 0..nc {
                            for d in 0..dim {
                                let v = ke[row + b * dim + d] * wa;
                                for &(mb, wb) in dofs.expansion(nodes[b]) {
                                    matrix.add(ma * dim + c, mb * dim + d, v * wb);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for n in 0..mesh.n_nodes() {
        if dofs.is_constrained_node(n) {
            for c in 0..dim {
                let i = n * dim + c;
                matrix.add(i, i, 1.0);
            }
        }
    }
    let n = dofs.n_dofs();
    SparseSystem { mesh, dofs, matrix, rhs: vec![0.0; n], fixed: vec![None; n] }
}

impl SparseSystem {
    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    /// Replace the right-hand side (already condensed, e.g. from `forcing`).
    pub fn with_rhs(mut self, rhs: Vec<f64>) -> Self {
        assert_eq!(rhs.len(), self.n_dofs());
        self.rhs = rhs;
        self
    }

    /// Dirichlet values per dof for the given boundary description. Faces
    /// are scanned in id order; the first Dirichlet face containing a node
    /// supplies its value. Hanging nodes stay governed by their constraint.
    pub fn dirichlet_values(&self, boundary: &BoundarySpec) -> Result<Vec<Option<f64>>> {
        let mesh = &self.mesh;
        let dim = mesh.dim();
        if boundary.faces.len() < 2 * dim {
            return Err(Error::InvalidInput(format!(
                "boundary spec lists {} faces, mesh has {}",
                boundary.faces.len(),
                2 * dim
            )));
        }
        let any_dirichlet = boundary.faces[..2 * dim]
            .iter()
            .any(|f| !matches!(f, FaceCondition::TractionFree));
        if !any_dirichlet && !boundary.allow_pure_neumann {
            return Err(Error::SingularSystem);
        }
        let mut fixed = vec![None; self.n_dofs()];
        for n in 0..mesh.n_nodes() {
            if self.dofs.is_constrained_node(n) {
                continue;
            }
            for (face, cond) in boundary.faces[..2 * dim].iter().enumerate() {
                if !mesh.node_on_face(n, face) {
                    continue;
                }
                let value = match cond {
                    FaceCondition::TractionFree => continue,
                    FaceCondition::ClampedZero => [0.0; 3],
                    FaceCondition::DirichletField(f) => f.value(&mesh.nodes()[n]),
                };
                for c in 0..dim {
                    fixed[n * dim + c] = Some(value[c]);
                }
                break;
            }
        }
        Ok(fixed)
    }

    /// Eliminate Dirichlet dofs symmetrically: their rows and columns become
    /// identity, the right-hand side carries the lifted values.
    pub fn apply_bc(mut self, boundary: &BoundarySpec) -> Result<Self> {
        let fixed = self.dirichlet_values(boundary)?;
        let k = &mut self.matrix;
        for i in 0..k.n {
            let Some(g) = fixed[i] else { continue };
            if g != 0.0 {
                for p in k.row_ptr[i]..k.row_ptr[i + 1] {
                    let j = k.col_idx[p];
                    if fixed[j].is_none() {
                        // symmetric: K_ji == K_ij
                        self.rhs[j] -= k.values[p] * g;
                    }
                }
            }
        }
        for i in 0..k.n {
            for p in k.row_ptr[i]..k.row_ptr[i + 1] {
                let j = k.col_idx[p];
                if fixed[i].is_some() || fixed[j].is_some() {
                    k.values[p] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        for (i, f) in fixed.iter().enumerate() {
            if let Some(g) = f {
                self.rhs[i] = *g;
            }
        }
        self.fixed = fixed;
        Ok(self)
    }

    /// Solve with Jacobi-preconditioned CG and return the field with hanging
    /// values filled in. The report carries the discrete energy terms.
    pub fn solve(&self, settings: &SolverSettings) -> Result<(Field, SolveSummary)> {
        let (mut u, report) = conjugate_gradient(&self.matrix, &self.rhs, settings)?;
        let ku = self.matrix.mul_vec(&u);
        let energy: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        let work: f64 = u.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        self.dofs.distribute(&mut u);
        Ok((Field::new(self.mesh.clone(), u), SolveSummary { report, energy, work }))
    }
}

/// Outcome of [`SparseSystem::solve`]: `energy = UᵀKU`, `work = Uᵀb`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSummary {
    pub report: SolveReport,
    pub energy: f64,
    pub work: f64,
}

impl SolveSummary {
    /// `|UᵀKU − Uᵀb| / |Uᵀb|`, or the absolute gap when `Uᵀb = 0`.
    pub fn galerkin_gap(&self) -> f64 {
        let gap = (self.energy - self.work).abs();
        if self.work != 0.0 {
            gap / self.work.abs()
        } else {
            gap
        }
    }
}
