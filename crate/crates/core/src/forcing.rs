//! Right-hand sides for the vessel source terms: singular (S), regularized
//! singular (RS), regularized hyper-singular (RHs, 2D and 3D) and the
//! homogenized volumetric source.
//!
//! Kernel integrals against Q1 basis functions factor into products of 1D
//! integrals, each evaluated with a 6-point Gauss rule on the intersection
//! of the cell interval with the kernel support.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::elasticity::{shape, DofMap, Material};
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh};
use crate::quadrature::{box_rule, GaussLegendre};
use crate::vessel::{arclength_quadrature, PointVessel2D, VesselNetwork};

/// `δ^ε(x) = ε^{-d} Π θ(x_i/ε)`, `θ(y) = (cos(πy) + 1)/2` on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedDelta {
    eps: f64,
    dim: usize,
    rule: GaussLegendre,
}

/// Integrals of the kernel against the corner basis functions of one cell:
/// `values[a] = ∫δφ_a`, `gradients[a][l] = ∫δ ∂_lφ_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMoments {
    pub values: [f64; 8],
    pub gradients: [[f64; 3]; 8],
}

impl MollifiedDelta {
    pub fn new(eps: f64, dim: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!("kernel width must be positive, got {eps}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        Ok(Self { eps, dim, rule: GaussLegendre::new(6) })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn theta(y: f64) -> f64 {
        if y.abs() < 1.0 {
            0.5 * ((PI * y).cos() + 1.0)
        } else {
            0.0
        }
    }

    fn theta_prime(y: f64) -> f64 {
        if y.abs() < 1.0 {
            -0.5 * PI * (PI * y).sin()
        } else {
            0.0
        }
    }

    /// Kernel value at offset `x` from its center.
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        (0..self.dim).map(|k| Self::theta(x[k] / self.eps) / self.eps).product()
    }

    pub fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (l, gl) in g.iter_mut().enumerate().take(self.dim) {
            *gl = (0..self.dim)
                .map(|k| {
                    let y = x[k] / self.eps;
                    if k == l {
                        Self::theta_prime(y) / (self.eps * self.eps)
                    } else {
                        Self::theta(y) / self.eps
                    }
                })
                .product();
        }
        g
    }

    /// `∫δ^ε` by composite order-6 Gauss over the support, `pieces`
    /// sub-intervals per axis.
    pub fn mass(&self, pieces: usize) -> f64 {
        let h = 2.0 * self.eps / pieces as f64;
        let axis: f64 = (0..pieces)
            .map(|i| {
                let lo = -self.eps + i as f64 * h;
                self.rule.integrate(lo, lo + h, |y| Self::theta(y / self.eps) / self.eps)
            })
            .sum();
        axis.powi(self.dim as i32)
    }

    /// Per-axis integrals over `[lo, hi] ∩ [c-ε, c+ε]` of `θ_ε(x-c)` times
    /// `(hi-x)/h`, `(x-lo)/h`; `None` when the overlap is empty.
    fn axis_moments(&self, c: f64, lo: f64, hi: f64) -> Option<[f64; 2]> {
        let a = lo.max(c - self.eps);
        let b = hi.min(c + self.eps);
        if !(b > a) {
            return None;
        }
        let h = hi - lo;
        let mut m = [0.0; 2];
        for (x, w) in self.rule.on_interval(a, b) {
            let k = w * Self::theta((x - c) / self.eps) / self.eps;
            m[0] += k * (hi - x) / h;
            m[1] += k * (x - lo) / h;
        }
        Some(m)
    }

    /// Kernel centered at `center` integrated against the basis of `cell`.
    pub fn cell_moments(&self, cell: &Cell, center: &[f64; 3]) -> Option<CellMoments> {
        let d = self.dim;
        let mut ax = [[0.0; 2]; 3];
        let mut h = [1.0; 3];
        for k in 0..d {
            ax[k] = self.axis_moments(center[k], cell.lo[k], cell.hi[k])?;
            h[k] = cell.hi[k] - cell.lo[k];
        }
        let mut values = [0.0; 8];
        let mut gradients = [[0.0; 3]; 8];
        for a in 0..1 << d {
            let bits: [usize; 3] = std::array::from_fn(|k| (a >> k) & 1);
            values[a] = (0..d).map(|k| ax[k][bits[k]]).product();
            for l in 0..d {
                // ∫θ_ε (±1/h) = (±1/h)(m0 + m1)
                let sign = if bits[l] == 1 { 1.0 } else { -1.0 };
                let dl = sign * (ax[l][0] + ax[l][1]) / h[l];
                gradients[a][l] = dl * (0..d).filter(|&k| k != l).map(|k| ax[k][bits[k]]).product::<f64>();
            }
        }
        Some(CellMoments { values, gradients })
    }

    /// Error unless the closed support box around `center` lies in the
    /// closed domain.
    pub fn check_support(&self, mesh: &Mesh, center: &[f64; 3]) -> Result<()> {
        check_box(mesh, center, self.eps)
            .map_err(|_| Error::SupportOutsideDomain { center: *center, half_width: self.eps })
    }
}

fn check_box(mesh: &Mesh, center: &[f64; 3], half: f64) -> std::result::Result<(), ()> {
    let (lo, hi) = (mesh.origin(), mesh.upper());
    for k in 0..mesh.dim() {
        let tol = 1e-12 * mesh.extent()[k];
        if center[k] - half < lo[k] - tol || center[k] + half > hi[k] + tol {
            return Err(());
        }
    }
    Ok(())
}

/// Source-term variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingVariant {
    Singular,
    RegularizedSingular,
    HyperSingular,
    Homogenized,
}

/// Kernel width: explicit, or twice the smallest cell diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonRule {
    Explicit(f64),
    TwiceMinDiameter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingSpec {
    pub variant: ForcingVariant,
    pub epsilon: EpsilonRule,
    /// Boundary / centerline sample spacing as a multiple of the smallest
    /// cell edge.
    pub spacing_factor: f64,
}

impl ForcingSpec {
    pub fn new(variant: ForcingVariant) -> Self {
        Self { variant, epsilon: EpsilonRule::TwiceMinDiameter, spacing_factor: 0.5 }
    }

    pub fn resolve_epsilon(&self, mesh: &Mesh) -> Result<f64> {
        let eps = match self.epsilon {
            EpsilonRule::Explicit(e) => e,
            EpsilonRule::TwiceMinDiameter => 2.0 * mesh.min_cell_diameter(),
        };
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!("kernel width must be positive, got {eps}")));
        }
        Ok(eps)
    }

    pub fn kernel(&self, mesh: &Mesh) -> Result<MollifiedDelta> {
        MollifiedDelta::new(self.resolve_epsilon(mesh)?, mesh.dim())
    }

    pub fn spacing(&self, mesh: &Mesh) -> f64 {
        self.spacing_factor * mesh.min_cell_size()
    }
}

/// Cell-local load vectors, merged into a global vector in list order.
type LocalLoads = Vec<(usize, [f64; 24])>;

fn merge(mesh: &Mesh, dofs: &DofMap, parts: Vec<LocalLoads>) -> Vec<f64> {
    let mut rhs = vec![0.0; dofs.n_dofs()];
    let nc = mesh.nodes_per_cell();
    let nd = nc * mesh.dim();
    for part in parts {
        for (c, local) in part {
            dofs.add_local(&mesh.cells()[c].nodes[..nc], &local[..nd], &mut rhs);
        }
    }
    rhs
}

fn require_dim(mesh: &Mesh, dim: usize) -> Result<()> {
    if mesh.dim() != dim {
        return Err(Error::InvalidInput(format!("this forcing needs a {dim}D mesh, got {}D", mesh.dim())));
    }
    Ok(())
}

/// Equispaced samples on the vessel circle: points, outward (into tissue)
/// normals and the common arclength weight.
fn circle_samples(v: &PointVessel2D, n: usize) -> Vec<([f64; 3], [f64; 3], f64)> {
    let w = 2.0 * PI * v.radius / n as f64;
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let nrm = [t.cos(), t.sin(), 0.0];
            ([v.center[0] + v.radius * nrm[0], v.center[1] + v.radius * nrm[1], 0.0], nrm, w)
        })
        .collect()
}

/// Sample count `max(requested, 16, ⌈2πa/(h/2)⌉)`.
pub fn circle_sample_count(mesh: &Mesh, radius: f64, requested: Option<usize>) -> usize {
    let h = mesh.min_cell_size();
    let auto = (2.0 * PI * radius / (0.5 * h)).ceil() as usize;
    auto.max(16).max(requested.unwrap_or(0))
}

fn check_circle(mesh: &Mesh, v: &PointVessel2D) -> Result<()> {
    if !(v.radius > 0.0) {
        return Err(Error::InvalidInput(format!("vessel radius must be positive, got {}", v.radius)));
    }
    check_box(mesh, &v.center, v.radius).map_err(|_| Error::CircleOutsideDomain { center: v.center, radius: v.radius })
}

/// Variant (S): `Σ_samples g (v·n) w` with `g = (2μ+λ)p/μ`.
pub fn rhs_singular_2d(
    mesh: &Mesh,
    material: &Material,
    vessels: &[PointVessel2D],
    n_quad: Option<usize>,
) -> Result<Vec<f64>> {
    require_dim(mesh, 2)?;
    for v in vessels {
        check_circle(mesh, v)?;
    }
    let dofs = DofMap::new(mesh);
    let gp = material.g_prime();
    let parts: Vec<LocalLoads> = vessels
        .par_iter()
        .map(|v| {
            let g = gp * v.pressure;
            let mut out = LocalLoads::new();
            for (y, n, w) in circle_samples(v, circle_sample_count(mesh, v.radius, n_quad)) {
                let c = mesh.locate_cell(&y)?;
                let cell = &mesh.cells()[c];
                let phi = shape::values(2, &cell.lo, &cell.hi, &y);
                let mut local = [0.0; 24];
                for a in 0..4 {
                    for k in 0..2 {
                        local[a * 2 + k] = g * w * n[k] * phi[a];
                    }
                }
                out.push((c, local));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(merge(mesh, &dofs, parts))
}

/// Variant (RS): the (S) samples spread by the kernel.
pub fn rhs_regularized_2d(
    mesh: &Mesh,
    material: &Material,
    vessels: &[PointVessel2D],
    kernel: &MollifiedDelta,
    n_quad: Option<usize>,
) -> Result<Vec<f64>> {
    require_dim(mesh, 2)?;
    let mut samples = Vec::with_capacity(vessels.len());
    for v in vessels {
        check_circle(mesh, v)?;
        let s = circle_samples(v, circle_sample_count(mesh, v.radius, n_quad));
        for (y, _, _) in &s {
            kernel.check_support(mesh, y)?;
        }
        samples.push((v, s));
    }
    let dofs = DofMap::new(mesh);
    let gp = material.g_prime();
    let parts: Vec<LocalLoads> = samples
        .par_iter()
        .map(|(v, s)| {
            let g = gp * v.pressure;
            let mut out = LocalLoads::new();
            for (y, n, w) in s {
                for c in mesh.cells_in_ball(y, kernel.epsilon()) {
                    let Some(m) = kernel.cell_moments(&mesh.cells()[c], y) else { continue };
                    let mut local = [0.0; 24];
                    for a in 0..4 {
                        for k in 0..2 {
                            local[a * 2 + k] = g * w * n[k] * m.values[a];
                        }
                    }
                    out.push((c, local));
                }
            }
            out
        })
        .collect();
    Ok(merge(mesh, &dofs, parts))
}

/// Variant (RHs) in 2D: `Σ_i πa_i² g'p_i ∫δ^ε(x - x_i) div v`.
pub fn rhs_hypersingular_2d(
    mesh: &Mesh,
    material: &Material,
    vessels: &[PointVessel2D],
    kernel: &MollifiedDelta,
) -> Result<Vec<f64>> {
    require_dim(mesh, 2)?;
    for v in vessels {
        kernel.check_support(mesh, &v.center)?;
    }
    let dofs = DofMap::new(mesh);
    let gp = material.g_prime();
    let parts: Vec<LocalLoads> = vessels
        .par_iter()
        .map(|v| {
            let s = PI * v.radius * v.radius * gp * v.pressure;
            let mut out = LocalLoads::new();
            for c in mesh.cells_in_ball(&v.center, kernel.epsilon()) {
                let Some(m) = kernel.cell_moments(&mesh.cells()[c], &v.center) else { continue };
                let mut local = [0.0; 24];
                for a in 0..4 {
                    for k in 0..2 {
                        local[a * 2 + k] = s * m.gradients[a][k];
                    }
                }
                out.push((c, local));
            }
            out
        })
        .collect();
    Ok(merge(mesh, &dofs, parts))
}

/// The two parts of the 3D centerline source, kept apart for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Centerline3dRhs {
    /// `Σ_q w_q ĝ(s_q) ∫δ^ε ∇_τ·v`.
    pub hyper: Vec<f64>,
    /// `Σ_q w_q ĝ'(s_q) ∫δ^ε v·τ`.
    pub tangential: Vec<f64>,
}

impl Centerline3dRhs {
    pub fn total(&self) -> Vec<f64> {
        self.hyper.iter().zip(&self.tangential).map(|(a, b)| a + b).collect()
    }
}

/// Variant (RHs) in 3D with the tangential correction. `max_spacing`
/// defaults to half the smallest cell edge.
pub fn rhs_hypersingular_3d_parts(
    mesh: &Mesh,
    material: &Material,
    network: &VesselNetwork,
    kernel: &MollifiedDelta,
    max_spacing: Option<f64>,
) -> Result<Centerline3dRhs> {
    require_dim(mesh, 3)?;
    let spacing = max_spacing.unwrap_or(0.5 * mesh.min_cell_size());
    let mut nodes = Vec::new();
    for s in &network.segments {
        for q in arclength_quadrature(s, spacing)? {
            kernel.check_support(mesh, &q.point)?;
            nodes.push(q);
        }
    }
    let dofs = DofMap::new(mesh);
    let gp = material.g_prime();
    let chunks: Vec<(LocalLoads, LocalLoads)> = nodes
        .par_chunks(64)
        .map(|chunk| {
            let (mut hyper, mut tang) = (LocalLoads::new(), LocalLoads::new());
            for q in chunk {
                let gh = q.weight * q.g_hat(gp);
                let ghp = q.weight * q.g_hat_prime(gp);
                let t = q.tangent;
                for c in mesh.cells_in_ball(&q.point, kernel.epsilon()) {
                    let Some(m) = kernel.cell_moments(&mesh.cells()[c], &q.point) else { continue };
                    let mut lh = [0.0; 24];
                    let mut lt = [0.0; 24];
                    for a in 0..8 {
                        let d = m.gradients[a];
                        let along = t[0] * d[0] + t[1] * d[1] + t[2] * d[2];
                        for k in 0..3 {
                            lh[a * 3 + k] = gh * (d[k] - t[k] * along);
                            lt[a * 3 + k] = ghp * m.values[a] * t[k];
                        }
                    }
                    hyper.push((c, lh));
                    if ghp != 0.0 {
                        tang.push((c, lt));
                    }
                }
            }
            (hyper, tang)
        })
        .collect();
    let (h, t): (Vec<_>, Vec<_>) = chunks.into_iter().unzip();
    Ok(Centerline3dRhs { hyper: merge(mesh, &dofs, h), tangential: merge(mesh, &dofs, t) })
}

pub fn rhs_hypersingular_3d(
    mesh: &Mesh,
    material: &Material,
    network: &VesselNetwork,
    kernel: &MollifiedDelta,
    max_spacing: Option<f64>,
) -> Result<Vec<f64>> {
    Ok(rhs_hypersingular_3d_parts(mesh, material, network, kernel, max_spacing)?.total())
}

/// Volume fraction for the homogenized source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Scalar(f64),
    Tensor([[f64; 3]; 3]),
}

impl Beta {
    pub fn tensor(&self) -> [[f64; 3]; 3] {
        match *self {
            Beta::Scalar(b) => [[b, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, b]],
            Beta::Tensor(t) => t,
        }
    }
}

/// Prestress `p (2μ+λ)/μ β` carried by the homogenized model; the total
/// stress is `σ(u) − prestress`.
pub fn homogenized_prestress(material: &Material, beta: Beta, p: f64) -> [[f64; 3]; 3] {
    let s = p * material.g_prime();
    beta.tensor().map(|row| row.map(|b| s * b))
}

/// `∫ p (2μ+λ)/μ tr(β ∇v)`, two Gauss points per axis.
pub fn rhs_homogenized(mesh: &Mesh, material: &Material, beta: Beta, p: f64) -> Result<Vec<f64>> {
    let b = beta.tensor();
    for i in 0..3 {
        for j in 0..i {
            if (b[i][j] - b[j][i]).abs() > 1e-14 * (b[i][j].abs() + b[j][i].abs()).max(1e-300) {
                return Err(Error::InvalidInput("volume-fraction tensor is not symmetric".into()));
            }
        }
    }
    let dim = mesh.dim();
    let nc = mesh.nodes_per_cell();
    let s = p * material.g_prime();
    let dofs = DofMap::new(mesh);
    let mut cache: HashMap<u32, [f64; 24]> = HashMap::new();
    let mut rhs = vec![0.0; dofs.n_dofs()];
    for cell in mesh.cells() {
        let local = cache.entry(cell.level).or_insert_with(|| {
            let mut local = [0.0; 24];
            let size = cell.size();
            let lo = [0.0; 3];
            let hi = [size[0], size[1], if dim == 3 { size[2] } else { 1.0 }];
            for (x, w) in box_rule(dim, 2, &lo, &hi) {
                let g = shape::gradients(dim, &lo, &hi, &x);
                for a in 0..nc {
                    for c in 0..dim {
                        let tr: f64 = (0..dim).map(|j| b[j][c] * g[a][j]).sum();
                        local[a * dim + c] += w * s * tr;
                    }
                }
            }
            local
        });
        dofs.add_local(&cell.nodes[..nc], &local[..nc * dim], &mut rhs);
    }
    Ok(rhs)
}
