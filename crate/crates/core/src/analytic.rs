//! Closed-form reference solutions: the pressurized hole in a disk and the
//! homogenized response of uniformly vascularized tissue.

use crate::elasticity::{AnalyticField, Material};
use crate::error::{Error, Result};

/// A single vessel of radius `a` at the center of a disk of radius `r_outer`
/// clamped on its outer boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymConfig {
    pub r_outer: f64,
    pub a: f64,
    pub p: f64,
    pub material: Material,
}

impl AxisymConfig {
    pub fn new(r_outer: f64, a: f64, p: f64, material: Material) -> Result<Self> {
        if !(a > 0.0 && a < r_outer) {
            return Err(Error::InvalidInput(format!("need 0 < a < R, got a={a}, R={r_outer}")));
        }
        Ok(Self { r_outer, a, p, material })
    }

    fn denominator(&self) -> f64 {
        let (r2, a2) = (self.r_outer * self.r_outer, self.a * self.a);
        r2 * self.material.mu + self.material.lambda * a2 + self.material.mu * a2
    }

    /// `u = k (R²/r² − 1) x` outside the vessel.
    fn outer_k(&self) -> f64 {
        self.p * self.a * self.a / (2.0 * self.denominator())
    }

    /// `u = k' x` inside the vessel.
    fn inner_k(&self) -> f64 {
        self.p * (self.r_outer * self.r_outer - self.a * self.a) / (2.0 * self.denominator())
    }

    /// Radial displacement at distance `r ≥ a`.
    pub fn radial_displacement(&self, r: f64) -> f64 {
        let r2 = self.r_outer * self.r_outer;
        self.outer_k() * (r2 - r * r) / r
    }
}

type ValueGrad = ([f64; 3], [[f64; 3]; 3]);

fn planar(x: &[f64; 3], center: &[f64; 3]) -> (f64, f64) {
    (x[0] - center[0], x[1] - center[1])
}

/// Exact solution outside the vessel, centered at the origin. Only the
/// in-plane components are used.
pub fn exact_axisym(cfg: &AxisymConfig, x: &[f64; 3]) -> Result<ValueGrad> {
    let (x0, x1) = (x[0], x[1]);
    let r2 = x0 * x0 + x1 * x1;
    if r2 == 0.0 {
        return Err(Error::InvalidInput("exact solution is singular at the vessel center".into()));
    }
    let k = cfg.outer_k();
    let big = cfg.r_outer * cfg.r_outer;
    let f = big / r2 - 1.0;
    let v = [k * f * x0, k * f * x1, 0.0];
    let xs = [x0, x1];
    let mut g = [[0.0; 3]; 3];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = k * (if i == j { f } else { 0.0 } - 2.0 * big * xs[i] * xs[j] / (r2 * r2));
        }
    }
    Ok((v, g))
}

/// Exact solution outside the vessel, continued linearly inside it.
pub fn extended_axisym(cfg: &AxisymConfig, x: &[f64; 3]) -> ValueGrad {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 >= cfg.a * cfg.a {
        return exact_axisym(cfg, x).expect("r >= a > 0");
    }
    let k = cfg.inner_k();
    let mut g = [[0.0; 3]; 3];
    g[0][0] = k;
    g[1][1] = k;
    ([k * x[0], k * x[1], 0.0], g)
}

/// [`extended_axisym`] shifted to an arbitrary center, usable as an oracle
/// field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedAxisym {
    pub cfg: AxisymConfig,
    pub center: [f64; 3],
}

impl AnalyticField for ExtendedAxisym {
    fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        let (a, b) = planar(x, &self.center);
        extended_axisym(&self.cfg, &[a, b, 0.0]).0
    }

    fn gradient(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let (a, b) = planar(x, &self.center);
        extended_axisym(&self.cfg, &[a, b, 0.0]).1
    }
}

/// Normal stress jump across the vessel wall,
/// `g_a = R² p (λ + 2μ) / (R²μ + λa² + μa²)`.
pub fn jump_ga(cfg: &AxisymConfig) -> f64 {
    let m = &cfg.material;
    cfg.r_outer * cfg.r_outer * cfg.p * (m.lambda + 2.0 * m.mu) / cfg.denominator()
}

/// Jump imposed on a circle of radius `ε`: `(a²/ε²) g_a`.
pub fn jump_geps(cfg: &AxisymConfig, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    Ok(cfg.a * cfg.a / (eps * eps) * jump_ga(cfg))
}

/// Homogenized 2D response `u = c x` and the boundary traction magnitude.
pub fn homog_2d(material: &Material, beta: f64, p: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!("volume fraction must lie in [0, 1), got {beta}")));
    }
    let (mu, lambda) = (material.mu, material.lambda);
    let c = beta * p / (2.0 * mu) * (2.0 * mu + lambda) / (mu + lambda);
    Ok((c, beta * p * material.g_prime()))
}

/// Homogenized 3D response to vessels all aligned with `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedResponse {
    /// `u(x) = displacement x`.
    pub displacement: [[f64; 3]; 3],
    pub stress: [[f64; 3]; 3],
}

impl AlignedResponse {
    /// Coefficient of `M` in the plane orthogonal to `tau`.
    pub fn radial_coefficient(&self, tau: &[f64; 3]) -> f64 {
        let n = orthogonal_unit(tau);
        dot(&mat_vec(&self.displacement, &n), &n)
    }

    pub fn axial_coefficient(&self, tau: &[f64; 3]) -> f64 {
        dot(&mat_vec(&self.displacement, tau), tau)
    }
}

pub fn homog_3d_aligned(material: &Material, beta: f64, p: f64, tau: &[f64; 3]) -> Result<AlignedResponse> {
    let norm = dot(tau, tau).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("tau must be a unit vector, |tau| = {norm}")));
    }
    let (mu, lambda) = (material.mu, material.lambda);
    let scale = beta * p / (2.0 * mu * mu) * (2.0 * mu + lambda);
    let iso = (2.0 * mu + lambda) / (2.0 * mu + 3.0 * lambda);
    let s = p * material.g_prime() * beta;
    let mut m = [[0.0; 3]; 3];
    let mut sigma = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i][j] = scale * (iso * delta - tau[i] * tau[j]);
            sigma[i][j] = s * (delta - tau[i] * tau[j]);
        }
    }
    Ok(AlignedResponse { displacement: m, stress: sigma })
}

/// `σ = 2μ e(Mx) + λ tr(M) I` for a linear displacement `u = M x`.
pub fn linear_stress(material: &Material, m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = material.mu * (m[i][j] + m[j][i]);
        }
        s[i][i] += material.lambda * tr;
    }
    s
}

/// Pressure-induced stress `p (2μ+λ)/μ β` for a symmetric volume-fraction
/// tensor.
pub fn stress_anisotropic(material: &Material, beta: &[[f64; 3]; 3], p: f64) -> Result<[[f64; 3]; 3]> {
    check_symmetric(beta)?;
    let s = p * material.g_prime();
    Ok(beta.map(|row| row.map(|b| s * b)))
}

/// Effective shear modulus `μ^e_ij` for vessel families `(β_k, τ_k)`
/// sheared by `c`, with `i`, `j` axis indices in `0..3`.
pub fn shear_correction(
    material: &Material,
    families: &[(f64, [f64; 3])],
    p: f64,
    c: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::InvalidInput("shear amplitude c must be non-zero".into()));
    }
    if i > 2 || j > 2 {
        return Err(Error::InvalidInput(format!("axis indices out of range: ({i}, {j})")));
    }
    let mu = material.mu;
    let sum: f64 = families.iter().map(|(b, t)| b * t[i] * t[j]).sum();
    Ok((1.0 - p * (2.0 * mu + material.lambda) / (c * mu * mu) * sum) * mu)
}

fn check_symmetric(m: &[[f64; 3]; 3]) -> Result<()> {
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..3 {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidInput("tensor is not symmetric".into()));
            }
        }
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

fn orthogonal_unit(t: &[f64; 3]) -> [f64; 3] {
    let k = (0..3).min_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs())).unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d = dot(&e, t);
    let v = [e[0] - d * t[0], e[1] - d * t[1], e[2] - d * t[2]];
    let n = dot(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
