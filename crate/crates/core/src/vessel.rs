//! Vessel geometry: 2D point vessels, 3D polyline centerlines, arclength
//! quadrature and direction statistics.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Cross-section of a vessel orthogonal to the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointVessel2D {
    pub center: [f64; 3],
    pub radius: f64,
    pub pressure: f64,
}

/// Polyline centerline with radius and pressure given at each vertex and
/// interpolated linearly in arclength.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselSegment3D {
    points: Vec<[f64; 3]>,
    radii: Vec<f64>,
    pressures: Vec<f64>,
}

impl VesselSegment3D {
    pub fn new(points: Vec<[f64; 3]>, radii: Vec<f64>, pressures: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a segment needs at least two points".into()));
        }
        if radii.len() != points.len() || pressures.len() != points.len() {
            return Err(Error::InvalidInput("radii and pressures must match the point count".into()));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("consecutive points must be distinct".into()));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        Ok(Self { points, radii, pressures })
    }

    /// Straight segment with constant radius and pressure.
    pub fn straight(a: [f64; 3], b: [f64; 3], radius: f64, pressure: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![radius; 2], vec![pressure; 2])
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn pressures(&self) -> &[f64] {
        &self.pressures
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.windows(2).map(|w| crate::mesh::dist(&w[0], &w[1]))
    }

    pub fn length(&self) -> f64 {
        self.edge_lengths().sum()
    }

    /// `∫ πa² ds`, exact for linearly varying radius.
    pub fn vessel_volume(&self) -> f64 {
        let rule = GaussLegendre::new(2);
        self.edge_lengths()
            .zip(self.radii.windows(2))
            .map(|(l, r)| rule.integrate(0.0, 1.0, |t| PI * (r[0] + t * (r[1] - r[0])).powi(2)) * l)
            .sum()
    }
}

/// A collection of centerline segments, with optional parent links
/// (`parents[k]` is the segment feeding segment `k`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VesselNetwork {
    pub segments: Vec<VesselSegment3D>,
    pub parents: Option<Vec<Option<usize>>>,
}

impl VesselNetwork {
    pub fn new(segments: Vec<VesselSegment3D>) -> Self {
        Self { segments, parents: None }
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn vessel_volume(&self) -> f64 {
        self.segments.iter().map(|s| s.vessel_volume()).sum()
    }

    /// Serialize as `SEGMENT n` blocks of `x y z radius pressure` lines,
    /// numbers in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            let _ = writeln!(out, "SEGMENT {}", s.points.len());
            for k in 0..s.points.len() {
                let p = s.points[k];
                let _ = writeln!(out, "{:?} {:?} {:?} {:?} {:?}", p[0], p[1], p[2], s.radii[k], s.pressures[k]);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        while let Some((ln, line)) = lines.next() {
            let mut it = line.split_whitespace();
            let n = match (it.next(), it.next(), it.next()) {
                (Some("SEGMENT"), Some(n), None) => n
                    .parse::<usize>()
                    .map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?,
                _ => return Err(Error::Parse { line: ln + 1, msg: format!("expected `SEGMENT n`, got `{line}`") }),
            };
            let (mut pts, mut rad, mut pre) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let (ln, line) = lines
                    .next()
                    .ok_or(Error::Parse { line: ln + 1, msg: "segment ends early".into() })?;
                let vals: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
                if vals.len() != 5 {
                    return Err(Error::Parse { line: ln + 1, msg: format!("expected 5 numbers, got {}", vals.len()) });
                }
                pts.push([vals[0], vals[1], vals[2]]);
                rad.push(vals[3]);
                pre.push(vals[4]);
            }
            segments.push(
                VesselSegment3D::new(pts, rad, pre).map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?,
            );
        }
        Ok(Self::new(segments))
    }
}

/// One midpoint-rule node on a centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlineNode {
    pub point: [f64; 3],
    pub tangent: [f64; 3],
    pub weight: f64,
    pub radius: f64,
    pub pressure: f64,
    /// `da/ds` on the containing edge.
    pub da_ds: f64,
    /// `dp/ds` on the containing edge.
    pub dp_ds: f64,
}

impl CenterlineNode {
    /// `ĝ = πa²p g'`.
    pub fn g_hat(&self, g_prime: f64) -> f64 {
        PI * self.radius * self.radius * self.pressure * g_prime
    }

    /// `dĝ/ds = πg' (2 a a' p + a² p')`.
    pub fn g_hat_prime(&self, g_prime: f64) -> f64 {
        PI * g_prime * (2.0 * self.radius * self.da_ds * self.pressure + self.radius * self.radius * self.dp_ds)
    }
}

/// Midpoint rule on every edge with `ceil(len / max_spacing)` equal
/// sub-intervals.
pub fn arclength_quadrature(segment: &VesselSegment3D, max_spacing: f64) -> Result<Vec<CenterlineNode>> {
    if !(max_spacing > 0.0) {
        return Err(Error::InvalidInput(format!("max_spacing must be positive, got {max_spacing}")));
    }
    let mut out = Vec::new();
    for e in 0..segment.points.len() - 1 {
        let (p0, p1) = (segment.points[e], segment.points[e + 1]);
        let len = crate::mesh::dist(&p0, &p1);
        let tangent = [(p1[0] - p0[0]) / len, (p1[1] - p0[1]) / len, (p1[2] - p0[2]) / len];
        let (a0, a1) = (segment.radii[e], segment.radii[e + 1]);
        let (q0, q1) = (segment.pressures[e], segment.pressures[e + 1]);
        let m = (len / max_spacing).ceil().max(1.0) as usize;
        let w = len / m as f64;
        for k in 0..m {
            let t = (k as f64 + 0.5) / m as f64;
            out.push(CenterlineNode {
                point: [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]), p0[2] + t * (p1[2] - p0[2])],
                tangent,
                weight: w,
                radius: a0 + t * (a1 - a0),
                pressure: q0 + t * (q1 - q0),
                da_ds: (a1 - a0) / len,
                dp_ds: (q1 - q0) / len,
            });
        }
    }
    Ok(out)
}

/// Arclength of the closest centerline point; ties go to the smaller `s`.
pub fn nearest_arclength(segment: &VesselSegment3D, point: &[f64; 3]) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut s0 = 0.0;
    for w in segment.points.windows(2) {
        let d: [f64; 3] = std::array::from_fn(|k| w[1][k] - w[0][k]);
        let len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let len = len2.sqrt();
        let t = (((point[0] - w[0][0]) * d[0] + (point[1] - w[0][1]) * d[1] + (point[2] - w[0][2]) * d[2]) / len2)
            .clamp(0.0, 1.0);
        let q: [f64; 3] = std::array::from_fn(|k| w[0][k] + t * d[k]);
        let dist = crate::mesh::dist(&q, point);
        if dist < best.0 {
            best = (dist, s0 + t * len);
        }
        s0 += len;
    }
    best.1
}

/// `(1/|Ω|) ∫ πa² (I − τ⊗τ) ds`.
pub fn beta_tensor(network: &VesselNetwork, domain_volume: f64) -> Result<[[f64; 3]; 3]> {
    if !(domain_volume > 0.0) {
        return Err(Error::InvalidInput(format!("domain volume must be positive, got {domain_volume}")));
    }
    let mut b = [[0.0; 3]; 3];
    for s in &network.segments {
        let vols = s.points.windows(2).zip(s.radii.windows(2)).map(|(p, r)| {
            let seg = VesselSegment3D { points: p.to_vec(), radii: r.to_vec(), pressures: vec![0.0; 2] };
            (edge_tangent(&p[0], &p[1]), seg.vessel_volume())
        });
        for (t, v) in vols {
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    b[i][j] += v * (delta - t[i] * t[j]);
                }
            }
        }
    }
    Ok(b.map(|row| row.map(|v| v / domain_volume)))
}

fn edge_tangent(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    let l = crate::mesh::dist(a, b);
    [(b[0] - a[0]) / l, (b[1] - a[1]) / l, (b[2] - a[2]) / l]
}

/// `M = ∫ τ⊗τ ds` with its eigen-decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionTensor {
    pub matrix: [[f64; 3]; 3],
    /// Raw eigenvalues of `matrix`, ascending.
    pub raw_eigenvalues: [f64; 3],
    /// Eigenvalues divided by the largest one, ascending.
    pub eigenvalues: [f64; 3],
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: [[f64; 3]; 3],
}

pub fn direction_matrix(network: &VesselNetwork) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for s in &network.segments {
        for w in s.points.windows(2) {
            let l = crate::mesh::dist(&w[0], &w[1]);
            let t = edge_tangent(&w[0], &w[1]);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += l * t[i] * t[j];
                }
            }
        }
    }
    m
}

pub fn principal_directions(network: &VesselNetwork) -> Result<DirectionTensor> {
    if !(network.total_length() > 0.0) {
        return Err(Error::InvalidInput("network has zero length".into()));
    }
    let matrix = direction_matrix(network);
    let (raw_eigenvalues, eigenvectors) = symmetric_eigen(&matrix);
    let top = raw_eigenvalues[2];
    Ok(DirectionTensor { matrix, raw_eigenvalues, eigenvalues: raw_eigenvalues.map(|v| v / top), eigenvectors })
}

/// `β_i = V_vessels λ_i / (|Ω| (λ₁λ₂λ₃)^{1/3})` with
/// `V_vessels = ∫ πa² ds`.
pub fn beta_i(network: &VesselNetwork, domain_volume: f64) -> Result<[f64; 3]> {
    if !(domain_volume > 0.0) {
        return Err(Error::InvalidInput(format!("domain volume must be positive, got {domain_volume}")));
    }
    let d = principal_directions(network)?;
    beta_from_eigenvalues(network.vessel_volume(), domain_volume, &d.eigenvalues)
}

/// The per-direction formula for given vessel volume `L π a²`.
pub fn beta_from_eigenvalues(vessel_volume: f64, domain_volume: f64, lambdas: &[f64; 3]) -> Result<[f64; 3]> {
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::DegenerateDirections(*lambdas));
    }
    let g = (lambdas[0] * lambdas[1] * lambdas[2]).cbrt();
    Ok(lambdas.map(|l| vessel_volume * l / (domain_volume * g)))
}

/// Cyclic Jacobi rotations until the off-diagonal norm drops below 1e-12
/// (relative). Eigenvalues ascending; each eigenvector has its
/// largest-magnitude component positive.
pub fn symmetric_eigen(m: &[[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let off = (2.0 * (a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2))).sqrt();
        if off <= 1e-12 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let vals = order.map(|i| a[i][i]);
    let vecs = order.map(|i| {
        let mut e = [v[0][i], v[1][i], v[2][i]];
        let k = (0..3).max_by(|&x, &y| e[x].abs().total_cmp(&e[y].abs())).unwrap();
        if e[k] < 0.0 {
            e = e.map(|x| -x);
        }
        e
    });
    (vals, vecs)
}
