//! Gauss-Legendre rules on intervals and tensor-product boxes.

use std::f64::consts::PI;

/// An `n`-point Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over `[lo, hi]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        self.on_interval(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss points and weights over an axis-aligned box in `dim`
/// dimensions. Unused trailing coordinates are zero.
pub fn box_rule(dim: usize, order: usize, lo: &[f64; 3], hi: &[f64; 3]) -> Vec<([f64; 3], f64)> {
    let rule = GaussLegendre::new(order);
    let per_axis: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|k| rule.on_interval(lo[k], hi[k]).collect())
        .collect();
    let mut out = Vec::with_capacity(order.pow(dim as u32));
    match dim {
        2 => {
            for &(y, wy) in &per_axis[1] {
                for &(x, wx) in &per_axis[0] {
                    out.push(([x, y, 0.0], wx * wy));
                }
            }
        }
        3 => {
            for &(z, wz) in &per_axis[2] {
                for &(y, wy) in &per_axis[1] {
                    for &(x, wx) in &per_axis[0] {
                        out.push(([x, y, z], wx * wy * wz));
                    }
                }
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }
    out
}
