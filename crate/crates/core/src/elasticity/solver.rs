//! Jacobi-preconditioned conjugate gradients.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative residual target `|KU - b| / |b|`.
    pub tol: f64,
    /// `None` means `10 * n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `K x = b` for symmetric positive (semi-)definite `K`, starting
/// from zero. Reductions run in index order, so results do not depend on
/// the thread pool.
pub fn conjugate_gradient(k: &CsrMatrix, b: &[f64], settings: &SolverSettings) -> Result<(Vec<f64>, SolveReport)> {
    let n = k.n;
    assert_eq!(b.len(), n);
    let max_iter = settings.max_iter.unwrap_or(10 * n.max(1));
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((x, SolveReport { iterations: 0, relative_residual: 0.0 }));
    }
    let inv_diag: Vec<f64> = k
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = settings.tol * b_norm;

    for it in 1..=max_iter {
        k.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            let res = dot(&r, &r).sqrt() / b_norm;
            return Err(Error::NotConverged { iterations: it, residual: res });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= target {
            // confirm against the true residual to guard against drift
            let kx = k.mul_vec(&x);
            let true_res = kx.iter().zip(b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
            if true_res <= target {
                return Ok((x, SolveReport { iterations: it, relative_residual: true_res / b_norm }));
            }
            for i in 0..n {
                r[i] = b[i] - kx[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / b_norm;
    Err(Error::NotConverged { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> CsrMatrix {
        let mut m = CsrMatrix::from_pattern(vec![vec![0, 1], vec![0, 1]]);
        m.add(0, 0, 4.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, 3.0);
        m
    }

    #[test]
    fn matches_hand_elimination() {
        // [4 1; 1 3] x = [1; 2]  =>  x = (1/11, 7/11)
        let (x, rep) = conjugate_gradient(&two_by_two(), &[1.0, 2.0], &SolverSettings::default()).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-12);
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, rep) = conjugate_gradient(&two_by_two(), &[0.0, 0.0], &SolverSettings::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn reports_non_convergence() {
        let n = 50;
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.insert(0, i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut m = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        let b = vec![1.0; n];
        let err = conjugate_gradient(&m, &b, &SolverSettings { tol: 1e-12, max_iter: Some(3) }).unwrap_err();
        match err {
            Error::NotConverged { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }
}
