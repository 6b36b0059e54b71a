//! Vector Q1 linear elasticity: assembly, boundary conditions, CG solve
//! and post-processing.

pub mod field;
pub mod shape;
pub mod solver;
pub mod sparse;
pub mod system;

pub use field::{stress_from_gradient, AnalyticField, Field, LinearField};
pub use solver::{conjugate_gradient, SolveReport, SolverSettings};
pub use sparse::CsrMatrix;
pub use system::{
    assemble_stiffness, element_stiffness, BoundarySpec, DofMap, FaceCondition, SolveSummary, SparseSystem,
};

use crate::error::{Error, Result};

/// Lamé pair in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
}

impl Material {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!("shear modulus must be positive, got {mu}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be non-negative, got {lambda}")));
        }
        Ok(Self { mu, lambda })
    }

    /// `(2μ + λ) / μ`.
    pub fn g_prime(&self) -> f64 {
        (2.0 * self.mu + self.lambda) / self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh, RefinementSpec};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn unit_mesh(dim: usize, level: u32) -> Arc<Mesh> {
        Arc::new(Mesh::build(dim, [0.0; 3], [1.0; 3], &RefinementSpec::uniform(level)).unwrap())
    }

    #[test]
    fn material_validation() {
        assert!(Material::new(0.0, 1.0).is_err());
        assert!(Material::new(1.0, -1.0).is_err());
        assert!(Material::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn translations_in_kernel() {
        for dim in [2, 3] {
            let m = Material::new(1.3, 0.7).unwrap();
            let sys = assemble_stiffness(unit_mesh(dim, 2), &m);
            let kmax = sys.matrix.max_abs();
            for c in 0..dim {
                let mut t = vec![0.0; sys.n_dofs()];
                for n in 0..sys.mesh.n_nodes() {
                    t[n * dim + c] = 1.0;
                }
                let kt = sys.matrix.mul_vec(&t);
                let worst = kt.iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(worst <= 1e-12 * kmax, "dim {dim} comp {c}: {worst}");
            }
        }
    }

    #[test]
    fn element_matrix_matches_higher_order_rule() {
        let m = Material::new(1.0, 1.0).unwrap();
        for dim in [2, 3] {
            let a = element_stiffness(dim, [1.0; 3], &m, 2);
            let b = element_stiffness(dim, [1.0; 3], &m, 3);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-13, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn stiffness_is_symmetric() {
        let m = Material::new(1.0, 2.0).unwrap();
        let sys = assemble_stiffness(unit_mesh(2, 3), &m);
        assert!(sys.matrix.max_asymmetry() <= 1e-12 * sys.matrix.max_abs());
    }

    #[test]
    fn clamped_zero_rhs_gives_zero() {
        let m = Material::new(1.0, 1.0).unwrap();
        let sys = assemble_stiffness(unit_mesh(2, 3), &m).apply_bc(&BoundarySpec::clamped(2)).unwrap();
        let (u, summary) = sys.solve(&SolverSettings::default()).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
        assert!(summary.report.iterations <= 1);
    }

    #[test]
    fn translation_reproduced() {
        let m = Material::new(1.0, 1.0).unwrap();
        let t = LinearField::translation([0.3, -0.2, 0.1]);
        for dim in [2, 3] {
            let bc = BoundarySpec::uniform(dim, FaceCondition::DirichletField(Arc::new(t)));
            let sys = assemble_stiffness(unit_mesh(dim, 2), &m).apply_bc(&bc).unwrap();
            let (u, _) = sys.solve(&SolverSettings::default()).unwrap();
            for n in 0..u.mesh().n_nodes() {
                let v = u.node_value(n);
                for c in 0..dim {
                    assert_relative_eq!(v[c], t.offset[c], epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn all_boundary_dofs_leaves_identity() {
        let m = Material::new(1.0, 1.0).unwrap();
        let sys = assemble_stiffness(unit_mesh(2, 1), &m).apply_bc(&BoundarySpec::clamped(2)).unwrap();
        // level 1: 9 nodes, only the center is interior
        let center = sys.mesh.nodes().iter().position(|x| x[0] == 0.5 && x[1] == 0.5).unwrap();
        for i in 0..sys.n_dofs() {
            for j in 0..sys.n_dofs() {
                if i / 2 == center || j / 2 == center {
                    continue;
                }
                assert_eq!(sys.matrix.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn pure_neumann_needs_opt_in() {
        let m = Material::new(1.0, 1.0).unwrap();
        let bc = BoundarySpec::uniform(2, FaceCondition::TractionFree);
        let err = assemble_stiffness(unit_mesh(2, 2), &m).apply_bc(&bc).unwrap_err();
        assert_eq!(err, Error::SingularSystem);
    }

    #[test]
    fn identity_map_stress_and_force() {
        let m = Material::new(1.0, 1.0).unwrap();
        let u = Field::interpolate(unit_mesh(2, 3), &LinearField::identity(2));
        let s = u.evaluate_stress(&m, &[0.3, 0.7, 0.0]).unwrap();
        assert_relative_eq!(s[0][0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(s[1][1], 4.0, epsilon = 1e-12);
        assert_relative_eq!(s[0][1], 0.0, epsilon = 1e-12);
        let f = u.face_force(&m, 1).unwrap();
        assert_relative_eq!(f[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(f[1], 0.0, epsilon = 1e-12);
        let f = u.face_force(&m, 0).unwrap();
        assert_relative_eq!(f[0], -4.0, epsilon = 1e-12);
        assert!(u.face_force(&m, 4).is_err());
    }

    #[test]
    fn face_average_of_identity() {
        let u = Field::interpolate(unit_mesh(3, 2), &LinearField::identity(3));
        let avg = u.face_average(1).unwrap();
        assert_relative_eq!(avg[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(avg[1], 0.5, epsilon = 1e-14);
        assert_relative_eq!(avg[2], 0.5, epsilon = 1e-14);
        let avg = u.face_average(4).unwrap();
        assert_relative_eq!(avg[2], 0.0, epsilon = 1e-14);
        assert!(u.face_average(6).is_err());
    }

    #[test]
    fn zero_field_has_zero_force_and_stress() {
        let m = Material::new(2.0, 1.0).unwrap();
        let mesh = unit_mesh(3, 2);
        let u = Field::zeros(mesh.clone());
        for face in 0..6 {
            assert_eq!(u.face_force(&m, face).unwrap(), [0.0; 3]);
        }
        let t = Field::interpolate(mesh, &LinearField::translation([1.0, 2.0, 3.0]));
        let s = t.evaluate_stress(&m, &[0.5, 0.5, 0.5]).unwrap();
        assert!(s.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_field_norms_vanish() {
        let lin = LinearField { offset: [0.1, 0.2, 0.0], matrix: [[1.0, 2.0, 0.0], [-0.5, 0.3, 0.0], [0.0; 3]] };
        let u = Field::interpolate(unit_mesh(2, 3), &lin);
        let (l2, h1) = u.error_norms(&lin, 0.0, &[]);
        assert!(l2 <= 1e-12 && h1 <= 1e-12);
        let (l2, h1) = Field::zeros(u.mesh().clone()).error_norms(&lin, 10.0, &[[0.5, 0.5, 0.0]]);
        assert_eq!((l2, h1), (0.0, 0.0));
    }

    #[test]
    fn evaluate_outside_is_error() {
        let u = Field::zeros(unit_mesh(2, 2));
        assert!(u.evaluate(&[1.5, 0.5, 0.0]).is_err());
    }
}
