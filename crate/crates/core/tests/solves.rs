use std::sync::Arc;

use vascfem::forcing::rhs_hypersingular_2d;
use vascfem::{
    assemble_stiffness, Attractor, BoundarySpec, FaceCondition, Field, LinearField, Material, Mesh, MollifiedDelta,
    PointVessel2D, RefinementSpec, SolverSettings,
};

#[test]
fn linear_field_is_reproduced_with_hanging_nodes() {
    for dim in [2, 3] {
        let spec = RefinementSpec {
            base_level: 2,
            local_levels: 2,
            attractors: vec![Attractor::Point([0.3, 0.6, if dim == 3 { 0.4 } else { 0.0 }])],
            attractor_radius: 0.2,
        };
        let mesh = Arc::new(Mesh::build(dim, [0.0; 3], [1.0; 3], &spec).unwrap());
        assert!(!mesh.hanging_nodes().is_empty());
        let lin = LinearField {
            offset: [0.1, -0.2, 0.3],
            matrix: [[0.5, 0.2, -0.1], [0.3, -0.4, 0.2], [0.1, 0.05, 0.7]],
        };
        let m = Material::new(1.3, 2.1).unwrap();
        let bc = BoundarySpec::uniform(dim, FaceCondition::DirichletField(Arc::new(lin.clone())));
        let (u, s) = assemble_stiffness(mesh.clone(), &m).apply_bc(&bc).unwrap().solve(&SolverSettings::default()).unwrap();
        let exact = Field::interpolate(mesh, &lin);
        let err = u.values().iter().zip(exact.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 1e-8, "dim {dim}: {err}");
        assert!(s.galerkin_gap() < 1e-9);
    }
}

#[test]
fn centered_vessel_gives_mirror_symmetric_solution() {
    let mesh = Arc::new(Mesh::build(2, [0.0; 3], [1.0; 3], &RefinementSpec::uniform(5)).unwrap());
    let m = Material::new(1.0, 1.0).unwrap();
    let k = MollifiedDelta::new(2.0 * mesh.min_cell_diameter(), 2).unwrap();
    let v = [PointVessel2D { center: [0.5, 0.5, 0.0], radius: 0.05, pressure: 1.0 }];
    let rhs = rhs_hypersingular_2d(&mesh, &m, &v, &k).unwrap();
    let (u, _) = assemble_stiffness(mesh, &m)
        .with_rhs(rhs)
        .apply_bc(&BoundarySpec::clamped(2))
        .unwrap()
        .solve(&SolverSettings::default())
        .unwrap();
    let scale = u.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for p in [[0.2, 0.3], [0.37, 0.81], [0.1, 0.5]] {
        let a = u.evaluate(&[p[0], p[1], 0.0]).unwrap();
        let b = u.evaluate(&[1.0 - p[0], p[1], 0.0]).unwrap();
        assert!((a[0] + b[0]).abs() < 1e-10 * scale);
        assert!((a[1] - b[1]).abs() < 1e-10 * scale);
        // outward from the vessel
        assert!(a[0] * (p[0] - 0.5) >= 0.0);
    }
}
