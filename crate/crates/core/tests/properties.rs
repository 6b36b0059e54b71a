use proptest::prelude::*;
use vascfem::mesh::{Attractor, Mesh, RefinementSpec};
use vascfem::vessel::{nearest_arclength, symmetric_eigen, VesselSegment3D};
use vascfem::vesselgen::grow_tree;
use vascfem::{MollifiedDelta, RngStream};

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
}

fn refined(dim: usize, p: [f64; 3], radius: f64) -> Mesh {
    let spec = RefinementSpec {
        base_level: 2,
        local_levels: 2,
        attractors: vec![Attractor::Point(if dim == 2 { [p[0], p[1], 0.0] } else { p })],
        attractor_radius: radius,
    };
    Mesh::build(dim, [0.0; 3], [1.0; 3], &spec).unwrap()
}

/// Minimum spanning tree length by Prim, independent of the crate.
fn mst_length(points: &[[f64; 3]]) -> f64 {
    let n = points.len();
    let mut done = vec![false; n];
    let mut best: Vec<f64> = points.iter().map(|q| dist(&points[0], q)).collect();
    done[0] = true;
    let mut total = 0.0;
    for _ in 1..n {
        let i = (0..n).filter(|&i| !done[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
        done[i] = true;
        total += best[i];
        for j in 0..n {
            best[j] = best[j].min(dist(&points[i], &points[j]));
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cells_partition_the_box(dim in 2usize..=3, p in point3(), radius in 0.05..0.4f64) {
        let mesh = refined(dim, p, radius);
        let sum: f64 = (0..mesh.n_cells()).map(|c| mesh.cell_volume(c)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(mesh.balance_violations().is_empty());
    }

    #[test]
    fn locate_matches_linear_scan(p in point3(), radius in 0.05..0.4f64, q in point3()) {
        let mesh = refined(2, p, radius);
        let q = [q[0], q[1], 0.0];
        let scan = mesh
            .cells()
            .iter()
            .position(|c| (0..2).all(|k| c.lo[k] <= q[k] && q[k] <= c.hi[k]))
            .unwrap();
        prop_assert_eq!(mesh.locate_cell(&q).unwrap(), scan);
    }

    #[test]
    fn kernel_is_even_and_gradient_odd(eps in 0.01..0.5f64, x in point3()) {
        let k = MollifiedDelta::new(eps, 3).unwrap();
        let y = x.map(|v| (v - 0.5) * eps);
        let my = y.map(|v| -v);
        prop_assert_eq!(k.eval(&y), k.eval(&my));
        let (g, mg) = (k.gradient(&y), k.gradient(&my));
        for i in 0..3 {
            prop_assert!((g[i] + mg[i]).abs() <= 1e-12 * g[i].abs().max(1.0));
        }
        prop_assert!(k.eval(&y) >= 0.0);
    }

    #[test]
    fn nearest_arclength_beats_dense_sampling(a in point3(), b in point3(), c in point3(), q in point3()) {
        prop_assume!(dist(&a, &b) > 1e-3 && dist(&b, &c) > 1e-3);
        let s = VesselSegment3D::new(vec![a, b, c], vec![0.01; 3], vec![1.0; 3]).unwrap();
        let lens = [dist(&a, &b), dist(&b, &c)];
        let at = |t: f64| -> [f64; 3] {
            if t <= lens[0] {
                std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t / lens[0])
            } else {
                let u = (t - lens[0]) / lens[1];
                std::array::from_fn(|k| b[k] + (c[k] - b[k]) * u)
            }
        };
        let total = lens[0] + lens[1];
        let found = dist(&at(nearest_arclength(&s, &q).min(total)), &q);
        let dense = (0..=4000).map(|i| dist(&at(total * i as f64 / 4000.0), &q)).fold(f64::INFINITY, f64::min);
        prop_assert!(found <= dense + 1e-12);
    }

    #[test]
    fn eigen_reconstructs(m in proptest::array::uniform6(-1.0..1.0f64)) {
        let a = [[m[0], m[1], m[2]], [m[1], m[3], m[4]], [m[2], m[4], m[5]]];
        let (vals, vecs) = symmetric_eigen(&a);
        prop_assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vals[k] * vecs[k][i] * vecs[k][j]).sum();
                prop_assert!((r - a[i][j]).abs() < 1e-10);
                let o: f64 = (0..3).map(|k| vecs[i][k] * vecs[j][k]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((o - id).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trees_are_spanning_and_no_shorter_than_mst(seed in any::<u64>(), bf in 0.0..=1.0f64) {
        let mut rng = RngStream::new(seed, 0);
        let pts: Vec<[f64; 3]> = (0..25).map(|_| [rng.uniform(), rng.uniform(), rng.uniform()]).collect();
        let (parent, edges) = grow_tree(&pts, bf).unwrap();
        prop_assert_eq!(edges.len(), pts.len() - 1);
        prop_assert!(parent[0].is_none());
        prop_assert!(parent[1..].iter().all(Option::is_some));
        let len: f64 = edges.iter().map(|&(a, b)| dist(&pts[a], &pts[b])).sum();
        let mst = mst_length(&pts);
        prop_assert!(len >= mst - 1e-12);
        if bf == 0.0 {
            prop_assert!((len - mst).abs() < 1e-12);
        }
    }

    #[test]
    fn rng_uniform_in_range(seed in any::<u64>(), stream in any::<u64>()) {
        let mut r = RngStream::new(seed, stream);
        for _ in 0..100 {
            let u = r.uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}
