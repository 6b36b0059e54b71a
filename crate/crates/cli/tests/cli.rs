use std::process::Command;
use std::sync::Arc;

use vascfem::{Field, LinearField, Mesh, RefinementSpec};
use vascfem_cli::vtk::write_vtk_to;
use vascfem_cli::{run, run_with_threads, write_outputs, ExperimentConfig};

fn small_stats(pressure: f64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
        "experiment": "stats", "dim": 2,
        "domain": {{ "origin": [0, 0], "extent": [1, 1] }},
        "mesh": {{ "base_level": 4 }},
        "material": {{ "mu": 1, "lambda": 1 }},
        "forcing": {{ "variant": "RHs", "epsilon": "2h" }},
        "vessels": {{ "generator": {{ "kind": "random", "n": 4, "radius": 0.02, "pressure": {pressure} }} }},
        "run": {{ "realizations": 6, "master_seed": 3 }}
    }}"#
    ))
    .unwrap()
}

fn converge(levels: &str, pressure: f64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
        "experiment": "converge", "dim": 2,
        "domain": {{ "origin": [-1, -1], "extent": [2, 2] }},
        "mesh": {{ "base_level": 3 }},
        "material": {{ "mu": 1, "lambda": 1 }},
        "vessels": {{ "points": [{{ "center": [0, 0], "radius": 0.1, "pressure": {pressure} }}] }},
        "analysis": {{ "levels": {levels}, "mask_radius": 0.2 }}
    }}"#
    ))
    .unwrap()
}

fn tree_cfg(pressure: f64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
        "experiment": "tree", "dim": 3,
        "domain": {{ "origin": [0, 0, 0], "extent": [1, 1, 1] }},
        "mesh": {{ "base_level": 3 }},
        "material": {{ "mu": 1, "lambda": 1 }},
        "vessels": {{ "generator": {{ "kind": "tree", "n": 12, "target_beta": 0.02, "root": "C",
                                       "balancing_factor": 0.5, "pressure": {pressure} }} }},
        "run": {{ "master_seed": 5 }}
    }}"#
    ))
    .unwrap()
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = small_stats(1.0);
    let a = run_with_threads(&cfg, None, Some(1)).unwrap();
    let b = run_with_threads(&cfg, None, Some(4)).unwrap();
    let c = run_with_threads(&cfg, None, Some(1)).unwrap();
    for name in ["stats.csv", "stats_summary.csv"] {
        let ta = a.table(name).unwrap().to_string();
        assert_eq!(ta, b.table(name).unwrap().to_string());
        assert_eq!(ta, c.table(name).unwrap().to_string());
    }
}

#[test]
fn seed_override_changes_realizations() {
    let cfg = small_stats(1.0);
    let a = run(&cfg, None).unwrap();
    let b = run(&cfg, Some(99)).unwrap();
    assert_ne!(a.table("stats.csv").unwrap().to_string(), b.table("stats.csv").unwrap().to_string());
}

#[test]
fn zero_pressure_gives_zero_forces() {
    let out = run(&small_stats(0.0), None).unwrap();
    let t = out.table("stats.csv").unwrap();
    for col in ["f_normal", "f_t1"] {
        let c = t.column(col).unwrap();
        assert!(t.rows.iter().all(|r| r[c].as_f64().unwrap() == 0.0));
    }
}

#[test]
fn converge_rates_and_zero_pressure() {
    let out = run(&converge("[3, 3]", 1.0), None).unwrap();
    let t = out.table("converge.csv").unwrap();
    assert_eq!(t.header, ["level", "dofs", "h", "l2_error", "h1_error", "l2_rate", "h1_rate"]);
    assert!(t.rows[0][5].as_f64().unwrap().is_nan());
    assert_eq!(t.rows[1][5].as_f64().unwrap(), 0.0);
    assert_eq!(t.rows[1][6].as_f64().unwrap(), 0.0);

    let out = run(&converge("[3, 4]", 0.0), None).unwrap();
    let t = out.table("converge.csv").unwrap();
    for r in &t.rows {
        assert_eq!(r[3].as_f64().unwrap(), 0.0);
        assert_eq!(r[4].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn tree_with_zero_pressure_has_zero_moments() {
    let out = run(&tree_cfg(0.0), None).unwrap();
    let t = out.table("tree.csv").unwrap();
    for a in ["x", "y", "z"] {
        for b in ["x", "y", "z"] {
            let v = t.lookup("quantity", &format!("M_{a}{b}"), "value").unwrap();
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
    }
    let out = run(&tree_cfg(1.0), None).unwrap();
    let t = out.table("tree.csv").unwrap();
    assert_eq!(t.lookup("quantity", "n_edges", "value").unwrap().as_f64(), Some(11.0));
    let net = &out.texts[0].1;
    assert_eq!(vascfem::VesselNetwork::from_text(net).unwrap().segments.len(), 11);
}

#[test]
fn single_aligned_vessel_acts_transversally() {
    let cfg = ExperimentConfig::from_json(
        r#"{
        "experiment": "solve", "dim": 3,
        "domain": { "origin": [0, 0, 0], "extent": [1, 1, 1] },
        "mesh": { "base_level": 5 },
        "material": { "mu": 1, "lambda": 1 },
        "vessels": { "segments": [ { "points": [[0.5, 0.5, 0.11], [0.5, 0.5, 0.89]],
                                     "radii": [0.05, 0.05], "pressures": [1, 1] } ] }
    }"#,
    )
    .unwrap();
    let out = run(&cfg, None).unwrap();
    let u = &out.fields[0].1;
    let m = vascfem_cli::experiments::traction_matrix(&vascfem::Material::new(1.0, 1.0).unwrap(), u).unwrap();
    assert!(m[0][0] < 0.0 && m[1][1] < 0.0);
    assert!((m[0][0] / m[1][1] - 1.0).abs() < 1e-10, "M = {m:?}");
    assert!(m[2][2].abs() < 0.2 * m[0][0].abs(), "M = {m:?}");
}

#[test]
fn schema_round_trip_and_rejections() {
    for name in ["converge.json", "stats2d.json", "stats3d_aligned.json", "tree.json", "yjunction.json", "homog.json"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        let cfg = ExperimentConfig::load(&path).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{name}");
        assert_eq!(cfg.to_json(), again.to_json());
    }
    let base = small_stats(1.0).to_json();
    let unknown = base.replacen("\"dim\"", "\"colour\": 1, \"dim\"", 1);
    assert!(ExperimentConfig::from_json(&unknown).is_err());
    let bad_face = base.replacen("\"dim\"", "\"bcs\": {\"faces\": {\"+z\": \"free\"}}, \"dim\"", 1);
    assert!(ExperimentConfig::from_json(&bad_face).is_err());
    let bad_eps = base.replace("\"2h\"", "\"3h\"");
    assert!(ExperimentConfig::from_json(&bad_eps).is_err());
}

fn identity_vtk(dim: usize) -> String {
    let mesh = Arc::new(Mesh::build(dim, [0.0; 3], [1.0; 3], &RefinementSpec::uniform(1)).unwrap());
    let field = Field::interpolate(mesh, &LinearField::identity(dim));
    let mut buf = Vec::new();
    write_vtk_to(&field, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn vtk_matches_fixtures() {
    for (dim, file) in [(2, "identity_2d.vtk"), (3, "identity_3d.vtk")] {
        let text = identity_vtk(dim);
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(file);
        let fixture = std::fs::read_to_string(path).unwrap();
        let got: Vec<&str> = text.split_whitespace().collect();
        let want: Vec<&str> = fixture.split_whitespace().collect();
        assert_eq!(got, want, "{file}");
        assert_eq!(text.lines().next(), Some("# vtk DataFile Version 3.0"));
        let n_nodes = if dim == 2 { 9 } else { 27 };
        let pos = got.iter().position(|t| *t == "POINT_DATA").unwrap();
        assert_eq!(got[pos + 1], n_nodes.to_string());
        let vectors = got.iter().position(|t| *t == "VECTORS").unwrap();
        assert_eq!(got.len() - (vectors + 3), 3 * n_nodes);
    }
}

#[test]
fn binary_writes_outputs_and_checks_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/homog.json");
    let exe = env!("CARGO_BIN_EXE_vascfem");
    let ok = Command::new(exe).args(["homog", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let text = std::fs::read_to_string(dir.path().join("homog.csv")).unwrap();
    assert!(text.starts_with("quantity,value\n"));
    let wrong = Command::new(exe).args(["stats", "--config"]).arg(&cfg).output().unwrap();
    assert!(!wrong.status.success());

    let again = tempfile::tempdir().unwrap();
    Command::new(exe).args(["homog", "--config"]).arg(&cfg).arg("--out").arg(again.path()).output().unwrap();
    assert_eq!(text, std::fs::read_to_string(again.path().join("homog.csv")).unwrap());
}

#[test]
fn solve_writes_vtk_when_asked() {
    let mut cfg = converge("[3]", 1.0);
    cfg.experiment = vascfem_cli::config::Experiment::Solve;
    cfg.analysis = None;
    cfg.output.vtk = true;
    let out = run(&cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&out, dir.path(), true).unwrap();
    assert!(dir.path().join("solution.vtk").exists());
    assert!(dir.path().join("faces.csv").exists());
}
