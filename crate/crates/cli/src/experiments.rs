//! The five experiment families.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use vascfem::analytic::{homog_2d, homog_3d_aligned};
use vascfem::elasticity::SolveSummary;
use vascfem::forcing::{
    homogenized_prestress, rhs_homogenized, rhs_hypersingular_2d, rhs_hypersingular_3d, rhs_regularized_2d,
    rhs_singular_2d,
};
use vascfem::vessel::{beta_i, principal_directions};
use vascfem::vesselgen::{build_tree, radius_for_beta, sample_aligned_vessels, sample_point_vessels};
use vascfem::{
    assemble_stiffness, AnalyticField, AxisymConfig, Attractor, Beta, BoundarySpec, BoxDomain, EpsilonRule,
    ExtendedAxisym, FaceCondition, Field, ForcingSpec, ForcingVariant, Material, Mesh, PointVessel2D,
    RefinementSpec, RngStream, RootPreset, SolverSettings, SparseSystem, TreeConfig, VesselNetwork, VesselSegment3D,
    VesselTree,
};

use crate::config::{
    EpsilonConfig, Experiment, ExperimentConfig, FaceBc, GeneratorConfig, GeneratorKind, MarginConfig, RootConfig,
    RootName, Variant, VesselsConfig, FACE_NAMES,
};
use crate::table::{CsvTable, Value};

/// Everything an experiment produces, in a fixed order.
#[derive(Default)]
pub struct Outputs {
    pub tables: Vec<(String, CsvTable)>,
    pub texts: Vec<(String, String)>,
    pub fields: Vec<(String, Field)>,
}

impl Outputs {
    pub fn table(&self, name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Vessels of one realization.
#[derive(Debug, Clone)]
pub enum Vessels {
    Points(Vec<PointVessel2D>),
    Network(VesselNetwork),
}

impl Vessels {
    fn attractors(&self) -> Vec<Attractor> {
        match self {
            Vessels::Points(p) => p.iter().map(|v| Attractor::Point(v.center)).collect(),
            Vessels::Network(n) => n.segments.iter().map(|s| Attractor::Polyline(s.points().to_vec())).collect(),
        }
    }

    fn count(&self) -> usize {
        match self {
            Vessels::Points(p) => p.len(),
            Vessels::Network(n) => n.segments.len(),
        }
    }

    /// Vessel area (2D) or volume (3D).
    fn measure(&self) -> f64 {
        match self {
            Vessels::Points(p) => p.iter().map(|v| std::f64::consts::PI * v.radius * v.radius).sum(),
            Vessels::Network(n) => n.vessel_volume(),
        }
    }
}

pub fn material(cfg: &ExperimentConfig) -> Result<Material> {
    Ok(Material::new(cfg.material.mu, cfg.material.lambda)?)
}

pub fn forcing_spec(cfg: &ExperimentConfig) -> ForcingSpec {
    let variant = match cfg.forcing.variant {
        Variant::S => ForcingVariant::Singular,
        Variant::RS => ForcingVariant::RegularizedSingular,
        Variant::RHs => ForcingVariant::HyperSingular,
        Variant::Homogenized => ForcingVariant::Homogenized,
    };
    let mut spec = ForcingSpec::new(variant);
    if let EpsilonConfig::Value(e) = cfg.forcing.epsilon {
        spec.epsilon = EpsilonRule::Explicit(e);
    }
    if let Some(f) = cfg.forcing.spacing_factor {
        spec.spacing_factor = f;
    }
    spec
}

fn domain(cfg: &ExperimentConfig) -> Result<BoxDomain> {
    Ok(BoxDomain::new(cfg.dim, cfg.origin()?, cfg.extent()?)?)
}

fn finest_level(cfg: &ExperimentConfig, base: u32) -> u32 {
    if cfg.mesh.local_levels > 0 && cfg.mesh.attractor_radius > 0.0 {
        base + cfg.mesh.local_levels
    } else {
        base
    }
}

/// Kernel width expected before the mesh exists, used to size margins.
fn expected_epsilon(cfg: &ExperimentConfig, base: u32) -> Result<f64> {
    Ok(match cfg.forcing.epsilon {
        EpsilonConfig::Value(e) => e,
        EpsilonConfig::Rule(_) => {
            let scale = 0.5f64.powi(finest_level(cfg, base) as i32);
            let ext = cfg.extent()?;
            2.0 * ext[..cfg.dim].iter().map(|e| (e * scale).powi(2)).sum::<f64>().sqrt()
        }
    })
}

pub fn build_mesh(cfg: &ExperimentConfig, base: u32, attractors: Vec<Attractor>) -> Result<Arc<Mesh>> {
    let spec = RefinementSpec {
        base_level: base,
        local_levels: cfg.mesh.local_levels,
        attractors,
        attractor_radius: cfg.mesh.attractor_radius,
    };
    Ok(Arc::new(Mesh::build(cfg.dim, cfg.origin()?, cfg.extent()?, &spec)?))
}

fn generator_margin(g: &GeneratorConfig, radius: f64, eps: f64) -> f64 {
    match g.margin {
        MarginConfig::Value(m) => m,
        MarginConfig::Auto(_) => radius.max(eps),
    }
}

/// The effective seed: command line, then generator, then `run.master_seed`.
pub fn effective_seed(cfg: &ExperimentConfig, seed_override: Option<u64>) -> u64 {
    let generator_seed = match &cfg.vessels {
        Some(VesselsConfig::Generator(g)) => g.seed,
        _ => None,
    };
    seed_override.or(generator_seed).unwrap_or(cfg.run.master_seed)
}

fn random_vessels(cfg: &ExperimentConfig, g: &GeneratorConfig, eps: f64, rng: &mut RngStream) -> Result<Vessels> {
    let dom = domain(cfg)?;
    let n = g.n;
    if n == 0 {
        bail!("generator.n must be positive");
    }
    if cfg.dim == 2 {
        let radius = match (g.radius, g.target_beta) {
            (Some(r), _) => r,
            (None, Some(b)) => (b * dom.measure() / (n as f64 * std::f64::consts::PI)).sqrt(),
            _ => unreachable!("validated"),
        };
        let margin = generator_margin(g, radius, eps);
        return Ok(Vessels::Points(sample_point_vessels(&dom, n, radius, margin, g.pressure, rng)?));
    }
    let height = dom.extent[2];
    let (radius, margin) = match (g.radius, g.target_beta) {
        (Some(r), _) => (r, generator_margin(g, r, eps)),
        (None, Some(b)) => {
            let size = |m: f64| radius_for_beta(n as f64 * (height - 2.0 * m), dom.measure(), b);
            let mut margin = generator_margin(g, 0.0, eps);
            let mut r = size(margin)?;
            if matches!(g.margin, MarginConfig::Auto(_)) && r > margin {
                margin = r;
                r = size(margin)?;
            }
            (r, margin)
        }
        _ => unreachable!("validated"),
    };
    Ok(Vessels::Network(sample_aligned_vessels(&dom, n, radius, margin, g.pressure, rng)?))
}

fn tree_vessels(cfg: &ExperimentConfig, g: &GeneratorConfig, eps: f64, rng: &mut RngStream) -> Result<VesselTree> {
    let dom = domain(cfg)?;
    let Some(target_beta) = g.target_beta else { bail!("tree generator sizes its radius from target_beta") };
    let margin = match g.margin {
        MarginConfig::Value(m) => m,
        MarginConfig::Auto(_) => eps,
    };
    let root = match g.root.unwrap_or(RootConfig::Preset(RootName::LL)) {
        RootConfig::Preset(RootName::LL) => RootPreset::LL.position(&dom, margin)?,
        RootConfig::Preset(RootName::C) => RootPreset::C.position(&dom, margin)?,
        RootConfig::Preset(RootName::FC) => RootPreset::FC.position(&dom, margin)?,
        RootConfig::Point(p) => p,
    };
    let tc = TreeConfig {
        n_points: g.n,
        root,
        balancing_factor: g.balancing_factor.unwrap_or(0.5),
        target_beta,
        domain: dom,
        margin,
        pressure: g.pressure,
    };
    Ok(build_tree(&tc, rng)?)
}

/// Vessels for realization `r`, plus the tree when one was grown.
pub fn realize_vessels(
    cfg: &ExperimentConfig,
    seed: u64,
    r: u64,
    eps: f64,
) -> Result<Option<(Vessels, Option<VesselTree>)>> {
    let Some(v) = &cfg.vessels else { return Ok(None) };
    let out = match v {
        VesselsConfig::Points(points) => {
            if cfg.dim != 2 {
                bail!("point vessels are 2D");
            }
            let list = points
                .iter()
                .map(|p| PointVessel2D { center: [p.center[0], p.center[1], 0.0], radius: p.radius, pressure: p.pressure })
                .collect();
            (Vessels::Points(list), None)
        }
        VesselsConfig::Segments(segs) => {
            let segments = segs
                .iter()
                .map(|s| VesselSegment3D::new(s.points.clone(), s.radii.clone(), s.pressures.clone()))
                .collect::<vascfem::Result<Vec<_>>>()?;
            (Vessels::Network(VesselNetwork::new(segments)), None)
        }
        VesselsConfig::File(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            (Vessels::Network(VesselNetwork::from_text(&text)?), None)
        }
        VesselsConfig::Generator(g) => {
            let mut rng = RngStream::new(seed, r);
            match g.kind {
                GeneratorKind::Random => (random_vessels(cfg, g, eps, &mut rng)?, None),
                GeneratorKind::Tree => {
                    let tree = tree_vessels(cfg, g, eps, &mut rng)?;
                    (Vessels::Network(tree.network.clone()), Some(tree))
                }
            }
        }
    };
    if matches!(out.0, Vessels::Network(_)) && cfg.dim != 3 {
        bail!("vessel networks need a 3D domain");
    }
    Ok(Some(out))
}

fn homog_beta_pressure(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let Some(beta) = cfg.forcing.beta else { bail!("forcing.beta is required") };
    Ok((beta, cfg.forcing.pressure.unwrap_or(1.0)))
}

pub fn assemble_rhs(cfg: &ExperimentConfig, mesh: &Mesh, mat: &Material, vessels: Option<&Vessels>) -> Result<Vec<f64>> {
    let spec = forcing_spec(cfg);
    if cfg.forcing.variant == Variant::Homogenized {
        let (beta, p) = homog_beta_pressure(cfg)?;
        return Ok(rhs_homogenized(mesh, mat, Beta::Scalar(beta), p)?);
    }
    let Some(vessels) = vessels else { bail!("vessel forcing needs vessels") };
    let rhs = match (cfg.forcing.variant, vessels) {
        (Variant::S, Vessels::Points(v)) => rhs_singular_2d(mesh, mat, v, cfg.forcing.n_quad)?,
        (Variant::RS, Vessels::Points(v)) => rhs_regularized_2d(mesh, mat, v, &spec.kernel(mesh)?, cfg.forcing.n_quad)?,
        (Variant::RHs, Vessels::Points(v)) => rhs_hypersingular_2d(mesh, mat, v, &spec.kernel(mesh)?)?,
        (Variant::RHs, Vessels::Network(n)) => {
            rhs_hypersingular_3d(mesh, mat, n, &spec.kernel(mesh)?, Some(spec.spacing(mesh)))?
        }
        (v, Vessels::Network(_)) => bail!("forcing variant {v:?} is not available for 3D networks"),
        (Variant::Homogenized, _) => unreachable!(),
    };
    Ok(rhs)
}

fn boundary(cfg: &ExperimentConfig, exact: Option<Arc<dyn AnalyticField>>) -> Result<BoundarySpec> {
    let faces = cfg
        .bcs
        .resolve(cfg.dim)?
        .into_iter()
        .map(|b| match b {
            FaceBc::Clamped => Ok(FaceCondition::ClampedZero),
            FaceBc::Free => Ok(FaceCondition::TractionFree),
            FaceBc::Exact => match &exact {
                Some(f) => Ok(FaceCondition::DirichletField(f.clone())),
                None => bail!("\"exact\" boundary data needs exactly one 2D point vessel"),
            },
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundarySpec { faces, allow_pure_neumann: false })
}

fn exact_field(cfg: &ExperimentConfig, mat: &Material, vessels: Option<&Vessels>) -> Result<Option<Arc<dyn AnalyticField>>> {
    let outer = cfg.analysis.as_ref().map_or(1.0, |a| a.outer_radius);
    match vessels {
        Some(Vessels::Points(p)) if p.len() == 1 => {
            let v = &p[0];
            let ac = AxisymConfig::new(outer, v.radius, v.pressure, *mat)?;
            Ok(Some(Arc::new(ExtendedAxisym { cfg: ac, center: v.center })))
        }
        _ => Ok(None),
    }
}

fn solve(base: &SparseSystem, rhs: Vec<f64>, bc: &BoundarySpec) -> Result<(Field, SolveSummary)> {
    Ok(base.clone().with_rhs(rhs).apply_bc(bc)?.solve(&SolverSettings::default())?)
}

/// `(outward normal axis, sign)` of a face id.
fn face_normal(face: usize) -> (usize, f64) {
    (face / 2, if face % 2 == 1 { 1.0 } else { -1.0 })
}

/// Boundary force of the tissue on each face; for the homogenized model
/// the prestress is included so the value compares with the vessel models.
fn face_forces(cfg: &ExperimentConfig, mat: &Material, u: &Field) -> Result<Vec<[f64; 3]>> {
    let mesh = u.mesh();
    let prestress = if cfg.forcing.variant == Variant::Homogenized {
        let (beta, p) = homog_beta_pressure(cfg)?;
        Some(homogenized_prestress(mat, Beta::Scalar(beta), p))
    } else {
        None
    };
    (0..2 * cfg.dim)
        .map(|face| {
            let mut f = u.face_force(mat, face)?;
            if let Some(s) = prestress {
                let (axis, sign) = face_normal(face);
                let area = mesh.face_area(face)?;
                for i in 0..cfg.dim {
                    f[i] -= s[i][axis] * sign * area;
                }
            }
            Ok(f)
        })
        .collect()
}

fn rate(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

pub fn run_converge(cfg: &ExperimentConfig) -> Result<Outputs> {
    let mat = material(cfg)?;
    let analysis = cfg.analysis.as_ref().context("converge needs an analysis section")?;
    let (vessels, _) = realize_vessels(cfg, 0, 0, 0.0)?.context("converge needs one vessel")?;
    let Vessels::Points(points) = &vessels else { bail!("converge needs a point vessel") };
    let center = points[0].center;
    let exact = exact_field(cfg, &mat, Some(&vessels))?.context("converge needs one point vessel")?;
    let bc = BoundarySpec::uniform(2, FaceCondition::DirichletField(exact.clone()));
    let mut table = CsvTable::new(&["level", "dofs", "h", "l2_error", "h1_error", "l2_rate", "h1_rate"]);
    let mut prev: Option<(f64, f64)> = None;
    let mut last = None;
    for &level in &analysis.levels {
        let mesh = build_mesh(cfg, level, vessels.attractors())?;
        let rhs = assemble_rhs(cfg, &mesh, &mat, Some(&vessels))?;
        let system = assemble_stiffness(mesh.clone(), &mat);
        let dofs = system.n_dofs();
        let (u, _) = solve(&system, rhs, &bc)?;
        let (l2, h1) = u.error_norms(exact.as_ref(), analysis.mask_radius, &[center]);
        let (r2, r1) = prev.map_or((f64::NAN, f64::NAN), |(p2, p1)| (rate(p2, l2), rate(p1, h1)));
        table.push(vec![level.into(), dofs.into(), mesh.min_cell_size().into(), l2.into(), h1.into(), r2.into(), r1.into()]);
        prev = Some((l2, h1));
        last = Some(u);
    }
    let mut out = Outputs { tables: vec![("converge.csv".into(), table)], ..Default::default() };
    if let Some(u) = last {
        out.fields.push(("converge.vtk".into(), u));
    }
    Ok(out)
}

pub fn run_solve(cfg: &ExperimentConfig, seed: u64) -> Result<Outputs> {
    let mat = material(cfg)?;
    let eps = expected_epsilon(cfg, cfg.mesh.base_level)?;
    let realized = realize_vessels(cfg, seed, 0, eps)?;
    let vessels = realized.as_ref().map(|(v, _)| v);
    let mesh = build_mesh(cfg, cfg.mesh.base_level, vessels.map_or(Vec::new(), Vessels::attractors))?;
    let rhs = assemble_rhs(cfg, &mesh, &mat, vessels)?;
    let bc = boundary(cfg, exact_field(cfg, &mat, vessels)?)?;
    let system = assemble_stiffness(mesh.clone(), &mat);
    let (u, summary) = solve(&system, rhs, &bc)?;
    let forces = face_forces(cfg, &mat, &u)?;
    let mut faces = CsvTable::new(&["face", "force_x", "force_y", "force_z", "f_normal", "mean_ux", "mean_uy", "mean_uz"]);
    for (face, f) in forces.iter().enumerate() {
        let (axis, sign) = face_normal(face);
        let avg = u.face_average(face)?;
        faces.push(vec![
            FACE_NAMES[face].into(),
            f[0].into(),
            f[1].into(),
            f[2].into(),
            (-sign * f[axis]).into(),
            avg[0].into(),
            avg[1].into(),
            avg[2].into(),
        ]);
    }
    let mut info = CsvTable::new(&["quantity", "value"]);
    info.push(vec!["dofs".into(), system.n_dofs().into()]);
    info.push(vec!["cells".into(), mesh.n_cells().into()]);
    info.push(vec!["h_min".into(), mesh.min_cell_size().into()]);
    info.push(vec!["epsilon".into(), forcing_spec(cfg).resolve_epsilon(&mesh)?.into()]);
    info.push(vec!["vessels".into(), vessels.map_or(0, Vessels::count).into()]);
    info.push(vec!["iterations".into(), summary.report.iterations.into()]);
    info.push(vec!["relative_residual".into(), summary.report.relative_residual.into()]);
    info.push(vec!["galerkin_gap".into(), summary.galerkin_gap().into()]);
    let mut out = Outputs {
        tables: vec![("faces.csv".into(), faces), ("solve.csv".into(), info)],
        ..Default::default()
    };
    if let Some((Vessels::Network(n), _)) = &realized {
        out.texts.push(("network.txt".into(), n.to_text()));
    }
    out.fields.push(("solution.vtk".into(), u));
    Ok(out)
}

/// Force components reported per face: the normal one, then the
/// tangential axes in increasing order.
fn decompose(dim: usize, face: usize, f: &[f64; 3]) -> Vec<f64> {
    let (axis, sign) = face_normal(face);
    let mut v = vec![-sign * f[axis]];
    v.extend((0..dim).filter(|&k| k != axis).map(|k| f[k]));
    v
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd)
}

pub fn run_stats(cfg: &ExperimentConfig, seed: u64) -> Result<Outputs> {
    let mat = material(cfg)?;
    let dim = cfg.dim;
    let base = cfg.mesh.base_level;
    let eps = expected_epsilon(cfg, base)?;
    let homogenized = cfg.forcing.variant == Variant::Homogenized;
    let realizations = if homogenized { 1 } else { cfg.run.realizations };
    let bc = boundary(cfg, None)?;
    let shared = if cfg.mesh.local_levels == 0 || homogenized {
        let mesh = build_mesh(cfg, base, Vec::new())?;
        Some(assemble_stiffness(mesh, &mat))
    } else {
        None
    };
    struct Realization {
        forces: Vec<[f64; 3]>,
        beta: f64,
        pressure: f64,
    }
    let results: Vec<Realization> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| -> Result<Realization> {
            let realized = realize_vessels(cfg, seed, r, eps)?;
            let vessels = realized.as_ref().map(|(v, _)| v);
            let local;
            let system = match &shared {
                Some(s) => s,
                None => {
                    let mesh = build_mesh(cfg, base, vessels.map_or(Vec::new(), Vessels::attractors))?;
                    local = assemble_stiffness(mesh, &mat);
                    &local
                }
            };
            let rhs = assemble_rhs(cfg, &system.mesh, &mat, vessels)?;
            let (u, _) = solve(system, rhs, &bc)?;
            let forces = face_forces(cfg, &mat, &u)?;
            let (beta, pressure) = if homogenized {
                homog_beta_pressure(cfg)?
            } else {
                let v = vessels.expect("validated");
                let p = match &cfg.vessels {
                    Some(VesselsConfig::Generator(g)) => g.pressure,
                    Some(VesselsConfig::Points(p)) => p.first().map_or(0.0, |v| v.pressure),
                    _ => 1.0,
                };
                (v.measure() / system.mesh.volume(), p)
            };
            Ok(Realization { forces, beta, pressure })
        })
        .collect::<Result<_>>()?;

    let components = if dim == 2 { vec!["normal", "t1"] } else { vec!["normal", "t1", "t2"] };
    let header: Vec<String> = ["realization", "face", "beta"]
        .into_iter()
        .map(String::from)
        .chain(components.iter().map(|c| format!("f_{c}")))
        .collect();
    let mut per = CsvTable { header, rows: Vec::new() };
    for (r, res) in results.iter().enumerate() {
        for face in 0..2 * dim {
            let mut row: Vec<Value> = vec![r.into(), FACE_NAMES[face].into(), res.beta.into()];
            row.extend(decompose(dim, face, &res.forces[face]).into_iter().map(Value::from));
            per.push(row);
        }
    }

    let mesh_area = |face: usize| -> Result<f64> {
        let ext = cfg.extent()?;
        let axis = face / 2;
        Ok((0..dim).filter(|&k| k != axis).map(|k| ext[k]).product())
    };
    let mut summary = CsvTable::new(&["face", "component", "mean", "sd", "std_error", "prediction", "realizations"]);
    let (beta_mean, _) = mean_sd(&results.iter().map(|r| r.beta).collect::<Vec<_>>());
    let pressure = results.first().map_or(0.0, |r| r.pressure);
    for face in 0..2 * dim {
        let (axis, _) = face_normal(face);
        let traction = if homogenized {
            homogenized_prestress(&mat, Beta::Scalar(beta_mean), pressure)[axis][axis]
        } else if dim == 3 && axis == 2 {
            // transverse action only, no load along the vessel axis
            homog_3d_aligned(&mat, beta_mean, pressure, &[0.0, 0.0, 1.0])?.stress[2][2]
        } else {
            homog_2d(&mat, beta_mean, pressure)?.1
        };
        for (c, name) in components.iter().enumerate() {
            let xs: Vec<f64> = results.iter().map(|r| decompose(dim, face, &r.forces[face])[c]).collect();
            let (mean, sd) = mean_sd(&xs);
            let prediction = if c == 0 { traction * mesh_area(face)? } else { 0.0 };
            summary.push(vec![
                FACE_NAMES[face].into(),
                (*name).into(),
                mean.into(),
                sd.into(),
                (sd / (xs.len() as f64).sqrt()).into(),
                prediction.into(),
                xs.len().into(),
            ]);
        }
    }
    Ok(Outputs { tables: vec![("stats.csv".into(), per), ("stats_summary.csv".into(), summary)], ..Default::default() })
}

/// `M_ij = F_{i+}·e_j − F_{i−}·e_j` with `F` the mean traction
/// `∫σn / |A|` on a face.
pub fn traction_matrix(mat: &Material, u: &Field) -> Result<[[f64; 3]; 3]> {
    let mesh = u.mesh();
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate().take(mesh.dim()) {
        let plus = u.face_force(mat, 2 * i + 1)?;
        let minus = u.face_force(mat, 2 * i)?;
        let ap = mesh.face_area(2 * i + 1)?;
        let am = mesh.face_area(2 * i)?;
        for j in 0..3 {
            row[j] = plus[j] / ap - minus[j] / am;
        }
    }
    Ok(m)
}

pub fn run_tree(cfg: &ExperimentConfig, seed: u64) -> Result<Outputs> {
    let mat = material(cfg)?;
    let eps = expected_epsilon(cfg, cfg.mesh.base_level)?;
    let (vessels, tree) = realize_vessels(cfg, seed, 0, eps)?.context("tree needs a generator")?;
    let tree = tree.context("tree needs a tree generator")?;
    let network = &tree.network;
    let mesh = build_mesh(cfg, cfg.mesh.base_level, vessels.attractors())?;
    let rhs = assemble_rhs(cfg, &mesh, &mat, Some(&vessels))?;
    let bc = boundary(cfg, None)?;
    let system = assemble_stiffness(mesh.clone(), &mat);
    let (u, summary) = solve(&system, rhs, &bc)?;
    let volume = mesh.volume();
    let dirs = principal_directions(network)?;
    let betas = beta_i(network, volume)?;
    let m = traction_matrix(&mat, &u)?;

    let mut t = CsvTable::new(&["quantity", "value"]);
    t.push(vec!["n_points".into(), tree.nodes.len().into()]);
    t.push(vec!["n_edges".into(), tree.edges.len().into()]);
    t.push(vec!["total_length".into(), tree.total_length.into()]);
    t.push(vec!["radius".into(), tree.radius.into()]);
    t.push(vec!["vessel_volume".into(), network.vessel_volume().into()]);
    t.push(vec!["beta".into(), (network.vessel_volume() / volume).into()]);
    for k in 0..3 {
        t.push(vec![format!("lambda_{}", k + 1).into(), dirs.eigenvalues[k].into()]);
        for (c, axis) in ["x", "y", "z"].iter().enumerate() {
            t.push(vec![format!("v{}_{axis}", k + 1).into(), dirs.eigenvectors[k][c].into()]);
        }
    }
    for k in 0..3 {
        t.push(vec![format!("beta_{}", k + 1).into(), betas[k].into()]);
    }
    let axes = ["x", "y", "z"];
    for i in 0..3 {
        for j in 0..3 {
            t.push(vec![format!("M_{}{}", axes[i], axes[j]).into(), m[i][j].into()]);
        }
    }
    t.push(vec!["dofs".into(), system.n_dofs().into()]);
    t.push(vec!["iterations".into(), summary.report.iterations.into()]);
    t.push(vec!["galerkin_gap".into(), summary.galerkin_gap().into()]);
    Ok(Outputs {
        tables: vec![("tree.csv".into(), t)],
        texts: vec![("network.txt".into(), network.to_text())],
        fields: vec![("tree.vtk".into(), u)],
    })
}

pub fn run_homog(cfg: &ExperimentConfig) -> Result<Outputs> {
    let mat = material(cfg)?;
    let (beta, p) = homog_beta_pressure(cfg)?;
    let (c, traction) = homog_2d(&mat, beta, p)?;
    let tau = [0.0, 0.0, 1.0];
    let aligned = homog_3d_aligned(&mat, beta, p, &tau)?;
    let mut t = CsvTable::new(&["quantity", "value"]);
    t.push(vec!["g_prime".into(), mat.g_prime().into()]);
    t.push(vec!["c_2d".into(), c.into()]);
    t.push(vec!["traction_2d".into(), traction.into()]);
    t.push(vec!["radial_coefficient".into(), aligned.radial_coefficient(&tau).into()]);
    t.push(vec!["axial_coefficient".into(), aligned.axial_coefficient(&tau).into()]);
    let axes = ["x", "y", "z"];
    for i in 0..3 {
        for j in 0..3 {
            t.push(vec![format!("stress_aligned_{}{}", axes[i], axes[j]).into(), aligned.stress[i][j].into()]);
        }
    }
    Ok(Outputs { tables: vec![("homog.csv".into(), t)], ..Default::default() })
}

/// Runs the configured experiment on the current rayon pool.
pub fn run(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<Outputs> {
    let seed = effective_seed(cfg, seed_override);
    match cfg.experiment {
        Experiment::Converge => run_converge(cfg),
        Experiment::Solve => run_solve(cfg, seed),
        Experiment::Stats => run_stats(cfg, seed),
        Experiment::Tree => run_tree(cfg, seed),
        Experiment::Homog => run_homog(cfg),
    }
}
