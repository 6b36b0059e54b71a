//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Converge,
    Solve,
    Stats,
    Tree,
    Homog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vessels: Option<VesselsConfig>,
    #[serde(default)]
    pub bcs: BcConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub base_level: u32,
    #[serde(default)]
    pub local_levels: u32,
    #[serde(default)]
    pub attractor_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    S,
    RS,
    RHs,
    Homogenized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsilonRuleName {
    #[serde(rename = "2h")]
    TwoH,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonConfig {
    Value(f64),
    Rule(EpsilonRuleName),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub variant: Variant,
    #[serde(default = "default_epsilon")]
    pub epsilon: EpsilonConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_factor: Option<f64>,
    /// Requested circle samples for S and RS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_quad: Option<usize>,
    /// Volume fraction for the homogenized variant and the homog experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure: Option<f64>,
}

fn default_epsilon() -> EpsilonConfig {
    EpsilonConfig::Rule(EpsilonRuleName::TwoH)
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { variant: Variant::RHs, epsilon: default_epsilon(), spacing_factor: None, n_quad: None, beta: None, pressure: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "one")]
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub points: Vec<[f64; 3]>,
    pub radii: Vec<f64>,
    pub pressures: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VesselsConfig {
    Points(Vec<PointSpec>),
    Segments(Vec<SegmentSpec>),
    /// Path to a network in the interchange text format.
    File(String),
    Generator(GeneratorConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Random,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootName {
    LL,
    C,
    FC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RootConfig {
    Preset(RootName),
    Point([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarginConfig {
    Value(f64),
    Auto(Auto),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Vessel count (random) or number of tree nodes including the root.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balancing_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<RootConfig>,
    #[serde(default = "auto_margin")]
    pub margin: MarginConfig,
    #[serde(default = "one")]
    pub pressure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn auto_margin() -> MarginConfig {
    MarginConfig::Auto(Auto::Auto)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceBc {
    Clamped,
    Free,
    /// Dirichlet data from the extended exact single-vessel solution.
    Exact,
}

pub const FACE_NAMES: [&str; 6] = ["-x", "+x", "-y", "+y", "-z", "+z"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default = "clamped")]
    pub default: FaceBc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub faces: BTreeMap<String, FaceBc>,
}

fn clamped() -> FaceBc {
    FaceBc::Clamped
}

impl Default for BcConfig {
    fn default() -> Self {
        Self { default: FaceBc::Clamped, faces: BTreeMap::new() }
    }
}

impl BcConfig {
    /// Per-face conditions in face-id order.
    pub fn resolve(&self, dim: usize) -> Result<Vec<FaceBc>> {
        for name in self.faces.keys() {
            match FACE_NAMES[..2 * dim].iter().position(|f| f == name) {
                Some(_) => {}
                None => bail!("unknown face name {name:?} for a {dim}D domain"),
            }
        }
        Ok(FACE_NAMES[..2 * dim].iter().map(|f| self.faces.get(*f).copied().unwrap_or(self.default)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "one_usize")]
    pub realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn one_usize() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { realizations: 1, master_seed: 0, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub vtk: bool,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), vtk: false }
    }
}

/// Settings for `converge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Base refinement levels, one solve each.
    pub levels: Vec<u32>,
    #[serde(default)]
    pub mask_radius: f64,
    /// Outer radius `R` of the exact solution.
    #[serde(default = "one")]
    pub outer_radius: f64,
}

fn vec3(v: &[f64], dim: usize, what: &str) -> Result<[f64; 3]> {
    if v.len() != dim {
        bail!("{what} needs {dim} components, got {}", v.len());
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn origin(&self) -> Result<[f64; 3]> {
        vec3(&self.domain.origin, self.dim, "domain.origin")
    }

    pub fn extent(&self) -> Result<[f64; 3]> {
        vec3(&self.domain.extent, self.dim, "domain.extent")
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            bail!("dim must be 2 or 3, got {}", self.dim);
        }
        self.origin()?;
        let extent = self.extent()?;
        if extent[..self.dim].iter().any(|e| !(*e > 0.0)) {
            bail!("domain.extent must be positive");
        }
        if self.mesh.base_level < 1 {
            bail!("mesh.base_level must be at least 1");
        }
        if !(self.material.mu > 0.0) || !(self.material.lambda >= 0.0) {
            bail!("material needs mu > 0 and lambda >= 0");
        }
        if let EpsilonConfig::Value(e) = self.forcing.epsilon {
            if !(e > 0.0) {
                bail!("forcing.epsilon must be positive");
            }
        }
        if self.run.realizations == 0 {
            bail!("run.realizations must be at least 1");
        }
        if self.run.threads == Some(0) {
            bail!("run.threads must be at least 1");
        }
        self.bcs.resolve(self.dim)?;
        if let Some(VesselsConfig::Points(points)) = &self.vessels {
            for p in points {
                vec3(&p.center, self.dim, "vessel center")?;
            }
        }
        if let Some(VesselsConfig::Generator(g)) = &self.vessels {
            if g.radius.is_some() == g.target_beta.is_some() {
                bail!("generator needs exactly one of radius and target_beta");
            }
        }
        match self.experiment {
            Experiment::Converge => {
                if self.dim != 2 {
                    bail!("converge runs in 2D");
                }
                if self.analysis.as_ref().map_or(true, |a| a.levels.is_empty()) {
                    bail!("converge needs analysis.levels");
                }
                match &self.vessels {
                    Some(VesselsConfig::Points(p)) if p.len() == 1 => {}
                    _ => bail!("converge needs exactly one inline point vessel"),
                }
            }
            Experiment::Tree => {
                if self.dim != 3 {
                    bail!("tree runs in 3D");
                }
                match &self.vessels {
                    Some(VesselsConfig::Generator(g)) if g.kind == GeneratorKind::Tree => {}
                    _ => bail!("tree needs a tree generator"),
                }
            }
            Experiment::Homog => {
                if self.forcing.beta.is_none() {
                    bail!("homog needs forcing.beta");
                }
            }
            Experiment::Stats | Experiment::Solve => {
                if self.forcing.variant == Variant::Homogenized {
                    if self.forcing.beta.is_none() {
                        bail!("the homogenized variant needs forcing.beta");
                    }
                } else if self.vessels.is_none() {
                    bail!("vessel forcing needs a vessels section");
                }
            }
        }
        Ok(())
    }
}
