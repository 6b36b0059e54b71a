use thiserror::Error;

/// Errors produced by mesh construction, assembly, forcing and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("refinement level {requested} exceeds the cap of {cap}")]
    LevelCap { requested: u32, cap: u32 },

    #[error("point {0:?} lies outside the mesh domain")]
    OutsideDomain([f64; 3]),

    #[error("singular system: no Dirichlet face given and pure-Neumann mode not enabled")]
    SingularSystem,

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("unknown face id {0}")]
    UnknownFace(usize),

    #[error("kernel support around {center:?} (half-width {half_width:e}) leaves the domain")]
    SupportOutsideDomain { center: [f64; 3], half_width: f64 },

    #[error("vessel circle at {center:?} with radius {radius:e} leaves the domain")]
    CircleOutsideDomain { center: [f64; 3], radius: f64 },

    #[error("packing too dense: {0} consecutive rejections")]
    PackingTooDense(usize),

    #[error("degenerate direction distribution: eigenvalues {0:?}")]
    DegenerateDirections([f64; 3]),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
