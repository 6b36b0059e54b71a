//! Linear elastic tissue with thin pressurized vessels modelled by singular,
//! regularized and hyper-singular source terms on a Q1 finite-element mesh.

pub mod analytic;
pub mod elasticity;
pub mod error;
pub mod forcing;
pub mod mesh;
pub mod quadrature;
pub mod vessel;
pub mod vesselgen;

pub use analytic::{AxisymConfig, ExtendedAxisym};
pub use elasticity::{
    assemble_stiffness, AnalyticField, BoundarySpec, FaceCondition, Field, LinearField, Material, SolverSettings,
    SparseSystem,
};
pub use error::{Error, Result};
pub use forcing::{Beta, EpsilonRule, ForcingSpec, ForcingVariant, MollifiedDelta};
pub use mesh::{Attractor, Mesh, RefinementSpec};
pub use vessel::{PointVessel2D, VesselNetwork, VesselSegment3D};
pub use vesselgen::{BoxDomain, RngStream, RootPreset, TreeConfig, VesselTree};
