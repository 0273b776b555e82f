//! Grids, boundary conditions, material models, fields and problem setup.

pub mod bc;
pub mod fields;
pub mod grid;
pub mod material;
pub mod nondim;
pub mod problem;

pub use bc::{BoundaryCondition, BoundaryConditions};
pub use fields::{DensityField, FlowState, Source};
pub use grid::{BoundarySegment, FaceOwner, Geometry, Metric, Side, StructuredGrid};
pub use material::{DragLaw, MaterialModel};
pub use nondim::{nondimensionalize, redimensionalize, Driving, NondimParams, PhysicalParams};
pub use problem::{DesignProblem, Direction, OptimizerSettings};
