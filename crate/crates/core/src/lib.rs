//! Reconstruction of 3D point configurations from sparse interval distance
//! constraints by maxent-stress majorization with local refinement.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar for the common cases.

pub mod error;
pub mod geom;
pub mod instance;
pub mod layout;
pub mod linalg;
pub mod maxent;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod refine;
pub mod scalar;

pub use error::{Error, Result};
pub use layout::{initial_layout, layout_hypersphere, layout_pivot_mds, layout_random_cube, InitLayout};
pub use maxent::{lazy_entropy_due, maxent_solve, maxent_solve_with, maxent_step, SolveTrace};
pub use metrics::{edge_error, kabsch_superpose, ldme, rmsd, violation_stats, SuperpositionResult, ViolationStats};
pub use model::{
    build_graph, confidence_weight, midpoint_distances, validate_instance, Diagnostics, DistanceConstraint, Embedding,
    Graph, Instance, InstanceMeta, LogBase, SolverConfig,
};
pub use pipeline::{reconstruct, PipelineConfig, Reconstruction};
pub use scalar::Real;

pub type Instance64 = Instance<f64>;
pub type Embedding64 = Embedding<f64>;
pub type Constraint64 = DistanceConstraint<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type Instance32 = Instance<f32>;
pub type Embedding32 = Embedding<f32>;
pub type Constraint32 = DistanceConstraint<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
