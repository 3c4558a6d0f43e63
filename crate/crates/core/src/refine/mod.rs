//! Post-processing refiners that act on individual edges of an embedding:
//! simulated annealing with a spring-force move, a greedy edge-length adjuster,
//! and the workflow combining both.

mod anneal;
mod local;
mod simple;
mod workflow;

pub use anneal::{conflict_free_batches, sa_accept, sa_accept_draw, simulated_annealing, SAConfig, SAReport};
pub use local::{adjust_length, local_error, local_force_step};
pub use simple::{simple_local_opt, violating_order, SimpleOptReport};
pub use workflow::{refine_workflow, RefineConfig, RefineReport, RefineStage};
