//! Laplacian systems, their iterative solution, and the Barnes-Hut octree used
//! to approximate entropy forces.

mod cg;
pub mod dense;
mod laplacian;
mod octree;

pub use cg::{solve_cg, CgOutcome, ConjugateGradient, LaplacianSolver};
pub use laplacian::{assemble_laplacian, LaplacianSystem};
pub use octree::{build_octree, entropy_force, entropy_forces, pair_entropy_term, Octree, OctreeNode};
