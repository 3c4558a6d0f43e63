//! Benchmark instances: PDB atoms, bond and contact inference, the three
//! construction recipes, synthetic structures and text (de)serialization.

mod edges;
mod io;
mod pdb;
mod recipes;
mod synthetic;

pub use edges::{bond_threshold, contact_edges, infer_bonds, DEFAULT_CUTOFF};
pub use io::{
    read_instance, read_instance_str, read_xyz, read_xyz_str, write_instance, write_instance_string, write_xyz,
    write_xyz_string, XyzFile, FORMAT_VERSION,
};
pub use pdb::{parse_pdb_atoms, Atom, AtomSet};
pub use recipes::{
    complete_exact_instance, gen_bonds_instance, gen_normal_instance, gen_weighted_instance, generate_instance,
    GenParams, Recipe,
};
pub use synthetic::{synthetic_chain, uniform_cloud, CHAIN_BOND, CHAIN_DENSITY, CHAIN_MIN_SEPARATION};
