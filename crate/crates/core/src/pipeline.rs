//! End-to-end reconstruction: initial layout, maxent-stress solve, refinement,
//! and metrics against the reference when one is present.

use crate::error::Result;
use crate::layout::{default_pivots, initial_layout, InitLayout};
use crate::maxent::{maxent_solve, SolveTrace};
use crate::metrics::{ldme, rmsd, violation_stats, ViolationStats};
use crate::model::{midpoint_distances, Embedding, Instance, SolverConfig};
use crate::refine::{refine_workflow, RefineConfig, RefineReport};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    pub solver: SolverConfig<T>,
    pub layout: InitLayout,
    /// PivotMDS pivot count; `None` uses `min(n, 250)`.
    pub pivots: Option<usize>,
    /// Side of the box for the random-cube layout, in Å.
    pub cube_side: T,
    pub refine: RefineConfig<T>,
    pub run_refine: bool,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        PipelineConfig {
            solver: SolverConfig::default(),
            layout: InitLayout::default(),
            pivots: None,
            cube_side: T::lit(10.0),
            refine: RefineConfig::default(),
            run_refine: true,
        }
    }
}

impl<T: Real> PipelineConfig<T> {
    /// Sets the seed of every randomized stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.seed = seed;
        self.refine.sa.seed = seed;
        self
    }

    /// Enables or disables rayon parallelism in every stage.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.solver.parallel = parallel;
        self.refine.sa.parallel = parallel;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    pub embedding: Embedding<T>,
    /// Embedding after the maxent-stress solve, before refinement.
    pub solved: Embedding<T>,
    pub trace: SolveTrace,
    pub refine: Option<RefineReport>,
    pub ldme: T,
    pub violations: ViolationStats<T>,
    /// RMSD against the instance reference, if it has one.
    pub rmsd: Option<T>,
}

/// Runs the full pipeline on `inst`.
pub fn reconstruct<T: Real>(inst: &Instance<T>, cfg: &PipelineConfig<T>) -> Result<Reconstruction<T>> {
    let targets = midpoint_distances(inst);
    let pivots = cfg.pivots.unwrap_or_else(|| default_pivots(inst.n()));
    let init = initial_layout(cfg.layout, inst.graph(), &targets, pivots, cfg.cube_side, cfg.solver.seed)?;
    let (solved, trace) = maxent_solve(inst, &cfg.solver, &init)?;
    let (embedding, refine) = if cfg.run_refine && inst.m() > 0 {
        let (e, r) = refine_workflow(inst, &solved, &cfg.refine)?;
        (e, Some(r))
    } else {
        (solved.clone(), None)
    };
    let ldme = if inst.m() > 0 { ldme(&embedding, inst)? } else { T::zero() };
    let violations = violation_stats(&embedding, inst);
    let rmsd = match inst.reference() {
        Some(r) => Some(rmsd(&embedding, r)?),
        None => None,
    };
    Ok(Reconstruction { embedding, solved, trace, refine, ldme, violations, rmsd })
}
