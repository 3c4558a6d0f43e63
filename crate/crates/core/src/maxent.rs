//! Maxent-stress majorization: a decreasing alpha schedule over repeated
//! weighted-Laplacian solves whose right-hand side combines the stress
//! majorizer with a (lazily refreshed) entropy force.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::linalg::{assemble_laplacian, entropy_forces, ConjugateGradient, LaplacianSolver, LaplacianSystem, Octree};
use crate::model::{midpoint_distances, Embedding, Graph, Instance, LogBase, SolverConfig};
use crate::scalar::Real;

/// Targets below this length are clamped when forming `1 / d^2` stress weights.
const MIN_TARGET: f64 = 1e-2;

/// One inner iteration of [`maxent_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub alpha: f64,
    /// Index of the alpha level, from 0.
    pub level: usize,
    /// Step number within the level, from 1.
    pub step: usize,
    /// `|x' - x| / |x|` between this step's output and its input.
    pub rel_change: f64,
    /// Weighted stress of the step's output.
    pub stress: f64,
    pub entropy_recomputed: bool,
    /// Step (within the level) at which the entropy cache in use was computed.
    pub entropy_step: usize,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    /// Entropy exponent actually used.
    pub q: f64,
    pub records: Vec<IterationRecord>,
}

impl SolveTrace {
    /// Distinct alpha values in the order visited.
    pub fn alphas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.alpha) {
                out.push(r.alpha);
            }
        }
        out
    }
}

/// True when the lazy schedule asks for a fresh entropy term at step `i` (from 1):
/// `floor(5 ln i)` differs from `floor(5 ln (i - 1))`.
pub fn lazy_entropy_due(i: usize) -> bool {
    lazy_entropy_due_base(i, LogBase::Natural)
}

pub fn lazy_entropy_due_base(i: usize, base: LogBase) -> bool {
    if i <= 1 {
        return true;
    }
    let f = |k: usize| {
        let l = match base {
            LogBase::Natural => (k as f64).ln(),
            LogBase::Ten => (k as f64).log10(),
        };
        (5.0 * l).floor()
    };
    f(i) != f(i - 1)
}

/// Entropy exponent from the degree-1 rule: 0.8 if more than 30% of vertices
/// have degree one, else 0.
pub fn auto_q<T: Real>(g: &Graph) -> T {
    if g.n() == 0 {
        return T::zero();
    }
    let leaves = (0..g.n()).filter(|&v| g.degree(v) == 1).count();
    if leaves as f64 > 0.3 * g.n() as f64 {
        T::lit(0.8)
    } else {
        T::zero()
    }
}

/// Stress weights `weight / d^2` for the given per-edge targets.
pub fn stress_weights<T: Real>(inst: &Instance<T>, targets: &[T]) -> Vec<T> {
    let floor = T::lit(MIN_TARGET);
    inst.constraints()
        .iter()
        .zip(targets)
        .map(|(c, &d)| {
            let d = d.max(floor);
            c.weight / (d * d)
        })
        .collect()
}

/// Per-vertex entropy force over non-neighbor pairs, optionally divided by the
/// number of non-neighbors of each vertex.
pub fn entropy_term<T: Real>(x: &Embedding<T>, g: &Graph, q: T, theta: T, normalize: bool, parallel: bool) -> Vec<Vec3<T>> {
    let tree = Octree::build(x.coords());
    let mut forces = entropy_forces(&tree, g, q, theta, parallel);
    let n = g.n();
    for (v, f) in forces.iter_mut().enumerate() {
        let others = n.saturating_sub(1 + g.degree(v));
        if others == 0 {
            *f = geom::zero();
        } else if normalize {
            *f = geom::scale(*f, T::one() / T::from_count(others));
        }
    }
    forces
}

/// The stress part of the model: graph, targets, weights and the assembled
/// weighted Laplacian.
#[derive(Debug, Clone)]
pub struct StressModel<'a, T> {
    graph: &'a Graph,
    targets: Vec<T>,
    weights: Vec<T>,
    laplacian: LaplacianSystem<T>,
}

impl<'a, T: Real> StressModel<'a, T> {
    pub fn new(graph: &'a Graph, targets: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if targets.len() != graph.m() {
            return Err(Error::SizeMismatch { expected: graph.m(), actual: targets.len() });
        }
        let laplacian = assemble_laplacian(graph, &weights)?;
        Ok(StressModel { graph, targets, weights, laplacian })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// `sum_e w_e (|x_v - x_u| - d_e)^2`.
    pub fn stress(&self, x: &Embedding<T>) -> T {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                let r = x.distance(a, b) - self.targets[e];
                self.weights[e] * r * r
            })
            .sum()
    }

    /// Majorization right-hand side for one vertex, without the entropy part.
    fn stress_rhs(&self, x: &Embedding<T>, v: usize) -> Vec3<T> {
        let xv = x.point(v);
        let mut b = geom::zero();
        for &e in self.graph.incident_edges(v) {
            let (a, c) = self.graph.edge(e);
            let u = if a == v { c } else { a };
            let diff = geom::sub(xv, x.point(u));
            let r = geom::norm(diff);
            let dir = if r < T::lit(1e-12) { geom::pair_direction(v, u) } else { geom::scale(diff, T::one() / r) };
            b = geom::add(b, geom::scale(dir, self.weights[e] * self.targets[e]));
        }
        b
    }

    /// One majorization step: solves `L_w x = b` per axis with
    /// `b_v = sum_u w d (x_v - x_u) / |x_v - x_u| + alpha * entropy_v`.
    ///
    /// Each connected component keeps the centroid it had in `x_prev`; the result
    /// is then centered as a whole. Returns the new embedding and the total number
    /// of solver iterations.
    pub fn step<S: LaplacianSolver<T>>(
        &self,
        solver: &S,
        x_prev: &Embedding<T>,
        alpha: T,
        entropy: Option<&[Vec3<T>]>,
        parallel: bool,
    ) -> Result<(Embedding<T>, usize)> {
        let n = self.graph.n();
        if x_prev.len() != n {
            return Err(Error::SizeMismatch { expected: n, actual: x_prev.len() });
        }
        if let Some(ent) = entropy {
            if ent.len() != n {
                return Err(Error::SizeMismatch { expected: n, actual: ent.len() });
            }
        }
        let rhs_of = |v: usize| {
            let mut b = self.stress_rhs(x_prev, v);
            if let Some(ent) = entropy {
                b = geom::add(b, geom::scale(ent[v], alpha));
            }
            b
        };
        let rhs: Vec<Vec3<T>> =
            if parallel { (0..n).into_par_iter().map(rhs_of).collect() } else { (0..n).map(rhs_of).collect() };

        let solve_axis = |k: usize| {
            let b: Vec<T> = rhs.iter().map(|p| p[k]).collect();
            let guess: Vec<T> = x_prev.coords().iter().map(|p| p[k]).collect();
            solver.solve(&self.laplacian, &b, &guess)
        };
        let outcomes = if parallel {
            (0..3).into_par_iter().map(solve_axis).collect::<Result<Vec<_>>>()?
        } else {
            (0..3).map(solve_axis).collect::<Result<Vec<_>>>()?
        };

        // Restore per-component centroids of x_prev.
        let comps = self.laplacian.component_count();
        let mut centroids = vec![geom::zero(); comps];
        let mut sizes = vec![0usize; comps];
        for (v, p) in x_prev.coords().iter().enumerate() {
            let c = self.laplacian.component_of(v);
            centroids[c] = geom::add(centroids[c], *p);
            sizes[c] += 1;
        }
        for (c, s) in centroids.iter_mut().zip(&sizes) {
            *c = geom::scale(*c, T::one() / T::from_count(*s));
        }
        let coords = (0..n)
            .map(|v| {
                let shift = centroids[self.laplacian.component_of(v)];
                [outcomes[0].x[v] + shift[0], outcomes[1].x[v] + shift[1], outcomes[2].x[v] + shift[2]]
            })
            .collect();
        let mut out = Embedding::new(coords);
        out.center();
        let iters = outcomes.iter().map(|o| o.iterations).sum();
        Ok((out, iters))
    }
}

/// Single majorization step with explicit targets `d`, stress weights `w`, and an
/// entropy cache (already scaled as it should enter the right-hand side before `alpha`).
pub fn maxent_step<T: Real>(
    g: &Graph,
    d: &[T],
    w: &[T],
    x_prev: &Embedding<T>,
    alpha: T,
    entropy: &[Vec3<T>],
    cfg: &SolverConfig<T>,
) -> Result<Embedding<T>> {
    let model = StressModel::new(g, d.to_vec(), w.to_vec())?;
    let solver = ConjugateGradient { tol: cfg.cg_tol, max_iter: cfg.cg_max_iter };
    model.step(&solver, x_prev, alpha, Some(entropy), cfg.parallel).map(|(x, _)| x)
}

/// Runs the full alpha schedule from `init` using interval midpoints as targets.
pub fn maxent_solve<T: Real>(
    inst: &Instance<T>,
    cfg: &SolverConfig<T>,
    init: &Embedding<T>,
) -> Result<(Embedding<T>, SolveTrace)> {
    let solver = ConjugateGradient { tol: cfg.cg_tol, max_iter: cfg.cg_max_iter };
    maxent_solve_with(inst, cfg, init, &solver)
}

/// [`maxent_solve`] with a caller-supplied Laplacian backend.
pub fn maxent_solve_with<T: Real, S: LaplacianSolver<T>>(
    inst: &Instance<T>,
    cfg: &SolverConfig<T>,
    init: &Embedding<T>,
    solver: &S,
) -> Result<(Embedding<T>, SolveTrace)> {
    cfg.validate()?;
    let g = inst.graph();
    if init.len() != g.n() {
        return Err(Error::SizeMismatch { expected: g.n(), actual: init.len() });
    }
    if !init.is_finite() {
        return Err(Error::validation("initial layout has non-finite coordinates"));
    }
    let q = cfg.q.unwrap_or_else(|| auto_q(g));
    let mut trace = SolveTrace { q: q.as_f64(), records: Vec::new() };

    let mut x = init.clone();
    x.center();
    if g.m() == 0 {
        return Ok((x, trace));
    }

    let targets = midpoint_distances(inst);
    let weights = stress_weights(inst, &targets);
    let model = StressModel::new(g, targets, weights)?;

    let mut one_step_levels = 0;
    'levels: for (level, alpha) in cfg.alpha_schedule().into_iter().enumerate() {
        let mut cache: Vec<Vec3<T>> = Vec::new();
        let mut cache_step = 0;
        let mut converged_at = None;
        for i in 1..=cfg.solves_per_alpha {
            let recompute = cache.is_empty() || !cfg.lazy_entropy || lazy_entropy_due_base(i, cfg.lazy_log_base);
            if recompute {
                cache = entropy_term(&x, g, q, cfg.theta, cfg.normalize_entropy, cfg.parallel);
                cache_step = i;
            }
            let (next, cg_iterations) = match model.step(solver, &x, alpha, Some(&cache), cfg.parallel) {
                Ok(r) => r,
                Err(err) => {
                    return Err(Error::Diverged { msg: err.to_string(), trace: Box::new(trace) });
                }
            };
            if !next.is_finite() {
                return Err(Error::Diverged {
                    msg: format!("non-finite iterate at alpha level {level}, step {i}"),
                    trace: Box::new(trace),
                });
            }
            let denom = x.norm();
            let rel = if denom > T::zero() {
                next.diff_norm(&x) / denom
            } else if next.norm() == T::zero() {
                T::zero()
            } else {
                T::infinity()
            };
            trace.records.push(IterationRecord {
                alpha: alpha.as_f64(),
                level,
                step: i,
                rel_change: rel.as_f64(),
                stress: model.stress(&next).as_f64(),
                entropy_recomputed: recompute,
                entropy_step: cache_step,
                cg_iterations,
            });
            x = next;
            if rel < cfg.conv_tol {
                converged_at = Some(i);
                break;
            }
        }
        if cfg.early_alpha_exit {
            if converged_at == Some(1) {
                one_step_levels += 1;
                if one_step_levels >= 2 {
                    break 'levels;
                }
            } else {
                one_step_levels = 0;
            }
        }
    }
    Ok((x, trace))
}
