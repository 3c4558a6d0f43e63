use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::metrics::total_weighted_error;
use crate::model::{Embedding, Graph, Instance};
use crate::scalar::Real;

use super::local::{force_step_at, local_error_at};

/// Simulated annealing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SAConfig<T> {
    pub t_start: T,
    /// Multiplier applied to the temperature after each level.
    pub cooling: T,
    pub t_min: T,
    /// Edge trials without improvement of the total error before stopping;
    /// `None` uses the edge count.
    pub stall_limit: Option<usize>,
    /// Edge trials per temperature level are capped at `iter_factor * m`.
    pub iter_factor: T,
    /// Accepted moves per temperature level are capped at `mod_factor * m`.
    pub mod_factor: T,
    /// Displacement per unit force in [`super::local_force_step`].
    pub step_scale: T,
    pub seed: u64,
    pub parallel: bool,
}

impl<T: Real> Default for SAConfig<T> {
    fn default() -> Self {
        SAConfig {
            t_start: T::lit(0.3),
            cooling: T::lit(0.1),
            t_min: T::lit(1e-7),
            stall_limit: None,
            iter_factor: T::lit(2.0),
            mod_factor: T::lit(0.5),
            step_scale: T::lit(0.01),
            seed: 0,
            parallel: false,
        }
    }
}

impl<T: Real> SAConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling > T::zero() && self.cooling < T::one()) {
            return Err(Error::validation("cooling must lie in (0, 1)"));
        }
        if !(self.t_min > T::zero() && self.t_min < self.t_start) {
            return Err(Error::validation("need 0 < t_min < t_start"));
        }
        if !(self.step_scale > T::zero()) || !(self.iter_factor > T::zero()) || !(self.mod_factor > T::zero()) {
            return Err(Error::validation("step scale and caps must be positive"));
        }
        Ok(())
    }
}

/// Counters from one annealing run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SAReport {
    pub levels: usize,
    pub trials: usize,
    pub accepted: usize,
    pub accepted_worse: usize,
    pub stalled: bool,
    pub final_total_error: f64,
}

/// Metropolis rule with an explicit uniform draw `u` in `[0, 1)`.
#[inline]
pub fn sa_accept_draw<T: Real>(t: T, old_err: T, new_err: T, u: f64) -> bool {
    if new_err <= old_err {
        return true;
    }
    let p = (-(new_err - old_err) / t).exp().as_f64();
    u < p
}

/// Accepts improvements always and a worsening by `delta` with probability
/// `exp(-delta / t)`.
pub fn sa_accept<T: Real, R: Rng + ?Sized>(t: T, old_err: T, new_err: T, rng: &mut R) -> bool {
    if new_err <= old_err {
        return true;
    }
    sa_accept_draw(t, old_err, new_err, rng.random::<f64>())
}

/// Greedy coloring of the edges such that two edges of one color never touch a
/// common closed neighborhood: no endpoint of one lies in `N[v] ∪ N[w]` of the other.
/// Moves within a batch then never affect each other's local errors.
///
/// Batches are returned in color order, each listing edges in canonical order.
pub fn conflict_free_batches(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut colors_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut forbidden: Vec<usize> = Vec::new();
    let mut stamp = 0usize;
    for (e, &(v, w)) in g.edges().iter().enumerate() {
        stamp += 1;
        let mut mark = |c: usize| {
            if forbidden.len() <= c {
                forbidden.resize(c + 1, 0);
            }
            forbidden[c] = stamp;
        };
        for end in [v, w] {
            for &c in &colors_at[end] {
                mark(c);
            }
            for &x in g.neighbors(end) {
                for &c in &colors_at[x] {
                    mark(c);
                }
            }
        }
        let color = (0..).find(|&c| c >= forbidden.len() || forbidden[c] != stamp).unwrap();
        if color == batches.len() {
            batches.push(Vec::new());
        }
        batches[color].push(e);
        colors_at[v].push(color);
        colors_at[w].push(color);
    }
    batches
}

struct Proposal<T> {
    pv: Vec3<T>,
    pw: Vec3<T>,
    old: T,
    new: T,
}

/// Simulated annealing over edge moves.
///
/// Each temperature level sweeps the conflict-free batches in order until either
/// `iter_factor * m` edge trials or `mod_factor * m` accepted moves are reached.
/// A trial moves the two endpoints of an edge by [`super::local_force_step`] and
/// keeps the move under the Metropolis rule on the edge's local error. The total
/// weighted error is sampled after each level; the run stops once more than
/// `stall_limit` trials have passed without improving it, or when the
/// temperature falls below `t_min`.
///
/// Uniform draws are taken per batch in edge order, so the result is the same
/// with or without parallelism.
pub fn simulated_annealing<T: Real>(
    inst: &Instance<T>,
    emb: &Embedding<T>,
    cfg: &SAConfig<T>,
) -> Result<(Embedding<T>, SAReport)> {
    cfg.validate()?;
    if emb.len() != inst.n() {
        return Err(Error::SizeMismatch { expected: inst.n(), actual: emb.len() });
    }
    let m = inst.m();
    let mut coords = emb.coords().to_vec();
    let mut report = SAReport::default();
    if m == 0 {
        return Ok((emb.clone(), report));
    }
    let batches = conflict_free_batches(inst.graph());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trial_cap = (cfg.iter_factor.as_f64() * m as f64).ceil().max(1.0) as usize;
    let mod_cap = (cfg.mod_factor.as_f64() * m as f64).ceil().max(1.0) as usize;
    let stall_limit = cfg.stall_limit.unwrap_or(m);

    let mut best_total = total_weighted_error(emb, inst);
    let mut stall = 0usize;
    let mut t = cfg.t_start;
    while t >= cfg.t_min {
        report.levels += 1;
        let mut trials = 0usize;
        let mut mods = 0usize;
        'level: loop {
            for batch in &batches {
                if trials >= trial_cap || mods >= mod_cap {
                    break 'level;
                }
                let propose = |&e: &usize| {
                    let (v, w) = inst.graph().edge(e);
                    let (pv, pw) = force_step_at(inst, &coords, e, cfg.step_scale);
                    if pv == coords[v] && pw == coords[w] {
                        return None;
                    }
                    let old = local_error_at(inst, &coords, e, coords[v], coords[w]);
                    let new = local_error_at(inst, &coords, e, pv, pw);
                    Some(Proposal { pv, pw, old, new })
                };
                let proposals: Vec<Option<Proposal<T>>> = if cfg.parallel && batch.len() > 64 {
                    batch.par_iter().map(propose).collect()
                } else {
                    batch.iter().map(propose).collect()
                };
                for (&e, prop) in batch.iter().zip(proposals) {
                    let u: f64 = rng.random();
                    trials += 1;
                    let Some(p) = prop else { continue };
                    if !(p.pv.iter().chain(&p.pw).all(|x| x.is_finite())) {
                        continue;
                    }
                    if sa_accept_draw(t, p.old, p.new, u) {
                        let (v, w) = inst.graph().edge(e);
                        coords[v] = p.pv;
                        coords[w] = p.pw;
                        mods += 1;
                        report.accepted += 1;
                        if p.new > p.old {
                            report.accepted_worse += 1;
                        }
                    }
                }
            }
        }
        report.trials += trials;

        let current = Embedding::new(coords.clone());
        let total = total_weighted_error(&current, inst);
        if total < best_total {
            best_total = total;
            stall = 0;
        } else {
            stall += trials;
            if stall > stall_limit {
                report.stalled = true;
                break;
            }
        }
        t *= cfg.cooling;
    }
    let out = Embedding::new(coords);
    report.final_total_error = total_weighted_error(&out, inst).as_f64();
    Ok((out, report))
}
