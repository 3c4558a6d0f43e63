use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::metrics::{edge_error, is_violating};
use crate::model::{Embedding, Instance};
use crate::scalar::Real;

use super::local::{adjust_length, local_error_at};

/// Maximum number of sweeps of [`simple_local_opt`].
pub const MAX_SIMPLE_ITERATIONS: usize = 50;

/// Counters from one run of [`simple_local_opt`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimpleOptReport {
    pub iterations: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub skipped_locked: usize,
    /// Accepted moves whose recomputed local error did not strictly decrease.
    /// Always zero unless the implementation is broken.
    pub accept_violations: usize,
}

/// Violating edges in processing order: higher confidence first, then larger
/// weighted error, then canonical edge order.
pub fn violating_order<T: Real>(inst: &Instance<T>, emb: &Embedding<T>) -> Vec<usize> {
    let g = inst.graph();
    let mut items: Vec<(usize, T, T)> = g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(e, &(v, w))| {
            let c = inst.constraint(e);
            let err = edge_error(emb, v, w, c);
            is_violating(err).then_some((e, c.confidence, c.weight * err))
        })
        .collect();
    items.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal))
            .then_with(|| a.0.cmp(&b.0))
    });
    items.into_iter().map(|(e, _, _)| e).collect()
}

/// Greedy edge-length adjustment.
///
/// Each sweep visits the violating edges in [`violating_order`] and tries
/// [`adjust_length`]; a move is kept only if it strictly lowers the edge's local
/// error, after which the other edges at both endpoints are locked for the rest of
/// the sweep. Stops after [`MAX_SIMPLE_ITERATIONS`] sweeps or a sweep with no
/// accepted move.
pub fn simple_local_opt<T: Real>(inst: &Instance<T>, emb: &Embedding<T>) -> Result<(Embedding<T>, SimpleOptReport)> {
    if emb.len() != inst.n() {
        return Err(Error::SizeMismatch { expected: inst.n(), actual: emb.len() });
    }
    let g = inst.graph();
    let mut x = emb.clone();
    let mut report = SimpleOptReport::default();
    let mut locked = vec![false; g.m()];
    for _ in 0..MAX_SIMPLE_ITERATIONS {
        report.iterations += 1;
        locked.iter_mut().for_each(|l| *l = false);
        let mut improved = false;
        for e in violating_order(inst, &x) {
            if locked[e] {
                report.skipped_locked += 1;
                continue;
            }
            let (v, w) = g.edge(e);
            let (pv, pw) = adjust_length(inst, &x, e);
            let old = local_error_at(inst, x.coords(), e, x.point(v), x.point(w));
            let new = local_error_at(inst, x.coords(), e, pv, pw);
            if !(new < old) {
                report.rejected += 1;
                continue;
            }
            x.set_point(v, pv);
            x.set_point(w, pw);
            if !(local_error_at(inst, x.coords(), e, x.point(v), x.point(w)) < old) {
                report.accept_violations += 1;
            }
            for end in [v, w] {
                for &f in g.incident_edges(end) {
                    if f != e {
                        locked[f] = true;
                    }
                }
            }
            report.accepted += 1;
            improved = true;
        }
        if !improved {
            break;
        }
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ldme;
    use crate::model::{DistanceConstraint, InstanceMeta};

    #[test]
    fn nothing_to_do() {
        let inst = Instance::from_edges(
            2,
            vec![(0, 1, DistanceConstraint::interval(1.0f64, 2.0))],
            None,
            InstanceMeta::default(),
        )
        .unwrap();
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]]);
        let (out, rep) = simple_local_opt(&inst, &x).unwrap();
        assert_eq!(out, x);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn single_violation_in_path() {
        let edges = (0..3).map(|i| (i, i + 1, DistanceConstraint::interval(1.0f64, 1.0))).collect();
        let inst = Instance::from_edges(4, edges, None, InstanceMeta::default()).unwrap();
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 1.0, 0.0]]);
        let before = ldme(&x, &inst).unwrap();
        let (out, rep) = simple_local_opt(&inst, &x).unwrap();
        assert!(ldme(&out, &inst).unwrap() < before);
        assert!(rep.accepted >= 1);
        assert_eq!(rep.accept_violations, 0);
    }

    #[test]
    fn shared_vertex_locks() {
        // Two violating edges at vertex 1 with nothing else around: only one moves per sweep.
        let edges = vec![
            (0, 1, DistanceConstraint::interval(1.0f64, 1.0)),
            (1, 2, DistanceConstraint::interval(1.0, 1.0)),
        ];
        let inst = Instance::from_edges(3, edges, None, InstanceMeta::default()).unwrap();
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [3.0, 3.0, 0.0]]);
        assert_eq!(violating_order(&inst, &x).len(), 2);
        let (_, rep) = simple_local_opt(&inst, &x).unwrap();
        assert!(rep.skipped_locked >= 1);
    }

    #[test]
    fn confidence_first() {
        let edges = vec![
            (0, 1, DistanceConstraint::interval(1.0f64, 1.0).with_confidence(0.5)),
            (2, 3, DistanceConstraint::interval(1.0, 1.0).with_confidence(1.0)),
        ];
        let inst = Instance::from_edges(4, edges, None, InstanceMeta::default()).unwrap();
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 9.0, 0.0], [1.5, 9.0, 0.0]]);
        assert_eq!(violating_order(&inst, &x), vec![1, 0]);
    }
}
