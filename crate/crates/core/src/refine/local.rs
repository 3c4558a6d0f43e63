use crate::geom::{self, Vec3};
use crate::metrics::{interval_error, is_violating};
use crate::model::{DistanceConstraint, Embedding, Instance};
use crate::scalar::Real;

/// Weighted interval error of edge `e` when its endpoints sit at `pv`, `pw`.
#[inline]
fn weighted_error<T: Real>(pv: Vec3<T>, pw: Vec3<T>, c: &DistanceConstraint<T>) -> T {
    c.weight * interval_error(geom::dist(pv, pw), c)
}

/// Local error of edge `e = {v, w}` with `v`, `w` placed at `pv`, `pw` and every
/// other vertex taken from `coords`.
pub(crate) fn local_error_at<T: Real>(inst: &Instance<T>, coords: &[Vec3<T>], e: usize, pv: Vec3<T>, pw: Vec3<T>) -> T {
    let g = inst.graph();
    let (v, w) = g.edge(e);
    let mut sum = weighted_error(pv, pw, inst.constraint(e));
    for (end, pos) in [(v, pv), (w, pw)] {
        for &f in g.incident_edges(end) {
            if f == e {
                continue;
            }
            let (a, b) = g.edge(f);
            let other = if a == end { b } else { a };
            sum += weighted_error(pos, coords[other], inst.constraint(f));
        }
    }
    sum
}

/// Error of edge `e` plus the errors of all other edges incident to either endpoint,
/// each multiplied by its constraint weight.
pub fn local_error<T: Real>(inst: &Instance<T>, emb: &Embedding<T>, e: usize) -> T {
    let (v, w) = inst.graph().edge(e);
    local_error_at(inst, emb.coords(), e, emb.point(v), emb.point(w))
}

/// Spring force on `end` from its violating edges: repulsion `(x_v - x_u) l^2 / r^2`
/// for edges that are too short, attraction `(x_u - x_v) u^2 / r^2` for edges that
/// are too long.
fn vertex_force<T: Real>(inst: &Instance<T>, coords: &[Vec3<T>], end: usize) -> Vec3<T> {
    let g = inst.graph();
    let mut f = geom::zero();
    for &e in g.incident_edges(end) {
        let (a, b) = g.edge(e);
        let u = if a == end { b } else { a };
        let c = inst.constraint(e);
        let diff = geom::sub(coords[end], coords[u]);
        let r = geom::norm(diff);
        if !is_violating(interval_error(r, c)) {
            continue;
        }
        let (dir, r) = if r < T::lit(1e-12) { (geom::pair_direction(end, u), T::lit(1e-12)) } else { (geom::scale(diff, T::one() / r), r) };
        // dir points from u to end; |diff| / r^2 = 1 / r.
        if r < c.lower {
            f = geom::add(f, geom::scale(dir, c.lower * c.lower / r));
        } else {
            f = geom::add(f, geom::scale(dir, -(c.upper * c.upper) / r));
        }
    }
    f
}

/// Proposed new positions of the endpoints of edge `e` after one force step.
///
/// Both displacements are `step_scale * force`, jointly shrunk so that neither
/// endpoint moves farther than `0.25 * upper(e)`. No other vertex moves.
pub fn local_force_step<T: Real>(inst: &Instance<T>, emb: &Embedding<T>, e: usize, step_scale: T) -> (Vec3<T>, Vec3<T>) {
    force_step_at(inst, emb.coords(), e, step_scale)
}

pub(crate) fn force_step_at<T: Real>(inst: &Instance<T>, coords: &[Vec3<T>], e: usize, step_scale: T) -> (Vec3<T>, Vec3<T>) {
    let (v, w) = inst.graph().edge(e);
    let mut dv = geom::scale(vertex_force(inst, coords, v), step_scale);
    let mut dw = geom::scale(vertex_force(inst, coords, w), step_scale);
    let cap = T::lit(0.25) * inst.constraint(e).upper;
    let largest = geom::norm(dv).max(geom::norm(dw));
    if largest > cap {
        let s = if largest > T::zero() { cap / largest } else { T::zero() };
        dv = geom::scale(dv, s);
        dw = geom::scale(dw, s);
    }
    (geom::add(coords[v], dv), geom::add(coords[w], dw))
}

/// Moves the endpoints of edge `e` symmetrically about their midpoint so that the
/// edge length becomes `upper` (if too long) or `lower` (if too short).
///
/// Coincident endpoints are separated along a fixed pseudo-random axis. Edges that
/// already satisfy their interval are returned unchanged.
pub fn adjust_length<T: Real>(inst: &Instance<T>, emb: &Embedding<T>, e: usize) -> (Vec3<T>, Vec3<T>) {
    let (v, w) = inst.graph().edge(e);
    let (pv, pw) = (emb.point(v), emb.point(w));
    let c = inst.constraint(e);
    let diff = geom::sub(pv, pw);
    let r = geom::norm(diff);
    let target = if r > c.upper {
        c.upper
    } else if r < c.lower {
        c.lower
    } else {
        return (pv, pw);
    };
    let two = T::lit(2.0);
    let mid = geom::scale(geom::add(pv, pw), T::one() / two);
    let dir = if r < T::lit(1e-12) { geom::pair_direction(v, w) } else { geom::scale(diff, T::one() / r) };
    let half = geom::scale(dir, target / two);
    (geom::add(mid, half), geom::sub(mid, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstanceMeta;

    fn inst(n: usize, edges: &[(usize, usize, f64, f64)]) -> Instance<f64> {
        let e = edges.iter().map(|&(a, b, l, u)| (a, b, DistanceConstraint::interval(l, u))).collect();
        Instance::from_edges(n, e, None, InstanceMeta::default()).unwrap()
    }

    #[test]
    fn local_error_examples() {
        let one = inst(2, &[(0, 1, 1.0, 2.0)]);
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]]);
        assert_eq!(local_error(&one, &x, 0), 0.0);

        // Path a-b-c, a-b too long by 0.5.
        let path = inst(3, &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)]);
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [2.5, 0.0, 0.0]]);
        assert!((local_error(&path, &x, 0) - 0.25).abs() < 1e-15);
        assert!((local_error(&path, &x, 1) - 0.25).abs() < 1e-15);

        // Triangle with every edge too long by the same amount.
        let tri = inst(3, &[(0, 1, 0.5, 0.5), (1, 2, 0.5, 0.5), (0, 2, 0.5, 0.5)]);
        let s = 3f64.sqrt() / 2.0;
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s, 0.0]]);
        let eps = local_error(&tri, &x, 0) / 3.0;
        assert!((eps - 0.25).abs() < 1e-12);
        for e in 0..3 {
            assert!((local_error(&tri, &x, e) - 3.0 * eps).abs() < 1e-12);
        }
    }

    #[test]
    fn force_signs() {
        let i = inst(2, &[(0, 1, 1.0, 2.0)]);
        let long = Embedding::new(vec![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        let (a, b) = local_force_step(&i, &long, 0, 0.1);
        assert!(geom::dist(a, b) < 3.0);
        let short = Embedding::new(vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]);
        let (a, b) = local_force_step(&i, &short, 0, 0.1);
        assert!(geom::dist(a, b) > 0.5);
        let ok = Embedding::new(vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]]);
        assert_eq!(local_force_step(&i, &ok, 0, 0.1), (ok.point(0), ok.point(1)));
    }

    #[test]
    fn force_step_is_capped() {
        let i = inst(2, &[(0, 1, 1.0, 2.0)]);
        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [1e-9, 0.0, 0.0]]);
        let (a, b) = local_force_step(&i, &x, 0, 1.0);
        assert!(geom::dist(a, x.point(0)) <= 0.5 + 1e-12);
        assert!(geom::dist(b, x.point(1)) <= 0.5 + 1e-12);
    }

    #[test]
    fn adjust_length_examples() {
        let i = inst(2, &[(0, 1, 1.0, 2.0)]);
        let x = Embedding::new(vec![[0.0, 1.0, 0.0], [3.0, 1.0, 0.0]]);
        let (a, b) = adjust_length(&i, &x, 0);
        assert!((geom::dist(a, b) - 2.0).abs() < 1e-12);
        let mid = geom::scale(geom::add(a, b), 0.5);
        assert!(geom::dist(mid, [1.5, 1.0, 0.0]) < 1e-12);

        let x = Embedding::new(vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]);
        let (a, b) = adjust_length(&i, &x, 0);
        assert!((geom::dist(a, b) - 1.0).abs() < 1e-12);

        let x = Embedding::new(vec![[2.0, 2.0, 2.0]; 2]);
        let (a, b) = adjust_length(&i, &x, 0);
        assert!((geom::dist(a, b) - 1.0).abs() < 1e-12);
    }
}
