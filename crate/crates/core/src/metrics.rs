//! Quality measures: interval errors, LDME, rigid superposition and RMSD.

use crate::error::{Error, Result};
use crate::geom::{self, Mat3, Vec3};
use crate::model::{DistanceConstraint, Embedding, Instance, VIOLATION_EPS};
use crate::scalar::Real;

/// Squared amount by which `distance` falls outside `[lower, upper]`.
#[inline]
pub fn interval_error<T: Real>(distance: T, c: &DistanceConstraint<T>) -> T {
    let under = c.lower - distance;
    let over = distance - c.upper;
    let e = under.max(over).max(T::zero());
    e * e
}

/// Interval error of edge `{v, w}` in `emb`.
#[inline]
pub fn edge_error<T: Real>(emb: &Embedding<T>, v: usize, w: usize, c: &DistanceConstraint<T>) -> T {
    interval_error(emb.distance(v, w), c)
}

/// Largest distance mean error: root of the mean interval error over all edges.
pub fn ldme<T: Real>(emb: &Embedding<T>, inst: &Instance<T>) -> Result<T> {
    let m = inst.m();
    if m == 0 {
        return Err(Error::validation("LDME is undefined for an instance without edges"));
    }
    if emb.len() != inst.n() {
        return Err(Error::SizeMismatch { expected: inst.n(), actual: emb.len() });
    }
    let mut sum = T::zero();
    for (e, &(v, w)) in inst.graph().edges().iter().enumerate() {
        sum += edge_error(emb, v, w, inst.constraint(e));
    }
    Ok((sum / T::from_count(m)).sqrt())
}

/// Sum of `weight * interval error` over all edges.
pub fn total_weighted_error<T: Real>(emb: &Embedding<T>, inst: &Instance<T>) -> T {
    inst.graph()
        .edges()
        .iter()
        .zip(inst.constraints())
        .map(|(&(v, w), c)| c.weight * edge_error(emb, v, w, c))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationStats<T> {
    pub count: usize,
    pub fraction: T,
    pub max_error: T,
}

/// An interval error counts as a violation only when strictly above 1e-9.
#[inline]
pub fn is_violating<T: Real>(err: T) -> bool {
    err > T::lit(VIOLATION_EPS)
}

/// Counts violating edges (see [`is_violating`]).
pub fn violation_stats<T: Real>(emb: &Embedding<T>, inst: &Instance<T>) -> ViolationStats<T> {
    let mut count = 0;
    let mut max_error = T::zero();
    for (e, &(v, w)) in inst.graph().edges().iter().enumerate() {
        let err = edge_error(emb, v, w, inst.constraint(e));
        if is_violating(err) {
            count += 1;
        }
        max_error = max_error.max(err);
    }
    let fraction = if inst.m() == 0 {
        T::zero()
    } else {
        T::from_count(count) / T::from_count(inst.m())
    };
    ViolationStats { count, fraction, max_error }
}

/// Optimal rigid motion taking one point set onto another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionResult<T> {
    /// Proper rotation (det = +1).
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    pub rmsd: T,
}

impl<T: Real> SuperpositionResult<T> {
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        geom::add(geom::mat_vec(&self.rotation, p), self.translation)
    }
}

fn centroid<T: Real>(pts: &[Vec3<T>]) -> Vec3<T> {
    let mut c = geom::zero();
    for p in pts {
        c = geom::add(c, *p);
    }
    geom::scale(c, T::one() / T::from_count(pts.len()))
}

/// Kabsch superposition: the proper rotation `R` and translation `t` minimizing
/// `sum |R p_i + t - q_i|^2`.
pub fn kabsch_superpose<T: Real>(p: &[Vec3<T>], q: &[Vec3<T>]) -> Result<SuperpositionResult<T>> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch { expected: q.len(), actual: p.len() });
    }
    if p.is_empty() {
        return Err(Error::validation("superposition needs at least one point"));
    }
    let pc = centroid(p);
    let qc = centroid(q);

    // Cross-covariance H = sum (p - pc)(q - qc)^T.
    let mut h = [[T::zero(); 3]; 3];
    for (a, b) in p.iter().zip(q) {
        let x = geom::sub(*a, pc);
        let y = geom::sub(*b, qc);
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] += x[i] * y[j];
            }
        }
    }

    let (u, _s, v) = geom::svd3(&h);
    let d = if geom::det(&v) * geom::det(&u) < T::zero() { -T::one() } else { T::one() };
    let mut vd = v;
    for row in vd.iter_mut() {
        row[2] *= d;
    }
    let rotation = geom::mat_mul(&vd, &geom::transpose(&u));
    let translation = geom::sub(qc, geom::mat_vec(&rotation, pc));

    let mut sq = T::zero();
    for (a, b) in p.iter().zip(q) {
        let moved = geom::add(geom::mat_vec(&rotation, *a), translation);
        sq += geom::norm_sq(geom::sub(moved, *b));
    }
    let rmsd = (sq / T::from_count(p.len())).sqrt();
    Ok(SuperpositionResult { rotation, translation, rmsd })
}

/// RMSD after optimal superposition, minimized over the embedding and its mirror
/// image (distance data cannot fix chirality).
pub fn rmsd<T: Real>(emb: &Embedding<T>, reference: &Embedding<T>) -> Result<T> {
    if emb.len() != reference.len() {
        return Err(Error::SizeMismatch { expected: reference.len(), actual: emb.len() });
    }
    let direct = kabsch_superpose(emb.coords(), reference.coords())?.rmsd;
    let mirror = kabsch_superpose(emb.mirrored().coords(), reference.coords())?.rmsd;
    Ok(direct.min(mirror))
}
