//! Initial layouts: uniform random cube, neighbor-sphere placement along a BFS,
//! and PivotMDS.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::linalg::dense::symmetric_eigen;
use crate::model::{Embedding, Graph};
use crate::scalar::Real;

/// Default number of PivotMDS pivots for `n` vertices.
pub fn default_pivots(n: usize) -> usize {
    n.min(250)
}

/// Which initial layout to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitLayout {
    RandomCube,
    Hypersphere,
    #[default]
    PivotMds,
}

impl std::str::FromStr for InitLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "cube" | "random-cube" => Ok(InitLayout::RandomCube),
            "hypersphere" | "sphere" => Ok(InitLayout::Hypersphere),
            "pivotmds" | "pivot-mds" | "mds" => Ok(InitLayout::PivotMds),
            _ => Err(Error::validation(format!("unknown layout '{s}'"))),
        }
    }
}

fn unit_direction<T: Real, R: Rng>(rng: &mut R) -> Vec3<T> {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-12 {
            return [T::lit(v[0] / r), T::lit(v[1] / r), T::lit(v[2] / r)];
        }
    }
}

/// `n` points uniform in `[0, side]^3`.
pub fn layout_random_cube<T: Real>(n: usize, side: T, seed: u64) -> Result<Embedding<T>> {
    if !(side > T::zero() && side.is_finite()) {
        return Err(Error::validation("cube side must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n)
        .map(|_| {
            let mut p = [T::zero(); 3];
            for c in p.iter_mut() {
                *c = (T::lit(rng.random::<f64>()) * side).min(side);
            }
            p
        })
        .collect();
    Ok(Embedding::new(coords))
}

fn check_lengths<T: Real>(g: &Graph, d: &[T]) -> Result<()> {
    if d.len() != g.m() {
        return Err(Error::SizeMismatch { expected: g.m(), actual: d.len() });
    }
    if d.iter().any(|x| !x.is_finite() || *x < T::zero()) {
        return Err(Error::validation("edge lengths must be finite and non-negative"));
    }
    Ok(())
}

/// BFS placement: every component starts at the origin from its maximum-degree
/// vertex (ties to the lowest id); each newly discovered vertex is put at distance
/// `d` from its discoverer in a uniformly random direction.
pub fn layout_hypersphere<T: Real>(g: &Graph, d: &[T], seed: u64) -> Result<Embedding<T>> {
    check_lengths(g, d)?;
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![geom::zero(); n];
    let (labels, count) = g.components();
    let mut starts: Vec<Option<usize>> = vec![None; count];
    for v in 0..n {
        let c = labels[v];
        match starts[c] {
            Some(s) if g.degree(s) >= g.degree(v) => {}
            _ => starts[c] = Some(v),
        }
    }
    let mut placed = vec![false; n];
    let mut queue = VecDeque::new();
    for s in starts.into_iter().flatten() {
        placed[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &e in g.incident_edges(v) {
                let (a, b) = g.edge(e);
                let w = if a == v { b } else { a };
                if placed[w] {
                    continue;
                }
                placed[w] = true;
                coords[w] = geom::add(coords[v], geom::scale(unit_direction(&mut rng), d[e]));
                queue.push_back(w);
            }
        }
    }
    Ok(Embedding::new(coords))
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Single-source shortest paths with edge lengths `d`; unreachable vertices get `inf`.
pub fn dijkstra<T: Real>(g: &Graph, d: &[T], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &e in g.incident_edges(u) {
            let (a, b) = g.edge(e);
            let w = if a == u { b } else { a };
            let nd = du + d[e].as_f64();
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
    dist
}

/// PivotMDS with `pivots` landmarks chosen by max-min graph distance (the first
/// one drawn from `seed`).
///
/// Distances to vertices in other components are replaced by the largest finite
/// distance seen from that pivot.
pub fn layout_pivot_mds<T: Real>(g: &Graph, d: &[T], pivots: usize, seed: u64) -> Result<Embedding<T>> {
    check_lengths(g, d)?;
    let n = g.n();
    if pivots < 3 {
        return Err(Error::validation("PivotMDS needs at least 3 pivots"));
    }
    if pivots > n {
        return Err(Error::validation(format!("{pivots} pivots requested for {n} vertices")));
    }
    let k = pivots;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Pivot selection: sequential by nature.
    let mut chosen = Vec::with_capacity(k);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut min_dist = vec![f64::INFINITY; n];
    let mut is_pivot = vec![false; n];
    let mut next = rng.random_range(0..n);
    for _ in 0..k {
        chosen.push(next);
        is_pivot[next] = true;
        let row = dijkstra(g, d, next);
        for (m, r) in min_dist.iter_mut().zip(&row) {
            *m = m.min(*r);
        }
        rows.push(row);
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if is_pivot[v] {
                continue;
            }
            // Unreachable vertices are preferred: they seed pivots in new components.
            let key = min_dist[v];
            if best.is_none_or(|(_, b)| key > b) {
                best = Some((v, key));
            }
        }
        match best {
            Some((v, _)) => next = v,
            None => break,
        }
    }

    // Squared distances, n x k, column j for pivot j.
    let mut c = vec![0.0f64; n * k];
    for (j, row) in rows.iter().enumerate() {
        let max_finite = row.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
        for v in 0..n {
            let x = if row[v].is_finite() { row[v] } else { max_finite };
            c[v * k + j] = x * x;
        }
    }
    // Double centering.
    let mut col_mean = vec![0.0; k];
    let mut row_mean = vec![0.0; n];
    let mut grand = 0.0;
    for v in 0..n {
        for j in 0..k {
            let x = c[v * k + j];
            col_mean[j] += x;
            row_mean[v] += x;
            grand += x;
        }
    }
    col_mean.iter_mut().for_each(|x| *x /= n as f64);
    row_mean.iter_mut().for_each(|x| *x /= k as f64);
    grand /= (n * k) as f64;
    for v in 0..n {
        for j in 0..k {
            c[v * k + j] = -0.5 * (c[v * k + j] - row_mean[v] - col_mean[j] + grand);
        }
    }

    // C^T C, k x k.
    let ctc: Vec<f64> = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / k, idx % k);
            (0..n).map(|v| c[v * k + a] * c[v * k + b]).sum()
        })
        .collect();
    let (values, vectors) = symmetric_eigen(&ctc, k);

    let scale = (n as f64 / k as f64).powf(0.25);
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(3);
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    for axis in 0..3 {
        let lambda = values.get(axis).copied().unwrap_or(0.0);
        let sigma = lambda.max(0.0).sqrt();
        if axis >= vectors.len() || lambda <= 1e-12 * top || sigma == 0.0 {
            axes.push(Vec::new());
            continue;
        }
        let vec = &vectors[axis];
        let coords: Vec<f64> =
            (0..n).map(|v| (0..k).map(|j| c[v * k + j] * vec[j]).sum::<f64>() * scale / sigma.sqrt()).collect();
        axes.push(coords);
    }
    // Degenerate axes get a small random spread so the solver can leave the subspace.
    let extent = axes
        .iter()
        .flat_map(|a| a.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    for a in axes.iter_mut() {
        if a.is_empty() {
            *a = (0..n).map(|_| (rng.random::<f64>() - 0.5) * 1e-3 * extent).collect();
        }
    }

    let mut emb = Embedding::new((0..n).map(|v| [T::lit(axes[0][v]), T::lit(axes[1][v]), T::lit(axes[2][v])]).collect());
    emb.center();
    Ok(emb)
}

/// Builds the requested initial layout; the random cube uses side `cube_side`.
pub fn initial_layout<T: Real>(
    kind: InitLayout,
    g: &Graph,
    d: &[T],
    pivots: usize,
    cube_side: T,
    seed: u64,
) -> Result<Embedding<T>> {
    let mut emb = match kind {
        InitLayout::RandomCube => layout_random_cube(g.n(), cube_side, seed)?,
        InitLayout::Hypersphere => layout_hypersphere(g, d, seed)?,
        InitLayout::PivotMds => {
            if g.n() < 3 {
                layout_hypersphere(g, d, seed)?
            } else {
                layout_pivot_mds(g, d, pivots.clamp(3, g.n()), seed)?
            }
        }
    };
    emb.center();
    Ok(emb)
}
