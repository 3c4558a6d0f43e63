use crate::error::{Error, Result};
use crate::model::Graph;
use crate::scalar::Real;

/// Weighted graph Laplacian in compressed sparse row form.
///
/// Off-diagonal entries are `-w_vu`, the diagonal holds the weighted degree.
/// Connected-component labels are kept alongside since the system is singular
/// on each component's constant vector.
#[derive(Debug, Clone)]
pub struct LaplacianSystem<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    diag: Vec<T>,
    component: Vec<usize>,
    component_sizes: Vec<usize>,
}

/// `L_vu = -w_vu` for every edge, `L_vv = sum_u w_vu`.
pub fn assemble_laplacian<T: Real>(g: &Graph, weights: &[T]) -> Result<LaplacianSystem<T>> {
    if weights.len() != g.m() {
        return Err(Error::SizeMismatch { expected: g.m(), actual: weights.len() });
    }
    if let Some(e) = weights.iter().position(|w| !(*w > T::zero() && w.is_finite())) {
        return Err(Error::validation(format!("edge {e} has non-positive weight {}", weights[e])));
    }
    let n = g.n();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(2 * g.m());
    let mut vals = Vec::with_capacity(2 * g.m());
    let mut diag = vec![T::zero(); n];
    row_ptr.push(0);
    for (v, d) in diag.iter_mut().enumerate() {
        // incident_edges and neighbors are both ascending, but not aligned; pair them explicitly.
        let mut row: Vec<(usize, T)> = g
            .incident_edges(v)
            .iter()
            .map(|&e| {
                let (a, b) = g.edge(e);
                (if a == v { b } else { a }, weights[e])
            })
            .collect();
        row.sort_by_key(|&(u, _)| u);
        for (u, w) in row {
            cols.push(u);
            vals.push(-w);
            *d += w;
        }
        row_ptr.push(cols.len());
    }
    let (component, count) = g.components();
    let mut component_sizes = vec![0; count];
    for &c in &component {
        component_sizes[c] += 1;
    }
    Ok(LaplacianSystem { n, row_ptr, cols, vals, diag, component, component_sizes })
}

impl<T: Real> LaplacianSystem<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    /// Off-diagonal entries of row `v` as `(column, value)`.
    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[v]..self.row_ptr[v + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `out = L x`.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        for v in 0..self.n {
            let mut acc = self.diag[v] * x[v];
            for k in self.row_ptr[v]..self.row_ptr[v + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[v] = acc;
        }
    }

    /// Removes the per-component mean, projecting onto the range of `L`.
    pub fn project(&self, x: &mut [T]) {
        let mut sums = vec![T::zero(); self.component_sizes.len()];
        for (v, &xi) in x.iter().enumerate() {
            sums[self.component[v]] += xi;
        }
        for (s, &size) in sums.iter_mut().zip(&self.component_sizes) {
            *s /= T::from_count(size);
        }
        for (v, xi) in x.iter_mut().enumerate() {
            *xi -= sums[self.component[v]];
        }
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut m = vec![vec![T::zero(); self.n]; self.n];
        for (v, row) in m.iter_mut().enumerate() {
            row[v] = self.diag[v];
            for (u, w) in self.row(v) {
                row[u] = w;
            }
        }
        m
    }
}
