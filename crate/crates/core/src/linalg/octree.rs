use rayon::prelude::*;

use crate::geom::{self, Vec3};
use crate::model::{Embedding, Graph};
use crate::scalar::Real;

/// Points closer than this are treated as coincident.
const COINCIDENT: f64 = 1e-12;
/// Magnitude of the stand-in force between coincident points.
const COINCIDENT_FORCE: f64 = 1e-3;
const NO_CHILD: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct OctreeNode<T> {
    pub center: Vec3<T>,
    /// Half of the cube's side length.
    pub half: T,
    pub centroid: Vec3<T>,
    pub count: usize,
    pub depth: usize,
    start: usize,
    end: usize,
    children: [usize; 8],
}

impl<T: Real> OctreeNode<T> {
    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(|&c| c == NO_CHILD)
    }

    pub fn side(&self) -> T {
        self.half + self.half
    }

    /// Closed-cube containment test.
    pub fn contains(&self, p: Vec3<T>) -> bool {
        (0..3).all(|k| (p[k] - self.center[k]).abs() <= self.half)
    }
}

/// Barnes-Hut octree with leaf capacity 1. Coincident points end up together in
/// a leaf at [`Octree::MAX_DEPTH`].
#[derive(Debug, Clone)]
pub struct Octree<T> {
    nodes: Vec<OctreeNode<T>>,
    order: Vec<usize>,
    points: Vec<Vec3<T>>,
}

pub fn build_octree<T: Real>(points: &Embedding<T>) -> Octree<T> {
    Octree::build(points.coords())
}

impl<T: Real> Octree<T> {
    pub const MAX_DEPTH: usize = 40;

    pub fn build(points: &[Vec3<T>]) -> Self {
        let mut tree = Octree { nodes: Vec::new(), order: (0..points.len()).collect(), points: points.to_vec() };
        if points.is_empty() {
            return tree;
        }
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let two = T::lit(2.0);
        let center = [(lo[0] + hi[0]) / two, (lo[1] + hi[1]) / two, (lo[2] + hi[2]) / two];
        let extent = (0..3).map(|k| hi[k] - lo[k]).fold(T::zero(), T::max);
        let half = (extent / two) * (T::one() + T::lit(1e-9)) + T::min_positive_value().sqrt();
        tree.build_node(center, half, 0, points.len(), 0);
        tree
    }

    fn build_node(&mut self, center: Vec3<T>, half: T, start: usize, end: usize, depth: usize) -> usize {
        let count = end - start;
        let mut sum = geom::zero();
        for &i in &self.order[start..end] {
            sum = geom::add(sum, self.points[i]);
        }
        let centroid = geom::scale(sum, T::one() / T::from_count(count));
        let id = self.nodes.len();
        self.nodes.push(OctreeNode { center, half, centroid, count, depth, start, end, children: [NO_CHILD; 8] });
        if count <= 1 || depth >= Self::MAX_DEPTH {
            return id;
        }

        let octant = |p: Vec3<T>| -> usize {
            (usize::from(p[0] >= center[0])) | (usize::from(p[1] >= center[1]) << 1) | (usize::from(p[2] >= center[2]) << 2)
        };
        // Stable counting sort of the range by octant.
        let mut counts = [0usize; 8];
        for &i in &self.order[start..end] {
            counts[octant(self.points[i])] += 1;
        }
        let mut offsets = [0usize; 8];
        let mut acc = start;
        for o in 0..8 {
            offsets[o] = acc;
            acc += counts[o];
        }
        let mut sorted = vec![0; count];
        let mut cursor = offsets;
        for &i in &self.order[start..end] {
            let o = octant(self.points[i]);
            sorted[cursor[o] - start] = i;
            cursor[o] += 1;
        }
        self.order[start..end].copy_from_slice(&sorted);

        let quarter = half / T::lit(2.0);
        for o in 0..8 {
            if counts[o] == 0 {
                continue;
            }
            let child_center = [
                center[0] + if o & 1 != 0 { quarter } else { -quarter },
                center[1] + if o & 2 != 0 { quarter } else { -quarter },
                center[2] + if o & 4 != 0 { quarter } else { -quarter },
            ];
            let child = self.build_node(child_center, quarter, offsets[o], offsets[o] + counts[o], depth + 1);
            self.nodes[id].children[o] = child;
        }
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn root(&self) -> Option<&OctreeNode<T>> {
        self.nodes.first()
    }

    pub fn nodes(&self) -> &[OctreeNode<T>] {
        &self.nodes
    }

    pub fn children(&self, node: &OctreeNode<T>) -> impl Iterator<Item = &OctreeNode<T>> + '_ {
        let kids = node.children;
        kids.into_iter().filter(|&c| c != NO_CHILD).map(move |c| &self.nodes[c])
    }

    /// Point indices held by `node` (all descendants).
    pub fn points_in<'a>(&'a self, node: &OctreeNode<T>) -> &'a [usize] {
        &self.order[node.start..node.end]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &OctreeNode<T>> + '_ {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn point(&self, i: usize) -> Vec3<T> {
        self.points[i]
    }

    /// Sum over all other points `u` of the entropy pair term acting on point `v`,
    /// replacing a cell by its centroid when `side / distance < theta` and the
    /// cell does not contain `v`. `theta = 0` gives the exact sum.
    pub fn force_on(&self, v: usize, q: T, theta: T) -> Vec3<T> {
        let mut acc = geom::zero();
        if self.nodes.is_empty() {
            return acc;
        }
        let xv = self.points[v];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                for &u in &self.order[node.start..node.end] {
                    if u != v {
                        acc = geom::add(acc, pair_entropy_term(xv, self.points[u], q, v, u));
                    }
                }
                continue;
            }
            if theta > T::zero() && !node.contains(xv) {
                let d = geom::dist(xv, node.centroid);
                if node.side() < theta * d {
                    let term = entropy_kernel(geom::sub(xv, node.centroid), d, q);
                    acc = geom::add(acc, geom::scale(term, T::from_count(node.count)));
                    continue;
                }
            }
            for &c in node.children.iter().rev() {
                if c != NO_CHILD {
                    stack.push(c);
                }
            }
        }
        acc
    }
}

#[inline]
fn sgn<T: Real>(q: T) -> T {
    if q >= T::zero() { T::one() } else { -T::one() }
}

#[inline]
fn entropy_kernel<T: Real>(diff: Vec3<T>, r: T, q: T) -> Vec3<T> {
    let denom = if q == T::zero() { r * r } else { r.powf(q + T::lit(2.0)) };
    geom::scale(diff, sgn(q) / denom)
}

/// Entropy pair term acting on `v` from `u`: `sgn(q) (x_v - x_u) / |x_v - x_u|^(q+2)`
/// with `sgn(0) = 1`. Coincident points get a fixed-magnitude push along a
/// reproducible direction that is antisymmetric in `(v, u)`.
#[inline]
pub fn pair_entropy_term<T: Real>(xv: Vec3<T>, xu: Vec3<T>, q: T, v: usize, u: usize) -> Vec3<T> {
    let diff = geom::sub(xv, xu);
    let r = geom::norm(diff);
    if r < T::lit(COINCIDENT) {
        return geom::scale(geom::pair_direction(v, u), T::lit(COINCIDENT_FORCE));
    }
    entropy_kernel(diff, r, q)
}

/// Entropy force on `v` summed over all non-neighbors: the octree sum over all
/// points with the exact contributions of `v`'s graph neighbors subtracted.
pub fn entropy_force<T: Real>(tree: &Octree<T>, graph: &Graph, v: usize, q: T, theta: T) -> Vec3<T> {
    let mut f = tree.force_on(v, q, theta);
    let xv = tree.point(v);
    for &u in graph.neighbors(v) {
        f = geom::sub(f, pair_entropy_term(xv, tree.point(u), q, v, u));
    }
    f
}

/// [`entropy_force`] for every vertex.
pub fn entropy_forces<T: Real>(tree: &Octree<T>, graph: &Graph, q: T, theta: T, parallel: bool) -> Vec<Vec3<T>> {
    if parallel {
        (0..tree.len()).into_par_iter().map(|v| entropy_force(tree, graph, v, q, theta)).collect()
    } else {
        (0..tree.len()).map(|v| entropy_force(tree, graph, v, q, theta)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_graph;

    #[test]
    fn single_point() {
        let e = Embedding::new(vec![[1.0f64, 2.0, 3.0]]);
        let t = build_octree(&e);
        assert_eq!(t.nodes().len(), 1);
        assert!(t.root().unwrap().is_leaf());
        assert_eq!(t.root().unwrap().centroid, [1.0, 2.0, 3.0]);
        let g = build_graph(1, &[]).unwrap();
        assert_eq!(entropy_force(&t, &g, 0, 0.0, 0.6), [0.0; 3]);
    }

    #[test]
    fn cube_corners_centroid() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64 * 2.0, ((i >> 1) & 1) as f64 * 2.0, ((i >> 2) & 1) as f64 * 2.0]);
        }
        let t = build_octree(&Embedding::new(pts));
        let root = t.root().unwrap();
        for k in 0..3 {
            assert!((root.centroid[k] - 1.0).abs() < 1e-15);
        }
        assert_eq!(t.leaves().count(), 8);
    }

    #[test]
    fn coincident_points_share_deepest_leaf() {
        let t = build_octree(&Embedding::new(vec![[0.5f64, 0.5, 0.5], [0.5, 0.5, 0.5], [3.0, 1.0, 0.0]]));
        let shared = t.leaves().find(|l| l.count == 2).expect("shared leaf");
        assert_eq!(shared.depth, Octree::<f64>::MAX_DEPTH);
    }

    #[test]
    fn two_points_log_entropy() {
        let r = 2.5;
        let t = build_octree(&Embedding::new(vec![[0.0f64, 0.0, 0.0], [r, 0.0, 0.0]]));
        let g = build_graph(2, &[]).unwrap();
        let f = entropy_force(&t, &g, 0, 0.0, 0.0);
        assert!((f[0] + 1.0 / r).abs() < 1e-15);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 0.0);
        // Neighbors are excluded.
        let g = build_graph(2, &[(0, 1)]).unwrap();
        assert_eq!(entropy_force(&t, &g, 0, 0.0, 0.0), [0.0; 3]);
    }

    #[test]
    fn negative_q_attracts() {
        let t = build_octree(&Embedding::new(vec![[0.0f64, 0.0, 0.0], [2.0, 0.0, 0.0]]));
        let g = build_graph(2, &[]).unwrap();
        let f = entropy_force(&t, &g, 0, -1.0, 0.0);
        // -(0 - 2) / 2^1 = +1
        assert!((f[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_pair_gets_small_push() {
        let t = build_octree(&Embedding::new(vec![[1.0f64, 1.0, 1.0], [1.0, 1.0, 1.0]]));
        let g = build_graph(2, &[]).unwrap();
        let f0 = entropy_force(&t, &g, 0, 0.0, 0.6);
        let f1 = entropy_force(&t, &g, 1, 0.0, 0.6);
        assert!((geom::norm(f0) - 1e-3).abs() < 1e-12);
        for k in 0..3 {
            assert_eq!(f0[k], -f1[k]);
        }
    }
}
