//! Domain types: constraint graph, interval constraints, embeddings, instances
//! and solver configuration.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::scalar::{cast, Real};

/// Threshold above which an interval error counts as a violation.
pub const VIOLATION_EPS: f64 = 1e-9;

/// Undirected simple graph with edges kept in canonical `(min, max)` lexicographic order.
///
/// Every per-edge array in the crate is indexed by the position of the edge in
/// [`Graph::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph over `n` vertices. Duplicate edges (in either orientation)
    /// are merged; self-loops and out-of-range ids are rejected.
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b) in edge_list {
            if a >= n || b >= n {
                return Err(Error::validation(format!(
                    "edge ({a}, {b}) references a vertex outside [0, {n})"
                )));
            }
            if a == b {
                return Err(Error::validation(format!("self-loop at vertex {a}")));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_canonical(n, edges))
    }

    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push(b);
            adjacency[b].push(a);
            incident[a].push(e);
            incident[b].push(e);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Graph { n, edges, adjacency, incident }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Ids of the edges incident to `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Canonical index of edge `{a, b}`, if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    /// Connected-component label per vertex and the number of components.
    /// Labels are assigned in order of the smallest vertex id of each component.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &u in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Vertex of maximum degree; ties go to the lowest id.
    pub fn max_degree_vertex(&self) -> Option<usize> {
        (0..self.n).max_by(|&a, &b| self.degree(a).cmp(&self.degree(b)).then(b.cmp(&a)))
    }
}

/// Builds a normalized graph from an edge list.
pub fn build_graph(n: usize, edge_list: &[(usize, usize)]) -> Result<Graph> {
    Graph::new(n, edge_list)
}

/// Interval constraint on the length of one edge, in Å.
///
/// `weight` is the penalty factor applied to the edge's interval error; it is
/// also folded into the stress weight during majorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceConstraint<T> {
    pub lower: T,
    pub upper: T,
    pub confidence: T,
    pub weight: T,
}

impl<T: Real> DistanceConstraint<T> {
    pub fn interval(lower: T, upper: T) -> Self {
        DistanceConstraint { lower, upper, confidence: T::one(), weight: T::one() }
    }

    pub fn exact(d: T) -> Self {
        Self::interval(d, d)
    }

    pub fn with_confidence(mut self, confidence: T) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_weight(mut self, weight: T) -> Self {
        self.weight = weight;
        self
    }

    pub fn midpoint(&self) -> T {
        (self.lower + self.upper) * T::lit(0.5)
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, d: T) -> bool {
        self.lower <= d && d <= self.upper
    }

    pub fn cast<U: Real>(&self) -> DistanceConstraint<U> {
        DistanceConstraint {
            lower: cast(self.lower),
            upper: cast(self.upper),
            confidence: cast(self.confidence),
            weight: cast(self.weight),
        }
    }
}

/// Penalty weight derived from a confidence value: `1 + 5 exp(-5 (1 - c))`.
pub fn confidence_weight<T: Real>(c: T) -> Result<T> {
    if !(c >= T::zero() && c <= T::one()) {
        return Err(Error::validation(format!("confidence {c} outside [0, 1]")));
    }
    Ok(T::one() + T::lit(5.0) * (T::lit(-5.0) * (T::one() - c)).exp())
}

/// 3D coordinates per vertex, in Å.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    coords: Vec<Vec3<T>>,
}

impl<T: Real> Embedding<T> {
    pub fn new(coords: Vec<Vec3<T>>) -> Self {
        Embedding { coords }
    }

    pub fn zeros(n: usize) -> Self {
        Embedding { coords: vec![geom::zero(); n] }
    }

    /// Like [`Embedding::new`] but rejects non-finite coordinates.
    pub fn try_new(coords: Vec<Vec3<T>>) -> Result<Self> {
        if let Some(v) = coords.iter().position(|p| !geom::is_finite(*p)) {
            return Err(Error::validation(format!("non-finite coordinate at vertex {v}")));
        }
        Ok(Embedding { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Vec3<T>] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [Vec3<T>] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<Vec3<T>> {
        self.coords
    }

    #[inline]
    pub fn point(&self, v: usize) -> Vec3<T> {
        self.coords[v]
    }

    #[inline]
    pub fn set_point(&mut self, v: usize, p: Vec3<T>) {
        self.coords[v] = p;
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> T {
        geom::dist(self.coords[a], self.coords[b])
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|p| geom::is_finite(*p))
    }

    pub fn centroid(&self) -> Vec3<T> {
        if self.coords.is_empty() {
            return geom::zero();
        }
        let mut c = geom::zero();
        for p in &self.coords {
            c = geom::add(c, *p);
        }
        geom::scale(c, T::one() / T::from_count(self.coords.len()))
    }

    /// Translates the embedding so its centroid is the origin.
    pub fn center(&mut self) {
        let c = self.centroid();
        for p in self.coords.iter_mut() {
            *p = geom::sub(*p, c);
        }
    }

    pub fn translated(&self, t: Vec3<T>) -> Self {
        Embedding { coords: self.coords.iter().map(|p| geom::add(*p, t)).collect() }
    }

    /// Mirror image through the plane x = 0.
    pub fn mirrored(&self) -> Self {
        Embedding { coords: self.coords.iter().map(|p| [-p[0], p[1], p[2]]).collect() }
    }

    /// Frobenius norm over all coordinates.
    pub fn norm(&self) -> T {
        self.coords.iter().map(|p| geom::norm_sq(*p)).sum::<T>().sqrt()
    }

    /// Frobenius norm of the difference to `other`.
    pub fn diff_norm(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| geom::norm_sq(geom::sub(*a, *b)))
            .sum::<T>()
            .sqrt()
    }

    pub fn cast<U: Real>(&self) -> Embedding<U> {
        Embedding {
            coords: self.coords.iter().map(|p| [cast(p[0]), cast(p[1]), cast(p[2])]).collect(),
        }
    }
}

/// Provenance of an instance: where it came from and how it was generated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceMeta {
    pub source: String,
    pub seed: Option<u64>,
    /// Generation parameters (recipe, p, sigma, cutoff, ...), stored verbatim.
    pub params: BTreeMap<String, String>,
    /// Optional element symbol per vertex.
    pub elements: Vec<String>,
}

/// A distance geometry instance: constraint graph, one constraint per edge and
/// optional reference coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    graph: Graph,
    constraints: Vec<DistanceConstraint<T>>,
    reference: Option<Embedding<T>>,
    pub meta: InstanceMeta,
}

impl<T: Real> Instance<T> {
    /// `constraints[e]` belongs to `graph.edges()[e]`.
    pub fn new(
        graph: Graph,
        constraints: Vec<DistanceConstraint<T>>,
        reference: Option<Embedding<T>>,
        meta: InstanceMeta,
    ) -> Result<Self> {
        if constraints.len() != graph.m() {
            return Err(Error::SizeMismatch { expected: graph.m(), actual: constraints.len() });
        }
        if let Some(r) = &reference {
            if r.len() != graph.n() {
                return Err(Error::SizeMismatch { expected: graph.n(), actual: r.len() });
            }
        }
        if !meta.elements.is_empty() && meta.elements.len() != graph.n() {
            return Err(Error::SizeMismatch { expected: graph.n(), actual: meta.elements.len() });
        }
        Ok(Instance { graph, constraints, reference, meta })
    }

    /// Builds an instance from `(v, w, constraint)` triples in any order.
    /// When an edge appears more than once the first occurrence wins.
    pub fn from_edges(
        n: usize,
        edges: Vec<(usize, usize, DistanceConstraint<T>)>,
        reference: Option<Embedding<T>>,
        meta: InstanceMeta,
    ) -> Result<Self> {
        let mut keyed = Vec::with_capacity(edges.len());
        for (i, (a, b, c)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::validation(format!(
                    "edge ({a}, {b}) references a vertex outside [0, {n})"
                )));
            }
            if a == b {
                return Err(Error::validation(format!("self-loop at vertex {a}")));
            }
            keyed.push(((a.min(b), a.max(b)), i, c));
        }
        keyed.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        keyed.dedup_by(|later, earlier| later.0 == earlier.0);
        let pairs = keyed.iter().map(|k| k.0).collect();
        let constraints = keyed.into_iter().map(|k| k.2).collect();
        Self::new(Graph::from_canonical(n, pairs), constraints, reference, meta)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn constraints(&self) -> &[DistanceConstraint<T>] {
        &self.constraints
    }

    pub fn constraint(&self, e: usize) -> &DistanceConstraint<T> {
        &self.constraints[e]
    }

    pub fn reference(&self) -> Option<&Embedding<T>> {
        self.reference.as_ref()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn with_reference(mut self, reference: Option<Embedding<T>>) -> Result<Self> {
        if let Some(r) = &reference {
            if r.len() != self.n() {
                return Err(Error::SizeMismatch { expected: self.n(), actual: r.len() });
            }
        }
        self.reference = reference;
        Ok(self)
    }

    /// True when any edge carries a penalty weight other than 1.
    pub fn is_weighted(&self) -> bool {
        self.constraints.iter().any(|c| c.weight != T::one())
    }

    pub fn cast<U: Real>(&self) -> Instance<U> {
        Instance {
            graph: self.graph.clone(),
            constraints: self.constraints.iter().map(|c| c.cast()).collect(),
            reference: self.reference.as_ref().map(|r| r.cast()),
            meta: self.meta.clone(),
        }
    }
}

/// Findings of [`validate_instance`]. Validation never fails; it only reports.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Edges with `lower > upper`.
    pub bound_violations: Vec<usize>,
    /// Edges with a non-finite bound.
    pub non_finite: Vec<usize>,
    /// Edges with a negative lower bound.
    pub negative_lower: Vec<usize>,
    /// Edges whose confidence is outside [0, 1] or whose weight is not positive.
    pub bad_confidence_or_weight: Vec<usize>,
    pub components: usize,
    pub isolated: Vec<usize>,
    /// Reference coordinates that are non-finite.
    pub bad_reference: bool,
}

impl Diagnostics {
    /// No hard errors. Disconnected or isolated vertices are warnings only.
    pub fn is_valid(&self) -> bool {
        self.bound_violations.is_empty()
            && self.non_finite.is_empty()
            && self.negative_lower.is_empty()
            && self.bad_confidence_or_weight.is_empty()
            && !self.bad_reference
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.components > 1 {
            out.push(format!("instance has {} connected components", self.components));
        }
        if !self.isolated.is_empty() {
            out.push(format!("{} isolated vertices", self.isolated.len()));
        }
        out
    }
}

pub fn validate_instance<T: Real>(inst: &Instance<T>) -> Diagnostics {
    let mut diag = Diagnostics::default();
    for (e, c) in inst.constraints().iter().enumerate() {
        if !c.lower.is_finite() || !c.upper.is_finite() {
            diag.non_finite.push(e);
            continue;
        }
        if c.lower > c.upper {
            diag.bound_violations.push(e);
        }
        if c.lower < T::zero() {
            diag.negative_lower.push(e);
        }
        if !(c.confidence >= T::zero() && c.confidence <= T::one()) || !(c.weight > T::zero()) {
            diag.bad_confidence_or_weight.push(e);
        }
    }
    let g = inst.graph();
    diag.components = g.components().1;
    diag.isolated = (0..g.n()).filter(|&v| g.degree(v) == 0).collect();
    diag.bad_reference = inst.reference().is_some_and(|r| !r.is_finite());
    diag
}

/// Per-edge interval midpoints `(l + u) / 2`, used as majorization targets.
pub fn midpoint_distances<T: Real>(inst: &Instance<T>) -> Vec<T> {
    inst.constraints().iter().map(|c| c.midpoint()).collect()
}

/// Base of the logarithm in the lazy entropy schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

/// Tunables of the maxent-stress solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub alpha_start: T,
    pub alpha_end: T,
    pub alpha_rate: T,
    /// Entropy exponent; `None` selects it from the degree-1 rule.
    pub q: Option<T>,
    pub solves_per_alpha: usize,
    pub conv_tol: T,
    pub cg_tol: T,
    pub cg_max_iter: usize,
    /// Barnes-Hut opening threshold (0 = exact pair sums).
    pub theta: T,
    pub seed: u64,
    /// Allow rayon parallelism inside a solve.
    pub parallel: bool,
    /// Recompute entropy only when `floor(5 log i)` changes.
    pub lazy_entropy: bool,
    pub lazy_log_base: LogBase,
    /// Divide each vertex's entropy force by its number of non-neighbors.
    pub normalize_entropy: bool,
    /// Leave the alpha loop after two consecutive levels that converged in one step.
    pub early_alpha_exit: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            alpha_start: T::one(),
            alpha_end: T::lit(0.008),
            alpha_rate: T::lit(0.3),
            q: None,
            solves_per_alpha: 50,
            conv_tol: T::lit(1e-3),
            cg_tol: T::lit(1e-7),
            cg_max_iter: 2000,
            theta: T::lit(0.6),
            seed: 0,
            parallel: false,
            lazy_entropy: true,
            lazy_log_base: LogBase::Natural,
            normalize_entropy: true,
            early_alpha_exit: true,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be positive, got {v}")))
            }
        };
        pos("alpha_end", self.alpha_end)?;
        pos("conv_tol", self.conv_tol)?;
        pos("cg_tol", self.cg_tol)?;
        if self.alpha_start < self.alpha_end {
            return Err(Error::validation("alpha_start must be >= alpha_end"));
        }
        if !(self.alpha_rate > T::zero() && self.alpha_rate < T::one()) {
            return Err(Error::validation("alpha_rate must lie in (0, 1)"));
        }
        if let Some(q) = self.q {
            if !(q > T::lit(-2.0)) {
                return Err(Error::validation("q must be > -2"));
            }
        }
        if !(self.theta >= T::zero()) {
            return Err(Error::validation("theta must be >= 0"));
        }
        if self.solves_per_alpha == 0 || self.cg_max_iter == 0 {
            return Err(Error::validation("iteration caps must be >= 1"));
        }
        Ok(())
    }

    /// The alpha values visited by the solver, in order.
    pub fn alpha_schedule(&self) -> Vec<T> {
        let mut out = Vec::new();
        let mut alpha = self.alpha_start;
        // Relative slack so that e.g. 0.3^4 is not lost to rounding against a 0.0081 end value.
        let floor = self.alpha_end * (T::one() - T::lit(1e-9));
        while alpha >= floor && out.len() < 10_000 {
            out.push(alpha);
            alpha *= self.alpha_rate;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_degree_two() {
        let g = build_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.m(), 3);
        assert!((0..3).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn reversed_duplicate_is_merged() {
        let g = build_graph(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn self_loop_and_range_rejected() {
        assert!(matches!(build_graph(2, &[(0, 0)]), Err(Error::Validation(_))));
        assert!(build_graph(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn neighbor_lists_symmetric() {
        let g = build_graph(5, &[(4, 0), (2, 1), (0, 2), (3, 4)]).unwrap();
        for v in 0..5 {
            for &u in g.neighbors(v) {
                assert!(g.neighbors(u).contains(&v));
            }
        }
        assert_eq!(g.edge_index(2, 0), Some(0));
        assert_eq!(g.edge_index(1, 3), None);
    }

    fn inst(n: usize, edges: &[(usize, usize, f64, f64)]) -> Instance<f64> {
        Instance::from_edges(
            n,
            edges.iter().map(|&(a, b, l, u)| (a, b, DistanceConstraint::interval(l, u))).collect(),
            None,
            InstanceMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn validate_reports() {
        let ok = inst(3, &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (0, 2, 1.0, 1.0)]);
        let d = validate_instance(&ok);
        assert!(d.is_valid());
        assert_eq!(d.components, 1);

        let bad = inst(2, &[(0, 1, 3.0, 2.0)]);
        assert_eq!(validate_instance(&bad).bound_violations, vec![0]);

        let split = inst(4, &[(0, 1, 1.0, 1.0), (2, 3, 1.0, 1.0)]);
        let d = validate_instance(&split);
        assert_eq!(d.components, 2);
        assert!(d.isolated.is_empty());
        assert!(d.is_valid());

        let iso = inst(3, &[(0, 1, 1.0, 1.0)]);
        assert_eq!(validate_instance(&iso).isolated, vec![2]);

        let nan = inst(2, &[(0, 1, f64::NAN, 1.0)]);
        assert_eq!(validate_instance(&nan).non_finite, vec![0]);
    }

    #[test]
    fn midpoints() {
        let i = inst(4, &[(0, 1, 2.0, 4.0), (1, 2, 1.5, 1.5), (2, 3, 0.0, 5.0)]);
        assert_eq!(midpoint_distances(&i), vec![3.0, 1.5, 2.5]);
    }

    #[test]
    fn confidence_weight_values() {
        assert!((confidence_weight(1.0f64).unwrap() - 6.0).abs() < 1e-15);
        assert!((confidence_weight(0.0f64).unwrap() - 1.0337).abs() < 1e-3);
        assert!(confidence_weight(1.5f64).is_err());
        assert!(confidence_weight(-0.1f64).is_err());
        assert!(confidence_weight(f64::NAN).is_err());
    }

    #[test]
    fn confidence_weight_strictly_increasing_on_grid() {
        let mut prev = confidence_weight(0.0f64).unwrap();
        assert!(prev > 1.0);
        for i in 1..=10_000 {
            let w = confidence_weight(i as f64 / 10_000.0).unwrap();
            assert!(w > prev && w <= 6.0);
            prev = w;
        }
    }

    #[test]
    fn from_edges_keeps_first_duplicate() {
        let i = inst(3, &[(1, 0, 1.0, 2.0), (0, 1, 5.0, 6.0), (2, 1, 1.0, 1.0)]);
        assert_eq!(i.graph().edges(), &[(0, 1), (1, 2)]);
        assert_eq!(i.constraint(0).lower, 1.0);
    }

    #[test]
    fn default_schedule() {
        let cfg = SolverConfig::<f64>::default();
        let s = cfg.alpha_schedule();
        let expect = [1.0, 0.3, 0.09, 0.027, 0.0081];
        assert_eq!(s.len(), expect.len());
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        cfg.validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::<f64>::default();
        cfg.alpha_rate = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::<f64>::default();
        cfg.q = Some(-2.0);
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::<f64>::default();
        cfg.alpha_end = 2.0;
        assert!(cfg.validate().is_err());
    }
}
