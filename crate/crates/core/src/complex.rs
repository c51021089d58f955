//! Simplicial complexes, Čech nerve construction and simplicial maps.
//!
//! Simplices of each dimension live in one flat `u32` array (stride
//! `dim + 1`), sorted lexicographically, so a simplex is addressed by its
//! position and looked up by binary search.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{proximity_pairs, MebSolver, PointCloud};

/// Default cap on the total number of simplices a construction may produce.
pub const DEFAULT_SIMPLEX_CAP: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("cannot build a nerve over an empty point cloud")]
    EmptyCloud,
    #[error("nerve radius must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("d_max must be at least 1")]
    ZeroDmax,
    #[error("simplex cap {cap} exceeded while building dimension {dim}")]
    SimplexCap { cap: usize, dim: usize },
    #[error("invalid simplex {0:?}: vertices must be strictly increasing")]
    InvalidSimplex(Vec<u32>),
    #[error("simplex {simplex:?} has dimension above d_max = {d_max}")]
    AboveDmax { simplex: Vec<u32>, d_max: usize },
    #[error("vertex {vertex} out of range for a complex with {count} vertices")]
    VertexOutOfRange { vertex: u32, count: usize },
    #[error("simplicial map has {found} entries but the source has {expected} vertices")]
    MapArity { expected: usize, found: usize },
    #[error("map is not simplicial: {source_simplex:?} maps to {image:?}, which is not a simplex of the target")]
    NotSimplicial { source_simplex: Vec<u32>, image: Vec<u32> },
}

/// A simplex as a strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(vertices: Vec<u32>) -> Result<Self, ComplexError> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ComplexError::InvalidSimplex(vertices));
        }
        Ok(Self(vertices))
    }

    /// Sorts and deduplicates an arbitrary vertex list.
    pub fn from_unsorted(mut vertices: Vec<u32>) -> Result<Self, ComplexError> {
        vertices.sort_unstable();
        vertices.dedup();
        Self::new(vertices)
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }
}

/// A finite abstract simplicial complex on vertices `0..num_vertices`,
/// storing simplices up to dimension `d_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    num_vertices: usize,
    d_max: usize,
    /// `simplices[k]` holds the k-simplices, flattened with stride `k + 1`.
    simplices: Vec<Vec<u32>>,
}

impl SimplicialComplex {
    /// The complex made of `num_vertices` isolated vertices.
    pub fn discrete(num_vertices: usize, d_max: usize) -> Self {
        let mut simplices = vec![Vec::new(); d_max + 1];
        simplices[0] = (0..num_vertices as u32).collect();
        Self { num_vertices, d_max, simplices }
    }

    /// Builds a complex from explicit simplices of dimension ≥ 1; the vertex
    /// set is always `0..num_vertices`. Faces are not added, so the result
    /// may fail [`SimplicialComplex::is_closed`]; use
    /// [`SimplicialComplex::closure`] to generate them.
    pub fn from_simplices(
        num_vertices: usize,
        d_max: usize,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self, ComplexError> {
        let mut out = Self::discrete(num_vertices, d_max);
        for s in simplices {
            out.check_simplex(&s)?;
            if s.dim() > 0 {
                out.simplices[s.dim()].extend_from_slice(s.vertices());
            }
        }
        for k in 1..=d_max {
            out.sort_dim(k);
        }
        Ok(out)
    }

    /// Smallest complex containing the given simplices and all their faces.
    pub fn closure(
        num_vertices: usize,
        d_max: usize,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self, ComplexError> {
        let mut out = Self::discrete(num_vertices, d_max);
        let mut sub = Vec::new();
        for s in simplices {
            out.check_simplex(&s)?;
            let v = s.vertices();
            let n = v.len();
            for mask in 1u64..(1u64 << n) {
                if mask.count_ones() < 2 {
                    continue;
                }
                sub.clear();
                sub.extend((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| v[i]));
                out.simplices[sub.len() - 1].extend_from_slice(&sub);
            }
        }
        for k in 1..=d_max {
            out.sort_dim(k);
        }
        Ok(out)
    }

    fn check_simplex(&self, s: &Simplex) -> Result<(), ComplexError> {
        if s.dim() > self.d_max {
            return Err(ComplexError::AboveDmax { simplex: s.0.clone(), d_max: self.d_max });
        }
        if let Some(&v) = s.vertices().iter().find(|&&v| v as usize >= self.num_vertices) {
            return Err(ComplexError::VertexOutOfRange { vertex: v, count: self.num_vertices });
        }
        Ok(())
    }

    fn sort_dim(&mut self, k: usize) {
        let stride = k + 1;
        let mut rows: Vec<&[u32]> = self.simplices[k].chunks_exact(stride).collect();
        rows.sort_unstable();
        rows.dedup();
        let flat: Vec<u32> = rows.concat();
        self.simplices[k] = flat;
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Highest dimension with at least one simplex.
    pub fn dim(&self) -> usize {
        (0..=self.d_max).rev().find(|&k| self.count(k) > 0).unwrap_or(0)
    }

    /// Number of k-simplices (0 above `d_max`).
    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |s| s.len() / (k + 1))
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.d_max).map(|k| self.count(k)).collect()
    }

    pub fn total(&self) -> usize {
        (0..=self.d_max).map(|k| self.count(k)).sum()
    }

    /// The `i`-th k-simplex in lexicographic order.
    pub fn simplex(&self, k: usize, i: usize) -> &[u32] {
        &self.simplices[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn iter(&self, k: usize) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        let stride = k + 1;
        self.simplices.get(k).map_or(&[][..], |s| &s[..]).chunks_exact(stride)
    }

    /// Raw flattened k-simplices.
    pub fn raw(&self, k: usize) -> &[u32] {
        self.simplices.get(k).map_or(&[], |s| s)
    }

    /// Position of a sorted vertex list among the simplices of its dimension.
    pub fn index_of(&self, vertices: &[u32]) -> Option<usize> {
        if vertices.is_empty() {
            return None;
        }
        let k = vertices.len() - 1;
        position_sorted(self.simplices.get(k)?, k + 1, vertices)
    }

    pub fn contains(&self, vertices: &[u32]) -> bool {
        self.index_of(vertices).is_some()
    }

    /// Downward closure: every facet of every stored simplex is stored.
    pub fn is_closed(&self) -> bool {
        let mut facet = Vec::new();
        for k in 1..=self.d_max {
            for s in self.iter(k) {
                for skip in 0..=k {
                    facet.clear();
                    facet.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                    if !self.contains(&facet) {
                        return false;
                    }
                }
            }
        }
        self.count(0) == self.num_vertices && self.raw(0).iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[u32]) -> Self {
        let mut out = Self::discrete(self.num_vertices, self.d_max);
        let mut buf = Vec::new();
        for k in 1..=self.d_max {
            for s in self.iter(k) {
                buf.clear();
                buf.extend(s.iter().map(|&v| perm[v as usize]));
                buf.sort_unstable();
                out.simplices[k].extend_from_slice(&buf);
            }
            out.sort_dim(k);
        }
        out
    }

    /// Drops every simplex above dimension `d`.
    pub fn truncated(&self, d: usize) -> Self {
        let d = d.min(self.d_max);
        Self { num_vertices: self.num_vertices, d_max: d, simplices: self.simplices[..=d].to_vec() }
    }
}

impl fmt::Display for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "complex on {} vertices, counts {:?}", self.num_vertices, self.counts())
    }
}

/// Čech nerve of the open ε-balls around a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct CechNerve {
    pub complex: SimplicialComplex,
    pub points: PointCloud,
    pub epsilon: f64,
}

impl CechNerve {
    pub fn d_max(&self) -> usize {
        self.complex.d_max()
    }
}

/// Builds the Čech nerve up to dimension `d_max` with the default simplex cap.
pub fn build_cech_nerve(points: &PointCloud, epsilon: f64, d_max: usize) -> Result<CechNerve, ComplexError> {
    build_cech_nerve_capped(points, epsilon, d_max, DEFAULT_SIMPLEX_CAP)
}

/// Builds the Čech nerve by clique expansion over the pairs closer than
/// `2ε`, keeping each candidate only if its minimum enclosing ball has radius
/// strictly below `ε`. Aborts once more than `cap` simplices exist.
pub fn build_cech_nerve_capped(
    points: &PointCloud,
    epsilon: f64,
    d_max: usize,
    cap: usize,
) -> Result<CechNerve, ComplexError> {
    if points.is_empty() {
        return Err(ComplexError::EmptyCloud);
    }
    if !(epsilon > 0.0) {
        return Err(ComplexError::NonPositiveEpsilon(epsilon));
    }
    if d_max == 0 {
        return Err(ComplexError::ZeroDmax);
    }
    let n = points.len();
    let mut complex = SimplicialComplex::discrete(n, d_max);
    let mut total = n;
    if total > cap {
        return Err(ComplexError::SimplexCap { cap, dim: 0 });
    }
    let mut solver = MebSolver::new(points.dim());
    let mut ball: Vec<&[f64]> = Vec::with_capacity(d_max + 1);

    // Upper adjacency (neighbours with larger index), sorted.
    let mut upper: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (i, j) in proximity_pairs(points, 2.0 * epsilon) {
        ball.clear();
        ball.extend([points.point(i), points.point(j)]);
        if solver.solve(&ball) < epsilon {
            upper[i].push(j as u32);
            edges.extend([i as u32, j as u32]);
        }
    }
    total += edges.len() / 2;
    if total > cap {
        return Err(ComplexError::SimplexCap { cap, dim: 1 });
    }
    complex.simplices[1] = edges;

    let adjacent = |a: u32, b: u32| upper[a as usize].binary_search(&b).is_ok();
    let mut cand = Vec::new();
    let mut facet = Vec::new();
    for k in 2..=d_max {
        let mut next = Vec::new();
        let prev = &complex.simplices[k - 1];
        for sigma in prev.chunks_exact(k) {
            let last = *sigma.last().unwrap();
            for &v in &upper[last as usize] {
                if !sigma[..k - 1].iter().all(|&u| adjacent(u, v)) {
                    continue;
                }
                cand.clear();
                cand.extend_from_slice(sigma);
                cand.push(v);
                // A Čech simplex has Čech facets; skip candidates with a
                // missing facet before paying for the ball computation.
                if k >= 3 {
                    let facets_present = (0..k).all(|skip| {
                        facet.clear();
                        facet.extend(cand.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &u)| u));
                        position_sorted(prev, k, &facet).is_some()
                    });
                    if !facets_present {
                        continue;
                    }
                }
                ball.clear();
                ball.extend(cand.iter().map(|&u| points.point(u as usize)));
                if solver.solve(&ball) < epsilon {
                    next.extend_from_slice(&cand);
                    total += 1;
                    if total > cap {
                        return Err(ComplexError::SimplexCap { cap, dim: k });
                    }
                }
            }
        }
        let done = next.is_empty();
        complex.simplices[k] = next;
        if done {
            break;
        }
    }
    Ok(CechNerve { complex, points: points.clone(), epsilon })
}

fn position_sorted(flat: &[u32], stride: usize, key: &[u32]) -> Option<usize> {
    let count = flat.len() / stride;
    let (mut lo, mut hi) = (0usize, count);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match flat[mid * stride..(mid + 1) * stride].cmp(key) {
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid,
            std::cmp::Ordering::Equal => return Some(mid),
        }
    }
    None
}

/// True iff the nerve is downward closed and every simplex passes the Čech
/// test at its radius.
pub fn verify_complex(nerve: &CechNerve) -> bool {
    let k = &nerve.complex;
    if !k.is_closed() || k.num_vertices() != nerve.points.len() || !(nerve.epsilon > 0.0) {
        return false;
    }
    let mut solver = MebSolver::new(nerve.points.dim());
    let mut ball: Vec<&[f64]> = Vec::new();
    (1..=k.d_max()).all(|d| {
        k.iter(d).all(|s| {
            ball.clear();
            ball.extend(s.iter().map(|&u| nerve.points.point(u as usize)));
            solver.solve(&ball) < nerve.epsilon
        })
    })
}

/// A vertex map between complexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialMap {
    assignment: Vec<u32>,
}

impl SimplicialMap {
    pub fn new(assignment: Vec<u32>) -> Self {
        Self { assignment }
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n as u32).collect())
    }

    pub fn constant(n: usize, target: u32) -> Self {
        Self::new(vec![target; n])
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.assignment[v as usize]
    }

    /// Sorted, deduplicated image of a simplex.
    pub fn image(&self, simplex: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.extend(simplex.iter().map(|&v| self.apply(v)));
        out.sort_unstable();
        out.dedup();
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> SimplicialMap {
        SimplicialMap::new(self.assignment.iter().map(|&v| other.apply(v)).collect())
    }

    /// First simplex of `source` whose image is not a simplex of `target`.
    pub fn find_violation(
        &self,
        source: &SimplicialComplex,
        target: &SimplicialComplex,
    ) -> Result<Option<(Vec<u32>, Vec<u32>)>, ComplexError> {
        if self.assignment.len() != source.num_vertices() {
            return Err(ComplexError::MapArity { expected: source.num_vertices(), found: self.assignment.len() });
        }
        if let Some(&v) = self.assignment.iter().find(|&&v| v as usize >= target.num_vertices()) {
            return Err(ComplexError::VertexOutOfRange { vertex: v, count: target.num_vertices() });
        }
        let mut img = Vec::new();
        for k in 1..=source.d_max() {
            for s in source.iter(k) {
                self.image(s, &mut img);
                if !target.contains(&img) {
                    return Ok(Some((s.to_vec(), img)));
                }
            }
        }
        Ok(None)
    }

    /// Errors with the offending simplex if the map is not simplicial.
    pub fn check(&self, source: &SimplicialComplex, target: &SimplicialComplex) -> Result<(), ComplexError> {
        match self.find_violation(source, target)? {
            None => Ok(()),
            Some((source_simplex, image)) => Err(ComplexError::NotSimplicial { source_simplex, image }),
        }
    }
}

/// True iff every simplex of `source` maps onto a simplex of `target`.
pub fn verify_simplicial(phi: &SimplicialMap, source: &SimplicialComplex, target: &SimplicialComplex) -> bool {
    matches!(phi.find_violation(source, target), Ok(None))
}
