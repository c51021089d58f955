//! Euclidean primitives: points, point clouds, minimum enclosing balls and
//! the Čech intersection test deciding simplex membership in a nerve.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used when deciding whether a point lies inside a candidate
/// ball during the enclosing-ball recursion.
const CONTAINMENT_SLACK: f64 = 1e-12;

/// Containment tolerance used to verify a finished enclosing ball.
pub const MEB_VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty point set")]
    Empty,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
}

/// A point of ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// A finite sample of points sharing one ambient dimension, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        Self { dim, coords: Vec::new() }
    }

    pub fn with_capacity(dim: usize, count: usize) -> Self {
        Self { dim, coords: Vec::with_capacity(dim * count) }
    }

    /// Builds a cloud from explicit rows, checking that every row has the same
    /// length and finite entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        let first = rows.first().ok_or(GeometryError::Empty)?;
        let mut cloud = Self::with_capacity(first.as_ref().len(), rows.len());
        for row in rows {
            cloud.push(row.as_ref())?;
        }
        Ok(cloud)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<(), GeometryError> {
        if p.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite(self.len()));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn raw(&self) -> &[f64] {
        &self.coords
    }

    /// Largest pairwise distance, by exhaustive comparison.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.max(dist(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// A new cloud with points listed in the order given by `perm`
    /// (`perm[new] = old`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::with_capacity(self.dim, perm.len());
        for &old in perm {
            out.coords.extend_from_slice(self.point(old));
        }
        out
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(p: &[f64], q: &[f64]) -> Result<f64, GeometryError> {
    if p.len() != q.len() {
        return Err(GeometryError::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(dist(p, q))
}

#[inline]
pub(crate) fn dist2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
pub(crate) fn dist(p: &[f64], q: &[f64]) -> f64 {
    dist2(p, q).sqrt()
}

#[inline]
pub(crate) fn norm(p: &[f64]) -> f64 {
    p.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Smallest closed ball containing a finite point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosingBall {
    pub center: Point,
    pub radius: f64,
    /// Indices (into the input) of the points on the boundary that determine
    /// the ball.
    pub support: Vec<usize>,
}

impl EnclosingBall {
    /// Every point lies within `radius + tol` of the center.
    pub fn contains_all(&self, points: &[&[f64]], tol: f64) -> bool {
        points.iter().all(|p| dist(&self.center, p) <= self.radius + tol)
    }
}

/// Minimum enclosing ball by move-to-front Welzl recursion.
///
/// Inputs with more than four points are visited in a shuffled order whose
/// seed is derived from the coordinates, so the result is a pure function of
/// the input list.
pub fn min_enclosing_ball(points: &[&[f64]]) -> Result<EnclosingBall, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let dim = first.len();
    for p in points {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: p.len() });
        }
    }
    let mut solver = MebSolver::new(dim);
    let radius = solver.solve(points);
    Ok(EnclosingBall {
        center: Point::new(solver.center.clone()),
        radius,
        support: solver.ball_support.clone(),
    })
}

/// True iff the open `epsilon`-balls around `centers` share a common point,
/// i.e. the enclosing-ball radius is strictly below `epsilon`.
pub fn cech_face_test(centers: &[&[f64]], epsilon: f64) -> Result<bool, GeometryError> {
    if !(epsilon > 0.0) {
        return Err(GeometryError::NonPositiveRadius(epsilon));
    }
    Ok(min_enclosing_ball(centers)?.radius < epsilon)
}

/// Reusable Welzl solver. Buffers persist between calls so the nerve builder
/// can run millions of small instances without allocating.
#[derive(Debug, Clone)]
pub(crate) struct MebSolver {
    dim: usize,
    order: Vec<usize>,
    support: Vec<usize>,
    ball_support: Vec<usize>,
    center: Vec<f64>,
    radius: f64,
    r2: f64,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    diffs: Vec<f64>,
}

impl MebSolver {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            order: Vec::new(),
            support: Vec::with_capacity(dim + 1),
            ball_support: Vec::with_capacity(dim + 1),
            center: vec![0.0; dim],
            radius: -1.0,
            r2: -1.0,
            gram: Vec::new(),
            rhs: Vec::new(),
            diffs: Vec::new(),
        }
    }

    /// Radius of the minimum enclosing ball of `points` (non-empty, all of
    /// dimension `self.dim`).
    pub(crate) fn solve(&mut self, points: &[&[f64]]) -> f64 {
        self.order.clear();
        self.order.extend(0..points.len());
        if points.len() > 4 {
            let mut rng = ChaCha8Rng::seed_from_u64(coordinate_hash(points));
            self.order.shuffle(&mut rng);
        }
        self.support.clear();
        self.mtf(points, points.len());
        self.radius
    }

    fn mtf(&mut self, points: &[&[f64]], end: usize) {
        self.ball_from_support(points);
        if self.support.len() == self.dim + 1 {
            return;
        }
        for i in 0..end {
            let idx = self.order[i];
            if !self.contains(points[idx]) {
                self.support.push(idx);
                self.mtf(points, i);
                self.support.pop();
                self.order[..=i].rotate_right(1);
            }
        }
    }

    #[inline]
    fn contains(&self, p: &[f64]) -> bool {
        self.r2 >= 0.0 && dist2(&self.center, p) <= self.r2 * (1.0 + CONTAINMENT_SLACK)
    }

    fn set_ball(&mut self, radius: f64) {
        self.radius = radius;
        self.r2 = radius * radius;
        self.ball_support.clear();
        self.ball_support.extend_from_slice(&self.support);
    }

    fn ball_from_support(&mut self, points: &[&[f64]]) {
        match self.support.len() {
            0 => {
                self.radius = -1.0;
                self.r2 = -1.0;
                self.ball_support.clear();
            }
            1 => {
                self.center.copy_from_slice(points[self.support[0]]);
                self.set_ball(0.0);
            }
            2 => {
                let (a, b) = (points[self.support[0]], points[self.support[1]]);
                for k in 0..self.dim {
                    self.center[k] = 0.5 * (a[k] + b[k]);
                }
                self.set_ball(0.5 * dist(a, b));
            }
            _ => {
                if !self.circumball(points) {
                    self.degenerate_fallback(points);
                }
            }
        }
    }

    /// Ball through all support points with center in their affine hull.
    /// Returns false when the support is (numerically) affinely dependent.
    fn circumball(&mut self, points: &[&[f64]]) -> bool {
        let k = self.support.len() - 1;
        let dim = self.dim;
        let origin = points[self.support[0]];
        self.diffs.clear();
        for j in 1..=k {
            let p = points[self.support[j]];
            self.diffs.extend(p.iter().zip(origin).map(|(a, b)| a - b));
        }
        self.gram.clear();
        self.gram.resize(k * k, 0.0);
        self.rhs.clear();
        let mut scale = 0.0f64;
        for i in 0..k {
            let vi = &self.diffs[i * dim..(i + 1) * dim];
            for j in 0..k {
                let vj = &self.diffs[j * dim..(j + 1) * dim];
                self.gram[i * k + j] = 2.0 * vi.iter().zip(vj).map(|(a, b)| a * b).sum::<f64>();
            }
            let n2: f64 = vi.iter().map(|c| c * c).sum();
            scale = scale.max(n2);
            self.rhs.push(n2);
        }
        if !solve_in_place(&mut self.gram, &mut self.rhs, k, scale * 1e-13) {
            return false;
        }
        self.center.copy_from_slice(origin);
        for j in 0..k {
            let lambda = self.rhs[j];
            for c in 0..dim {
                self.center[c] += lambda * self.diffs[j * dim + c];
            }
        }
        let mut r2 = 0.0f64;
        for &s in &self.support {
            r2 = r2.max(dist2(&self.center, points[s]));
        }
        self.set_ball(r2.sqrt());
        true
    }

    /// Smallest ball over sub-supports that still encloses every support
    /// point. Only reached on exactly degenerate (measure-zero) inputs.
    fn degenerate_fallback(&mut self, points: &[&[f64]]) {
        let full = self.support.clone();
        let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
        let m = full.len();
        for mask in 1u32..(1 << m) - 1 {
            let sub: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).map(|b| full[b]).collect();
            if sub.len() > self.dim + 1 || sub.len() == m {
                continue;
            }
            self.support = sub.clone();
            self.ball_from_support(points);
            if self.radius < 0.0 {
                continue;
            }
            let ok = full.iter().all(|&s| dist(&self.center, points[s]) <= self.radius * (1.0 + 1e-9) + 1e-15);
            if ok && best.as_ref().is_none_or(|b| self.radius < b.0) {
                best = Some((self.radius, self.center.clone(), sub));
            }
        }
        self.support = full;
        let (radius, center, sub) = best.expect("some sub-support encloses a finite point set");
        self.center = center;
        self.radius = radius;
        self.r2 = radius * radius;
        self.ball_support = sub;
    }
}

/// Gaussian elimination with partial pivoting on a k×k row-major system.
/// The solution overwrites `rhs`.
fn solve_in_place(a: &mut [f64], rhs: &mut [f64], k: usize, tiny: f64) -> bool {
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))
            .unwrap();
        if a[pivot * k + col].abs() <= tiny {
            return false;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(pivot * k + c, col * k + c);
            }
            rhs.swap(pivot, col);
        }
        let p = a[col * k + col];
        for row in col + 1..k {
            let factor = a[row * k + col] / p;
            if factor != 0.0 {
                for c in col..k {
                    a[row * k + c] -= factor * a[col * k + c];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    for row in (0..k).rev() {
        let mut acc = rhs[row];
        for c in row + 1..k {
            acc -= a[row * k + c] * rhs[c];
        }
        rhs[row] = acc / a[row * k + row];
    }
    true
}

fn coordinate_hash(points: &[&[f64]]) -> u64 {
    // FNV-1a over the raw bit patterns.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in points {
        for c in p.iter() {
            for byte in c.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// Uniform grid hash over a point cloud for fixed-radius neighbour queries.
#[derive(Debug, Clone)]
pub(crate) struct SpatialGrid<'a> {
    cloud: &'a PointCloud,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

/// Grids in dimension above this fall back to exhaustive scans.
const MAX_GRID_DIM: usize = 4;

impl<'a> SpatialGrid<'a> {
    pub(crate) fn new(cloud: &'a PointCloud, cell: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        if cloud.dim() <= MAX_GRID_DIM {
            for (i, p) in cloud.iter().enumerate() {
                buckets.entry(cell_key(p, cell)).or_default().push(i);
            }
        }
        Self { cloud, cell, buckets }
    }

    /// Calls `visit(j, d)` for every cloud point `j` at distance `d < radius`
    /// from `p`; requires `radius <= cell`.
    pub(crate) fn for_each_within(&self, p: &[f64], radius: f64, mut visit: impl FnMut(usize, f64)) {
        debug_assert!(radius <= self.cell);
        if self.cloud.dim() > MAX_GRID_DIM {
            for (j, q) in self.cloud.iter().enumerate() {
                let d = dist(p, q);
                if d < radius {
                    visit(j, d);
                }
            }
            return;
        }
        let base = cell_key(p, self.cell);
        let mut key = base.clone();
        let dim = base.len();
        let combos = 3usize.pow(dim as u32);
        for code in 0..combos {
            let mut c = code;
            for k in 0..dim {
                key[k] = base[k] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(bucket) = self.buckets.get(&key) {
                for &j in bucket {
                    let d = dist(p, self.cloud.point(j));
                    if d < radius {
                        visit(j, d);
                    }
                }
            }
        }
    }

    pub(crate) fn any_within(&self, p: &[f64], radius: f64) -> bool {
        let mut found = false;
        self.for_each_within(p, radius, |_, _| found = true);
        found
    }
}

fn cell_key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|c| (c / cell).floor() as i64).collect()
}

/// All index pairs `(i, j)`, `i < j`, whose distance is strictly below
/// `threshold`, in lexicographic order.
pub fn proximity_pairs(points: &PointCloud, threshold: f64) -> Vec<(usize, usize)> {
    if !(threshold > 0.0) || points.len() < 2 {
        return Vec::new();
    }
    let grid = SpatialGrid::new(points, threshold);
    let mut pairs = Vec::new();
    let mut row = Vec::new();
    for i in 0..points.len() {
        row.clear();
        grid.for_each_within(points.point(i), threshold, |j, _| {
            if j > i {
                row.push(j);
            }
        });
        row.sort_unstable();
        pairs.extend(row.iter().map(|&j| (i, j)));
    }
    pairs
}
