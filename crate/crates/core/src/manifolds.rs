//! Parametric manifolds with known reach: samplers, the nearest-point
//! projection, tube-conditioned noise, and grid-based density, covering and
//! small-ball-mass oracles.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist, norm, GeometryError, Point, PointCloud, SpatialGrid};
use crate::seeding::{stream, StreamRng};

/// `3 − √8`: noise radii must stay below this multiple of the reach.
pub fn noise_ratio() -> f64 {
    3.0 - 8f64.sqrt()
}

/// Largest admissible (exclusive) tube radius for a manifold of reach `tau`.
pub fn noise_radius_bound(tau: f64) -> f64 {
    noise_ratio() * tau
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManifoldError {
    #[error("invalid manifold parameters: {0}")]
    InvalidParameters(String),
    #[error("point at distance {distance} from the manifold has no unique projection (reach {tau})")]
    OutsideReach { distance: f64, tau: f64 },
    #[error("tube radius {r} violates r < (3 - sqrt 8) tau = {bound}")]
    NoiseTooLarge { r: f64, bound: f64 },
    #[error("grid step {grid_step} too coarse for radius {radius}")]
    GridTooCoarse { grid_step: f64, radius: f64 },
    #[error("need at least {min} Monte Carlo samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("small-ball mass estimate {0} is statistically indistinguishable from zero")]
    OmegaNotPositive(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A compact submanifold of Euclidean space with closed-form geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ManifoldModel {
    /// Circle of the given radius centred at the origin of ℝ².
    Circle { radius: f64 },
    /// Round 2-sphere centred at the origin of ℝ³.
    Sphere { radius: f64 },
    /// Torus of revolution about the z-axis in ℝ³ (`major > 2 * minor`).
    Torus { major: f64, minor: f64 },
}

impl ManifoldModel {
    pub fn circle(radius: f64) -> Result<Self, ManifoldError> {
        Self::Circle { radius }.validated()
    }

    pub fn sphere(radius: f64) -> Result<Self, ManifoldError> {
        Self::Sphere { radius }.validated()
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self, ManifoldError> {
        Self::Torus { major, minor }.validated()
    }

    pub fn validated(self) -> Result<Self, ManifoldError> {
        let ok = match self {
            Self::Circle { radius } | Self::Sphere { radius } => radius.is_finite() && radius > 0.0,
            Self::Torus { major, minor } => {
                major.is_finite() && minor.is_finite() && minor > 0.0 && major > 2.0 * minor
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(ManifoldError::InvalidParameters(format!("{self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Circle { .. } => "circle",
            Self::Sphere { .. } => "sphere",
            Self::Torus { .. } => "torus",
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Self::Circle { .. } => 1,
            Self::Sphere { .. } | Self::Torus { .. } => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Circle { .. } => 2,
            Self::Sphere { .. } | Self::Torus { .. } => 3,
        }
    }

    /// Riemannian k-volume.
    pub fn volume(&self) -> f64 {
        match *self {
            Self::Circle { radius } => TAU * radius,
            Self::Sphere { radius } => 4.0 * PI * radius * radius,
            Self::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }

    /// Reach; the condition number is `1 / tau`.
    pub fn tau(&self) -> f64 {
        match *self {
            Self::Circle { radius } | Self::Sphere { radius } => radius,
            Self::Torus { minor, .. } => minor,
        }
    }

    /// Extrinsic diameter.
    pub fn diameter(&self) -> f64 {
        match *self {
            Self::Circle { radius } | Self::Sphere { radius } => 2.0 * radius,
            Self::Torus { major, minor } => 2.0 * (major + minor),
        }
    }

    /// Betti numbers `b_0..=b_k` of the manifold.
    pub fn betti(&self) -> Vec<usize> {
        match self {
            Self::Circle { .. } => vec![1, 1],
            Self::Sphere { .. } => vec![1, 0, 1],
            Self::Torus { .. } => vec![1, 2, 1],
        }
    }

    /// Distance from an ambient point to the manifold.
    pub fn distance_to(&self, w: &[f64]) -> Result<f64, ManifoldError> {
        self.check_dim(w)?;
        Ok(match *self {
            Self::Circle { radius } | Self::Sphere { radius } => (norm(w) - radius).abs(),
            Self::Torus { major, minor } => {
                let rho = w[0].hypot(w[1]);
                ((rho - major).hypot(w[2]) - minor).abs()
            }
        })
    }

    fn check_dim(&self, w: &[f64]) -> Result<(), ManifoldError> {
        if w.len() != self.ambient_dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.ambient_dim(), found: w.len() }.into());
        }
        Ok(())
    }

    /// Point at angle(s) `params` (radians); the circle uses one parameter,
    /// sphere (polar, azimuth) and torus (around the axis, around the tube)
    /// use two.
    pub fn embed(&self, params: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match *self {
            Self::Circle { radius } => out.extend([radius * params[0].cos(), radius * params[0].sin()]),
            Self::Sphere { radius } => {
                let (st, ct) = params[0].sin_cos();
                let (sp, cp) = params[1].sin_cos();
                out.extend([radius * st * cp, radius * st * sp, radius * ct]);
            }
            Self::Torus { major, minor } => {
                let (sp, cp) = params[0].sin_cos();
                let (st, ct) = params[1].sin_cos();
                let ring = major + minor * ct;
                out.extend([ring * cp, ring * sp, minor * st]);
            }
        }
    }

    fn sample_point(&self, rng: &mut StreamRng, out: &mut Vec<f64>) {
        match *self {
            Self::Circle { .. } => {
                let theta = rng.random::<f64>() * TAU;
                self.embed(&[theta], out);
            }
            Self::Sphere { radius } => {
                out.clear();
                out.extend(gaussian_direction(rng, 3).into_iter().map(|c| c * radius));
            }
            Self::Torus { major, minor } => {
                // Area element is proportional to (major + minor cos t).
                let t = loop {
                    let t = rng.random::<f64>() * TAU;
                    let u = rng.random::<f64>() * (major + minor);
                    if u < major + minor * t.cos() {
                        break t;
                    }
                };
                let phi = rng.random::<f64>() * TAU;
                self.embed(&[phi, t], out);
            }
        }
    }

    /// Nearest point of the manifold to `w` (the metric projection), written
    /// into `out`. Points at distance `>= tau` are rejected.
    pub fn project_into(&self, w: &[f64], out: &mut [f64]) -> Result<(), ManifoldError> {
        self.check_dim(w)?;
        let tau = self.tau();
        let d = self.distance_to(w)?;
        if !(d < tau) {
            return Err(ManifoldError::OutsideReach { distance: d, tau });
        }
        match *self {
            Self::Circle { radius } | Self::Sphere { radius } => {
                let n = norm(w);
                for (o, c) in out.iter_mut().zip(w) {
                    *o = radius * c / n;
                }
            }
            Self::Torus { major, minor } => {
                let rho = w[0].hypot(w[1]);
                let core = [major * w[0] / rho, major * w[1] / rho, 0.0];
                let offset = [w[0] - core[0], w[1] - core[1], w[2]];
                let len = norm(&offset);
                for k in 0..3 {
                    out[k] = core[k] + minor * offset[k] / len;
                }
            }
        }
        Ok(())
    }
}

/// Uniformly distributed unit vector in ℝ^dim.
fn gaussian_direction(rng: &mut StreamRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Uniform draw from the open ball of radius `r` about the origin of ℝ^dim.
pub(crate) fn ball_offset(rng: &mut StreamRng, dim: usize, r: f64) -> Vec<f64> {
    let u: f64 = rng.random();
    let len = r * u.powf(1.0 / dim as f64);
    gaussian_direction(rng, dim).into_iter().map(|c| c * len).collect()
}

/// Tube noise: base point uniform on the manifold plus an offset uniform in
/// the open ambient ball of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub r: f64,
    /// Lower bound for the infimum of `μ(B_{r/2}(p))` over manifold points,
    /// once estimated.
    pub omega: Option<f64>,
}

impl NoiseModel {
    pub fn new(model: &ManifoldModel, r: f64) -> Result<Self, ManifoldError> {
        let bound = noise_radius_bound(model.tau());
        if !(r >= 0.0 && r < bound) {
            return Err(ManifoldError::NoiseTooLarge { r, bound });
        }
        Ok(Self { r, omega: None })
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega: Some(omega), ..self }
    }
}

pub fn sample_uniform(model: &ManifoldModel, count: usize, seed: u64) -> PointCloud {
    let mut rng = stream(seed);
    let mut cloud = PointCloud::with_capacity(model.ambient_dim(), count);
    let mut buf = Vec::with_capacity(3);
    for _ in 0..count {
        model.sample_point(&mut rng, &mut buf);
        cloud.push(&buf).expect("manifold samples are finite and correctly sized");
    }
    cloud
}

/// Nearest manifold point to `point`.
pub fn project(model: &ManifoldModel, point: &[f64]) -> Result<Point, ManifoldError> {
    let mut out = vec![0.0; model.ambient_dim()];
    model.project_into(point, &mut out)?;
    Ok(Point::new(out))
}

/// Projects every point of a cloud.
pub fn project_cloud(model: &ManifoldModel, cloud: &PointCloud) -> Result<PointCloud, ManifoldError> {
    let mut out = PointCloud::with_capacity(cloud.dim(), cloud.len());
    let mut buf = vec![0.0; model.ambient_dim()];
    for p in cloud.iter() {
        model.project_into(p, &mut buf)?;
        out.push(&buf)?;
    }
    Ok(out)
}

pub fn sample_conditioned(
    model: &ManifoldModel,
    noise: &NoiseModel,
    count: usize,
    seed: u64,
) -> Result<PointCloud, ManifoldError> {
    let bound = noise_radius_bound(model.tau());
    if !(noise.r < bound) {
        return Err(ManifoldError::NoiseTooLarge { r: noise.r, bound });
    }
    let mut rng = stream(seed);
    let dim = model.ambient_dim();
    let mut cloud = PointCloud::with_capacity(dim, count);
    let mut buf = Vec::with_capacity(dim);
    for _ in 0..count {
        model.sample_point(&mut rng, &mut buf);
        let offset = ball_offset(&mut rng, dim, noise.r);
        for (b, o) in buf.iter_mut().zip(&offset) {
            *b += o;
        }
        cloud.push(&buf)?;
    }
    Ok(cloud)
}

/// Displaces each point by an independent uniform offset of norm `< d`.
pub fn perturb_images(images: &PointCloud, d: f64, seed: u64) -> PointCloud {
    let mut rng = stream(seed);
    let mut out = PointCloud::with_capacity(images.dim(), images.len());
    let mut buf = Vec::with_capacity(images.dim());
    for p in images.iter() {
        let offset = ball_offset(&mut rng, images.dim(), d);
        buf.clear();
        buf.extend(p.iter().zip(&offset).map(|(a, b)| a + b));
        out.push(&buf).expect("finite perturbation");
    }
    out
}

/// Deterministic discretisation of the manifold: every manifold point lies
/// within `step` of some grid point.
///
/// Circle: uniform angles. Sphere: Fibonacci lattice, sized with a safety
/// margin over its empirical covering constant (about 2.7/√N). Torus: uniform
/// grid in both angles.
pub fn manifold_grid(model: &ManifoldModel, step: f64) -> PointCloud {
    assert!(step > 0.0, "grid step must be positive");
    let mut cloud = PointCloud::new(model.ambient_dim());
    let mut buf = Vec::with_capacity(3);
    match *model {
        ManifoldModel::Circle { radius } => {
            let m = ((PI * radius / step).ceil() as usize).max(3);
            for i in 0..m {
                model.embed(&[TAU * i as f64 / m as f64], &mut buf);
                cloud.push(&buf).unwrap();
            }
        }
        ManifoldModel::Sphere { radius } => {
            let n = (((3.2 * radius / step).powi(2)).ceil() as usize).max(8);
            let golden = PI * (1.0 + 5f64.sqrt());
            for i in 0..n {
                let t = i as f64 + 0.5;
                let z = 1.0 - 2.0 * t / n as f64;
                let ring = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * t;
                buf.clear();
                buf.extend([radius * ring * phi.cos(), radius * ring * phi.sin(), radius * z]);
                cloud.push(&buf).unwrap();
            }
        }
        ManifoldModel::Torus { major, minor } => {
            // Half-diagonal of a parameter cell is at most step.
            let arc = step * std::f64::consts::SQRT_2;
            let m_phi = ((TAU * (major + minor) / arc).ceil() as usize).max(3);
            let m_t = ((TAU * minor / arc).ceil() as usize).max(3);
            for i in 0..m_phi {
                for j in 0..m_t {
                    let phi = TAU * i as f64 / m_phi as f64;
                    let t = TAU * j as f64 / m_t as f64;
                    model.embed(&[phi, t], &mut buf);
                    cloud.push(&buf).unwrap();
                }
            }
        }
    }
    cloud
}

/// Conservative α-density test: true only if every grid point lies within
/// `alpha - grid_step` of a sample, which implies the manifold is covered by
/// the open α-balls around the samples.
pub fn is_alpha_dense(
    points: &PointCloud,
    model: &ManifoldModel,
    alpha: f64,
    grid_step: f64,
) -> Result<bool, ManifoldError> {
    if !(grid_step > 0.0 && grid_step <= alpha / 4.0) {
        return Err(ManifoldError::GridTooCoarse { grid_step, radius: alpha });
    }
    if points.dim() != model.ambient_dim() {
        return Err(GeometryError::DimensionMismatch { expected: model.ambient_dim(), found: points.dim() }.into());
    }
    if points.is_empty() {
        return Ok(false);
    }
    let reach = alpha - grid_step;
    let index = SpatialGrid::new(points, reach);
    let grid = manifold_grid(model, grid_step);
    let dense = grid.iter().all(|g| index.any_within(g, reach));
    Ok(dense)
}

/// Upper bound on the ν-covering number: lazy greedy set cover of the grid by
/// balls centred at grid points, where a grid point counts as covered when it
/// is within `nu - grid_step` of a chosen centre.
pub fn covering_number(model: &ManifoldModel, nu: f64, grid_step: f64) -> Result<usize, ManifoldError> {
    if !(grid_step > 0.0 && nu > grid_step) {
        return Err(ManifoldError::GridTooCoarse { grid_step, radius: nu });
    }
    let grid = manifold_grid(model, grid_step);
    let reach = nu - grid_step;
    let index = SpatialGrid::new(&grid, reach);
    let mut covered = vec![false; grid.len()];
    let mut remaining = grid.len();
    let gain = |c: usize, covered: &[bool]| {
        let mut g = 0usize;
        index.for_each_within(grid.point(c), reach, |j, _| {
            if !covered[j] {
                g += 1;
            }
        });
        g
    };
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..grid.len()).map(|c| (gain(c, &covered), Reverse(c))).collect();
    let mut centers = 0usize;
    while remaining > 0 {
        let (stale, Reverse(c)) = heap.pop().expect("uncovered grid points remain selectable");
        let fresh = gain(c, &covered);
        if fresh < stale {
            heap.push((fresh, Reverse(c)));
            continue;
        }
        if fresh == 0 {
            continue;
        }
        centers += 1;
        index.for_each_within(grid.point(c), reach, |j, _| {
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        });
    }
    Ok(centers)
}

/// Monte Carlo lower bound on `inf_p μ(B_{r/2}(p))` for tube noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    /// Minimum over grid points of (empirical mass − 3 standard errors).
    pub lower: f64,
    /// Minimum empirical mass over grid points.
    pub min_empirical: f64,
    /// Standard error at the minimising grid point.
    pub std_error: f64,
    pub grid_points: usize,
    pub samples: usize,
}

pub const MIN_OMEGA_SAMPLES: usize = 10_000;

pub fn omega_lower_bound(
    model: &ManifoldModel,
    noise: &NoiseModel,
    grid_step: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<OmegaEstimate, ManifoldError> {
    if mc_samples < MIN_OMEGA_SAMPLES {
        return Err(ManifoldError::TooFewSamples { min: MIN_OMEGA_SAMPLES, got: mc_samples });
    }
    let draws = sample_conditioned(model, noise, mc_samples, seed)?;
    let masses = ball_masses(&draws, &manifold_grid(model, grid_step), noise.r / 2.0);
    let n = mc_samples as f64;
    let mut est = OmegaEstimate {
        lower: f64::INFINITY,
        min_empirical: f64::INFINITY,
        std_error: 0.0,
        grid_points: masses.len(),
        samples: mc_samples,
    };
    for &count in &masses {
        let p = count as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        est.min_empirical = est.min_empirical.min(p);
        if p - 3.0 * se < est.lower {
            est.lower = p - 3.0 * se;
            est.std_error = se;
        }
    }
    if !(est.lower > 0.0) {
        return Err(ManifoldError::OmegaNotPositive(est.lower));
    }
    Ok(est)
}

/// For each centre, the number of draws in the open ball of radius `s`.
pub fn ball_masses(draws: &PointCloud, centers: &PointCloud, s: f64) -> Vec<usize> {
    let index = SpatialGrid::new(draws, s);
    centers
        .iter()
        .map(|c| {
            let mut k = 0usize;
            index.for_each_within(c, s, |_, _| k += 1);
            k
        })
        .collect()
}

/// Largest distance from a grid point to its nearest sample, by exhaustive
/// search; used in diagnostics and tests.
pub fn grid_gap(points: &PointCloud, model: &ManifoldModel, grid_step: f64) -> f64 {
    let grid = manifold_grid(model, grid_step);
    grid.iter()
        .map(|g| points.iter().map(|p| dist(g, p)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
