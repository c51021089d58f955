//! Simplicial reconstruction of a map from samples: the Δ-correspondence,
//! a selector, the induced vertex map between nerves, and runtime checks of
//! the properties the construction is supposed to have.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, SimplicialMap};
use crate::geometry::{dist, dist2, MebSolver, PointCloud};
use crate::manifolds::{ball_offset, ManifoldError, ManifoldModel};
use crate::seeding::stream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("matching radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("ambient dimensions differ: images in R^{images}, targets in R^{targets}")]
    DimensionMismatch { images: usize, targets: usize },
    #[error("{count} correspondence sets are empty (first at sample {first})")]
    EmptySets { first: usize, count: usize },
    #[error("selector covers {found} samples but the complex has {expected} vertices")]
    SelectorArity { expected: usize, found: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// For each source sample, the target samples strictly within `rho` of its
/// image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub sets: Vec<Vec<u32>>,
    pub rho: f64,
}

impl Correspondence {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Source samples whose set is empty.
    pub fn empty_indices(&self) -> Vec<usize> {
        self.sets.iter().enumerate().filter(|(_, s)| s.is_empty()).map(|(i, _)| i).collect()
    }
}

/// Exhaustive strict-ball membership: `η ∈ Δ(ξ)` iff `‖Y[η] − images[ξ]‖ < rho`.
pub fn delta_sets(images: &PointCloud, targets: &PointCloud, rho: f64) -> Result<Correspondence, ReconstructError> {
    if !(rho > 0.0) {
        return Err(ReconstructError::NonPositiveRadius(rho));
    }
    if !images.is_empty() && !targets.is_empty() && images.dim() != targets.dim() {
        return Err(ReconstructError::DimensionMismatch { images: images.dim(), targets: targets.dim() });
    }
    let sets = images
        .iter()
        .map(|p| targets.iter().enumerate().filter(|(_, q)| dist(p, q) < rho).map(|(j, _)| j as u32).collect())
        .collect();
    Ok(Correspondence { sets, rho })
}

/// Whether every set is non-empty, with the offending sample indices.
pub fn check_nonempty(c: &Correspondence) -> (bool, Vec<usize>) {
    let empty = c.empty_indices();
    (empty.is_empty(), empty)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectorPolicy {
    /// Closest member to the image, ties broken by smallest index.
    #[default]
    Nearest,
    /// Smallest index.
    First,
}

/// A choice `h(ξ) ∈ Δ(ξ)` for every source sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    pub choice: Vec<u32>,
    pub policy: SelectorPolicy,
}

impl Selector {
    pub fn to_map(&self) -> SimplicialMap {
        SimplicialMap::new(self.choice.clone())
    }
}

pub fn choose_selector(
    c: &Correspondence,
    images: &PointCloud,
    targets: &PointCloud,
    policy: SelectorPolicy,
) -> Result<Selector, ReconstructError> {
    let empty = c.empty_indices();
    if let Some(&first) = empty.first() {
        return Err(ReconstructError::EmptySets { first, count: empty.len() });
    }
    let choice = c
        .sets
        .iter()
        .enumerate()
        .map(|(i, set)| match policy {
            SelectorPolicy::First => set[0],
            SelectorPolicy::Nearest => {
                let image = images.point(i);
                // Sets are ascending, so the strict comparison keeps the
                // smallest index among equidistant members.
                let mut best = (set[0], dist2(image, targets.point(set[0] as usize)));
                for &j in &set[1..] {
                    let d = dist2(image, targets.point(j as usize));
                    if d < best.1 {
                        best = (j, d);
                    }
                }
                best.0
            }
        })
        .collect();
    Ok(Selector { choice, policy })
}

/// The vertex map induced by a selector, together with the outcome of the
/// simpliciality check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reconstruction {
    pub map: SimplicialMap,
    /// First source simplex whose image is not a simplex of the target,
    /// with that image.
    pub violation: Option<(Vec<u32>, Vec<u32>)>,
}

impl Reconstruction {
    pub fn is_simplicial(&self) -> bool {
        self.violation.is_none()
    }
}

/// Builds `φ_h` and checks it against the target nerve. A failed check is
/// reported, never repaired.
pub fn build_reconstruction(
    nx: &SimplicialComplex,
    ny: &SimplicialComplex,
    h: &Selector,
) -> Result<Reconstruction, ReconstructError> {
    if h.choice.len() != nx.num_vertices() {
        return Err(ReconstructError::SelectorArity { expected: nx.num_vertices(), found: h.choice.len() });
    }
    let map = h.to_map();
    let violation = map.find_violation(nx, ny)?;
    Ok(Reconstruction { map, violation })
}

/// Checks that for every simplex `σ` of `nx` the union of the sets `Δ(ξ)`
/// over its vertices spans a simplex of the Čech nerve of `targets` at
/// radius `eps_y` (in any dimension, not only up to the stored `d_max`).
/// Returns the first failing simplex; an empty union counts as a failure.
pub fn delta_simplex_violation(
    nx: &SimplicialComplex,
    c: &Correspondence,
    targets: &PointCloud,
    eps_y: f64,
) -> Option<Vec<u32>> {
    let mut solver = MebSolver::new(targets.dim());
    let mut union: Vec<u32> = Vec::new();
    let mut pts: Vec<&[f64]> = Vec::new();
    for k in 0..=nx.d_max() {
        for s in nx.iter(k) {
            union.clear();
            for &v in s {
                union.extend_from_slice(&c.sets[v as usize]);
            }
            union.sort_unstable();
            union.dedup();
            if union.is_empty() {
                return Some(s.to_vec());
            }
            pts.clear();
            pts.extend(union.iter().map(|&j| targets.point(j as usize)));
            if !(solver.solve(&pts) < eps_y) {
                return Some(s.to_vec());
            }
        }
    }
    None
}

/// Monte Carlo outcome of [`carrier_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CarrierReport {
    pub checked: usize,
    pub violations: usize,
}

impl CarrierReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// For each source sample `ξ`, draws points `w` uniformly in the open ball
/// `B(ξ, eps_x)`, discards those outside the reach tube of `model_x`, and
/// checks `‖f(π(w)) − Y[h(ξ)]‖ < eps_y`.
#[allow(clippy::too_many_arguments)]
pub fn carrier_check<F>(
    phi: &SimplicialMap,
    sources: &PointCloud,
    targets: &PointCloud,
    model_x: &ManifoldModel,
    f: F,
    eps_x: f64,
    eps_y: f64,
    samples_per_ball: usize,
    seed: u64,
) -> Result<CarrierReport, ReconstructError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if phi.assignment().len() != sources.len() {
        return Err(ReconstructError::SelectorArity { expected: sources.len(), found: phi.assignment().len() });
    }
    let mut rng = stream(seed);
    let dim = sources.dim();
    let tau = model_x.tau();
    let mut w = vec![0.0; dim];
    let mut proj = vec![0.0; dim];
    let mut report = CarrierReport { checked: 0, violations: 0 };
    for (i, xi) in sources.iter().enumerate() {
        let center = targets.point(phi.apply(i as u32) as usize);
        let mut accepted = 0;
        // Rejection keeps only tube points; the cap guards against samples
        // whose ball barely meets the tube.
        for _ in 0..samples_per_ball * 100 {
            if accepted == samples_per_ball {
                break;
            }
            let offset = ball_offset(&mut rng, dim, eps_x);
            for ((wc, x), o) in w.iter_mut().zip(xi).zip(&offset) {
                *wc = x + o;
            }
            if !(model_x.distance_to(&w)? < tau) {
                continue;
            }
            model_x.project_into(&w, &mut proj)?;
            accepted += 1;
            report.checked += 1;
            if !(dist(&f(&proj), center) < eps_y) {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}
