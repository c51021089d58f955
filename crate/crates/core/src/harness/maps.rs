//! Registry of test maps with analytically known Lipschitz constants and
//! induced homology.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::dist;
use crate::manifolds::{sample_uniform, ManifoldModel};
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestMap {
    Identity,
    /// `θ ↦ kθ` between circles.
    CircleDegree { k: u32 },
    /// Everything to the point at parameter zero of the target.
    Constant,
    /// Torus onto the circle it winds around (radial projection of the
    /// horizontal component).
    TorusToCircle,
    /// `p ↦ −p`, rescaled to the target radius.
    SphereAntipodal,
}

/// Expected invariant factors of the induced map in one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedInduced {
    pub dim: usize,
    pub invariant_factors: Vec<u64>,
}

impl TestMap {
    pub fn name(&self) -> String {
        match self {
            Self::Identity => "identity".into(),
            Self::CircleDegree { k } => format!("circle-degree-{k}"),
            Self::Constant => "constant".into(),
            Self::TorusToCircle => "torus-to-circle".into(),
            Self::SphereAntipodal => "sphere-antipodal".into(),
        }
    }

    /// Checks that the map is defined between the given manifolds.
    pub fn check_domains(&self, x: &ManifoldModel, y: &ManifoldModel) -> Result<(), HarnessError> {
        let ok = match (self, x, y) {
            (Self::Identity, _, _) => x == y,
            (Self::CircleDegree { .. }, ManifoldModel::Circle { .. }, ManifoldModel::Circle { .. }) => true,
            (Self::Constant, _, _) => true,
            (Self::TorusToCircle, ManifoldModel::Torus { .. }, ManifoldModel::Circle { .. }) => true,
            (Self::SphereAntipodal, ManifoldModel::Sphere { .. }, ManifoldModel::Sphere { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(HarnessError::Config(format!("map {} is not defined from {} to {}", self.name(), x.name(), y.name())))
        }
    }

    /// Smallest valid Lipschitz constant on `x`.
    pub fn lipschitz(&self, x: &ManifoldModel, y: &ManifoldModel) -> f64 {
        match (*self, *x, *y) {
            (Self::Identity, _, _) => 1.0,
            (Self::CircleDegree { k }, ManifoldModel::Circle { radius: rx }, ManifoldModel::Circle { radius: ry }) => {
                // Chord ratio 2ry·sin(kt/2) / 2rx·sin(t/2) is at most k·ry/rx.
                k as f64 * ry / rx
            }
            (Self::Constant, _, _) => 0.0,
            (Self::TorusToCircle, ManifoldModel::Torus { major, minor }, ManifoldModel::Circle { radius }) => {
                // Radial projection from the annulus |p| >= major − minor.
                radius / (major - minor)
            }
            (Self::SphereAntipodal, ManifoldModel::Sphere { radius: rx }, ManifoldModel::Sphere { radius: ry }) => ry / rx,
            _ => f64::NAN,
        }
    }

    /// Image of a point of `x` in the ambient space of `y`.
    pub fn apply(&self, x: &ManifoldModel, y: &ManifoldModel, p: &[f64]) -> Vec<f64> {
        match (*self, *x, *y) {
            (Self::Identity, _, _) => p.to_vec(),
            (Self::CircleDegree { k }, _, ManifoldModel::Circle { radius }) => {
                let theta = p[1].atan2(p[0]) * k as f64;
                vec![radius * theta.cos(), radius * theta.sin()]
            }
            (Self::Constant, _, _) => {
                let mut out = Vec::new();
                y.embed(&[0.0, 0.0][..y.intrinsic_dim().max(1)], &mut out);
                out
            }
            (Self::TorusToCircle, _, ManifoldModel::Circle { radius }) => {
                let r = p[0].hypot(p[1]);
                vec![radius * p[0] / r, radius * p[1] / r]
            }
            (Self::SphereAntipodal, ManifoldModel::Sphere { radius: rx }, ManifoldModel::Sphere { radius: ry }) => {
                p.iter().map(|c| -c * ry / rx).collect()
            }
            _ => panic!("map {} applied outside its domain", self.name()),
        }
    }

    /// Expected nonzero invariant factors of the induced map in dimensions
    /// `1..=up_to`, for nerves with the homology of the manifolds.
    pub fn expected(&self, x: &ManifoldModel, up_to: usize) -> Vec<ExpectedInduced> {
        let bx = x.betti();
        (1..=up_to)
            .map(|dim| {
                let rank = |b: &[usize]| b.get(dim).copied().unwrap_or(0);
                let factors = match *self {
                    Self::Identity => vec![1; rank(&bx)],
                    Self::CircleDegree { k } if dim == 1 && k > 0 => vec![k as u64],
                    Self::TorusToCircle if dim == 1 => vec![1],
                    Self::SphereAntipodal if dim == 2 => vec![1],
                    _ => Vec::new(),
                };
                ExpectedInduced { dim, invariant_factors: factors }
            })
            .collect()
    }

    /// Expected `H₁` multiplier when both sides have `H₁` of rank one.
    pub fn expected_multiplier(&self, x: &ManifoldModel, y: &ManifoldModel) -> Option<u64> {
        let rank1 = |m: &ManifoldModel| m.betti().get(1) == Some(&1);
        if !(rank1(x) && rank1(y)) {
            return None;
        }
        Some(match self {
            Self::Identity => 1,
            Self::CircleDegree { k } => *k as u64,
            _ => 0,
        })
    }

    /// Counts pairs of random points of `x` with `‖f(p) − f(q)‖ > κ‖p − q‖`,
    /// allowing a relative rounding slack of `1e-12`.
    pub fn lipschitz_violations(&self, x: &ManifoldModel, y: &ManifoldModel, kappa: f64, pairs: usize, seed: u64) -> usize {
        let a = sample_uniform(x, pairs, derive_seed(seed, &[0]));
        let b = sample_uniform(x, pairs, derive_seed(seed, &[1]));
        a.iter()
            .zip(b.iter())
            .filter(|(p, q)| dist(&self.apply(x, y, p), &self.apply(x, y, q)) > kappa * dist(p, q) * (1.0 + 1e-12))
            .count()
    }
}
