//! Reconstruction of manifolds and Lipschitz maps between them from finite
//! samples, using Čech nerves, simplicial reconstruction maps and exact
//! integer homology.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod complex;
pub mod geometry;
pub mod harness;
pub mod homology;
pub mod io;
pub mod manifolds;
pub mod reconstruct;
pub mod seeding;

pub use complex::{build_cech_nerve, verify_simplicial, CechNerve, Simplex, SimplicialComplex, SimplicialMap};
pub use geometry::{cech_face_test, distance, min_enclosing_ball, proximity_pairs, EnclosingBall, GeometryError, Point, PointCloud};
pub use harness::{run_experiment, run_trial, Experiment, ExperimentConfig, ExperimentReport, TrialOutcome};
pub use homology::{h1_multiplier, homology, induced_map, Homology, InducedMap};
pub use manifolds::ManifoldModel;
