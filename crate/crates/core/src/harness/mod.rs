//! Monte Carlo experiment runner: sample, validate, build nerves,
//! reconstruct, compute homology and compare against the registry's ground
//! truth, repeated over independently seeded trials.

pub mod config;
pub mod maps;
pub mod plot;
pub mod stats;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{BoundsError, ValidationReport};
use crate::complex::{build_cech_nerve_capped, CechNerve, ComplexError};
use crate::geometry::PointCloud;
use crate::homology::{h1_multiplier, homology, induced_map, Homology, HomologyError, InducedMap};
use crate::manifolds::{
    is_alpha_dense, perturb_images, project_cloud, sample_conditioned, sample_uniform, ManifoldError, ManifoldModel,
    NoiseModel,
};
use crate::reconstruct::{
    build_reconstruction, carrier_check, check_nonempty, choose_selector, delta_sets, delta_simplex_violation,
    CarrierReport, Correspondence, ReconstructError, Reconstruction, SelectorPolicy,
};
use crate::seeding::derive_seed;
pub use config::{ExperimentConfig, LipschitzAudit, Mode, Plan};
pub use maps::{ExpectedInduced, TestMap};
pub use stats::{wilson_interval, WILSON_Z95};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "NERVE_RECON_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("hypotheses not satisfied:\n{0}")]
    Validation(Box<ValidationReport>),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// An induced map together with its basis-independent invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedRecord {
    #[serde(flatten)]
    pub map: InducedMap,
    pub invariant_factors: Vec<u64>,
}

impl InducedRecord {
    fn new(map: InducedMap) -> Self {
        let invariant_factors = map.invariant_factors().iter().map(|f| f.to_u64().unwrap_or(u64::MAX)).collect();
        Self { map, invariant_factors }
    }
}

/// Everything observed in one trial. Timings are kept outside so that an
/// outcome is a pure function of (config, trial index).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial_index: usize,
    pub seed: u64,
    pub n_x: usize,
    pub n_y: usize,
    /// Whether the sample is (ε/2)-dense per the grid oracle.
    pub dense_x: Option<bool>,
    pub dense_y: Option<bool>,
    pub counts_x: Vec<usize>,
    pub counts_y: Vec<usize>,
    pub betti_x: Vec<usize>,
    pub betti_y: Vec<usize>,
    pub torsion_x: Vec<Vec<u64>>,
    pub torsion_y: Vec<Vec<u64>>,
    pub betti_ok: bool,
    pub nonempty: Option<bool>,
    pub empty_sets: usize,
    pub simplicial: Option<bool>,
    pub violation: Option<(Vec<u32>, Vec<u32>)>,
    /// Every `Δ_σ` spans a simplex of the target nerve.
    pub delta_simplicial: Option<bool>,
    pub carrier: Option<CarrierReport>,
    pub induced: Vec<InducedRecord>,
    pub induced_ok: Option<bool>,
    pub multiplier: Option<u64>,
    /// Induced matrices under the other selector policy equal these.
    pub selectors_agree: Option<bool>,
    pub success: bool,
    pub failure: Option<String>,
}

impl TrialOutcome {
    fn new(trial_index: usize, seed: u64, plan: &Plan) -> Self {
        Self {
            trial_index,
            seed,
            n_x: plan.n_x,
            n_y: plan.n_y,
            dense_x: None,
            dense_y: None,
            counts_x: Vec::new(),
            counts_y: Vec::new(),
            betti_x: Vec::new(),
            betti_y: Vec::new(),
            torsion_x: Vec::new(),
            torsion_y: Vec::new(),
            betti_ok: false,
            nonempty: None,
            empty_sets: 0,
            simplicial: None,
            violation: None,
            delta_simplicial: None,
            carrier: None,
            induced: Vec::new(),
            induced_ok: None,
            multiplier: None,
            selectors_agree: None,
            success: false,
            failure: None,
        }
    }
}

/// Intermediate objects of a trial, for the single-run CLI commands.
#[derive(Debug, Clone, Default)]
pub struct TrialArtifacts {
    pub x: Option<PointCloud>,
    pub y: Option<PointCloud>,
    pub nerve_x: Option<CechNerve>,
    pub nerve_y: Option<CechNerve>,
    pub images: Option<PointCloud>,
    pub correspondence: Option<Correspondence>,
    pub reconstruction: Option<Reconstruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub plan: Plan,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Wilson 95% interval for the success probability.
    pub interval: (f64, f64),
    pub outcomes: Vec<TrialOutcome>,
    /// Wall-clock milliseconds per trial; not part of the serialized report.
    #[serde(skip)]
    pub millis: Vec<u64>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.trials - self.successes
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per trial.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial_index,seed,betti_x,betti_y,nonempty,simplicial,multiplier,verdict,millis\n");
        let join = |v: &[usize]| v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(";");
        let opt = |v: Option<bool>| v.map_or(String::new(), |b| b.to_string());
        for (o, ms) in self.outcomes.iter().zip(self.millis.iter().copied().chain(std::iter::repeat(0))) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                o.trial_index,
                o.seed,
                join(&o.betti_x),
                join(&o.betti_y),
                opt(o.nonempty),
                opt(o.simplicial),
                o.multiplier.map_or(String::new(), |m| m.to_string()),
                if o.success { "success" } else { "failure" },
                ms
            );
        }
        out
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        format!(
            "{}: {}/{} successes, frequency {:.4}, 95% interval [{:.4}, {:.4}], target {:.4}",
            self.config.scenario.name,
            self.successes,
            self.trials,
            self.frequency,
            self.interval.0,
            self.interval.1,
            self.plan.target_probability
        )
    }

    /// Writes `report.json` and `trials.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        std::fs::write(dir.join("trials.csv"), self.to_csv())?;
        Ok(())
    }
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub plan: Plan,
}

fn betti_matches(observed: &[usize], torsion: &[Vec<u64>], model: &ManifoldModel) -> bool {
    let expected = model.betti();
    observed.iter().enumerate().all(|(q, &b)| b == expected.get(q).copied().unwrap_or(0))
        && torsion.iter().all(Vec::is_empty)
}

fn torsion_list(h: &Homology) -> Vec<Vec<u64>> {
    h.summary().torsion
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        let plan = config.plan()?;
        Ok(Self { config, plan })
    }

    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        derive_seed(self.config.scenario.seed, &[trial_index as u64])
    }

    pub fn run_trial(&self, trial_index: usize) -> TrialOutcome {
        self.run_trial_detailed(trial_index, false).0
    }

    /// Runs one trial; with `keep` the intermediate objects are returned too.
    pub fn run_trial_detailed(&self, trial_index: usize, keep: bool) -> (TrialOutcome, TrialArtifacts) {
        let seed = self.trial_seed(trial_index);
        let mut outcome = TrialOutcome::new(trial_index, seed, &self.plan);
        let mut artifacts = TrialArtifacts::default();
        if let Err(e) = self.pipeline(seed, &mut outcome, &mut artifacts) {
            outcome.failure = Some(e.to_string());
            outcome.success = false;
        }
        if !keep {
            artifacts = TrialArtifacts::default();
        }
        (outcome, artifacts)
    }

    /// The samples of one trial, without running the rest of the pipeline.
    pub fn samples(&self, trial_index: usize) -> Result<(PointCloud, Option<PointCloud>), HarnessError> {
        let seed = self.trial_seed(trial_index);
        let noise = self.plan.noisy;
        let x = self.sample(&self.plan.x, self.plan.n_x, noise.map(|p| p.r_x), derive_seed(seed, &[1]))?;
        let y = match self.plan.y {
            Some(my) => Some(self.sample(&my, self.plan.n_y, noise.map(|p| p.r_y), derive_seed(seed, &[2]))?),
            None => None,
        };
        Ok((x, y))
    }

    fn sample(&self, model: &ManifoldModel, n: usize, r: Option<f64>, seed: u64) -> Result<PointCloud, HarnessError> {
        Ok(match r {
            None => sample_uniform(model, n, seed),
            Some(r) => sample_conditioned(model, &NoiseModel::new(model, r)?, n, seed)?,
        })
    }

    fn pipeline(&self, seed: u64, out: &mut TrialOutcome, art: &mut TrialArtifacts) -> Result<(), HarnessError> {
        let plan = &self.plan;
        let scenario = &self.config.scenario;
        let noise = plan.noisy;
        let x = self.sample(&plan.x, plan.n_x, noise.map(|p| p.r_x), derive_seed(seed, &[1]))?;
        out.dense_x = Some(is_alpha_dense(&x, &plan.x, plan.eps_x / 2.0, plan.grid_step_x)?);
        let nerve_x = build_cech_nerve_capped(&x, plan.eps_x, plan.d_max_x, scenario.simplex_cap)?;
        out.counts_x = nerve_x.complex.counts();
        let hx = homology(&nerve_x.complex, plan.d_max_x - 1)?;
        out.betti_x = hx.betti();
        out.torsion_x = torsion_list(&hx);
        let ok_x = betti_matches(&out.betti_x, &out.torsion_x, &plan.x);
        art.x = Some(x.clone());
        if plan.mode == Mode::Recovery {
            art.nerve_x = Some(nerve_x);
            out.betti_ok = ok_x;
            out.success = ok_x;
            if !ok_x {
                out.failure = Some("nerve homology differs from the manifold".into());
            }
            return Ok(());
        }

        let (my, map, rho) = (plan.y.expect("map plan"), plan.map.expect("map plan"), plan.rho.expect("map plan"));
        let y = self.sample(&my, plan.n_y, noise.map(|p| p.r_y), derive_seed(seed, &[2]))?;
        out.dense_y = Some(is_alpha_dense(&y, &my, plan.eps_y / 2.0, plan.grid_step_y)?);
        let nerve_y = build_cech_nerve_capped(&y, plan.eps_y, plan.d_max_y, scenario.simplex_cap)?;
        out.counts_y = nerve_y.complex.counts();
        let hy = homology(&nerve_y.complex, plan.d_max_y - 1)?;
        out.betti_y = hy.betti();
        out.torsion_y = torsion_list(&hy);
        out.betti_ok = ok_x && betti_matches(&out.betti_y, &out.torsion_y, &my);

        // Clean: f on the samples. Noisy: f after projecting, then perturbed.
        let base = match noise {
            None => x.clone(),
            Some(_) => project_cloud(&plan.x, &x)?,
        };
        let mut images = PointCloud::with_capacity(my.ambient_dim(), base.len());
        for p in base.iter() {
            images.push(&map.apply(&plan.x, &my, p)).map_err(ManifoldError::from)?;
        }
        if let Some(p) = noise {
            images = perturb_images(&images, p.d, derive_seed(seed, &[3]));
        }
        let corr = delta_sets(&images, &y, rho)?;
        let (nonempty, empty) = check_nonempty(&corr);
        out.nonempty = Some(nonempty);
        out.empty_sets = empty.len();
        let finish = |out: &mut TrialOutcome, art: &mut TrialArtifacts, corr, images, y, nx, ny| {
            art.correspondence = Some(corr);
            art.images = Some(images);
            art.y = Some(y);
            art.nerve_x = Some(nx);
            art.nerve_y = Some(ny);
            out.success = out.betti_ok
                && out.nonempty == Some(true)
                && out.simplicial == Some(true)
                && out.induced_ok != Some(false);
            if !out.success && out.failure.is_none() {
                out.failure = Some(
                    if !out.betti_ok {
                        "nerve homology differs from the manifold"
                    } else if out.nonempty != Some(true) {
                        "empty correspondence set"
                    } else if out.simplicial != Some(true) {
                        "reconstruction is not simplicial"
                    } else {
                        "induced map differs from the expected one"
                    }
                    .into(),
                );
            }
        };
        if !nonempty {
            finish(out, art, corr, images, y, nerve_x, nerve_y);
            return Ok(());
        }
        if self.config.oracle.delta_check {
            out.delta_simplicial = Some(delta_simplex_violation(&nerve_x.complex, &corr, &y, plan.eps_y).is_none());
        }
        let h = choose_selector(&corr, &images, &y, scenario.selector)?;
        let rec = build_reconstruction(&nerve_x.complex, &nerve_y.complex, &h)?;
        out.simplicial = Some(rec.is_simplicial());
        out.violation = rec.violation.clone();
        if self.config.oracle.carrier_samples > 0 {
            out.carrier = Some(carrier_check(
                &rec.map,
                &x,
                &y,
                &plan.x,
                |p: &[f64]| map.apply(&plan.x, &my, p),
                plan.eps_x,
                plan.eps_y,
                self.config.oracle.carrier_samples,
                derive_seed(seed, &[4]),
            )?);
        }
        if rec.is_simplicial() {
            let up_to = hx.up_to().min(hy.up_to());
            for dim in 1..=up_to {
                let m = induced_map(&rec.map, &nerve_x.complex, &nerve_y.complex, &hx, &hy, dim)?;
                out.induced.push(InducedRecord::new(m));
            }
            let factors_ok = plan
                .expected
                .iter()
                .all(|e| out.induced.iter().any(|r| r.map.dim == e.dim && r.invariant_factors == e.invariant_factors));
            out.multiplier = out.induced.first().and_then(|r| h1_multiplier(&r.map).ok()).map(|m| m.magnitude);
            let multiplier_ok = match plan.expected_multiplier {
                Some(expected) => out.multiplier == Some(expected),
                None => true,
            };
            out.induced_ok = Some(out.betti_ok && factors_ok && multiplier_ok);
            if scenario.compare_selectors {
                let other = match scenario.selector {
                    SelectorPolicy::Nearest => SelectorPolicy::First,
                    SelectorPolicy::First => SelectorPolicy::Nearest,
                };
                let h2 = choose_selector(&corr, &images, &y, other)?;
                let rec2 = build_reconstruction(&nerve_x.complex, &nerve_y.complex, &h2)?;
                // A non-simplicial second map has no induced map to compare.
                let mut agree = rec2.is_simplicial();
                if agree {
                    for r in &out.induced {
                        let m = induced_map(&rec2.map, &nerve_x.complex, &nerve_y.complex, &hx, &hy, r.map.dim)?;
                        agree &= m.matrix == r.map.matrix;
                    }
                }
                out.selectors_agree = Some(agree);
            }
        }
        art.reconstruction = Some(rec);
        finish(out, art, corr, images, y, nerve_x, nerve_y);
        Ok(())
    }

    /// Writes SVG plots of the first trial's nerves into `dir`.
    pub fn write_plots(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        let (_, art) = self.run_trial_detailed(0, true);
        for (name, nerve) in [("nerve_x.svg", &art.nerve_x), ("nerve_y.svg", &art.nerve_y)] {
            if let Some(n) = nerve {
                std::fs::write(dir.join(name), plot::nerve_svg(&n.points, &n.complex))?;
            }
        }
        Ok(())
    }

    /// Worker count: the environment override, then the config, then rayon's
    /// default.
    pub fn workers(&self) -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|&w: &usize| w > 0)
            .or(self.config.scenario.workers)
            .unwrap_or_else(rayon::current_num_threads)
    }

    /// Runs all trials (concurrently) and aggregates them in index order.
    pub fn run(&self) -> Result<ExperimentReport, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers())
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot build worker pool: {e}")))?;
        let results: Vec<(TrialOutcome, u64)> = pool.install(|| {
            (0..self.config.scenario.trials)
                .into_par_iter()
                .map(|i| {
                    let start = Instant::now();
                    let o = self.run_trial(i);
                    (o, start.elapsed().as_millis() as u64)
                })
                .collect()
        });
        let (outcomes, millis): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let trials = outcomes.len();
        let successes = outcomes.iter().filter(|o| o.success).count();
        Ok(ExperimentReport {
            config: self.config.clone(),
            plan: self.plan.clone(),
            trials,
            successes,
            frequency: successes as f64 / trials as f64,
            interval: wilson_interval(successes, trials, WILSON_Z95),
            outcomes,
            millis,
        })
    }
}

pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialOutcome, HarnessError> {
    Ok(Experiment::new(config.clone())?.run_trial(trial_index))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    Experiment::new(config.clone())?.run()
}
