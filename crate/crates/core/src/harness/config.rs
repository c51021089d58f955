//! Experiment configuration (TOML) and its resolution into a concrete plan:
//! sample sizes, matching radius, bound values and the hypothesis report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::maps::{ExpectedInduced, TestMap};
use super::HarnessError;
use crate::bounds::{
    beta, gamma, gamma_pm, rho_clean, rho_noisy, validate_clean, validate_noisy, validate_recovery, CleanParams,
    NoisyParams, ValidationReport,
};
use crate::complex::DEFAULT_SIMPLEX_CAP;
use crate::manifolds::{omega_lower_bound, ManifoldModel, NoiseModel};
use crate::reconstruct::SelectorPolicy;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Nerve homology of one sampled manifold.
    Recovery,
    /// Map reconstruction from clean samples.
    Clean,
    /// Map reconstruction from tube-noise samples and noisy evaluations.
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub x: ManifoldModel,
    #[serde(default)]
    pub y: Option<ManifoldModel>,
    #[serde(default)]
    pub map: Option<TestMap>,
    pub params: Params,
    #[serde(default)]
    pub oracle: Oracle,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Top simplex dimension of both nerves; defaults to one more than each
    /// manifold's dimension.
    #[serde(default)]
    pub d_max: Option<usize>,
    #[serde(default)]
    pub selector: SelectorPolicy,
    /// Also reconstruct with the other selector policy and compare induced
    /// maps.
    #[serde(default)]
    pub compare_selectors: bool,
    /// Run even when the hypotheses (or the declared Lipschitz constant) fail.
    #[serde(default)]
    pub override_validation: bool,
    #[serde(default = "default_cap")]
    pub simplex_cap: usize,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub eps_x: f64,
    #[serde(default)]
    pub eps_y: Option<f64>,
    pub delta_x: f64,
    #[serde(default)]
    pub delta_y: Option<f64>,
    /// Declared Lipschitz constant of the map.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Sample sizes; default to one more than the floor of the sample bound.
    #[serde(default)]
    pub n_x: Option<usize>,
    #[serde(default)]
    pub n_y: Option<usize>,
    #[serde(default)]
    pub r_x: Option<f64>,
    #[serde(default)]
    pub r_y: Option<f64>,
    /// Evaluation noise; defaults to half its upper bound.
    #[serde(default)]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oracle {
    /// Grid resolution for density, covering and Ω oracles; defaults per side
    /// to `eps/8` (and at most `r/20` under noise).
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default = "default_omega_samples")]
    pub omega_samples: usize,
    #[serde(default = "default_lipschitz_pairs")]
    pub lipschitz_pairs: usize,
    /// Monte Carlo points per ball for the carrier check; 0 disables it.
    #[serde(default)]
    pub carrier_samples: usize,
    /// Check that every `Δ_σ` spans a target simplex.
    #[serde(default = "default_true")]
    pub delta_check: bool,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            grid_step: None,
            omega_samples: default_omega_samples(),
            lipschitz_pairs: default_lipschitz_pairs(),
            carrier_samples: 0,
            delta_check: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write an SVG of the first trial's nerves.
    #[serde(default)]
    pub plot: bool,
}

fn default_trials() -> usize {
    1
}

fn default_cap() -> usize {
    DEFAULT_SIMPLEX_CAP
}

fn default_omega_samples() -> usize {
    50_000
}

fn default_lipschitz_pairs() -> usize {
    100_000
}

fn default_true() -> bool {
    true
}

/// Result of the Lipschitz audit of the declared constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzAudit {
    pub declared: f64,
    pub analytic: f64,
    pub pairs: usize,
    pub violations: usize,
}

/// Everything a trial needs beyond its index, derived once per experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub mode: Mode,
    pub x: ManifoldModel,
    pub y: Option<ManifoldModel>,
    pub map: Option<TestMap>,
    pub n_x: usize,
    pub n_y: usize,
    pub eps_x: f64,
    pub eps_y: f64,
    pub d_max_x: usize,
    pub d_max_y: usize,
    pub kappa: f64,
    /// Matching radius (`ρ` or `ρ'`).
    pub rho: Option<f64>,
    pub noisy: Option<NoisyParams>,
    pub grid_step_x: f64,
    pub grid_step_y: f64,
    /// Target success probability implied by the δ's.
    pub target_probability: f64,
    pub bounds: BTreeMap<String, f64>,
    pub expected: Vec<ExpectedInduced>,
    pub expected_multiplier: Option<u64>,
    pub lipschitz: Option<LipschitzAudit>,
    pub validation: ValidationReport,
    pub validation_overridden: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn need<T>(value: Option<T>, what: &str) -> Result<T, HarnessError> {
        value.ok_or_else(|| HarnessError::Config(format!("missing {what}")))
    }

    /// Resolves sample sizes, radii and bounds, and runs hypothesis
    /// validation. Fails on invalid configs, and on failed validation unless
    /// overridden.
    pub fn plan(&self) -> Result<Plan, HarnessError> {
        let s = &self.scenario;
        if s.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        let x = self.x.validated()?;
        let p = &self.params;
        let d_max_for = |m: &ManifoldModel| s.d_max.unwrap_or(m.intrinsic_dim() + 1);
        let mut bounds = BTreeMap::new();
        let default_step = |eps: f64, r: Option<f64>| {
            self.oracle.grid_step.unwrap_or_else(|| match r {
                Some(r) => (eps / 8.0).min(r / 20.0),
                None => eps / 8.0,
            })
        };
        let count = |n: Option<usize>, bound: f64| n.unwrap_or(bound.floor() as usize + 1);

        if s.mode == Mode::Recovery {
            let b = beta(&x, p.eps_x, p.delta_x)?;
            let n_x = count(p.n_x, b);
            let validation = validate_recovery(&x, p.eps_x, p.delta_x, n_x);
            bounds.insert("beta_x".into(), b);
            let plan = Plan {
                mode: s.mode,
                x,
                y: None,
                map: None,
                n_x,
                n_y: 0,
                eps_x: p.eps_x,
                eps_y: 0.0,
                d_max_x: d_max_for(&x),
                d_max_y: 0,
                kappa: 0.0,
                rho: None,
                noisy: None,
                grid_step_x: default_step(p.eps_x, None),
                grid_step_y: 0.0,
                target_probability: 1.0 - p.delta_x,
                bounds,
                expected: Vec::new(),
                expected_multiplier: None,
                lipschitz: None,
                validation,
                validation_overridden: false,
            };
            return self.finish(plan);
        }

        let y = Self::need(self.y, "[y] manifold")?.validated()?;
        let map = Self::need(self.map, "[map]")?;
        map.check_domains(&x, &y)?;
        let eps_y = Self::need(p.eps_y, "params.eps_y")?;
        let delta_y = Self::need(p.delta_y, "params.delta_y")?;
        let kappa = Self::need(p.kappa, "params.kappa")?;
        if !(kappa >= 0.0) {
            return Err(HarnessError::Config(format!("kappa must be non-negative, got {kappa}")));
        }
        let analytic = map.lipschitz(&x, &y);
        let audit = LipschitzAudit {
            declared: kappa,
            analytic,
            pairs: self.oracle.lipschitz_pairs,
            violations: map.lipschitz_violations(&x, &y, kappa, self.oracle.lipschitz_pairs, derive_seed(s.seed, &[u64::MAX])),
        };
        if (kappa < analytic || audit.violations > 0) && !s.override_validation {
            return Err(HarnessError::Config(format!(
                "declared kappa {kappa} is not a Lipschitz bound for {} (analytic {analytic}, {} violating pairs)",
                map.name(),
                audit.violations
            )));
        }
        let d_max_x = d_max_for(&x);
        let d_max_y = d_max_for(&y);
        let up_to = (d_max_x.min(d_max_y)).saturating_sub(1);
        let target_probability = (1.0 - p.delta_x) * (1.0 - delta_y);

        let (n_x, n_y, rho, noisy, validation, steps) = match s.mode {
            Mode::Clean => {
                let params = CleanParams { eps_x: p.eps_x, eps_y, kappa, delta_x: p.delta_x, delta_y };
                let bx = beta(&x, p.eps_x, p.delta_x)?;
                let by = beta(&y, eps_y, delta_y)?;
                let (n_x, n_y) = (count(p.n_x, bx), count(p.n_y, by));
                bounds.insert("beta_x".into(), bx);
                bounds.insert("beta_y".into(), by);
                let validation = validate_clean(&x, &y, &params, n_x, n_y);
                // Out of range radii are reported by validation; the raw
                // formula is kept for override runs.
                let rho = rho_clean(&params).unwrap_or(eps_y - 2.0 * kappa * p.eps_x);
                bounds.insert("rho".into(), rho);
                (n_x, n_y, rho, None, validation, (default_step(p.eps_x, None), default_step(eps_y, None)))
            }
            Mode::Noisy => {
                let r_x = Self::need(p.r_x, "params.r_x")?;
                let r_y = Self::need(p.r_y, "params.r_y")?;
                let step_x = default_step(p.eps_x, Some(r_x));
                let step_y = default_step(eps_y, Some(r_y));
                let mut gammas = [0.0; 2];
                for (i, (side, model, r, delta, step)) in
                    [("x", &x, r_x, p.delta_x, step_x), ("y", &y, r_y, delta_y, step_y)].into_iter().enumerate()
                {
                    let noise = NoiseModel::new(model, r)?;
                    let omega = omega_lower_bound(
                        model,
                        &noise,
                        step,
                        self.oracle.omega_samples,
                        derive_seed(s.seed, &[u64::MAX - 1, i as u64]),
                    )?;
                    let g = gamma(model, &noise.with_omega(omega.lower), delta, step)?;
                    let (lo, hi) = gamma_pm(model.tau(), r)?;
                    bounds.insert(format!("omega_{side}"), omega.lower);
                    bounds.insert(format!("lambda_{side}"), g.lambda as f64);
                    bounds.insert(format!("gamma_{side}"), g.value);
                    bounds.insert(format!("gamma_minus_{side}"), lo);
                    bounds.insert(format!("gamma_plus_{side}"), hi);
                    gammas[i] = g.value;
                }
                let mut params = NoisyParams { eps_x: p.eps_x, eps_y, kappa, delta_x: p.delta_x, delta_y, r_x, r_y, d: 0.0 };
                params.d = p.d.unwrap_or(params.d_bound() / 2.0);
                let (n_x, n_y) = (count(p.n_x, gammas[0]), count(p.n_y, gammas[1]));
                let validation = validate_noisy(&x, &y, &params, (n_x, n_y), (gammas[0], gammas[1]));
                bounds.insert("d_bound".into(), params.d_bound());
                let rho = rho_noisy(&params).unwrap_or(r_y + params.d);
                bounds.insert("rho_prime".into(), rho);
                (n_x, n_y, rho, Some(params), validation, (step_x, step_y))
            }
            Mode::Recovery => unreachable!(),
        };
        let plan = Plan {
            mode: s.mode,
            x,
            y: Some(y),
            map: Some(map),
            n_x,
            n_y,
            eps_x: p.eps_x,
            eps_y,
            d_max_x,
            d_max_y,
            kappa,
            rho: Some(rho),
            noisy,
            grid_step_x: steps.0,
            grid_step_y: steps.1,
            target_probability,
            bounds,
            expected: map.expected(&x, up_to),
            expected_multiplier: if up_to >= 1 { map.expected_multiplier(&x, &y) } else { None },
            lipschitz: Some(audit),
            validation,
            validation_overridden: false,
        };
        self.finish(plan)
    }

    fn finish(&self, mut plan: Plan) -> Result<Plan, HarnessError> {
        if !plan.validation.passed() {
            if self.scenario.override_validation && (plan.rho.is_some_and(|r| !(r > 0.0)) || plan.noisy.is_some_and(|n| !(n.d > 0.0))) {
                return Err(HarnessError::Config(format!(
                    "no positive matching radius or noise bound even with override (rho = {:?}, d = {:?})",
                    plan.rho,
                    plan.noisy.map(|n| n.d)
                )));
            }
            if !self.scenario.override_validation {
                return Err(HarnessError::Validation(Box::new(plan.validation)));
            }
            plan.validation_overridden = true;
        }
        Ok(plan)
    }
}
