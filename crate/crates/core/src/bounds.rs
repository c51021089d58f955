//! Closed-form sample-size bounds, radius windows and matching radii, plus
//! structured validation of the clean and noisy hypothesis bundles.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifolds::{covering_number, noise_radius_bound, ManifoldError, ManifoldModel, NoiseModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("epsilon {epsilon} must lie in (0, tau/2) = (0, {limit})")]
    EpsilonOutOfRange { epsilon: f64, limit: f64 },
    #[error("delta {0} must lie in (0, 1]")]
    DeltaOutOfRange(f64),
    #[error("noise radius {r} outside [0, (3 - sqrt 8) tau) = [0, {limit})")]
    NoiseOutOfRange { r: f64, limit: f64 },
    #[error("small-ball mass omega has not been estimated")]
    OmegaMissing,
    #[error("covering number and omega must be positive (lambda {lambda}, omega {omega})")]
    DegenerateGammaInputs { lambda: f64, omega: f64 },
    #[error("radius constraint violated: {0}")]
    RadiusConstraint(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// Volume of the unit ball in ℝ^k.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * PI / k as f64,
    }
}

fn check_delta(delta: f64) -> Result<(), BoundsError> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(BoundsError::DeltaOutOfRange(delta))
    }
}

/// The two factors `(β₁, β₂)` of the uniform-sampling bound.
pub fn beta_factors(model: &ManifoldModel, epsilon: f64) -> Result<(f64, f64), BoundsError> {
    let tau = model.tau();
    if !(epsilon > 0.0 && epsilon < tau / 2.0) {
        return Err(BoundsError::EpsilonOutOfRange { epsilon, limit: tau / 2.0 });
    }
    let k = model.intrinsic_dim();
    let vol = model.volume();
    let factor = |theta_arg: f64, ball_radius: f64| {
        let c = theta_arg.asin().cos().powi(k as i32);
        vol / (c * unit_ball_volume(k) * ball_radius.powi(k as i32))
    };
    Ok((factor(epsilon / (8.0 * tau), epsilon / 4.0), factor(epsilon / (16.0 * tau), epsilon / 8.0)))
}

/// Sample size above which a uniform sample is ε/2-dense with probability
/// exceeding `1 - delta`. Natural logarithms throughout.
pub fn beta(model: &ManifoldModel, epsilon: f64, delta: f64) -> Result<f64, BoundsError> {
    check_delta(delta)?;
    let (b1, b2) = beta_factors(model, epsilon)?;
    Ok(b1 * (b2.ln() + (1.0 / delta).ln()))
}

/// Endpoints `(Γ⁻, Γ⁺)` of the admissible nerve-radius window for tube
/// radius `r`.
pub fn gamma_pm(tau: f64, r: f64) -> Result<(f64, f64), BoundsError> {
    let limit = noise_radius_bound(tau);
    if !(r >= 0.0 && r < limit) {
        return Err(BoundsError::NoiseOutOfRange { r, limit });
    }
    let disc = tau * tau + r * r - 6.0 * tau * r;
    if !(disc > 0.0) {
        return Err(BoundsError::NoiseOutOfRange { r, limit });
    }
    let root = disc.sqrt();
    Ok(((tau + r - root) / 2.0, (tau + r + root) / 2.0))
}

/// `(1/Ω)(log Λ + log(1/δ))` from an explicit covering number and mass bound.
pub fn gamma_from_parts(lambda: f64, omega: f64, delta: f64) -> Result<f64, BoundsError> {
    check_delta(delta)?;
    if !(lambda >= 1.0 && omega > 0.0) {
        return Err(BoundsError::DegenerateGammaInputs { lambda, omega });
    }
    Ok((lambda.ln() + (1.0 / delta).ln()) / omega)
}

/// Value of the noisy sample bound together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    pub value: f64,
    /// Greedy upper bound on the (r/2)-covering number.
    pub lambda: usize,
    pub omega: f64,
}

/// Noisy sample bound using the greedy covering-number upper bound at
/// `nu = r/2` (grid resolution `grid_step`) and the stored Ω lower bound.
pub fn gamma(
    model: &ManifoldModel,
    noise: &NoiseModel,
    delta: f64,
    grid_step: f64,
) -> Result<GammaBound, BoundsError> {
    let omega = noise.omega.ok_or(BoundsError::OmegaMissing)?;
    check_delta(delta)?;
    let lambda = covering_number(model, noise.r / 2.0, grid_step)?;
    let value = gamma_from_parts(lambda as f64, omega, delta)?;
    Ok(GammaBound { value, lambda, omega })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanParams {
    pub eps_x: f64,
    pub eps_y: f64,
    pub kappa: f64,
    pub delta_x: f64,
    pub delta_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyParams {
    pub eps_x: f64,
    pub eps_y: f64,
    pub kappa: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub d: f64,
}

impl NoisyParams {
    pub fn clean(&self) -> CleanParams {
        CleanParams {
            eps_x: self.eps_x,
            eps_y: self.eps_y,
            kappa: self.kappa,
            delta_x: self.delta_x,
            delta_y: self.delta_y,
        }
    }

    /// Left-hand side of the Lipschitz/radius coupling: `4κ(ε_X + r_X)`.
    pub fn coupling_lhs(&self) -> f64 {
        4.0 * self.kappa * (self.eps_x + self.r_x)
    }

    /// Effective target radius `ε_Y − r_Y`.
    pub fn effective_eps_y(&self) -> f64 {
        self.eps_y - self.r_y
    }

    /// Exclusive upper bound on the evaluation noise `d`.
    pub fn d_bound(&self) -> f64 {
        (self.effective_eps_y() - 2.0 * self.kappa * (self.eps_x + self.r_x)) / 2.0
    }
}

/// Matching radius `ρ = ε_Y − 2κε_X` for the clean correspondence.
pub fn rho_clean(params: &CleanParams) -> Result<f64, BoundsError> {
    let CleanParams { eps_x, eps_y, kappa, .. } = *params;
    if !(eps_x > 0.0 && eps_y > 0.0 && kappa >= 0.0) {
        return Err(BoundsError::RadiusConstraint(format!("non-positive radius or negative kappa in {params:?}")));
    }
    if !(4.0 * kappa * eps_x < eps_y) {
        return Err(BoundsError::RadiusConstraint(format!("4 kappa eps_x = {} >= eps_y = {eps_y}", 4.0 * kappa * eps_x)));
    }
    Ok(eps_y - 2.0 * kappa * eps_x)
}

/// Matching radius `ρ' = r_Y + d` for the noisy correspondence.
pub fn rho_noisy(params: &NoisyParams) -> Result<f64, BoundsError> {
    if !(params.eps_x > 0.0 && params.eps_y > 0.0 && params.kappa >= 0.0 && params.r_x > 0.0 && params.r_y > 0.0) {
        return Err(BoundsError::RadiusConstraint(format!("non-positive parameter in {params:?}")));
    }
    if !(params.coupling_lhs() < params.effective_eps_y()) {
        return Err(BoundsError::RadiusConstraint(format!(
            "4 kappa (eps_x + r_x) = {} >= eps_y - r_y = {}",
            params.coupling_lhs(),
            params.effective_eps_y()
        )));
    }
    if !(params.d > 0.0 && params.d < params.d_bound()) {
        return Err(BoundsError::RadiusConstraint(format!("d = {} outside (0, {})", params.d, params.d_bound())));
    }
    Ok(params.r_y + params.d)
}

/// Threshold `(√2 − 1)·τ_Y / (4·τ_X)` that κ must stay below for the noisy
/// radius constraints to be satisfiable.
pub fn noisy_kappa_limit(tau_x: f64, tau_y: f64) -> f64 {
    (SQRT_2 - 1.0) * tau_y / (4.0 * tau_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
}

/// One inequality `lhs (<|<=) rhs` of a hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: String,
    pub description: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub passed: bool,
}

impl HypothesisCheck {
    fn new(hypothesis: &str, description: impl Into<String>, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let passed = match relation {
            Relation::Less => lhs < rhs,
            Relation::LessEq => lhs <= rhs,
        };
        Self { hypothesis: hypothesis.to_owned(), description: description.into(), lhs, relation, rhs, passed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    Recovery,
    Clean,
    Noisy,
}

/// Outcome of validating a hypothesis bundle: every inequality with its
/// numeric sides, plus the derived quantities that were computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub setting: Setting,
    pub checks: Vec<HypothesisCheck>,
    pub values: BTreeMap<String, f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// True when every check of the named hypothesis passed.
    pub fn hypothesis_passed(&self, hypothesis: &str) -> bool {
        self.checks.iter().filter(|c| c.hypothesis == hypothesis).all(|c| c.passed)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let rel = match c.relation {
                Relation::Less => "<",
                Relation::LessEq => "<=",
            };
            writeln!(
                f,
                "{} {}: {} ({} {rel} {})",
                if c.passed { "pass" } else { "FAIL" },
                c.hypothesis,
                c.description,
                c.lhs,
                c.rhs
            )?;
        }
        for (k, v) in &self.values {
            writeln!(f, "value {k} = {v}")?;
        }
        Ok(())
    }
}

fn push_delta_checks(checks: &mut Vec<HypothesisCheck>, delta_x: f64, delta_y: f64) {
    use Relation::*;
    checks.push(HypothesisCheck::new("Prb", "0 < delta_x", 0.0, Less, delta_x));
    checks.push(HypothesisCheck::new("Prb", "delta_x <= 1", delta_x, LessEq, 1.0));
    checks.push(HypothesisCheck::new("Prb", "0 < delta_y", 0.0, Less, delta_y));
    checks.push(HypothesisCheck::new("Prb", "delta_y <= 1", delta_y, LessEq, 1.0));
}

/// Checks Prb, Rad and Smp for recovering a single manifold from a uniform
/// sample at nerve radius `eps`.
pub fn validate_recovery(model: &ManifoldModel, eps: f64, delta: f64, n: usize) -> ValidationReport {
    use Relation::*;
    let mut checks = vec![
        HypothesisCheck::new("Prb", "0 < delta", 0.0, Less, delta),
        HypothesisCheck::new("Prb", "delta <= 1", delta, LessEq, 1.0),
        HypothesisCheck::new("Rad", "0 < eps", 0.0, Less, eps),
        HypothesisCheck::new("Rad", "eps < tau/2", eps, Less, model.tau() / 2.0),
    ];
    let mut values = BTreeMap::new();
    match beta(model, eps, delta) {
        Ok(b) => {
            values.insert("beta".into(), b);
            checks.push(HypothesisCheck::new("Smp", "beta < #X", b, Less, n as f64));
        }
        Err(_) => checks.push(HypothesisCheck::new("Smp", "beta undefined", f64::NAN, Less, n as f64)),
    }
    ValidationReport { setting: Setting::Recovery, checks, values }
}

/// Checks Prb, Lip, Rad and Smp for the clean setting; β values and ρ are
/// attached whenever they are defined.
pub fn validate_clean(
    mx: &ManifoldModel,
    my: &ManifoldModel,
    params: &CleanParams,
    nx: usize,
    ny: usize,
) -> ValidationReport {
    use Relation::*;
    let CleanParams { eps_x, eps_y, kappa, delta_x, delta_y } = *params;
    let mut checks = Vec::new();
    let mut values = BTreeMap::new();
    push_delta_checks(&mut checks, delta_x, delta_y);
    checks.push(HypothesisCheck::new("Lip", "0 <= kappa", 0.0, LessEq, kappa));
    checks.push(HypothesisCheck::new("Rad", "0 < eps_x", 0.0, Less, eps_x));
    checks.push(HypothesisCheck::new("Rad", "eps_x < tau_x/2", eps_x, Less, mx.tau() / 2.0));
    checks.push(HypothesisCheck::new("Rad", "0 < eps_y", 0.0, Less, eps_y));
    checks.push(HypothesisCheck::new("Rad", "eps_y < tau_y/2", eps_y, Less, my.tau() / 2.0));
    checks.push(HypothesisCheck::new("Rad", "4 kappa eps_x < eps_y", 4.0 * kappa * eps_x, Less, eps_y));
    let beta_x = beta(mx, eps_x, delta_x);
    let beta_y = beta(my, eps_y, delta_y);
    match beta_x {
        Ok(b) => {
            values.insert("beta_x".into(), b);
            checks.push(HypothesisCheck::new("Smp", "beta_x < #X", b, Less, nx as f64));
        }
        Err(_) => checks.push(HypothesisCheck::new("Smp", "beta_x undefined", f64::NAN, Less, nx as f64)),
    }
    match beta_y {
        Ok(b) => {
            values.insert("beta_y".into(), b);
            checks.push(HypothesisCheck::new("Smp", "beta_y < #Y", b, Less, ny as f64));
        }
        Err(_) => checks.push(HypothesisCheck::new("Smp", "beta_y undefined", f64::NAN, Less, ny as f64)),
    }
    if let Ok(rho) = rho_clean(params) {
        values.insert("rho".into(), rho);
    }
    ValidationReport { setting: Setting::Clean, checks, values }
}

/// Checks Prb, Lip', Nse, Rad' (window and coupling), Img' and Smp' for the
/// noisy setting. `gamma_x`/`gamma_y` are the noisy sample bounds.
pub fn validate_noisy(
    mx: &ManifoldModel,
    my: &ManifoldModel,
    params: &NoisyParams,
    counts: (usize, usize),
    gammas: (f64, f64),
) -> ValidationReport {
    use Relation::*;
    let p = *params;
    let (tau_x, tau_y) = (mx.tau(), my.tau());
    let mut checks = Vec::new();
    let mut values = BTreeMap::new();
    push_delta_checks(&mut checks, p.delta_x, p.delta_y);
    checks.push(HypothesisCheck::new("Lip'", "0 <= kappa", 0.0, LessEq, p.kappa));
    checks.push(HypothesisCheck::new(
        "Lip'",
        "4 kappa tau_x < (sqrt2 - 1) tau_y",
        4.0 * p.kappa * tau_x,
        Less,
        (SQRT_2 - 1.0) * tau_y,
    ));
    for (side, r, tau) in [("x", p.r_x, tau_x), ("y", p.r_y, tau_y)] {
        checks.push(HypothesisCheck::new("Nse", format!("0 < r_{side}"), 0.0, Less, r));
        checks.push(HypothesisCheck::new(
            "Nse",
            format!("r_{side} < (3 - sqrt8) tau_{side}"),
            r,
            Less,
            noise_radius_bound(tau),
        ));
    }
    for (side, r, tau, eps) in [("x", p.r_x, tau_x, p.eps_x), ("y", p.r_y, tau_y, p.eps_y)] {
        match gamma_pm(tau, r) {
            Ok((lo, hi)) => {
                values.insert(format!("gamma_minus_{side}"), lo);
                values.insert(format!("gamma_plus_{side}"), hi);
                checks.push(HypothesisCheck::new("Rad'", format!("Gamma-_{side} < eps_{side}"), lo, Less, eps));
                checks.push(HypothesisCheck::new("Rad'", format!("eps_{side} < Gamma+_{side}"), eps, Less, hi));
            }
            Err(_) => {
                checks.push(HypothesisCheck::new("Rad'", format!("Gamma window for {side} undefined"), f64::NAN, Less, eps));
            }
        }
    }
    checks.push(HypothesisCheck::new(
        "Rad'",
        "4 kappa (eps_x + r_x) < eps_y - r_y",
        p.coupling_lhs(),
        Less,
        p.effective_eps_y(),
    ));
    checks.push(HypothesisCheck::new("Img'", "0 < d", 0.0, Less, p.d));
    checks.push(HypothesisCheck::new(
        "Img'",
        "d < ((eps_y - r_y) - 2 kappa (eps_x + r_x)) / 2",
        p.d,
        Less,
        p.d_bound(),
    ));
    values.insert("d_bound".into(), p.d_bound());
    values.insert("rho_prime".into(), p.r_y + p.d);
    values.insert("gamma_x".into(), gammas.0);
    values.insert("gamma_y".into(), gammas.1);
    checks.push(HypothesisCheck::new("Smp'", "gamma_x < #X'", gammas.0, Less, counts.0 as f64));
    checks.push(HypothesisCheck::new("Smp'", "gamma_y < #Y'", gammas.1, Less, counts.1 as f64));
    ValidationReport { setting: Setting::Noisy, checks, values }
}
