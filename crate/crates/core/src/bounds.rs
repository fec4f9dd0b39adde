//! Closed-form calculators for the analytic constants that govern the
//! model: geometric moment sums, local Lipschitz/smoothness moduli of the
//! hidden state, worst-case output/target magnitudes, the error terms of
//! the projected-descent risk bound, and the projection-free training plan
//! (displacement thresholds, minimum width, step size, stopping horizon).
//!
//! Everything here is a pure function of a [`BoundInputs`]. Values that
//! leave f64 range are reported as `+inf` together with an `overflow` flag,
//! never as a panic.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::training::ProjectionRadii;

/// Sup-norm budget of the transport maps defining the target class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuBudget {
    pub w: f64,
    pub u: f64,
    pub c: f64,
}

impl NuBudget {
    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.u * self.u + self.c * self.c).sqrt()
    }
}

/// Everything the calculators need: activation bounds, initialization scale,
/// projection radii, target budget, problem sizes, failure probability and
/// iteration budget, plus the target error for the projection-free plan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub rho: ProjectionRadii,
    pub nu: NuBudget,
    pub m: usize,
    pub d: usize,
    pub t_len: usize,
    pub n: usize,
    pub delta: f64,
    pub tau: usize,
    /// Target training error for the projection-free plan.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    0.1
}

impl BoundInputs {
    pub fn with_activation(mut self, act: Activation) -> Self {
        self.sigma0 = act.sigma0();
        self.sigma1 = act.sigma1();
        self.sigma2 = act.sigma2();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must lie in (0, 1)"));
        }
        if self.m == 0 || self.d == 0 || self.t_len == 0 || self.n == 0 {
            return Err(Error::config("m, d, T, n must all be at least 1"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::config("epsilon must be positive"));
        }
        Ok(())
    }

    /// Effective recurrent-weight magnitude inside the projection region:
    /// `alpha + rho_w / sqrt(m)`.
    pub fn alpha_m(&self) -> f64 {
        self.alpha + self.rho.w / (self.m as f64).sqrt()
    }
}

/// Geometric moment sums `mu_0(z) = sum_{k<t} z^k` and
/// `mu_1(z) = sum_{k<t} (k+1) z^k`, by direct summation. Direct summation is
/// the primary path; the closed forms live in [`mu0_closed`]/[`mu1_closed`]
/// as a cross-check.
pub fn mu_sums(z: f64, t: usize) -> (f64, f64) {
    debug_assert!(z >= 0.0 && t >= 1);
    let mut mu0 = 0.0;
    let mut mu1 = 0.0;
    let mut pow = 1.0;
    for k in 0..t {
        mu0 += pow;
        mu1 += (k + 1) as f64 * pow;
        pow *= z;
    }
    (mu0, mu1)
}

/// Closed form `(1 - z^t) / (1 - z)` for `z != 1`, else `t`.
pub fn mu0_closed(z: f64, t: usize) -> f64 {
    if (z - 1.0).abs() < 1e-12 {
        t as f64
    } else {
        (1.0 - z.powi(t as i32)) / (1.0 - z)
    }
}

/// Closed form `(1 - (t+1) z^t + t z^{t+1}) / (1 - z)^2` for `z != 1`,
/// else `t (t + 1) / 2`.
pub fn mu1_closed(z: f64, t: usize) -> f64 {
    let tf = t as f64;
    if (z - 1.0).abs() < 1e-12 {
        tf * (tf + 1.0) / 2.0
    } else {
        (1.0 - (tf + 1.0) * z.powi(t as i32) + tf * z.powi(t as i32 + 1)) / ((1.0 - z) * (1.0 - z))
    }
}

/// Local Lipschitz modulus `L_T` and smoothness modulus `beta_T` of the
/// per-neuron hidden state over the projection region, at
/// `alpha_m = alpha + rho_w / sqrt(m)`:
///
/// ```text
/// L_T    = mu_0^2(alpha_m s1) (s0^2 + 1) s1^2
/// beta_T = s1^2 mu_0^2 (sqrt(d) + d + s0) + sqrt(d) s1^2 mu_1
///        + s2 (1 + alpha_m s1 mu_0) mu_1 (2 s0 sqrt(d) + d + s0)
/// ```
pub fn lipschitz_constants(inputs: &BoundInputs) -> (f64, f64) {
    lipschitz_at(inputs, inputs.alpha_m())
}

fn lipschitz_at(inputs: &BoundInputs, alpha_m: f64) -> (f64, f64) {
    let (s0, s1, s2) = (inputs.sigma0, inputs.sigma1, inputs.sigma2);
    let d = inputs.d as f64;
    let (mu0, mu1) = mu_sums(alpha_m * s1, inputs.t_len);
    let l = mu0 * mu0 * (s0 * s0 + 1.0) * s1 * s1;
    let beta = s1 * s1 * mu0 * mu0 * (d.sqrt() + d + s0)
        + d.sqrt() * s1 * s1 * mu1
        + s2 * (1.0 + alpha_m * s1 * mu0) * mu1 * (2.0 * s0 * d.sqrt() + d + s0);
    (l, beta)
}

/// Lipschitz and smoothness moduli of the recurrent feedback map
/// `theta -> w * H_t`: `Lambda_T = sqrt(2) (s0 + 1 + alpha_m L_T)` and
/// `gamma_T = sqrt(2) (L_T + alpha_m beta_T)`.
pub fn smoothness_constants(inputs: &BoundInputs) -> (f64, f64) {
    smoothness_at(inputs, inputs.alpha_m())
}

fn smoothness_at(inputs: &BoundInputs, alpha_m: f64) -> (f64, f64) {
    let (l, beta) = lipschitz_at(inputs, alpha_m);
    let lambda = 2f64.sqrt() * (inputs.sigma0 + 1.0 + alpha_m * l);
    let gamma = 2f64.sqrt() * (l + alpha_m * beta);
    (lambda, gamma)
}

/// Worst-case magnitudes over unit-bounded inputs:
/// the trained network (`output_sup`), the target system (`target_sup`),
/// and their sum (`residual_sup`), which dominates every residual.
///
/// ```text
/// output_sup = L_T sqrt(rho_w^2 + rho_u^2) + s0 rho_c
/// target_sup = |nu| (s1 mu_0(alpha s1) (1 + s0) + s0)
/// ```
pub fn norm_bounds(inputs: &BoundInputs) -> (f64, f64, f64) {
    let (l, _) = lipschitz_constants(inputs);
    let f_max = l * (inputs.rho.w * inputs.rho.w + inputs.rho.u * inputs.rho.u).sqrt()
        + inputs.sigma0 * inputs.rho.c;
    let y_max = target_sup(inputs);
    (f_max, y_max, f_max + y_max)
}

/// Worst-case magnitude of a target in the class with budget `nu`. Uses the
/// initialization scale `alpha` (not `alpha_m`): the target is defined by
/// the initialization distribution, not the projection region.
pub fn target_sup(inputs: &BoundInputs) -> f64 {
    let (mu0_init, _) = mu_sums(inputs.alpha * inputs.sigma1, inputs.t_len);
    inputs.nu.norm() * (inputs.sigma1 * mu0_init * (1.0 + inputs.sigma0) + inputs.sigma0)
}

/// The error terms of the projected-descent risk bound and the bound itself.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorTerms {
    /// Scaled linearization error (first-order deviation of the network
    /// plus the Monte-Carlo fluctuation of the kernel-space representer).
    pub err1: f64,
    /// Scaled feature-drift error (gradients move as parameters move).
    pub err2: f64,
    /// Uniform bound on the squared risk-gradient norm.
    pub err3: f64,
    /// Combined error constant entering the risk bound.
    pub err: f64,
    /// Upper bound on the best risk seen within `tau` projected steps at
    /// step size `1 / (T sqrt(tau))`.
    pub min_risk_bound: f64,
}

/// Evaluates every error term at the given inputs:
///
/// ```text
/// err1 = 2 (Lambda^2 s2 + gamma s1)(rho_w^2 + rho_u^2)
///      + 2 L rho_c sqrt(rho_w^2 + rho_u^2)
///      + 2 |nu| (s1 mu_0(alpha_m s1)(1 + s0) + s0) sqrt(log(2nT/delta))
/// err2 = ((beta + L) sqrt(rho_w^2 + rho_u^2) + L rho_c)(|nu| + |rho|)
/// err3 = 4 T^2 (residual_sup (1 + rho_c/sqrt(m)) L + s0)^2
/// err  = err2 + (Lambda^2 s2 + gamma s1)(rho_w^2 + rho_u^2)
///      + L rho_c sqrt(rho_w^2 + rho_u^2)
///      + |nu| (s1 mu_0(alpha_m s1)(1 + s0) + s0) sqrt(log(2nT/delta))
/// min_risk_bound = (T/sqrt(tau)) (|nu|^2/4 + (residual_sup (1 + rho_c/sqrt(m)) L + s0)^2)
///                + (T residual_sup / sqrt(m)) err
/// ```
pub fn error_terms(inputs: &BoundInputs) -> ErrorTerms {
    let alpha_m = inputs.alpha_m();
    let terms = error_terms_at(inputs, &inputs.rho, alpha_m);
    let (_, _, phi) = norm_bounds(inputs);
    let (l, _) = lipschitz_constants(inputs);
    let rho_c_rel = inputs.rho.c / (inputs.m as f64).sqrt();
    let grad_scale = phi * (1.0 + rho_c_rel) * l + inputs.sigma0;
    let err3 = 4.0 * (inputs.t_len as f64).powi(2) * grad_scale * grad_scale;
    let min_risk_bound = (inputs.t_len as f64) / (inputs.tau as f64).sqrt()
        * (inputs.nu.norm() * inputs.nu.norm() / 4.0 + grad_scale * grad_scale)
        + (inputs.t_len as f64) * phi / (inputs.m as f64).sqrt() * terms.combined;
    ErrorTerms {
        err1: terms.err1,
        err2: terms.err2,
        err3,
        err: terms.combined,
        min_risk_bound,
    }
}

struct RawErrorTerms {
    err1: f64,
    err2: f64,
    combined: f64,
}

/// `err1`, `err2` and the combined `err` for an arbitrary radius triple,
/// with the activation/moment constants evaluated at `alpha_m`.
fn error_terms_at(inputs: &BoundInputs, rho: &ProjectionRadii, alpha_m: f64) -> RawErrorTerms {
    let (s0, s1, s2) = (inputs.sigma0, inputs.sigma1, inputs.sigma2);
    let (l, beta) = lipschitz_at(inputs, alpha_m);
    let (lambda, gamma) = smoothness_at(inputs, alpha_m);
    let (mu0, _) = mu_sums(alpha_m * s1, inputs.t_len);
    let r_wu_sq = rho.w * rho.w + rho.u * rho.u;
    let r_wu = r_wu_sq.sqrt();
    let nu_norm = inputs.nu.norm();
    let rho_norm = (rho.w * rho.w + rho.u * rho.u + rho.c * rho.c).sqrt();
    let log_term =
        (2.0 * inputs.n as f64 * inputs.t_len as f64 / inputs.delta).ln().sqrt();
    let representer_dev = nu_norm * (s1 * mu0 * (1.0 + s0) + s0) * log_term;
    let curvature = (lambda * lambda * s2 + gamma * s1) * r_wu_sq + l * rho.c * r_wu;
    let err1 = 2.0 * curvature + 2.0 * representer_dev;
    let err2 = ((beta + l) * r_wu + l * rho.c) * (nu_norm + rho_norm);
    let combined = err2 + curvature + representer_dev;
    RawErrorTerms { err1, err2, combined }
}

/// Regime classification: the effective contraction factor of the gradient
/// recursion is `alpha_m sigma1`; below one the per-step gradients stay
/// bounded in `T`, at or above one they grow exponentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Benign,
    Exploding,
}

pub fn regime_classifier(inputs: &BoundInputs) -> Regime {
    if inputs.alpha_m() * inputs.sigma1 < 1.0 {
        Regime::Benign
    } else {
        Regime::Exploding
    }
}

/// Training plan for projection-free descent at target error `epsilon`:
/// per-neuron displacement thresholds that the iterates provably do not
/// cross before the stopping horizon, the width needed for that guarantee,
/// the largest admissible step size, and the horizon itself.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GdPlan {
    pub lambda_w: f64,
    pub lambda_u: f64,
    pub lambda_c: f64,
    /// Minimum width for the displacement guarantee.
    pub min_width: f64,
    /// Largest admissible step size.
    pub eta_max: f64,
    /// Stopping horizon at `eta = eta_max`.
    pub tau0: f64,
}

/// Evaluates the plan with the moment constants at `alpha_m = alpha +
/// sqrt(2 epsilon)` (the displacement thresholds translate into that
/// effective recurrent magnitude):
///
/// ```text
/// lambda_w = lambda_u = 16 |nu|^2 sqrt(T) L_T / sqrt(eps)
/// lambda_c = 2 s0 sqrt(T) / sqrt(eps)
/// min_width = (T/eps)(err1|_{rho=lambda} + err2|_{rho=lambda})
///           + lambda_w^2 / (2 eps) + lambda_c^2
/// eta_max = eps / (2 T^2 (2 residual_sup(lambda, nu) L_T + s0)^2)
/// tau0 = |nu|^2 / ((sqrt(2) + 1)^2 eta_max eps)
/// ```
pub fn projection_free_plan(inputs: &BoundInputs, epsilon: f64) -> Result<GdPlan> {
    if epsilon <= 0.0 {
        return Err(Error::config("epsilon must be positive"));
    }
    let alpha_eps = inputs.alpha + (2.0 * epsilon).sqrt();
    let (l, _) = lipschitz_at(inputs, alpha_eps);
    let t = inputs.t_len as f64;
    let nu_norm = inputs.nu.norm();
    let lambda_w = 16.0 * nu_norm * nu_norm * t.sqrt() * l / epsilon.sqrt();
    let lambda_c = 2.0 * inputs.sigma0 * t.sqrt() / epsilon.sqrt();
    let lambda = ProjectionRadii { w: lambda_w, u: lambda_w, c: lambda_c };
    let terms = error_terms_at(inputs, &lambda, alpha_eps);
    let min_width = t / epsilon * (terms.err1 + terms.err2)
        + lambda_w * lambda_w / (2.0 * epsilon)
        + lambda_c * lambda_c;
    let f_max = l * (lambda.w * lambda.w + lambda.u * lambda.u).sqrt()
        + inputs.sigma0 * lambda.c;
    let phi = f_max + target_sup(inputs);
    let grad_scale = 2.0 * phi * l + inputs.sigma0;
    let eta_max = epsilon / (2.0 * t * t * grad_scale * grad_scale);
    let tau0 = nu_norm * nu_norm
        / ((2f64.sqrt() + 1.0) * (2f64.sqrt() + 1.0) * eta_max * epsilon);
    Ok(GdPlan { lambda_w, lambda_u: lambda_w, lambda_c, min_width, eta_max, tau0 })
}

/// Every analytic constant for one configuration, in one report.
///
/// Non-finite entries are accompanied by `overflow = true`; they arise for
/// long horizons in the exploding regime, where the moment sums exceed f64
/// range. (JSON renders them as null.)
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub alpha_m: f64,
    pub mu0: f64,
    pub mu1: f64,
    /// Lipschitz modulus of the per-neuron hidden state.
    pub state_lipschitz: f64,
    /// Smoothness modulus of the per-neuron hidden state.
    pub state_smoothness: f64,
    /// Lipschitz modulus of the recurrent feedback map `theta -> w H_t`.
    pub feedback_lipschitz: f64,
    /// Smoothness modulus of the recurrent feedback map.
    pub feedback_smoothness: f64,
    pub output_sup: f64,
    pub target_sup: f64,
    pub residual_sup: f64,
    pub err1: f64,
    pub err2: f64,
    pub err3: f64,
    pub err: f64,
    pub min_risk_bound: f64,
    pub plan: GdPlan,
    pub regime: Regime,
    pub overflow: bool,
}

pub fn bound_report(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let alpha_m = inputs.alpha_m();
    let (mu0, mu1) = mu_sums(alpha_m * inputs.sigma1, inputs.t_len);
    let (l, beta) = lipschitz_constants(inputs);
    let (lambda, gamma) = smoothness_constants(inputs);
    let (f_max, y_max, phi) = norm_bounds(inputs);
    let terms = error_terms(inputs);
    let plan = projection_free_plan(inputs, inputs.epsilon)?;
    let values = [
        alpha_m, mu0, mu1, l, beta, lambda, gamma, f_max, y_max, phi, terms.err1, terms.err2,
        terms.err3, terms.err, terms.min_risk_bound, plan.lambda_w, plan.lambda_c,
        plan.min_width, plan.eta_max, plan.tau0,
    ];
    let overflow = values.iter().any(|v| !v.is_finite());
    Ok(BoundReport {
        inputs: *inputs,
        alpha_m,
        mu0,
        mu1,
        state_lipschitz: l,
        state_smoothness: beta,
        feedback_lipschitz: lambda,
        feedback_smoothness: gamma,
        output_sup: f_max,
        target_sup: y_max,
        residual_sup: phi,
        err1: terms.err1,
        err2: terms.err2,
        err3: terms.err3,
        err: terms.err,
        min_risk_bound: terms.min_risk_bound,
        plan,
        regime: regime_classifier(inputs),
        overflow,
    })
}

impl BoundReport {
    /// Aligned human-readable rendering for the CLI.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(&format!("{k:<22} {v}\n"));
        };
        line("alpha_m", format!("{}", self.alpha_m));
        line("mu0", format!("{}", self.mu0));
        line("mu1", format!("{}", self.mu1));
        line("state_lipschitz", format!("{}", self.state_lipschitz));
        line("state_smoothness", format!("{}", self.state_smoothness));
        line("feedback_lipschitz", format!("{}", self.feedback_lipschitz));
        line("feedback_smoothness", format!("{}", self.feedback_smoothness));
        line("output_sup", format!("{}", self.output_sup));
        line("target_sup", format!("{}", self.target_sup));
        line("residual_sup", format!("{}", self.residual_sup));
        line("err1", format!("{}", self.err1));
        line("err2", format!("{}", self.err2));
        line("err3", format!("{}", self.err3));
        line("err", format!("{}", self.err));
        line("min_risk_bound", format!("{}", self.min_risk_bound));
        line("lambda_w", format!("{}", self.plan.lambda_w));
        line("lambda_u", format!("{}", self.plan.lambda_u));
        line("lambda_c", format!("{}", self.plan.lambda_c));
        line("min_width", format!("{}", self.plan.min_width));
        line("eta_max", format!("{}", self.plan.eta_max));
        line("tau0", format!("{}", self.plan.tau0));
        line("regime", format!("{:?}", self.regime).to_lowercase());
        line("overflow", format!("{}", self.overflow));
        s
    }
}
