//! Iteration sweep: best observed risk within `tau` projected steps at the
//! scheduled step size, next to the analytic upper bound for the same
//! configuration.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::bounds::{bound_report, BoundInputs};
use crate::error::Result;
use crate::experiments::{fit_loglog, write_text_file, ExperimentManifest, LogLogFit};
use crate::init::InitConfig;
use crate::rng::subseed;
use crate::teacher::{make_dataset, TeacherSpec, TransportMap};
use crate::training::{run_training, step_size_schedule, Monitors, ProjectionRadii, Variant};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationsSweepConfig {
    pub tau_list: Vec<usize>,
    pub m: usize,
    pub d: usize,
    pub t_len: usize,
    pub n: usize,
    pub alpha: f64,
    pub act: Activation,
    pub map: TransportMap,
    pub mc_samples: usize,
    /// Projection radii; when omitted they default to the map's budget.
    pub rho: Option<ProjectionRadii>,
    pub delta: f64,
    pub seed: u64,
}

impl Default for IterationsSweepConfig {
    fn default() -> Self {
        IterationsSweepConfig {
            tau_list: vec![16, 64, 256, 1024],
            m: 1024,
            d: 3,
            t_len: 6,
            n: 32,
            alpha: 0.3,
            act: Activation::Tanh,
            map: TransportMap { w_const: 0.4, c_const: 0.4, u_radial: 0.2, u_const: 0.3 },
            mc_samples: 100_000,
            rho: None,
            delta: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationsSweepSummary {
    /// Fitted decay of `min risk - floor` against `tau`; the floor is the
    /// smallest observed min-risk across the sweep (that point is excluded
    /// from the fit).
    pub risk_decay: LogLogFit,
    /// True when every observed min-risk sits below its analytic bound.
    pub bound_respected: bool,
}

pub fn sweep_iterations(
    cfg: &IterationsSweepConfig,
    out_dir: &std::path::Path,
) -> Result<ExperimentManifest> {
    let nu = cfg.map.nu();
    let radii = cfg.rho.unwrap_or(ProjectionRadii { w: nu.w, u: nu.u, c: nu.c });
    let teacher = TeacherSpec {
        map: cfg.map,
        alpha: cfg.alpha,
        act: cfg.act,
        mc_samples: cfg.mc_samples,
        seed: subseed(cfg.seed, "teacher-data", 0),
    };
    let dataset = make_dataset(&teacher, cfg.n, cfg.d, cfg.t_len, subseed(cfg.seed, "dataset", 0))?;
    let init = InitConfig { m: cfg.m, d: cfg.d, alpha: cfg.alpha, seed: subseed(cfg.seed, "init", 0) };

    let mut rows = Vec::new();
    for &tau in &cfg.tau_list {
        let eta = step_size_schedule(cfg.t_len, tau);
        let report = run_training(
            Variant::ProjectedGd,
            &dataset,
            &init,
            Some(radii),
            eta,
            tau,
            cfg.act,
            &Monitors { record_every: tau.max(1), ..Monitors::default() },
        )?;
        let inputs = BoundInputs {
            sigma0: cfg.act.sigma0(),
            sigma1: cfg.act.sigma1(),
            sigma2: cfg.act.sigma2(),
            alpha: cfg.alpha,
            rho: radii,
            nu,
            m: cfg.m,
            d: cfg.d,
            t_len: cfg.t_len,
            n: cfg.n,
            delta: cfg.delta,
            tau,
            epsilon: 0.1,
        };
        let bound = bound_report(&inputs)?.min_risk_bound;
        rows.push((tau, report.min_risk, report.avg_iterate_risk, bound));
    }

    let mut csv = String::from("tau,minRisk,avgIterRisk,minRiskBound\n");
    for (tau, min_risk, avg_risk, bound) in &rows {
        csv.push_str(&format!("{tau},{min_risk},{avg_risk},{bound}\n"));
    }
    let floor = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let decay_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > floor)
        .map(|r| (r.0 as f64, r.1 - floor))
        .collect();
    let summary = IterationsSweepSummary {
        risk_decay: fit_loglog(&decay_points, 0),
        bound_respected: rows.iter().all(|r| r.1 <= r.3),
    };
    let csv_file = write_text_file(out_dir, "iterations_sweep.csv", &csv)?;
    let summary_file = write_text_file(
        out_dir,
        "iterations_sweep_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let manifest = ExperimentManifest::new(
        "iterations_sweep",
        serde_json::to_value(cfg)?,
        vec![csv_file, summary_file],
    );
    manifest.write(out_dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_iterations_sweep_respects_the_bound() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = IterationsSweepConfig {
            tau_list: vec![4, 16, 64],
            m: 64,
            n: 6,
            t_len: 4,
            mc_samples: 2000,
            ..IterationsSweepConfig::default()
        };
        let manifest = sweep_iterations(&cfg, dir.path()).unwrap();
        let summary: IterationsSweepSummary = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("iterations_sweep_summary.json")).unwrap(),
        )
        .unwrap();
        assert!(summary.bound_respected);
        assert!(manifest.outputs_match(dir.path()));
    }
}
