//! Optimizer comparison: risk trajectories of plain descent, projected
//! descent and projected single-sample stochastic descent at equal
//! iteration counts (one stochastic step costs a factor `n` less compute
//! than one batch step; the CSV compares per iteration, not per unit of
//! compute). Stochastic runs are averaged over several index streams from
//! one initialization, with the standard error of the mean attached.
//!
//! Plain-descent displacement threshold crossings (against the
//! projection-free plan at the configured target error) are recorded as
//! WARN lines in the summary; the guarantee is probabilistic, so a
//! crossing is logged rather than failed.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::bounds::{projection_free_plan, BoundInputs};
use crate::error::Result;
use crate::experiments::{write_text_file, ExperimentManifest};
use crate::init::InitConfig;
use crate::rng::subseed;
use crate::teacher::{make_dataset, TeacherSpec, TransportMap};
use crate::training::{
    run_training, step_size_schedule, Monitors, ProjectionRadii, TrainReport, Variant,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgdSweepConfig {
    pub m: usize,
    pub d: usize,
    pub t_len: usize,
    pub n: usize,
    pub alpha: f64,
    pub act: Activation,
    pub map: TransportMap,
    pub mc_samples: usize,
    pub tau: usize,
    /// Number of stochastic index streams averaged.
    pub sgd_streams: usize,
    /// Target error for the plan whose thresholds the plain run is
    /// monitored against.
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for SgdSweepConfig {
    fn default() -> Self {
        SgdSweepConfig {
            m: 1024,
            d: 3,
            t_len: 6,
            n: 16,
            alpha: 0.3,
            act: Activation::Tanh,
            map: TransportMap { w_const: 0.4, c_const: 0.4, u_radial: 0.2, u_const: 0.3 },
            mc_samples: 100_000,
            tau: 256,
            sgd_streams: 8,
            epsilon: 0.1,
            delta: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgdSweepSummary {
    pub gd_final_avg_iterate_risk: f64,
    pub projected_gd_final_avg_iterate_risk: f64,
    pub sgd_mean_avg_iterate_risk: f64,
    pub sgd_stderr_avg_iterate_risk: f64,
    /// Plan thresholds used by the plain-run exit monitor.
    pub lambda: [f64; 3],
    pub tau0: f64,
    /// WARN lines for probabilistic events (empty when none occurred).
    pub warnings: Vec<String>,
}

pub fn sweep_sgd_vs_gd(
    cfg: &SgdSweepConfig,
    out_dir: &std::path::Path,
) -> Result<ExperimentManifest> {
    let nu = cfg.map.nu();
    let radii = ProjectionRadii { w: nu.w, u: nu.u, c: nu.c };
    let teacher = TeacherSpec {
        map: cfg.map,
        alpha: cfg.alpha,
        act: cfg.act,
        mc_samples: cfg.mc_samples,
        seed: subseed(cfg.seed, "teacher-data", 0),
    };
    let dataset = make_dataset(&teacher, cfg.n, cfg.d, cfg.t_len, subseed(cfg.seed, "dataset", 0))?;
    let init = InitConfig { m: cfg.m, d: cfg.d, alpha: cfg.alpha, seed: subseed(cfg.seed, "init", 0) };
    let eta = step_size_schedule(cfg.t_len, cfg.tau);

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
        tau: cfg.tau,
        epsilon: cfg.epsilon,
    };
    let plan = projection_free_plan(&inputs, cfg.epsilon)?;
    let monitors = Monitors {
        exit_thresholds: Some([plan.lambda_w, plan.lambda_u, plan.lambda_c]),
        record_every: 1,
        ..Monitors::default()
    };

    let gd = run_training(Variant::Gd, &dataset, &init, None, eta, cfg.tau, cfg.act, &monitors)?;
    let pgd = run_training(
        Variant::ProjectedGd,
        &dataset,
        &init,
        Some(radii),
        eta,
        cfg.tau,
        cfg.act,
        &monitors,
    )?;
    let sgd_runs: Vec<TrainReport> = (0..cfg.sgd_streams)
        .map(|k| {
            run_training(
                Variant::ProjectedSgd,
                &dataset,
                &init,
                Some(radii),
                eta,
                cfg.tau,
                cfg.act,
                &Monitors { sgd_stream: k as u64, ..monitors },
            )
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("step,gdRisk,projectedGdRisk,sgdMeanRisk,sgdStderrRisk\n");
    for (row_idx, row) in gd.history.iter().enumerate() {
        let step = row.step;
        let mut mean = 0.0;
        let mut sq = 0.0;
        for run in &sgd_runs {
            let r = run.history[row_idx].risk;
            mean += r;
            sq += r * r;
        }
        let k = cfg.sgd_streams as f64;
        mean /= k;
        let var = ((sq - k * mean * mean) / (k - 1.0).max(1.0)).max(0.0);
        let stderr = (var / k).sqrt();
        csv.push_str(&format!(
            "{step},{},{},{mean},{stderr}\n",
            row.risk, pgd.history[row_idx].risk
        ));
    }

    let k = cfg.sgd_streams as f64;
    let sgd_mean = sgd_runs.iter().map(|r| r.avg_iterate_risk).sum::<f64>() / k;
    let sgd_var = (sgd_runs
        .iter()
        .map(|r| (r.avg_iterate_risk - sgd_mean) * (r.avg_iterate_risk - sgd_mean))
        .sum::<f64>()
        / (k - 1.0).max(1.0))
    .max(0.0);
    let mut warnings = Vec::new();
    if let Some(step) = gd.exit.first_any() {
        if (step as f64) < plan.tau0 {
            warnings.push(format!(
                "WARN: plain run crossed a displacement threshold at step {step}, before the stop horizon {}",
                plan.tau0
            ));
        }
    }
    let summary = SgdSweepSummary {
        gd_final_avg_iterate_risk: gd.avg_iterate_risk,
        projected_gd_final_avg_iterate_risk: pgd.avg_iterate_risk,
        sgd_mean_avg_iterate_risk: sgd_mean,
        sgd_stderr_avg_iterate_risk: (sgd_var / k).sqrt(),
        lambda: [plan.lambda_w, plan.lambda_u, plan.lambda_c],
        tau0: plan.tau0,
        warnings,
    };
    let csv_file = write_text_file(out_dir, "sgd_vs_gd.csv", &csv)?;
    let summary_file = write_text_file(
        out_dir,
        "sgd_vs_gd_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let manifest = ExperimentManifest::new(
        "sgd_vs_gd",
        serde_json::to_value(cfg)?,
        vec![csv_file, summary_file],
    );
    manifest.write(out_dir)?;
    Ok(manifest)
}
