//! Width sweep: how the linearization error, the teacher approximation
//! error, the kernel deviation and the trained risk move as the network
//! grows. All four are expected to shrink like `1/sqrt(m)`; the summary
//! attaches log-log slope fits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::Result;
use crate::experiments::{fit_loglog, write_text_file, ExperimentManifest, LogLogFit};
use crate::init::{draw_inputs, symmetric_init, InitConfig};
use crate::ntk::{empirical_kernel, mc_kernel};
use crate::params::RnnParams;
use crate::rng::{subseed, substream};
use crate::rnn::{hidden_forward, output_from_trajectory, output_gradients_all, linearized_output};
use crate::teacher::{make_dataset, teacher_eval_all, transported_params, TeacherSpec, TransportMap};
use crate::training::{run_training, step_size_schedule, Monitors, ProjectionRadii, Variant};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WidthSweepConfig {
    pub m_list: Vec<usize>,
    pub d: usize,
    pub t_len: usize,
    pub alpha: f64,
    pub act: Activation,
    pub map: TransportMap,
    /// Monte-Carlo budget for the reference teacher values.
    pub mc_samples: usize,
    /// Size of the input probe set.
    pub probe_points: usize,
    /// Displacement draws per probe point for the linearization error.
    pub displacements_per_point: usize,
    /// Kernel Monte-Carlo budget for the deviation column.
    pub kernel_mc_samples: usize,
    /// Training-set size and iteration count for the final-risk column.
    pub train_n: usize,
    pub train_tau: usize,
    /// Leading widths dropped from the slope fits (transient regime).
    pub fit_drop: usize,
    pub seed: u64,
}

impl Default for WidthSweepConfig {
    fn default() -> Self {
        WidthSweepConfig {
            m_list: (6..=12).map(|k| 1 << k).collect(),
            d: 3,
            t_len: 6,
            alpha: 0.3,
            act: Activation::Tanh,
            map: TransportMap { w_const: 0.4, c_const: 0.4, u_radial: 0.2, u_const: 0.3 },
            mc_samples: 200_000,
            probe_points: 16,
            displacements_per_point: 4,
            kernel_mc_samples: 200_000,
            train_n: 16,
            train_tau: 64,
            fit_drop: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthSweepSummary {
    pub lin_err_slope: LogLogFit,
    pub teacher_err_slope: LogLogFit,
    pub kernel_dev_slope: LogLogFit,
}

/// Samples a displaced parameter on the boundary of the max-norm region
/// around `params0` (full radius in every component, random directions),
/// so the total displacement norm is width-independent.
fn boundary_displacement(
    params0: &RnnParams,
    radii: &ProjectionRadii,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> RnnParams {
    use rand_distr::StandardNormal;
    let m = params0.m();
    let d = params0.d();
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let mut params = params0.clone();
    for i in 0..m {
        let sign_w = if rng.random::<bool>() { 1.0 } else { -1.0 };
        params.w_mut()[i] += sign_w * radii.w * inv_sqrt_m;
        let mut dir = vec![0.0; d];
        let mut norm_sq = 0.0f64;
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm_sq += *v * *v;
        }
        let norm = norm_sq.sqrt().max(1e-300);
        for (k, v) in dir.iter().enumerate() {
            params.u_mut()[i * d + k] += v / norm * radii.u * inv_sqrt_m;
        }
        let sign_c = if rng.random::<bool>() { 1.0 } else { -1.0 };
        params.c_mut()[i] += sign_c * radii.c * inv_sqrt_m;
    }
    params
}

pub fn sweep_width(
    cfg: &WidthSweepConfig,
    out_dir: &std::path::Path,
) -> Result<ExperimentManifest> {
    let probes = draw_inputs(cfg.probe_points, cfg.d, cfg.t_len, subseed(cfg.seed, "probes", 0))?;
    let nu = cfg.map.nu();
    let radii = ProjectionRadii { w: nu.w.max(0.1), u: nu.u.max(0.1), c: nu.c.max(0.1) };
    let teacher = TeacherSpec {
        map: cfg.map,
        alpha: cfg.alpha,
        act: cfg.act,
        mc_samples: cfg.mc_samples,
        seed: subseed(cfg.seed, "teacher-ref", 0),
    };
    // Teacher reference values are width-independent; compute them once.
    let teacher_vals: Vec<Vec<f64>> = probes
        .iter()
        .map(|x| teacher_eval_all(&teacher, x))
        .collect::<Result<_>>()?;
    // Limiting kernel at the first probe pair, both requested time indices.
    let kernel_pair = (&probes[0], &probes[1 % probes.len()]);
    let (ku, kw, kc) = mc_kernel(
        cfg.alpha,
        cfg.act,
        kernel_pair.0,
        kernel_pair.1,
        cfg.t_len,
        cfg.kernel_mc_samples,
        subseed(cfg.seed, "kernel-ref", 0),
    )?;
    let kernel_ref = ku.value + kw.value + kc.value;
    let dataset = make_dataset(
        &TeacherSpec { seed: subseed(cfg.seed, "teacher-data", 0), ..teacher },
        cfg.train_n,
        cfg.d,
        cfg.t_len,
        subseed(cfg.seed, "dataset", 0),
    )?;

    let mut rows = Vec::new();
    for (idx, &m) in cfg.m_list.iter().enumerate() {
        let init = InitConfig { m, d: cfg.d, alpha: cfg.alpha, seed: subseed(cfg.seed, "init", idx as u64) };
        let params0 = symmetric_init(&init)?;

        // Max linearization error over probe points and boundary displacements.
        let mut lin_err_max = 0.0f64;
        let mut rng = substream(cfg.seed, "displace", idx as u64);
        for x in &probes {
            let traj0 = hidden_forward(&params0, x, cfg.act)?;
            let grads0 = output_gradients_all(&params0, &traj0, x)?;
            for _ in 0..cfg.displacements_per_point {
                let displaced = boundary_displacement(&params0, &radii, &mut rng);
                let full = crate::rnn::output_forward(&displaced, x, cfg.act)?;
                for t in 1..=cfg.t_len {
                    let lin = linearized_output(&displaced, &params0, &grads0, t)?;
                    lin_err_max = lin_err_max.max((full[t - 1] - lin).abs());
                }
            }
        }

        // Teacher approximation error of the transported parameter.
        let moved = transported_params(&teacher, &params0)?;
        let mut teacher_err = 0.0f64;
        for (x, reference) in probes.iter().zip(&teacher_vals) {
            let traj = hidden_forward(&moved, x, cfg.act)?;
            let outputs = output_from_trajectory(&moved, &traj);
            for t in 0..cfg.t_len {
                teacher_err = teacher_err.max((outputs[t] - reference[t]).abs());
            }
        }

        // Kernel deviation at the reference pair.
        let emp = empirical_kernel(&params0, kernel_pair.0, kernel_pair.1, cfg.act, cfg.t_len)?;
        let kernel_dev = (emp - kernel_ref).abs();

        // Trained risk from a short projected run at the scheduled step size.
        let report = run_training(
            Variant::ProjectedGd,
            &dataset,
            &init,
            Some(radii),
            step_size_schedule(cfg.t_len, cfg.train_tau),
            cfg.train_tau,
            cfg.act,
            &Monitors { record_every: cfg.train_tau.max(1), ..Monitors::default() },
        )?;

        rows.push((m, lin_err_max, teacher_err, kernel_dev, report.min_risk));
    }

    let mut csv = String::from("m,linErrMax,teacherApproxErr,kernelDev,finalRisk\n");
    for (m, lin, te, kd, fr) in &rows {
        csv.push_str(&format!("{m},{lin},{te},{kd},{fr}\n"));
    }
    let summary = WidthSweepSummary {
        lin_err_slope: fit_loglog(
            &rows.iter().map(|r| (r.0 as f64, r.1)).collect::<Vec<_>>(),
            cfg.fit_drop,
        ),
        teacher_err_slope: fit_loglog(
            &rows.iter().map(|r| (r.0 as f64, r.2)).collect::<Vec<_>>(),
            cfg.fit_drop,
        ),
        kernel_dev_slope: fit_loglog(
            &rows.iter().map(|r| (r.0 as f64, r.3)).collect::<Vec<_>>(),
            cfg.fit_drop,
        ),
    };
    let csv_file = write_text_file(out_dir, "width_sweep.csv", &csv)?;
    let summary_file = write_text_file(
        out_dir,
        "width_sweep_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let manifest = ExperimentManifest::new(
        "width_sweep",
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
    fn tiny_width_sweep_runs_and_fits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = WidthSweepConfig {
            m_list: vec![16, 32, 64, 128],
            mc_samples: 5000,
            kernel_mc_samples: 5000,
            probe_points: 3,
            displacements_per_point: 2,
            train_n: 4,
            train_tau: 4,
            fit_drop: 0,
            ..WidthSweepConfig::default()
        };
        let manifest = sweep_width(&cfg, dir.path()).unwrap();
        assert_eq!(manifest.outputs.len(), 2);
        assert!(manifest.outputs_match(dir.path()));
        let csv = std::fs::read_to_string(dir.path().join("width_sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("m,linErrMax,teacherApproxErr,kernelDev,finalRisk"));
    }

    #[test]
    fn boundary_displacement_has_width_independent_norm() {
        let radii = ProjectionRadii { w: 0.5, u: 0.5, c: 0.5 };
        let mut norms = Vec::new();
        for (i, m) in [16usize, 64].into_iter().enumerate() {
            let params0 = symmetric_init(&InitConfig {
                m,
                d: 3,
                alpha: 0.3,
                seed: 1,
            })
            .unwrap();
            let mut rng = substream(2, "bd-test", i as u64);
            let displaced = boundary_displacement(&params0, &radii, &mut rng);
            let (theta, c) = displaced.displacement_norms(&params0);
            norms.push((theta, c));
        }
        let expected_theta = (0.5f64 * 0.5 + 0.5 * 0.5).sqrt();
        for (theta, c) in norms {
            assert!((theta - expected_theta).abs() < 1e-12);
            assert!((c - 0.5).abs() < 1e-12);
        }
    }
}
