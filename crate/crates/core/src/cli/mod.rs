//! Command-line front door: train runs, bound reports, kernel Gram
//! estimation, the four sweeps, and dataset generation/inspection, driven
//! by a JSON config file plus flag overrides.
//!
//! Exit-code contract: 0 success, 1 runtime error, 2 configuration error.

pub mod config;

use std::path::{Path, PathBuf};

use crate::bounds::{bound_report, projection_free_plan, BoundInputs};
use crate::error::{Error, Result};
use crate::experiments::{
    sha256_hex, sweep_iterations, sweep_memory, sweep_sgd_vs_gd, sweep_width, write_text_file,
    ExperimentManifest,
};
use crate::init::{draw_inputs, InitConfig};
use crate::ntk::{kernel_gram, GramMode};
use crate::teacher::{load_dataset, make_dataset, save_dataset, TeacherSpec};
use crate::training::{run_training, step_size_schedule, Monitors, Variant};
use config::{CliConfig, DatasetSection, KernelMode, KernelSection, TrainSection};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "DIAGRNN_OUT_DIR";

pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &CliConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs a training job: writes `train_report.json`, `train_history.csv`
/// and a manifest; prints the output paths.
pub fn cmd_train(section: &TrainSection, out_dir: &Path) -> Result<ExperimentManifest> {
    if matches!(section.variant, Variant::ProjectedGd | Variant::ProjectedSgd)
        && section.rho.is_none()
    {
        return Err(Error::config(format!(
            "variant '{}' needs projection radii: set the 'rho' field",
            section.variant.name()
        )));
    }
    if matches!(section.variant, Variant::Gd) && section.rho.is_some() {
        return Err(Error::config(
            "variant 'gd' does not project; remove the 'rho' field",
        ));
    }
    let teacher = TeacherSpec {
        map: section.map,
        alpha: section.alpha,
        act: section.act,
        mc_samples: section.mc_samples,
        seed: crate::rng::subseed(section.seed, "teacher-data", 0),
    };
    let dataset = make_dataset(
        &teacher,
        section.n,
        section.d,
        section.t_len,
        crate::rng::subseed(section.seed, "dataset", 0),
    )?;
    let eta = section.eta.unwrap_or_else(|| step_size_schedule(section.t_len, section.tau));
    let exit_thresholds = match section.exit_epsilon {
        Some(eps) => {
            let nu = section.map.nu();
            let inputs = BoundInputs {
                sigma0: section.act.sigma0(),
                sigma1: section.act.sigma1(),
                sigma2: section.act.sigma2(),
                alpha: section.alpha,
                rho: section.rho.unwrap_or(crate::training::ProjectionRadii {
                    w: 0.0,
                    u: 0.0,
                    c: 0.0,
                }),
                nu,
                m: section.m,
                d: section.d,
                t_len: section.t_len,
                n: section.n,
                delta: 0.05,
                tau: section.tau,
                epsilon: eps,
            };
            let plan = projection_free_plan(&inputs, eps)?;
            Some([plan.lambda_w, plan.lambda_u, plan.lambda_c])
        }
        None => None,
    };
    let report = run_training(
        section.variant,
        &dataset,
        &InitConfig { m: section.m, d: section.d, alpha: section.alpha, seed: section.seed },
        section.rho,
        eta,
        section.tau,
        section.act,
        &Monitors {
            exit_thresholds,
            record_every: section.record_every,
            sgd_stream: 0,
        },
    )?;
    let report_file =
        write_text_file(out_dir, "train_report.json", &serde_json::to_string_pretty(&report)?)?;
    let csv_file = write_text_file(out_dir, "train_history.csv", &report.history_csv())?;
    let manifest = ExperimentManifest::new(
        "train",
        serde_json::to_value(section)?,
        vec![report_file, csv_file],
    );
    let path = manifest.write(out_dir)?;
    println!("{}", out_dir.join("train_report.json").display());
    println!("{}", out_dir.join("train_history.csv").display());
    println!("{}", path.display());
    Ok(manifest)
}

/// Prints a bound report (JSON by default, aligned text on request),
/// optionally writing it to a file.
pub fn cmd_bounds(inputs: &BoundInputs, text: bool, out: Option<&Path>) -> Result<()> {
    let report = bound_report(inputs)?;
    let rendered =
        if text { report.to_text() } else { serde_json::to_string_pretty(&report)? };
    match out {
        Some(path) => {
            std::fs::write(path, &rendered)?;
            println!("{}", path.display());
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

/// Assembles a kernel Gram matrix over a seeded probe set and writes the
/// CSV plus a JSON sidecar describing how it was produced.
pub fn cmd_kernel(section: &KernelSection, out_dir: &Path) -> Result<ExperimentManifest> {
    if section.t == 0 || section.t > section.t_len {
        return Err(Error::config(format!(
            "kernel time index t={} outside 1..={}",
            section.t, section.t_len
        )));
    }
    let points = draw_inputs(
        section.points,
        section.d,
        section.t_len,
        crate::rng::subseed(section.seed, "kernel-points", 0),
    )?;
    let gram = match section.mode {
        KernelMode::Empirical => {
            let params = crate::init::symmetric_init(&InitConfig {
                m: section.m,
                d: section.d,
                alpha: section.alpha,
                seed: section.seed,
            })?;
            kernel_gram(&points, section.t, &GramMode::Empirical { params: &params }, section.act)?
        }
        KernelMode::Mc => kernel_gram(
            &points,
            section.t,
            &GramMode::MonteCarlo {
                alpha: section.alpha,
                n_samples: section.n_samples,
                seed: crate::rng::subseed(section.seed, "kernel-mc-root", 0),
            },
            section.act,
        )?,
    };
    let csv_file = write_text_file(out_dir, "kernel_gram.csv", &gram.to_csv())?;
    let sidecar = serde_json::json!({
        "mode": gram.mode,
        "mode_param": gram.mode_param,
        "seed": section.seed,
        "t": gram.t,
        "points": section.points,
        "alpha": section.alpha,
        "activation": section.act,
        "stderr": gram.stderr,
    });
    let sidecar_file =
        write_text_file(out_dir, "kernel_gram.json", &serde_json::to_string_pretty(&sidecar)?)?;
    let manifest = ExperimentManifest::new(
        "kernel",
        serde_json::to_value(section)?,
        vec![csv_file, sidecar_file],
    );
    let path = manifest.write(out_dir)?;
    println!("{}", out_dir.join("kernel_gram.csv").display());
    println!("{}", path.display());
    Ok(manifest)
}

/// Dispatches one sweep by name. With `skip_existing`, a sweep whose
/// manifest exists and whose outputs all match their digests is skipped.
pub fn cmd_sweep(
    name: &str,
    cfg: &CliConfig,
    out_dir: &Path,
    skip_existing: bool,
) -> Result<()> {
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let manifest_name = match name {
        "width" => "width_sweep",
        "iterations" => "iterations_sweep",
        "memory" => "memory_sweep",
        "sgd" => "sgd_vs_gd",
        other => {
            return Err(Error::config(format!(
                "unknown sweep '{other}' (expected width, iterations, memory or sgd)"
            )))
        }
    };
    if skip_existing {
        let manifest_path = out_dir.join(format!("{manifest_name}.manifest.json"));
        if let Ok(manifest) = ExperimentManifest::load(&manifest_path) {
            if manifest.outputs_match(out_dir) {
                println!("skip: {} outputs match their digests", manifest_name);
                return Ok(());
            }
        }
    }
    let manifest = match name {
        "width" => sweep_width(&sweep.width.unwrap_or_default(), out_dir)?,
        "iterations" => sweep_iterations(&sweep.iterations.unwrap_or_default(), out_dir)?,
        "memory" => sweep_memory(&sweep.memory.unwrap_or_default(), out_dir)?,
        "sgd" => sweep_sgd_vs_gd(&sweep.sgd.unwrap_or_default(), out_dir)?,
        _ => unreachable!(),
    };
    for out in &manifest.outputs {
        println!("{}", out_dir.join(&out.path).display());
    }
    println!("{}", out_dir.join(format!("{manifest_name}.manifest.json")).display());
    Ok(())
}

/// Generates a dataset and writes `<name>.json` / `<name>.csv`.
pub fn cmd_dataset_generate(section: &DatasetSection, out_dir: &Path) -> Result<()> {
    let ds = make_dataset(&section.teacher, section.n, section.d, section.t_len, section.seed)?;
    std::fs::create_dir_all(out_dir)?;
    let base = out_dir.join(&section.name);
    save_dataset(&ds, &base)?;
    let csv_digest = sha256_hex(&std::fs::read(base.with_extension("csv"))?);
    println!("{}", base.with_extension("json").display());
    println!("{}", base.with_extension("csv").display());
    println!("sha256(csv) = {csv_digest}");
    Ok(())
}

/// Loads a dataset and prints its metadata plus simple label statistics.
pub fn cmd_dataset_inspect(base: &Path) -> Result<()> {
    let ds = load_dataset(base)?;
    if let Some(meta) = &ds.meta {
        println!("{}", serde_json::to_string_pretty(meta)?);
    }
    let mut max_abs: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for (_, y) in ds.samples() {
        for v in y {
            max_abs = max_abs.max(v.abs());
            sum_sq += v * v;
            count += 1;
        }
    }
    println!("samples = {}", ds.len());
    println!("labels: max |y| = {max_abs}, mean y^2 = {}", sum_sq / count as f64);
    Ok(())
}
