use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use diagrnn::bounds::BoundInputs;
use diagrnn::cli::config::{CliConfig, KernelMode};
use diagrnn::cli::{self, resolve_out_dir};
use diagrnn::error::Error;
use diagrnn::training::Variant;

/// Numerical laboratory for diagonal recurrent networks: seeded training
/// runs, analytic bound reports, tangent-kernel Gram matrices, experiment
/// sweeps and dataset tooling.
#[derive(Parser)]
#[command(name = "diagrnn", version, about)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $DIAGRNN_OUT_DIR or ./out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Master seed override applied to every section.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Outputs are identical at any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one training job and write the report, history CSV and manifest.
    Train {
        /// Optimizer: gd, projected-gd or projected-sgd.
        #[arg(long)]
        variant: Option<String>,
        /// Iteration count override.
        #[arg(long)]
        tau: Option<usize>,
        /// Step size override (default: 1/(T*sqrt(tau))).
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Print every analytic constant for a configuration.
    Bounds {
        /// Target error for the projection-free plan.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble a kernel Gram matrix over a seeded probe set.
    Kernel {
        /// Evaluation mode: empirical or mc.
        #[arg(long)]
        mode: Option<String>,
        /// Network width for empirical mode.
        #[arg(long)]
        m: Option<usize>,
        /// Monte-Carlo budget for mc mode.
        #[arg(long)]
        n_samples: Option<usize>,
        /// Kernel time index.
        #[arg(long)]
        t: Option<usize>,
        /// Number of probe points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run an experiment sweep: width, iterations, memory or sgd.
    Sweep {
        /// Sweep name.
        name: String,
        /// Skip when the existing outputs match their manifest digests.
        #[arg(long)]
        skip_existing: bool,
    },
    /// Generate or inspect labeled datasets.
    Dataset {
        #[command(subcommand)]
        action: DatasetCmd,
    },
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Generate a dataset from the config's teacher.
    Generate {
        /// Sample count override.
        #[arg(long)]
        n: Option<usize>,
        /// Base name of the output files.
        #[arg(long)]
        name: Option<String>,
    },
    /// Print the metadata and label statistics of a saved dataset.
    Inspect {
        /// Base path (without extension) of the dataset files.
        base: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> diagrnn::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    let threads = if cli.threads > 0 { cli.threads } else { cfg.threads };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(format!("cannot configure {threads} threads: {e}")))?;
    }
    let out_dir = resolve_out_dir(cli.out_dir.clone(), &cfg);

    match cli.command {
        Command::Train { variant, tau, eta } => {
            let mut section = cfg.train.clone().unwrap_or_default();
            if let Some(v) = variant {
                section.variant = Variant::from_name(&v)?;
                if matches!(section.variant, Variant::Gd) {
                    section.rho = None;
                }
            }
            if let Some(tau) = tau {
                section.tau = tau;
            }
            if let Some(eta) = eta {
                section.eta = Some(eta);
            }
            if let Some(seed) = cli.seed {
                section.seed = seed;
            }
            cli::cmd_train(&section, &out_dir)?;
        }
        Command::Bounds { epsilon, format, out } => {
            let mut inputs = cfg.bounds.unwrap_or_else(default_bound_inputs);
            if let Some(eps) = epsilon {
                inputs.epsilon = eps;
            }
            cli::cmd_bounds(&inputs, matches!(format, Format::Text), out.as_deref())?;
        }
        Command::Kernel { mode, m, n_samples, t, points } => {
            let mut section = cfg.kernel.clone().unwrap_or_default();
            if let Some(mode) = mode {
                section.mode = match mode.as_str() {
                    "empirical" => KernelMode::Empirical,
                    "mc" => KernelMode::Mc,
                    other => {
                        return Err(Error::config(format!(
                            "unknown kernel mode '{other}' (expected empirical or mc)"
                        )))
                    }
                };
            }
            if let Some(m) = m {
                section.m = m;
            }
            if let Some(n) = n_samples {
                section.n_samples = n;
            }
            if let Some(t) = t {
                section.t = t;
            }
            if let Some(p) = points {
                section.points = p;
            }
            cli::cmd_kernel(&section, &out_dir)?;
        }
        Command::Sweep { name, skip_existing } => {
            cli::cmd_sweep(&name, &cfg, &out_dir, skip_existing)?;
        }
        Command::Dataset { action } => match action {
            DatasetCmd::Generate { n, name } => {
                let mut section = cfg.dataset.clone().unwrap_or_default();
                if let Some(n) = n {
                    section.n = n;
                }
                if let Some(name) = name {
                    section.name = name;
                }
                cli::cmd_dataset_generate(&section, &out_dir)?;
            }
            DatasetCmd::Inspect { base } => {
                cli::cmd_dataset_inspect(&base)?;
            }
        },
    }
    Ok(())
}

fn default_bound_inputs() -> BoundInputs {
    BoundInputs {
        sigma0: 1.0,
        sigma1: 1.0,
        sigma2: diagrnn::activation::TANH_SIGMA2,
        alpha: 0.3,
        rho: diagrnn::training::ProjectionRadii { w: 0.9, u: 0.9, c: 0.9 },
        nu: diagrnn::bounds::NuBudget { w: 0.4, u: 0.5, c: 0.4 },
        m: 4096,
        d: 3,
        t_len: 6,
        n: 32,
        delta: 0.05,
        tau: 256,
        epsilon: 0.1,
    }
}
