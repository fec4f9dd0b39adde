//! CLI configuration file schema. JSON with every section optional;
//! unknown keys anywhere are a hard error so typos cannot silently fall
//! back to defaults. Flags override file values; the merged effective
//! configuration is echoed into each run's manifest.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::bounds::BoundInputs;
use crate::error::{Error, Result};
use crate::experiments::{
    IterationsSweepConfig, MemorySweepConfig, SgdSweepConfig, WidthSweepConfig,
};
use crate::teacher::{TeacherSpec, TransportMap};
use crate::training::{ProjectionRadii, Variant};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    /// Master seed override applied to every section when set.
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    pub threads: usize,
    pub out_dir: Option<PathBuf>,
    pub train: Option<TrainSection>,
    pub bounds: Option<BoundInputs>,
    pub kernel: Option<KernelSection>,
    pub sweep: Option<SweepSection>,
    pub dataset: Option<DatasetSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub variant: Variant,
    pub m: usize,
    pub d: usize,
    pub t_len: usize,
    pub n: usize,
    pub alpha: f64,
    pub act: Activation,
    pub map: TransportMap,
    pub mc_samples: usize,
    /// Projection radii; required by the projected variants.
    pub rho: Option<ProjectionRadii>,
    /// Step size; defaults to `1/(T sqrt(tau))` when omitted.
    pub eta: Option<f64>,
    pub tau: usize,
    pub record_every: usize,
    /// When set, monitor displacement thresholds from the projection-free
    /// plan at this target error.
    pub exit_epsilon: Option<f64>,
    pub seed: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            variant: Variant::ProjectedGd,
            m: 1024,
            d: 3,
            t_len: 6,
            n: 32,
            alpha: 0.3,
            act: Activation::Tanh,
            map: TransportMap { w_const: 0.4, c_const: 0.4, u_radial: 0.2, u_const: 0.3 },
            mc_samples: 100_000,
            rho: Some(ProjectionRadii { w: 0.9, u: 0.9, c: 0.9 }),
            eta: None,
            tau: 64,
            record_every: 1,
            exit_epsilon: None,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Empirical,
    Mc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub mode: KernelMode,
    /// Width of the empirical kernel network.
    pub m: usize,
    /// Monte-Carlo budget for mc mode.
    pub n_samples: usize,
    pub alpha: f64,
    pub act: Activation,
    /// Number of probe inputs (the Gram matrix is points x points).
    pub points: usize,
    pub d: usize,
    pub t_len: usize,
    /// Time index of the kernel.
    pub t: usize,
    pub seed: u64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            mode: KernelMode::Empirical,
            m: 4096,
            n_samples: 1_000_000,
            alpha: 0.3,
            act: Activation::Tanh,
            points: 5,
            d: 3,
            t_len: 6,
            t: 6,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub width: Option<WidthSweepConfig>,
    pub iterations: Option<IterationsSweepConfig>,
    pub memory: Option<MemorySweepConfig>,
    pub sgd: Option<SgdSweepConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub n: usize,
    pub d: usize,
    pub t_len: usize,
    pub teacher: TeacherSpec,
    /// Base name of the output files (`<name>.json`, `<name>.csv`).
    pub name: String,
    pub seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            n: 32,
            d: 3,
            t_len: 6,
            teacher: TeacherSpec {
                map: TransportMap { w_const: 0.4, c_const: 0.4, u_radial: 0.2, u_const: 0.3 },
                alpha: 0.3,
                act: Activation::Tanh,
                mc_samples: 1_000_000,
                seed: 7,
            },
            name: "dataset".to_string(),
            seed: 7,
        }
    }
}

impl CliConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("invalid config {}: {e}", path.display())))
    }

    /// Applies the master seed override to every section seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        if let Some(train) = &mut self.train {
            train.seed = seed;
        }
        if let Some(kernel) = &mut self.kernel {
            kernel.seed = seed;
        }
        if let Some(dataset) = &mut self.dataset {
            dataset.seed = seed;
            dataset.teacher.seed = seed;
        }
        if let Some(sweep) = &mut self.sweep {
            if let Some(c) = &mut sweep.width {
                c.seed = seed;
            }
            if let Some(c) = &mut sweep.iterations {
                c.seed = seed;
            }
            if let Some(c) = &mut sweep.memory {
                c.seed = seed;
            }
            if let Some(c) = &mut sweep.sgd {
                c.seed = seed;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<CliConfig>(r#"{"sede": 7}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<CliConfig>(r#"{"train": {"alhpa": 0.3}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn empty_config_is_valid() {
        let cfg: CliConfig = serde_json::from_str("{}").unwrap();
        assert!(cfg.train.is_none());
    }

    #[test]
    fn seed_override_reaches_every_section() {
        let mut cfg: CliConfig = serde_json::from_str(
            r#"{"train": {}, "kernel": {}, "sweep": {"width": {}}}"#,
        )
        .unwrap();
        cfg.override_seed(42);
        assert_eq!(cfg.train.unwrap().seed, 42);
        assert_eq!(cfg.kernel.unwrap().seed, 42);
        assert_eq!(cfg.sweep.unwrap().width.unwrap().seed, 42);
    }
}
