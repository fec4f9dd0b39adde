//! Scripted, seeded experiment campaigns. Each sweep writes RFC-4180-style
//! CSV tables (header row, '.' decimal separator) plus a JSON manifest
//! holding the full configuration snapshot and SHA-256 digests of every
//! output file, so a run is reproducible from its manifest alone.

mod iterations;
mod manifest;
mod memory;
mod sgd;
mod width;

pub use iterations::{sweep_iterations, IterationsSweepConfig};
pub use manifest::{sha256_hex, write_text_file, ExperimentManifest, OutputFile};
pub use memory::{sweep_memory, MemorySweepConfig};
pub use sgd::{sweep_sgd_vs_gd, SgdSweepConfig};
pub use width::{sweep_width, WidthSweepConfig};

use serde::{Deserialize, Serialize};

/// Ordinary least squares on `(log x, log y)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of leading points dropped before fitting (transient regime).
    pub dropped: usize,
}

/// Fits `log y = slope * log x + intercept` after dropping the first
/// `drop` points. Points with non-positive `y` are skipped.
pub fn fit_loglog(points: &[(f64, f64)], drop: usize) -> LogLogFit {
    let data: Vec<(f64, f64)> = points
        .iter()
        .skip(drop)
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    fit_linear(&data, drop)
}

/// Linear fit of `log y` against plain `x` (exponential growth rate).
pub fn fit_semilog(points: &[(f64, f64)]) -> LogLogFit {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|(x, y)| (*x, y.ln()))
        .collect();
    fit_linear(&data, 0)
}

fn fit_linear(data: &[(f64, f64)], dropped: usize) -> LogLogFit {
    let n = data.len() as f64;
    if data.len() < 2 {
        return LogLogFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            r_squared: f64::NAN,
            dropped,
        };
    }
    let mean_x = data.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = data.iter().map(|(_, y)| y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in data {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    LogLogFit {
        slope,
        intercept: mean_y - slope * mean_x,
        r_squared: if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) },
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_recovers_a_power_law() {
        let points: Vec<(f64, f64)> =
            (1..=8).map(|k| (2f64.powi(k), 3.0 * 2f64.powi(k).powf(-0.5))).collect();
        let fit = fit_loglog(&points, 2);
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semilog_fit_recovers_an_exponential_rate() {
        let points: Vec<(f64, f64)> =
            (1..=10).map(|k| (k as f64, 0.7 * (0.4 * k as f64).exp())).collect();
        let fit = fit_semilog(&points);
        assert!((fit.slope - 0.4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits_are_nan_not_panic() {
        let fit = fit_loglog(&[(1.0, 1.0)], 0);
        assert!(fit.slope.is_nan());
    }
}
