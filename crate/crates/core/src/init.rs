//! Symmetric random initialization and seeded input sampling.
//!
//! The initialization draws the first `m/2` neurons independently
//! (`c_i` a random sign, `w_i` a random sign times `alpha`, `u_i` standard
//! Gaussian) and mirrors them into the second half with the readout sign
//! flipped. Mirrored pairs cancel exactly in the network output, so the
//! freshly initialized network is identically zero.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::InputSequence;
use crate::params::RnnParams;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InitConfig {
    /// Width; must be even.
    pub m: usize,
    pub d: usize,
    /// Scale of the recurrent weights: `w_i` is drawn from `{-alpha, +alpha}`.
    pub alpha: f64,
    pub seed: u64,
}

/// Draws a symmetric random initialization. Deterministic given the seed;
/// neuron `i < m/2` uses its own sub-stream, so the first half of a width-`2m`
/// draw does not coincide with a width-`m` draw only by accident of ordering.
pub fn symmetric_init(cfg: &InitConfig) -> Result<RnnParams> {
    if cfg.m == 0 || cfg.m % 2 != 0 {
        return Err(Error::config(format!(
            "symmetric initialization needs even m, got {}",
            cfg.m
        )));
    }
    if cfg.alpha < 0.0 {
        return Err(Error::config("alpha must be nonnegative"));
    }
    let half = cfg.m / 2;
    let mut w = vec![0.0; cfg.m];
    let mut u = vec![0.0; cfg.m * cfg.d];
    let mut c = vec![0.0; cfg.m];
    for i in 0..half {
        let mut rng = substream(cfg.seed, "init-neuron", i as u64);
        c[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        w[i] = if rng.random::<bool>() { cfg.alpha } else { -cfg.alpha };
        for k in 0..cfg.d {
            u[i * cfg.d + k] = rng.sample(StandardNormal);
        }
        // Mirror half: exact copies with the readout sign flipped.
        c[half + i] = -c[i];
        w[half + i] = w[i];
        for k in 0..cfg.d {
            u[(half + i) * cfg.d + k] = u[i * cfg.d + k];
        }
    }
    RnnParams::new(w, u, c, cfg.d)
}

/// Draws `n` input sequences. Each column is a uniform direction on the unit
/// sphere scaled by an independent uniform radius in `[0, 1]`, so the
/// unit-norm constraint holds by construction. Sample `j` depends only on
/// `(seed, j)`, never on `n`.
pub fn draw_inputs(n: usize, d: usize, t_len: usize, seed: u64) -> Result<Vec<InputSequence>> {
    if n == 0 || d == 0 || t_len == 0 {
        return Err(Error::config("draw_inputs needs n, d, T >= 1"));
    }
    (0..n).map(|j| draw_input(d, t_len, seed, j as u64)).collect()
}

/// Single input sequence from the sub-stream `(seed, "input", index)`.
pub fn draw_input(d: usize, t_len: usize, seed: u64, index: u64) -> Result<InputSequence> {
    let mut rng = substream(seed, "input", index);
    let mut data = vec![0.0; d * t_len];
    for t in 0..t_len {
        let col = &mut data[t * d..(t + 1) * d];
        let mut norm_sq = 0.0f64;
        for x in col.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm_sq += *x * *x;
        }
        let norm = norm_sq.sqrt();
        let radius: f64 = rng.random_range(0.0..1.0);
        if norm < 1e-300 {
            // A zero Gaussian vector has probability zero; fall back to e_1.
            col.fill(0.0);
            col[0] = radius;
        } else {
            let scale = radius / norm;
            for x in col.iter_mut() {
                *x *= scale;
            }
        }
    }
    InputSequence::new(data, d, t_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_identity_is_bitwise() {
        let cfg = InitConfig { m: 64, d: 3, alpha: 0.4, seed: 5 };
        let p = symmetric_init(&cfg).unwrap();
        let half = cfg.m / 2;
        for i in 0..half {
            assert_eq!(p.w()[i].to_bits(), p.w()[half + i].to_bits());
            assert_eq!(p.c()[i], -p.c()[half + i]);
            assert_eq!(p.u_row(i), p.u_row(half + i));
        }
    }

    #[test]
    fn recurrent_weights_have_exact_magnitude_alpha() {
        let cfg = InitConfig { m: 32, d: 2, alpha: 0.7, seed: 1 };
        let p = symmetric_init(&cfg).unwrap();
        for &wi in p.w() {
            assert_eq!(wi.abs(), 0.7);
        }
    }

    #[test]
    fn alpha_zero_gives_zero_recurrence() {
        let cfg = InitConfig { m: 8, d: 2, alpha: 0.0, seed: 3 };
        let p = symmetric_init(&cfg).unwrap();
        assert!(p.w().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let cfg = InitConfig { m: 16, d: 4, alpha: 0.3, seed: 42 };
        let a = symmetric_init(&cfg).unwrap();
        let b = symmetric_init(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn odd_width_rejected() {
        let cfg = InitConfig { m: 5, d: 1, alpha: 0.1, seed: 0 };
        assert!(symmetric_init(&cfg).is_err());
    }

    #[test]
    fn init_distribution_sanity() {
        // Over many seeds: mean of w ~ 0, u entries pass a coarse normality
        // check (mean within ±0.05, variance within ±0.05 at 1e4 draws).
        let mut w_sum = 0.0;
        let mut u_sum = 0.0;
        let mut u_sq = 0.0;
        let mut n_u = 0usize;
        let mut n_w = 0usize;
        for seed in 0..100 {
            let cfg = InitConfig { m: 40, d: 5, alpha: 1.0, seed };
            let p = symmetric_init(&cfg).unwrap();
            for i in 0..20 {
                w_sum += p.w()[i];
                n_w += 1;
                for &x in p.u_row(i) {
                    u_sum += x;
                    u_sq += x * x;
                    n_u += 1;
                }
            }
        }
        assert!(n_u >= 10_000);
        let w_mean = w_sum / n_w as f64;
        let u_mean = u_sum / n_u as f64;
        let u_var = u_sq / n_u as f64 - u_mean * u_mean;
        assert!(w_mean.abs() < 0.1, "w mean {w_mean}");
        assert!(u_mean.abs() < 0.05, "u mean {u_mean}");
        assert!((u_var - 1.0).abs() < 0.05, "u var {u_var}");
    }

    #[test]
    fn inputs_are_unit_bounded_and_deterministic() {
        let a = draw_inputs(20, 3, 5, 9).unwrap();
        let b = draw_inputs(20, 3, 5, 9).unwrap();
        assert_eq!(a, b);
        for x in &a {
            for t in 0..x.t_len() {
                let norm: f64 = x.column(t).iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(norm <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn growing_n_preserves_prefix() {
        let a = draw_inputs(4, 2, 3, 13).unwrap();
        let b = draw_inputs(9, 2, 3, 13).unwrap();
        assert_eq!(&a[..], &b[..4]);
    }

    #[test]
    fn mean_column_norm_matches_uniform_radius() {
        // Radius ~ U[0,1] so the mean column norm is 0.5 (±0.02 at 1000 draws).
        let xs = draw_inputs(1000, 3, 1, 2024).unwrap();
        let mean: f64 = xs
            .iter()
            .map(|x| x.column(0).iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean norm {mean}");
    }
}
