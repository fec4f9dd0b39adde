//! The tangent kernel of the model: the finite-width empirical kernel is
//! the inner product of output gradients at a symmetric initialization,
//! and its infinite-width limit splits into recurrent, input and readout
//! parts. Each part is the expectation over a random single neuron of a
//! product of forward-mode derivative factors, estimated here by seeded
//! Monte-Carlo with a tracked standard error.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::input::InputSequence;
use crate::params::RnnParams;
use crate::rng::substream;
use crate::rnn::{hidden_forward, output_gradients};
use crate::teacher::NeuronScratch;

const MC_BLOCK: usize = 4096;

/// A Monte-Carlo kernel estimate with its sampling uncertainty.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub t: usize,
}

/// Finite-width kernel
/// `sum_i <dF_t(x)/dphi_i, dF_t(x')/dphi_i>` at the given parameters.
/// Symmetric in its two inputs bitwise (per-term products commute and the
/// summation order is fixed).
pub fn empirical_kernel(
    params0: &RnnParams,
    x: &InputSequence,
    x_prime: &InputSequence,
    act: Activation,
    t: usize,
) -> Result<f64> {
    if x.d() != x_prime.d() || x.t_len() != x_prime.t_len() {
        return Err(Error::DimensionMismatch {
            what: "kernel input shapes",
            expected: x.d(),
            got: x_prime.d(),
        });
    }
    let traj_a = hidden_forward(params0, x, act)?;
    let traj_b = hidden_forward(params0, x_prime, act)?;
    let ga = output_gradients(params0, &traj_a, x, t)?;
    let gb = output_gradients(params0, &traj_b, x_prime, t)?;
    let mut sum = 0.0;
    for i in 0..params0.m() {
        let ra = ga.theta_row(i);
        let rb = gb.theta_row(i);
        let mut acc = 0.0;
        for k in 0..ra.len() {
            acc += ra[k] * rb[k];
        }
        acc += ga.d_c[i] * gb.d_c[i];
        sum += acc;
    }
    Ok(sum)
}

/// Monte-Carlo estimates of the three limiting kernel parts at a single
/// time index: `(input part, recurrent part, readout part)`.
pub fn mc_kernel(
    alpha: f64,
    act: Activation,
    x: &InputSequence,
    x_prime: &InputSequence,
    t: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(KernelEstimate, KernelEstimate, KernelEstimate)> {
    let all = mc_kernel_multi(alpha, act, x, x_prime, &[t], n_samples, seed)?;
    Ok(all.into_iter().next().unwrap())
}

/// Monte-Carlo kernel estimates at several time indices from one pass.
///
/// Per draw, the integrands are products of the single-neuron forward-mode
/// derivatives: input part `<du h_t(x), du h_t(x')>`, recurrent part
/// `dw h_t(x) * dw h_t(x')`, readout part `h_t(x) * h_t(x')`.
pub fn mc_kernel_multi(
    alpha: f64,
    act: Activation,
    x: &InputSequence,
    x_prime: &InputSequence,
    ts: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(KernelEstimate, KernelEstimate, KernelEstimate)>> {
    if n_samples < 2 {
        return Err(Error::config("kernel Monte-Carlo needs at least 2 samples"));
    }
    if x.d() != x_prime.d() || x.t_len() != x_prime.t_len() {
        return Err(Error::DimensionMismatch {
            what: "kernel input shapes",
            expected: x.d(),
            got: x_prime.d(),
        });
    }
    let t_len = x.t_len();
    for &t in ts {
        if t == 0 || t > t_len {
            return Err(Error::TimeIndex { t, t_len });
        }
    }
    let d = x.d();
    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    // Three (sum, sumsq) accumulators per requested t, folded in block order.
    let width = ts.len() * 3;
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(n_samples);
            let mut rng = substream(seed, "kernel-mc", b as u64);
            let mut sums = vec![0.0; width];
            let mut sq = vec![0.0; width];
            let mut u0 = vec![0.0; d];
            let mut a = NeuronScratch::new(d);
            let mut bscr = NeuronScratch::new(d);
            for _ in lo..hi {
                let w0 = if rng.random::<bool>() { alpha } else { -alpha };
                for v in u0.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                a.reset();
                bscr.reset();
                for step in 1..=t_len {
                    a.advance(w0, &u0, x.column(step - 1), act);
                    bscr.advance(w0, &u0, x_prime.column(step - 1), act);
                    if let Some(pos) = ts.iter().position(|&t| t == step) {
                        let mut ku = 0.0;
                        for k in 0..d {
                            ku += a.gu[k] * bscr.gu[k];
                        }
                        let kw = a.gw * bscr.gw;
                        let kc = a.h * bscr.h;
                        for (slot, v) in [(0, ku), (1, kw), (2, kc)] {
                            let idx = pos * 3 + slot;
                            sums[idx] += v;
                            sq[idx] += v * v;
                        }
                    }
                }
            }
            (sums, sq)
        })
        .collect();
    let mut sums = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for (s, q) in &partials {
        for k in 0..width {
            sums[k] += s[k];
            sq[k] += q[k];
        }
    }
    let nf = n_samples as f64;
    let estimate = |idx: usize, t: usize| {
        let mean = sums[idx] / nf;
        let var = ((sq[idx] - nf * mean * mean) / (nf - 1.0)).max(0.0);
        KernelEstimate { value: mean, stderr: (var / nf).sqrt(), n_samples, t }
    };
    Ok(ts
        .iter()
        .enumerate()
        .map(|(pos, &t)| {
            (
                estimate(pos * 3, t),
                estimate(pos * 3 + 1, t),
                estimate(pos * 3 + 2, t),
            )
        })
        .collect())
}

/// How a Gram matrix is evaluated.
#[derive(Debug, Clone)]
pub enum GramMode<'a> {
    /// Finite-width kernel at the given initialization.
    Empirical { params: &'a RnnParams },
    /// Monte-Carlo limit estimate.
    MonteCarlo { alpha: f64, n_samples: usize, seed: u64 },
}

/// A symmetric Gram matrix; Monte-Carlo mode carries per-entry standard
/// errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramMatrix {
    pub size: usize,
    pub t: usize,
    /// Row-major `size x size`, exactly symmetric.
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    /// "empirical" or "mc", with the size parameter (m or sample count).
    pub mode: String,
    pub mode_param: usize,
    pub seed: Option<u64>,
}

impl GramMatrix {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// CSV rendering (header row `k0,k1,...`).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = (0..self.size).map(|j| format!("k{j}")).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for i in 0..self.size {
            let row: Vec<String> =
                (0..self.size).map(|j| format!("{}", self.at(i, j))).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Assembles the Gram matrix of a point set at one time index. Only the
/// upper triangle is computed; the lower is mirrored, so the matrix is
/// exactly symmetric. Entries are independent tasks.
pub fn kernel_gram(
    points: &[InputSequence],
    t: usize,
    mode: &GramMode<'_>,
    act: Activation,
) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::config("kernel_gram needs at least one point"));
    }
    let k = points.len();
    let pairs: Vec<(usize, usize)> =
        (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let entries: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<(f64, f64)> {
            match mode {
                GramMode::Empirical { params } => {
                    Ok((empirical_kernel(params, &points[i], &points[j], act, t)?, 0.0))
                }
                GramMode::MonteCarlo { alpha, n_samples, seed } => {
                    // Entry-specific sub-stream, stable under matrix growth.
                    let entry_seed =
                        crate::rng::subseed(*seed, "gram-entry", (i * k + j) as u64);
                    let (u, w, c) = mc_kernel(
                        *alpha,
                        act,
                        &points[i],
                        &points[j],
                        t,
                        *n_samples,
                        entry_seed,
                    )?;
                    let value = u.value + w.value + c.value;
                    let se = (u.stderr * u.stderr + w.stderr * w.stderr + c.stderr * c.stderr)
                        .sqrt();
                    Ok((value, se))
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; k * k];
    let mut stderr = vec![0.0; k * k];
    for (&(i, j), &(v, se)) in pairs.iter().zip(&entries) {
        values[i * k + j] = v;
        values[j * k + i] = v;
        stderr[i * k + j] = se;
        stderr[j * k + i] = se;
    }
    let (mode_name, mode_param, seed) = match mode {
        GramMode::Empirical { params } => ("empirical".to_string(), params.m(), None),
        GramMode::MonteCarlo { n_samples, seed, .. } => {
            ("mc".to_string(), *n_samples, Some(*seed))
        }
    };
    Ok(GramMatrix {
        size: k,
        t,
        values,
        stderr: if mode_name == "mc" { Some(stderr) } else { None },
        mode: mode_name,
        mode_param,
        seed,
    })
}
