//! Target dynamical systems realized through transportation mappings.
//!
//! A teacher is the expectation, over a random single neuron
//! `(w0, u0, c0)` with `w0` a scaled sign, `u0` standard Gaussian and `c0`
//! a sign, of
//!
//! ```text
//! v_w(w0) * dh_t/dw + <v_u(u0), dh_t/du> + h_t * v_c(c0)
//! ```
//!
//! where `h` is the single-neuron hidden recursion and the derivative
//! factors are the same forward-mode recursions the network itself uses.
//! The expectation has no closed form; it is estimated by seeded
//! Monte-Carlo with a tracked standard error, and the estimate is
//! independent of thread count (fixed block reduction).
//!
//! The sup-norms of `(v_w, v_u, v_c)` bound the complexity of the target;
//! the transported parameter construction moves each neuron of a
//! symmetric initialization by `v(phi_i(0)) / sqrt(m)`, landing inside the
//! max-norm region of radius `nu` and approximating the teacher as the
//! width grows.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::bounds::NuBudget;
use crate::error::{Error, Result};
use crate::init::draw_input;
use crate::input::InputSequence;
use crate::params::RnnParams;
use crate::rng::{subseed, substream};

/// Monte-Carlo draws per reduction block; fixed so that the block
/// partition, and therefore the rounded result, never depends on the
/// thread count.
const MC_BLOCK: usize = 4096;

/// Transport maps from the benchmark family: constant maps on the
/// recurrent weight and readout, and an input-weight map combining a
/// radially clipped identity with a constant direction,
///
/// ```text
/// v_u(u) = u_radial * u / max(1, |u|) + u_const * (1,..,1)/sqrt(d).
/// ```
///
/// Sup-norm certificates are immediate: `|v_w| = |w_const|`,
/// `|v_c| = |c_const|`, `|v_u| <= |u_radial| + |u_const|`.
///
/// The constant direction matters for odd activations: there, the hidden
/// state and its recurrent derivative are odd functions of the Gaussian
/// input weights while the radial map is odd too, so the purely
/// constant/radial maps average to the zero teacher. The even `u_const`
/// component survives the average and produces non-degenerate targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportMap {
    pub w_const: f64,
    pub c_const: f64,
    pub u_radial: f64,
    #[serde(default)]
    pub u_const: f64,
}

impl TransportMap {
    pub const ZERO: TransportMap =
        TransportMap { w_const: 0.0, c_const: 0.0, u_radial: 0.0, u_const: 0.0 };

    /// Constant maps on the recurrent weight and readout only.
    pub fn constant(a: f64, b: f64) -> Self {
        TransportMap { w_const: a, c_const: b, u_radial: 0.0, u_const: 0.0 }
    }

    pub fn v_w(&self, _w0: f64) -> f64 {
        self.w_const
    }

    pub fn v_c(&self, _c0: f64) -> f64 {
        self.c_const
    }

    /// Writes `v_u(u0)` into `out`.
    pub fn v_u(&self, u0: &[f64], out: &mut [f64]) {
        let norm = u0.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = self.u_radial / norm.max(1.0);
        let even = self.u_const / (u0.len() as f64).sqrt();
        for (o, x) in out.iter_mut().zip(u0) {
            *o = x * scale + even;
        }
    }

    /// Certified sup-norm budget `(nu_w, nu_u, nu_c)`.
    pub fn nu(&self) -> NuBudget {
        NuBudget {
            w: self.w_const.abs(),
            u: self.u_radial.abs() + self.u_const.abs(),
            c: self.c_const.abs(),
        }
    }
}

/// A teacher: transport map, initialization scale, activation, and the
/// Monte-Carlo budget and seed used whenever it is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherSpec {
    pub map: TransportMap,
    pub alpha: f64,
    pub act: Activation,
    pub mc_samples: usize,
    pub seed: u64,
}

/// Monte-Carlo estimate of the teacher output at one time index.
pub fn teacher_eval(spec: &TeacherSpec, x: &InputSequence, t: usize) -> Result<f64> {
    if t == 0 || t > x.t_len() {
        return Err(Error::TimeIndex { t, t_len: x.t_len() });
    }
    Ok(teacher_eval_all(spec, x)?[t - 1])
}

/// Teacher outputs for every `t = 1..=T` from one Monte-Carlo pass.
pub fn teacher_eval_all(spec: &TeacherSpec, x: &InputSequence) -> Result<Vec<f64>> {
    Ok(teacher_eval_detailed(spec, x)?.0)
}

/// Teacher outputs plus per-`t` standard errors of the estimate.
pub fn teacher_eval_detailed(spec: &TeacherSpec, x: &InputSequence) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.mc_samples == 0 {
        return Err(Error::config("mc_samples must be at least 1"));
    }
    let t_len = x.t_len();
    let d = x.d();
    let n = spec.mc_samples;
    let n_blocks = n.div_ceil(MC_BLOCK);
    // One (sum, sum of squares) pair per t per block, folded in block order.
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(n);
            let mut rng = substream(spec.seed, "teacher-mc", b as u64);
            let mut sums = vec![0.0; t_len];
            let mut sq = vec![0.0; t_len];
            let mut u0 = vec![0.0; d];
            let mut vu = vec![0.0; d];
            let mut scratch = NeuronScratch::new(d);
            for _ in lo..hi {
                let w0 = if rng.random::<bool>() { spec.alpha } else { -spec.alpha };
                for v in u0.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let c0: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let vw = spec.map.v_w(w0);
                spec.map.v_u(&u0, &mut vu);
                let vc = spec.map.v_c(c0);
                scratch.reset();
                for step in 1..=t_len {
                    scratch.advance(w0, &u0, x.column(step - 1), spec.act);
                    let mut z = vw * scratch.gw + vc * scratch.h;
                    for k in 0..d {
                        z += vu[k] * scratch.gu[k];
                    }
                    sums[step - 1] += z;
                    sq[step - 1] += z * z;
                }
            }
            (sums, sq)
        })
        .collect();
    let mut sums = vec![0.0; t_len];
    let mut sq = vec![0.0; t_len];
    for (s, q) in &partials {
        for t in 0..t_len {
            sums[t] += s[t];
            sq[t] += q[t];
        }
    }
    let nf = n as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / nf).collect();
    let stderrs: Vec<f64> = means
        .iter()
        .zip(&sq)
        .map(|(mean, q)| {
            if n < 2 {
                f64::INFINITY
            } else {
                let var = ((q - nf * mean * mean) / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            }
        })
        .collect();
    Ok((means, stderrs))
}

/// Single-neuron hidden state and its forward-mode derivatives; shared by
/// the teacher integrand and the kernel integrands.
pub(crate) struct NeuronScratch {
    pub h: f64,
    /// dh/dw
    pub gw: f64,
    /// dh/du
    pub gu: Vec<f64>,
}

impl NeuronScratch {
    pub fn new(d: usize) -> Self {
        NeuronScratch { h: 0.0, gw: 0.0, gu: vec![0.0; d] }
    }

    pub fn reset(&mut self) {
        self.h = 0.0;
        self.gw = 0.0;
        self.gu.fill(0.0);
    }

    /// One step of the recursions with input column `col`.
    pub fn advance(&mut self, w0: f64, u0: &[f64], col: &[f64], act: Activation) {
        let mut z = w0 * self.h;
        for (u, x) in u0.iter().zip(col) {
            z += u * x;
        }
        let (value, ifac) = act.eval_and_deriv(z);
        self.gw = (self.h + w0 * self.gw) * ifac;
        for (g, x) in self.gu.iter_mut().zip(col) {
            *g = (w0 * *g + x) * ifac;
        }
        self.h = value;
    }
}

/// The transported parameter: each neuron of a symmetric initialization is
/// moved by `(c_i(0) v_w(w_i(0)), c_i(0) v_u(u_i(0)), v_c(c_i(0))) / sqrt(m)`.
/// Per-neuron displacements are bounded by `nu / sqrt(m)` componentwise.
pub fn transported_params(spec: &TeacherSpec, params0: &RnnParams) -> Result<RnnParams> {
    for &w in params0.w() {
        if w.abs() != spec.alpha {
            return Err(Error::AlphaMismatch { spec: spec.alpha, params: w.abs() });
        }
    }
    let m = params0.m();
    let d = params0.d();
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let mut w = params0.w().to_vec();
    let mut u = params0.u().to_vec();
    let mut c = params0.c().to_vec();
    let mut vu = vec![0.0; d];
    for i in 0..m {
        let c0 = params0.c()[i];
        w[i] += c0 * spec.map.v_w(params0.w()[i]) * inv_sqrt_m;
        spec.map.v_u(params0.u_row(i), &mut vu);
        for k in 0..d {
            u[i * d + k] += c0 * vu[k] * inv_sqrt_m;
        }
        c[i] += spec.map.v_c(c0) * inv_sqrt_m;
    }
    RnnParams::new(w, u, c, d)
}

/// Metadata stored alongside a generated dataset; enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub n: usize,
    pub d: usize,
    pub t_len: usize,
    pub seed: u64,
    pub teacher: TeacherSpec,
    pub nu: [f64; 3],
    pub input_distribution: String,
}

/// A labeled dataset: inputs with per-step labels from a teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<(InputSequence, Vec<f64>)>,
    d: usize,
    t_len: usize,
    pub meta: Option<DatasetMeta>,
}

impl Dataset {
    pub fn from_samples(samples: Vec<(InputSequence, Vec<f64>)>) -> Result<Self> {
        let (first, rest) = samples.split_first().ok_or(Error::EmptyDataset)?;
        let d = first.0.d();
        let t_len = first.0.t_len();
        for (x, y) in std::iter::once(first).chain(rest) {
            if x.d() != d || x.t_len() != t_len || y.len() != t_len {
                return Err(Error::config("inconsistent sample shapes in dataset"));
            }
        }
        Ok(Dataset { samples, d, t_len, meta: None })
    }

    pub fn samples(&self) -> &[(InputSequence, Vec<f64>)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }
}

/// Draws `n` inputs and labels them with the teacher. Labels use a fixed
/// per-sample Monte-Carlo sub-seed derived from `(seed, sample index)`, so
/// the dataset is reproducible and sample `j` is independent of `n`.
pub fn make_dataset(
    spec: &TeacherSpec,
    n: usize,
    d: usize,
    t_len: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let samples: Vec<(InputSequence, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<_> {
            let x = draw_input(d, t_len, seed, j as u64)?;
            let label_spec = TeacherSpec { seed: subseed(seed, "labels", j as u64), ..*spec };
            let y = teacher_eval_all(&label_spec, &x)?;
            Ok((x, y))
        })
        .collect::<Result<_>>()?;
    let nu = spec.map.nu();
    let mut ds = Dataset::from_samples(samples)?;
    ds.meta = Some(DatasetMeta {
        n,
        d,
        t_len,
        seed,
        teacher: *spec,
        nu: [nu.w, nu.u, nu.c],
        input_distribution: "unit-sphere-direction-times-uniform-radius".to_string(),
    });
    Ok(ds)
}

/// Writes `<base>.json` (metadata) and `<base>.csv` (payload). One CSV row
/// per `(sample, t)` holding the input column and the label; floats are
/// written in shortest round-trip form, so a load reproduces the dataset
/// bit for bit.
pub fn save_dataset(ds: &Dataset, base: &std::path::Path) -> Result<()> {
    let meta = ds.meta.as_ref().ok_or_else(|| {
        Error::config("dataset has no metadata; only generated datasets can be saved")
    })?;
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(base.with_extension("json"), json)?;
    let mut csv = String::from("sample,t");
    for k in 0..ds.d() {
        csv.push_str(&format!(",x{k}"));
    }
    csv.push_str(",y\n");
    for (j, (x, y)) in ds.samples().iter().enumerate() {
        for t in 0..ds.t_len() {
            csv.push_str(&format!("{j},{t}"));
            for v in x.column(t) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push_str(&format!(",{}\n", y[t]));
        }
    }
    std::fs::write(base.with_extension("csv"), csv)?;
    Ok(())
}

/// Loads a dataset written by [`save_dataset`].
pub fn load_dataset(base: &std::path::Path) -> Result<Dataset> {
    let meta: DatasetMeta =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json"))?)?;
    let csv = std::fs::read_to_string(base.with_extension("csv"))?;
    let mut lines = csv.lines();
    let header = lines.next().ok_or_else(|| Error::config("empty dataset csv"))?;
    let expected_cols = 3 + meta.d;
    if header.split(',').count() != expected_cols {
        return Err(Error::config("dataset csv header does not match metadata"));
    }
    let mut data = vec![vec![0.0; meta.d * meta.t_len]; meta.n];
    let mut labels = vec![vec![0.0; meta.t_len]; meta.n];
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::config(format!("bad dataset csv row: {line}")));
        }
        let j: usize = fields[0]
            .parse()
            .map_err(|_| Error::config("bad sample index in dataset csv"))?;
        let t: usize = fields[1]
            .parse()
            .map_err(|_| Error::config("bad time index in dataset csv"))?;
        if j >= meta.n || t >= meta.t_len {
            return Err(Error::config("dataset csv index out of range"));
        }
        for k in 0..meta.d {
            data[j][t * meta.d + k] = fields[2 + k]
                .parse()
                .map_err(|_| Error::config("bad input value in dataset csv"))?;
        }
        labels[j][t] = fields[2 + meta.d]
            .parse()
            .map_err(|_| Error::config("bad label value in dataset csv"))?;
    }
    let samples: Vec<(InputSequence, Vec<f64>)> = data
        .into_iter()
        .zip(labels)
        .map(|(d_vec, y)| Ok((InputSequence::new(d_vec, meta.d, meta.t_len)?, y)))
        .collect::<Result<_>>()?;
    let mut ds = Dataset::from_samples(samples)?;
    ds.meta = Some(meta);
    Ok(ds)
}
