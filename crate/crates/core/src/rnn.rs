//! The diagonal recurrent model: hidden-state evolution, network output,
//! exact forward-mode parameter gradients, and the linearized predictor.
//!
//! Because the hidden-to-hidden matrix is diagonal, neuron `i`'s hidden
//! state depends only on its own parameters `theta_i = (w_i, u_i)`, and the
//! per-neuron gradient follows a forward recursion alongside the hidden
//! state itself (one pass, `d + 1` running values per neuron):
//!
//! ```text
//! dU H_t = (w * dU H_{t-1} + X_{t-1}) * I_{t-1}
//! dW H_t = (H_{t-1} + w * dW H_{t-1}) * I_{t-1}
//! ```
//!
//! with zero base cases, where `I_t = sigma'(w H_t + u . X_t)`. No
//! cross-neuron terms exist, so they are never materialized.

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::input::InputSequence;
use crate::params::RnnParams;

/// Hidden states and activation-derivative factors for one input sequence.
#[derive(Debug, Clone)]
pub struct HiddenTrajectory {
    /// `m x (T + 1)` column-major; column `t` is the hidden state `H_t`,
    /// column 0 is the zero initial condition.
    h: Vec<f64>,
    /// `m x T` column-major; entry `(i, t)` is
    /// `I_t = sigma'(w_i H_t^(i) + u_i . X_t)`, the derivative factor of the
    /// pre-activation that produced `H_{t+1}^(i)`.
    ifac: Vec<f64>,
    m: usize,
    t_len: usize,
}

impl HiddenTrajectory {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Hidden state column `H_t`, `0 <= t <= T`.
    pub fn h_col(&self, t: usize) -> &[f64] {
        &self.h[t * self.m..(t + 1) * self.m]
    }

    pub fn h_at(&self, i: usize, t: usize) -> f64 {
        self.h[t * self.m + i]
    }

    pub fn ifac_at(&self, i: usize, t: usize) -> f64 {
        self.ifac[t * self.m + i]
    }
}

/// Gradient of the network output `F_t` with respect to every parameter.
#[derive(Debug, Clone)]
pub struct OutputGradient {
    /// `m x (d + 1)` row-major; row `i` is `(dF/dw_i, dF/du_i)`.
    pub d_theta: Vec<f64>,
    /// Entry `i` is `dF/dc_i = H_t^(i) / sqrt(m)`.
    pub d_c: Vec<f64>,
    pub m: usize,
    pub d: usize,
}

impl OutputGradient {
    pub fn theta_row(&self, i: usize) -> &[f64] {
        &self.d_theta[i * (self.d + 1)..(i + 1) * (self.d + 1)]
    }
}

fn check_dims(params: &RnnParams, x: &InputSequence) -> Result<()> {
    if params.d() != x.d() {
        return Err(Error::DimensionMismatch {
            what: "input dimension",
            expected: params.d(),
            got: x.d(),
        });
    }
    Ok(())
}

fn check_t(t: usize, t_len: usize) -> Result<()> {
    if t == 0 || t > t_len {
        return Err(Error::TimeIndex { t, t_len });
    }
    Ok(())
}

/// Runs the hidden recursion `H_t = sigma(w * H_{t-1} + u . X_{t-1})` for
/// `t = 1..=T` from `H_0 = 0`, recording the derivative factors of every
/// pre-activation along the way.
pub fn hidden_forward(
    params: &RnnParams,
    x: &InputSequence,
    act: Activation,
) -> Result<HiddenTrajectory> {
    check_dims(params, x)?;
    let m = params.m();
    let t_len = x.t_len();
    let mut h = vec![0.0; m * (t_len + 1)];
    let mut ifac = vec![0.0; m * t_len];
    for t in 1..=t_len {
        let col = x.column(t - 1);
        for i in 0..m {
            let u = params.u_row(i);
            let mut z = params.w()[i] * h[(t - 1) * m + i];
            for k in 0..x.d() {
                z += u[k] * col[k];
            }
            let (value, deriv) = act.eval_and_deriv(z);
            h[t * m + i] = value;
            ifac[(t - 1) * m + i] = deriv;
        }
    }
    Ok(HiddenTrajectory { h, ifac, m, t_len })
}

/// Network output `F_t = (1/sqrt(m)) sum_i c_i H_t^(i)` for `t = 1..=T`.
///
/// The sum over neurons is accumulated in mirror-pair order: the pair
/// `(i, i + m/2)` is combined first, then added to the running total. Under
/// a symmetric initialization the two halves of each pair cancel bitwise,
/// so the output is exactly zero in floating point, not merely small.
pub fn output_forward(params: &RnnParams, x: &InputSequence, act: Activation) -> Result<Vec<f64>> {
    let traj = hidden_forward(params, x, act)?;
    Ok(output_from_trajectory(params, &traj))
}

/// Readout applied to an already-computed trajectory; entry `t - 1` is `F_t`.
pub fn output_from_trajectory(params: &RnnParams, traj: &HiddenTrajectory) -> Vec<f64> {
    (1..=traj.t_len())
        .map(|t| readout(params, traj.h_col(t)))
        .collect()
}

/// Mirror-pair readout of a single hidden-state column.
pub fn readout(params: &RnnParams, h_col: &[f64]) -> f64 {
    let m = params.m();
    let half = m / 2;
    let c = params.c();
    let mut sum = 0.0;
    for i in 0..half {
        sum += c[i] * h_col[i] + c[half + i] * h_col[half + i];
    }
    sum / (m as f64).sqrt()
}

/// Per-neuron hidden-state gradients at time `t`: row `i` of the result is
/// `(dH_t/dw_i, dH_t/du_i)`, a vector of length `d + 1`, computed by the
/// forward recursion in the module docs.
pub fn hidden_gradients(
    params: &RnnParams,
    traj: &HiddenTrajectory,
    x: &InputSequence,
    t: usize,
) -> Result<Vec<f64>> {
    check_dims(params, x)?;
    check_t(t, traj.t_len())?;
    let m = params.m();
    let d = params.d();
    let mut state = GradientState::new(m, d);
    for s in 1..=t {
        state.advance(params, traj, x, s);
    }
    Ok(state.into_rows())
}

/// Gradient of the output `F_t` with respect to every parameter:
/// `dF/dtheta_i = (c_i / sqrt(m)) * dH_t^(i)/dtheta_i` and
/// `dF/dc_i = H_t^(i) / sqrt(m)`.
pub fn output_gradients(
    params: &RnnParams,
    traj: &HiddenTrajectory,
    x: &InputSequence,
    t: usize,
) -> Result<OutputGradient> {
    let rows = hidden_gradients(params, traj, x, t)?;
    Ok(scale_to_output(params, traj, &rows, t))
}

/// Output gradients for every `t = 1..=T` in a single forward pass.
pub fn output_gradients_all(
    params: &RnnParams,
    traj: &HiddenTrajectory,
    x: &InputSequence,
) -> Result<Vec<OutputGradient>> {
    check_dims(params, x)?;
    let m = params.m();
    let d = params.d();
    let mut state = GradientState::new(m, d);
    let mut out = Vec::with_capacity(traj.t_len());
    for t in 1..=traj.t_len() {
        state.advance(params, traj, x, t);
        out.push(scale_to_output(params, traj, &state.rows, t));
    }
    Ok(out)
}

fn scale_to_output(
    params: &RnnParams,
    traj: &HiddenTrajectory,
    hidden_rows: &[f64],
    t: usize,
) -> OutputGradient {
    let m = params.m();
    let d = params.d();
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let mut d_theta = vec![0.0; m * (d + 1)];
    let mut d_c = vec![0.0; m];
    for i in 0..m {
        let scale = params.c()[i] * inv_sqrt_m;
        for k in 0..=d {
            d_theta[i * (d + 1) + k] = scale * hidden_rows[i * (d + 1) + k];
        }
        d_c[i] = traj.h_at(i, t) * inv_sqrt_m;
    }
    OutputGradient { d_theta, d_c, m, d }
}

/// Running per-neuron gradient of the hidden state, advanced one step at a
/// time alongside the trajectory. Row `i` holds `(dH/dw_i, dH/du_i)`.
pub(crate) struct GradientState {
    rows: Vec<f64>,
    m: usize,
    d: usize,
}

impl GradientState {
    pub(crate) fn new(m: usize, d: usize) -> Self {
        GradientState { rows: vec![0.0; m * (d + 1)], m, d }
    }

    /// Advances from `H_{s-1}` to `H_s` (1-based step `s`).
    pub(crate) fn advance(
        &mut self,
        params: &RnnParams,
        traj: &HiddenTrajectory,
        x: &InputSequence,
        s: usize,
    ) {
        let col = x.column(s - 1);
        for i in 0..self.m {
            let w = params.w()[i];
            let ifac = traj.ifac_at(i, s - 1);
            let h_prev = traj.h_at(i, s - 1);
            let row = &mut self.rows[i * (self.d + 1)..(i + 1) * (self.d + 1)];
            row[0] = (h_prev + w * row[0]) * ifac;
            for k in 0..self.d {
                row[1 + k] = (w * row[1 + k] + col[k]) * ifac;
            }
        }
    }

    pub(crate) fn rows(&self) -> &[f64] {
        &self.rows
    }

    fn into_rows(self) -> Vec<f64> {
        self.rows
    }
}

/// For each `t = 1..=T`, the largest per-neuron hidden-state gradient norm
/// `max_i ||(dH_t/dw_i, dH_t/du_i)||_2`. This is the quantity whose growth
/// in `t` separates the benign from the exploding regime.
pub fn hidden_gradient_sup(
    params: &RnnParams,
    x: &InputSequence,
    act: Activation,
) -> Result<Vec<f64>> {
    let traj = hidden_forward(params, x, act)?;
    let m = params.m();
    let d = params.d();
    let mut state = GradientState::new(m, d);
    let mut sup = Vec::with_capacity(traj.t_len());
    for t in 1..=traj.t_len() {
        state.advance(params, &traj, x, t);
        let rows = state.rows();
        let mut best = 0.0f64;
        for i in 0..m {
            let row = &rows[i * (d + 1)..(i + 1) * (d + 1)];
            best = best.max(row.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        sup.push(best);
    }
    Ok(sup)
}

/// First-order predictor anchored at `params0`: the inner product of the
/// output gradient at the anchor with the parameter displacement,
///
/// `F_lin(t) = sum_i <dF_t/dtheta_i(0), theta_i - theta_i(0)>
///           + sum_i dF_t/dc_i(0) * (c_i - c_i(0))`.
///
/// `grads0` must hold the anchor gradients for `t = 1..=T` on the same input.
pub fn linearized_output(
    params: &RnnParams,
    params0: &RnnParams,
    grads0: &[OutputGradient],
    t: usize,
) -> Result<f64> {
    if params.m() != params0.m() || params.d() != params0.d() {
        return Err(Error::DimensionMismatch {
            what: "parameter shape",
            expected: params0.m(),
            got: params.m(),
        });
    }
    check_t(t, grads0.len())?;
    let g = &grads0[t - 1];
    if g.m != params.m() || g.d != params.d() {
        return Err(Error::DimensionMismatch {
            what: "anchor gradient shape",
            expected: params.m(),
            got: g.m,
        });
    }
    let m = params.m();
    let d = params.d();
    let mut sum = 0.0;
    for i in 0..m {
        let row = g.theta_row(i);
        let mut acc = row[0] * (params.w()[i] - params0.w()[i]);
        let u = params.u_row(i);
        let u0 = params0.u_row(i);
        for k in 0..d {
            acc += row[1 + k] * (u[k] - u0[k]);
        }
        acc += g.d_c[i] * (params.c()[i] - params0.c()[i]);
        sum += acc;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{draw_input, symmetric_init, InitConfig};
    use rand::Rng;

    fn tanh() -> Activation {
        Activation::Tanh
    }

    fn random_params(m: usize, d: usize, alpha: f64, seed: u64) -> RnnParams {
        symmetric_init(&InitConfig { m, d, alpha, seed }).unwrap()
    }

    #[test]
    fn zero_recurrence_reduces_to_feedforward() {
        // With w = 0 the first step is a plain two-layer network evaluation.
        let params =
            RnnParams::new(vec![0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0], vec![1.0, -1.0], 2).unwrap();
        let x = InputSequence::new(vec![1.0, 0.0], 2, 1).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let expected = 1f64.tanh();
        assert!((traj.h_at(0, 1) - expected).abs() < 1e-15);
        assert!((expected - 0.761594).abs() < 1e-6);
    }

    #[test]
    fn initial_hidden_state_is_exactly_zero() {
        let params = random_params(8, 3, 0.5, 1);
        let x = draw_input(3, 4, 2, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        assert!(traj.h_col(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_matches_scalar_reference_loop() {
        // Independent oracle: a per-neuron scalar re-implementation.
        let params = RnnParams::new(
            vec![0.5, -0.5],
            vec![0.3, -0.1, 0.7, 0.2, 0.4, -0.6],
            vec![1.0, -1.0],
            3,
        )
        .unwrap();
        let x = draw_input(3, 4, 77, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        for i in 0..2 {
            let mut h = 0.0f64;
            for t in 1..=4 {
                let col = x.column(t - 1);
                let z = params.w()[i] * h
                    + params.u_row(i).iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
                h = z.tanh();
                assert!(
                    (traj.h_at(i, t) - h).abs() <= 1e-15,
                    "neuron {i} step {t}"
                );
            }
        }
    }

    #[test]
    fn hidden_state_and_factors_are_bounded() {
        let params = random_params(16, 2, 1.5, 3);
        let x = draw_input(2, 8, 5, 0).unwrap();
        for act in [Activation::Tanh, Activation::Logistic, Activation::GaussBump] {
            let traj = hidden_forward(&params, &x, act).unwrap();
            for t in 0..=8 {
                for i in 0..16 {
                    assert!(traj.h_at(i, t).abs() <= act.sigma0());
                }
            }
            for t in 0..8 {
                for i in 0..16 {
                    assert!(traj.ifac_at(i, t).abs() <= act.sigma1());
                }
            }
        }
    }

    #[test]
    fn symmetric_init_output_is_exactly_zero() {
        for seed in 0..10 {
            let params = random_params(32, 3, 0.6, seed);
            let x = draw_input(3, 6, seed + 100, 0).unwrap();
            let out = output_forward(&params, &x, tanh()).unwrap();
            assert!(out.iter().all(|&v| v == 0.0), "seed {seed}: {out:?}");
        }
    }

    #[test]
    fn zero_readout_gives_zero_output() {
        let mut params = random_params(8, 2, 0.4, 9);
        params.c_mut().fill(0.0);
        let x = draw_input(2, 3, 11, 0).unwrap();
        let out = output_forward(&params, &x, tanh()).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn output_matches_direct_formula_on_hand_instance() {
        // m = 2, T = 2, all weights hand-set; compare against the formula
        // F_t = (c_1 H_t^(1) + c_2 H_t^(2)) / sqrt(2) evaluated by hand.
        let params =
            RnnParams::new(vec![0.25, -0.5], vec![0.8, -0.3], vec![0.9, 1.1], 1).unwrap();
        let x = InputSequence::new(vec![0.6, -0.9], 1, 2).unwrap();
        let h11 = (0.8f64 * 0.6).tanh();
        let h12 = (-0.3f64 * 0.6).tanh();
        let h21 = (0.25 * h11 + 0.8 * -0.9f64).tanh();
        let h22 = (-0.5 * h12 + -0.3 * -0.9f64).tanh();
        let f1 = (0.9 * h11 + 1.1 * h12) / 2f64.sqrt();
        let f2 = (0.9 * h21 + 1.1 * h22) / 2f64.sqrt();
        let out = output_forward(&params, &x, tanh()).unwrap();
        assert!((out[0] - f1).abs() < 1e-15);
        assert!((out[1] - f2).abs() < 1e-15);
    }

    #[test]
    fn hidden_gradient_base_cases() {
        let params = random_params(8, 3, 0.5, 21);
        let x = draw_input(3, 4, 22, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let rows = hidden_gradients(&params, &traj, &x, 1).unwrap();
        let col0 = x.column(0);
        for i in 0..8 {
            let row = &rows[i * 4..(i + 1) * 4];
            // dH_1/dw = 0 because H_0 = 0.
            assert_eq!(row[0], 0.0);
            // dH_1/du = X_0 * I_0.
            let ifac = traj.ifac_at(i, 0);
            for k in 0..3 {
                assert!((row[1 + k] - col0[k] * ifac).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn hidden_gradients_match_finite_differences() {
        let params = random_params(6, 3, 0.5, 33);
        let x = draw_input(3, 5, 34, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let t = 5;
        let rows = hidden_gradients(&params, &traj, &x, t).unwrap();
        let h = 1e-5;
        for i in 0..6 {
            for k in 0..4 {
                let mut plus = params.clone();
                let mut minus = params.clone();
                if k == 0 {
                    plus.w_mut()[i] += h;
                    minus.w_mut()[i] -= h;
                } else {
                    plus.u_mut()[i * 3 + k - 1] += h;
                    minus.u_mut()[i * 3 + k - 1] -= h;
                }
                let hp = hidden_forward(&plus, &x, tanh()).unwrap().h_at(i, t);
                let hm = hidden_forward(&minus, &x, tanh()).unwrap().h_at(i, t);
                let fd = (hp - hm) / (2.0 * h);
                let an = rows[i * 4 + k];
                let denom = an.abs().max(fd.abs()).max(1e-3);
                assert!(
                    (fd - an).abs() / denom < 1e-6,
                    "neuron {i} coord {k}: fd={fd} analytic={an}"
                );
            }
        }
    }

    #[test]
    fn output_gradients_match_finite_differences_in_all_coordinates() {
        let params = random_params(4, 2, 0.4, 55);
        let x = draw_input(2, 4, 56, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let t = 3;
        let g = output_gradients(&params, &traj, &x, t).unwrap();
        let h = 1e-5;
        let eval = |p: &RnnParams| output_forward(p, &x, tanh()).unwrap()[t - 1];
        for i in 0..4 {
            for k in 0..4 {
                let mut plus = params.clone();
                let mut minus = params.clone();
                match k {
                    0 => {
                        plus.w_mut()[i] += h;
                        minus.w_mut()[i] -= h;
                    }
                    3 => {
                        plus.c_mut()[i] += h;
                        minus.c_mut()[i] -= h;
                    }
                    _ => {
                        plus.u_mut()[i * 2 + k - 1] += h;
                        minus.u_mut()[i * 2 + k - 1] -= h;
                    }
                }
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let an = if k == 3 { g.d_c[i] } else { g.theta_row(i)[k] };
                let denom = an.abs().max(fd.abs()).max(1e-3);
                assert!(
                    (fd - an).abs() / denom < 1e-6,
                    "neuron {i} coord {k}: fd={fd} analytic={an}"
                );
            }
        }
    }

    #[test]
    fn zero_readout_zeroes_theta_gradient_only() {
        let mut params = random_params(6, 2, 0.3, 60);
        params.c_mut().fill(0.0);
        let x = draw_input(2, 3, 61, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let g = output_gradients(&params, &traj, &x, 2).unwrap();
        assert!(g.d_theta.iter().all(|&v| v == 0.0));
        let scale = 1.0 / (6f64).sqrt();
        for i in 0..6 {
            assert_eq!(g.d_c[i], traj.h_at(i, 2) * scale);
        }
    }

    #[test]
    fn duplicating_neurons_with_rescaled_readout_preserves_output() {
        // Duplicate every neuron and divide the readout by sqrt(2); the
        // 1/sqrt(m) normalization makes the doubled network identical.
        let params = random_params(4, 2, 0.5, 70);
        let x = draw_input(2, 5, 71, 0).unwrap();
        let m = params.m();
        let mut w2 = Vec::new();
        let mut u2 = Vec::new();
        let mut c2 = Vec::new();
        for _copy in 0..2 {
            for i in 0..m {
                w2.push(params.w()[i]);
                u2.extend_from_slice(params.u_row(i));
                c2.push(params.c()[i] / 2f64.sqrt());
            }
        }
        let doubled = RnnParams::new(w2, u2, c2, 2).unwrap();
        let a = output_forward(&params, &x, tanh()).unwrap();
        let b = output_forward(&doubled, &x, tanh()).unwrap();
        for (ai, bi) in a.iter().zip(&b) {
            assert!((ai - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbing_one_neuron_leaves_others_bitwise_unchanged() {
        let params = random_params(8, 3, 0.5, 80);
        let x = draw_input(3, 6, 81, 0).unwrap();
        let base = hidden_forward(&params, &x, tanh()).unwrap();
        let mut perturbed = params.clone();
        perturbed.w_mut()[2] += 0.1;
        perturbed.u_mut()[2 * 3 + 1] -= 0.2;
        let after = hidden_forward(&perturbed, &x, tanh()).unwrap();
        for t in 0..=6 {
            for i in 0..8 {
                if i != 2 {
                    assert_eq!(
                        base.h_at(i, t).to_bits(),
                        after.h_at(i, t).to_bits(),
                        "neuron {i} changed"
                    );
                }
            }
        }
    }

    #[test]
    fn linearized_output_is_zero_at_anchor() {
        let params = random_params(8, 2, 0.4, 90);
        let x = draw_input(2, 4, 91, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        let grads = output_gradients_all(&params, &traj, &x).unwrap();
        for t in 1..=4 {
            assert_eq!(linearized_output(&params, &params, &grads, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn linearized_output_scales_exactly_with_power_of_two_displacement() {
        // Anchor and displacement entries are dyadic (multiples of 1/1024)
        // so that anchor + delta and anchor + 2*delta are exact, making the
        // doubling identity hold bitwise, not just approximately.
        let mut rng = crate::rng::substream(97, "lin-displace", 0);
        let dyadic = |rng: &mut rand_chacha::ChaCha8Rng, range: i64| {
            rng.random_range(-range..=range) as f64 / 1024.0
        };
        let m = 8;
        let d = 2;
        let mut params0 = random_params(m, d, 0.4, 95);
        for v in params0.w_mut() {
            *v = dyadic(&mut rng, 512);
        }
        for v in params0.u_mut() {
            *v = dyadic(&mut rng, 1024);
        }
        for v in params0.c_mut() {
            *v = dyadic(&mut rng, 1024);
        }
        let x = draw_input(2, 4, 96, 0).unwrap();
        let traj = hidden_forward(&params0, &x, tanh()).unwrap();
        let grads = output_gradients_all(&params0, &traj, &x).unwrap();
        let mut displaced = params0.clone();
        let mut doubled = params0.clone();
        let mut apply = |one: &mut [f64], two: &mut [f64], rng: &mut rand_chacha::ChaCha8Rng| {
            for (a, b) in one.iter_mut().zip(two.iter_mut()) {
                let delta = dyadic(rng, 100);
                *a += delta;
                *b += 2.0 * delta;
            }
        };
        apply(displaced.w_mut(), doubled.w_mut(), &mut rng);
        apply(displaced.u_mut(), doubled.u_mut(), &mut rng);
        apply(displaced.c_mut(), doubled.c_mut(), &mut rng);
        for t in 1..=4 {
            let f1 = linearized_output(&displaced, &params0, &grads, t).unwrap();
            let f2 = linearized_output(&doubled, &params0, &grads, t).unwrap();
            // Scaling by a power of two commutes with every rounding step.
            assert_eq!(f2.to_bits(), (2.0 * f1).to_bits());
        }
    }

    #[test]
    fn time_index_bounds_are_enforced() {
        let params = random_params(4, 2, 0.3, 99);
        let x = draw_input(2, 3, 99, 0).unwrap();
        let traj = hidden_forward(&params, &x, tanh()).unwrap();
        assert!(hidden_gradients(&params, &traj, &x, 0).is_err());
        assert!(hidden_gradients(&params, &traj, &x, 4).is_err());
        assert!(output_gradients(&params, &traj, &x, 4).is_err());
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let params = random_params(4, 3, 0.3, 98);
        let x = draw_input(2, 3, 98, 0).unwrap();
        assert!(hidden_forward(&params, &x, tanh()).is_err());
    }
}
