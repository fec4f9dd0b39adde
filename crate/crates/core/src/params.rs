//! Network parameters for the diagonal recurrent model.
//!
//! The hidden-to-hidden matrix is diagonal, so the full parameter set is
//! `w` (its diagonal, one recurrent weight per neuron), `u` (input weights,
//! one row per neuron) and `c` (linear readout). Per neuron `i` the grouped
//! views are `theta_i = (w_i, u_i)` and `phi_i = (theta_i, c_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    w: Vec<f64>,
    /// `m x d`, row-major; row `i` is the input weight vector of neuron `i`.
    u: Vec<f64>,
    c: Vec<f64>,
    m: usize,
    d: usize,
}

impl RnnParams {
    pub fn new(w: Vec<f64>, u: Vec<f64>, c: Vec<f64>, d: usize) -> Result<Self> {
        let m = w.len();
        if m == 0 || m % 2 != 0 {
            return Err(Error::config(format!(
                "width m must be positive and even, got {m}"
            )));
        }
        if d == 0 {
            return Err(Error::config("input dimension d must be at least 1"));
        }
        if u.len() != m * d {
            return Err(Error::DimensionMismatch {
                what: "input weight length",
                expected: m * d,
                got: u.len(),
            });
        }
        if c.len() != m {
            return Err(Error::DimensionMismatch {
                what: "readout length",
                expected: m,
                got: c.len(),
            });
        }
        Ok(RnnParams { w, u, c, m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_row(&self, i: usize) -> &[f64] {
        &self.u[i * self.d..(i + 1) * self.d]
    }

    pub fn w_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn c_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    /// The grouped per-neuron parameter `phi_i = (w_i, u_i, c_i)` as an
    /// owned vector of length `d + 2`.
    pub fn phi(&self, i: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.d + 2);
        v.push(self.w[i]);
        v.extend_from_slice(self.u_row(i));
        v.push(self.c[i]);
        v
    }

    /// Applies `self -= eta * grad` where `grad` is laid out as `m` rows of
    /// `(d + 2)`: recurrent weight, input weights, readout.
    pub fn step_in_place(&mut self, grad: &[f64], eta: f64) {
        assert_eq!(grad.len(), self.m * (self.d + 2));
        let stride = self.d + 2;
        for i in 0..self.m {
            let g = &grad[i * stride..(i + 1) * stride];
            self.w[i] -= eta * g[0];
            for k in 0..self.d {
                self.u[i * self.d + k] -= eta * g[1 + k];
            }
            self.c[i] -= eta * g[stride - 1];
        }
    }

    /// Largest per-neuron displacement from `origin`, per component:
    /// `(max_i |w_i - w0_i|, max_i ||u_i - u0_i||_2, max_i |c_i - c0_i|)`.
    pub fn max_displacement(&self, origin: &RnnParams) -> (f64, f64, f64) {
        let mut dw: f64 = 0.0;
        let mut du: f64 = 0.0;
        let mut dc: f64 = 0.0;
        for i in 0..self.m {
            dw = dw.max((self.w[i] - origin.w[i]).abs());
            dc = dc.max((self.c[i] - origin.c[i]).abs());
            let mut s = 0.0;
            for k in 0..self.d {
                let diff = self.u[i * self.d + k] - origin.u[i * self.d + k];
                s += diff * diff;
            }
            du = du.max(s.sqrt());
        }
        (dw, du, dc)
    }

    /// Euclidean norms of the displacement from `origin`, split into the
    /// recurrent/input block and the readout: `(||theta - theta0||_2, ||c - c0||_2)`.
    pub fn displacement_norms(&self, origin: &RnnParams) -> (f64, f64) {
        let mut theta_sq = 0.0;
        let mut c_sq = 0.0;
        for i in 0..self.m {
            let dw = self.w[i] - origin.w[i];
            theta_sq += dw * dw;
            for k in 0..self.d {
                let diff = self.u[i * self.d + k] - origin.u[i * self.d + k];
                theta_sq += diff * diff;
            }
            let dc = self.c[i] - origin.c[i];
            c_sq += dc * dc;
        }
        (theta_sq.sqrt(), c_sq.sqrt())
    }
}
