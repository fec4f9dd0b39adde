//! Bounded smooth scalar nonlinearities with certified uniform bounds on
//! the function and its first two derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|tanh''|` attains its maximum `4/(3*sqrt(3))` at `tanh(z) = ±1/sqrt(3)`.
pub const TANH_SIGMA2: f64 = 0.769_800_358_919_501;

/// `|logistic''|` attains its maximum `1/(6*sqrt(3))`.
pub const LOGISTIC_SIGMA2: f64 = 0.096_225_044_864_937_62;

/// `|d/dz exp(-z^2/2)|` attains its maximum `exp(-1/2)` at `z = ±1`.
pub const GAUSS_SIGMA1: f64 = 0.606_530_659_712_633_4;

/// Built-in activation functions.
///
/// Each variant carries certified bounds `sigma0 >= sup|σ|`,
/// `sigma1 >= sup|σ'|`, `sigma2 >= sup|σ''|`. The bounds are sharp:
/// tanh (1, 1, 4/(3√3)); logistic (1, 1/4, 1/(6√3)); the Gaussian bump
/// `exp(-z²/2)` (1, e^{-1/2}, 1, second-derivative maximum at z = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Tanh,
    Logistic,
    GaussBump,
}

impl Activation {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => logistic(z),
            Activation::GaussBump => (-0.5 * z * z).exp(),
        }
    }

    /// Value and first derivative from one transcendental evaluation
    /// (each derivative is algebraic in the value).
    #[inline]
    pub fn eval_and_deriv(&self, z: f64) -> (f64, f64) {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                (t, 1.0 - t * t)
            }
            Activation::Logistic => {
                let s = logistic(z);
                (s, s * (1.0 - s))
            }
            Activation::GaussBump => {
                let e = (-0.5 * z * z).exp();
                (e, -z * e)
            }
        }
    }

    pub fn deriv1(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Logistic => {
                let s = logistic(z);
                s * (1.0 - s)
            }
            Activation::GaussBump => -z * (-0.5 * z * z).exp(),
        }
    }

    pub fn deriv2(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            Activation::Logistic => {
                let s = logistic(z);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
            Activation::GaussBump => {
                let e = (-0.5 * z * z).exp();
                (z * z - 1.0) * e
            }
        }
    }

    pub fn sigma0(&self) -> f64 {
        1.0
    }

    pub fn sigma1(&self) -> f64 {
        match self {
            Activation::Tanh => 1.0,
            Activation::Logistic => 0.25,
            Activation::GaussBump => GAUSS_SIGMA1,
        }
    }

    pub fn sigma2(&self) -> f64 {
        match self {
            Activation::Tanh => TANH_SIGMA2,
            Activation::Logistic => LOGISTIC_SIGMA2,
            Activation::GaussBump => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::GaussBump => "gauss-bump",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "logistic" => Ok(Activation::Logistic),
            "gauss-bump" | "gauss" => Ok(Activation::GaussBump),
            other => Err(Error::config(format!(
                "unknown activation '{other}' (expected tanh, logistic or gauss-bump)"
            ))),
        }
    }
}

/// Overflow-safe logistic function.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    const ALL: [Activation; 3] = [Activation::Tanh, Activation::Logistic, Activation::GaussBump];

    /// Dense grid over a wide range. The certified bounds must hold
    /// everywhere and be attained somewhere (sharpness within 1e-6).
    #[test]
    fn certified_bounds_hold_and_are_sharp() {
        for act in ALL {
            let mut max0: f64 = 0.0;
            let mut max1: f64 = 0.0;
            let mut max2: f64 = 0.0;
            let mut z = -20.0;
            while z <= 20.0 {
                max0 = max0.max(act.eval(z).abs());
                max1 = max1.max(act.deriv1(z).abs());
                max2 = max2.max(act.deriv2(z).abs());
                z += 1e-4;
            }
            assert!(max0 <= act.sigma0() + 1e-12, "{act:?} sigma0");
            assert!(max1 <= act.sigma1() + 1e-12, "{act:?} sigma1");
            assert!(max2 <= act.sigma2() + 1e-12, "{act:?} sigma2");
            assert!(max0 >= act.sigma0() - 1e-6, "{act:?} sigma0 sharp");
            assert!(max1 >= act.sigma1() - 1e-6, "{act:?} sigma1 sharp");
            assert!(max2 >= act.sigma2() - 1e-6, "{act:?} sigma2 sharp");
        }
    }

    #[test]
    fn deriv1_matches_central_differences() {
        let mut rng = crate::rng::substream(11, "act-fd", 0);
        for act in ALL {
            for _ in 0..200 {
                let z: f64 = rng.random_range(-4.0..4.0);
                let h = 1e-6;
                let fd = (act.eval(z + h) - act.eval(z - h)) / (2.0 * h);
                let an = act.deriv1(z);
                let denom = an.abs().max(1e-3);
                assert!(
                    (fd - an).abs() / denom < 1e-7,
                    "{act:?} deriv1 mismatch at z={z}: fd={fd} an={an}"
                );
            }
        }
    }

    #[test]
    fn deriv2_matches_central_differences() {
        let mut rng = crate::rng::substream(11, "act-fd2", 0);
        for act in ALL {
            for _ in 0..200 {
                let z: f64 = rng.random_range(-4.0..4.0);
                let h = 1e-5;
                let fd = (act.deriv1(z + h) - act.deriv1(z - h)) / (2.0 * h);
                let an = act.deriv2(z);
                let denom = an.abs().max(1e-3);
                assert!(
                    (fd - an).abs() / denom < 1e-6,
                    "{act:?} deriv2 mismatch at z={z}"
                );
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for act in ALL {
            assert_eq!(Activation::from_name(act.name()).unwrap(), act);
        }
        assert!(Activation::from_name("relu").is_err());
    }
}
