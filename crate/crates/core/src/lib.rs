//! A desk-scale numerical laboratory for diagonal Elman recurrent
//! networks: exact forward-mode gradients, symmetric initialization,
//! Monte-Carlo teachers from the tangent-kernel function class, plain and
//! max-norm-projected (stochastic) gradient descent, finite-width and
//! limiting kernel estimators, and closed-form calculators for all the
//! analytic constants that predict training behavior.
//!
//! Every random quantity is derived from a master seed through tagged
//! sub-streams, and every parallel reduction runs over a fixed block
//! partition, so all outputs are bitwise reproducible at any thread count.

pub mod activation;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod init;
pub mod input;
pub mod ntk;
pub mod params;
pub mod rng;
pub mod rnn;
pub mod teacher;
pub mod training;

pub use activation::Activation;
pub use error::{Error, Result};
pub use input::InputSequence;
pub use params::RnnParams;
