//! Input sequences: `d x T` matrices whose columns are the per-step input
//! vectors, each with Euclidean norm at most one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for the unit-norm column check; columns produced by normalizing
/// and rescaling can exceed 1 by a few ulps.
const NORM_SLACK: f64 = 1e-9;

/// A `d x T` input matrix stored column-major; column `t` holds the input
/// consumed when computing the hidden state at step `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSequence {
    data: Vec<f64>,
    d: usize,
    t_len: usize,
}

impl InputSequence {
    pub fn new(data: Vec<f64>, d: usize, t_len: usize) -> Result<Self> {
        if d == 0 || t_len == 0 {
            return Err(Error::config("input dimensions must be at least 1"));
        }
        if data.len() != d * t_len {
            return Err(Error::DimensionMismatch {
                what: "input data length",
                expected: d * t_len,
                got: data.len(),
            });
        }
        let seq = InputSequence { data, d, t_len };
        for t in 0..t_len {
            let norm = seq.column(t).iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::config(format!(
                    "input column {t} has norm {norm} > 1"
                )));
            }
        }
        Ok(seq)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sequence length `T`.
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Column `t` (0-based), i.e. the input vector `X_t`.
    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.d..(t + 1) * self.d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy with every entry scaled by `s` (|s| <= 1 keeps columns unit-bounded).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        InputSequence::new(self.data.iter().map(|x| x * s).collect(), self.d, self.t_len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_over_unit_columns() {
        assert!(InputSequence::new(vec![1.5, 0.0], 2, 1).is_err());
        assert!(InputSequence::new(vec![0.6, 0.8], 2, 1).is_ok());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(InputSequence::new(vec![0.0; 4], 0, 4).is_err());
        assert!(InputSequence::new(vec![0.0; 4], 3, 1).is_err());
    }

    #[test]
    fn column_access() {
        let x = InputSequence::new(vec![0.1, 0.2, 0.3, 0.4], 2, 2).unwrap();
        assert_eq!(x.column(0), &[0.1, 0.2]);
        assert_eq!(x.column(1), &[0.3, 0.4]);
        assert_eq!(x.t_len(), 2);
    }
}
