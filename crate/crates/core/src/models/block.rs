//! Block permutons: the rescaled permutation matrix with weighted cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Cell `i` is the square `[X_i, X_i + w_i] × [Y_i, Y_i + w_i]` carrying mass
/// `w_i` uniformly, with `X` stacked by position and `Y` stacked by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlock", into = "RawBlock")]
pub struct BlockPermuton {
    pi: Permutation,
    weights: Vec<f64>,
    x0: Vec<f64>,
    y0: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBlock {
    pi: Permutation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawBlock> for BlockPermuton {
    type Error = Error;
    fn try_from(r: RawBlock) -> Result<Self> {
        match r.weights {
            Some(w) => BlockPermuton::new(r.pi, w),
            None => Ok(BlockPermuton::uniform(r.pi)),
        }
    }
}

impl From<BlockPermuton> for RawBlock {
    fn from(b: BlockPermuton) -> Self {
        RawBlock { pi: b.pi, weights: Some(b.weights) }
    }
}

impl BlockPermuton {
    pub fn new(pi: Permutation, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != pi.len() {
            return Err(Error::LengthMismatch { expected: pi.len(), got: weights.len() });
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel("block weights must be positive".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("block weights sum to {s}")));
        }
        let m = pi.len();
        let mut x0 = vec![0.0; m];
        for i in 1..m {
            x0[i] = x0[i - 1] + weights[i - 1];
        }
        let inv = pi.inverse();
        let mut y0 = vec![0.0; m];
        let mut acc = 0.0;
        for v in 1..=m {
            let i = inv.at(v) as usize - 1;
            y0[i] = acc;
            acc += weights[i];
        }
        Ok(Self { pi, weights, x0, y0 })
    }

    pub fn uniform(pi: Permutation) -> Self {
        let m = pi.len();
        Self::new(pi, vec![1.0 / m as f64; m]).expect("uniform weights are valid")
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(x0, y0, side)` of cell `i` (0-based position).
    pub fn cell(&self, i: usize) -> (f64, f64, f64) {
        (self.x0[i], self.y0[i], self.weights[i])
    }

    pub fn rect_measure(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.pi.len() {
            let (x, y, w) = self.cell(i);
            let ox = (x2.min(x + w) - x1.max(x)).max(0.0);
            if ox == 0.0 {
                continue;
            }
            let oy = (y2.min(y + w) - y1.max(y)).max(0.0);
            s += ox * oy / w;
        }
        s
    }
}
