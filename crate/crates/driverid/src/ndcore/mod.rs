//! Minimal numerical engine for the recurrent GAN.
//!
//! Everything is dense `f64`: an LSTM cell with full backpropagation through
//! time, a per-timestep dense projection, binary cross-entropy, SGD and Adam,
//! and a central-difference gradient oracle used by the test suites. All
//! operations are pure and single-threaded, so identical inputs produce
//! bit-identical outputs on one platform.

mod cell;
mod dense;
mod lstm;
mod optim;
mod smallgemm;

pub use dense::{DenseGrads, DenseParams};
pub use lstm::{
    lstm_backward, lstm_backward_inputs, lstm_forward, lstm_forward_nocache, LstmCache, LstmGrads,
    LstmParams,
};
pub use optim::{adam_step, sgd_step, AdamState};

use ndarray::{s, Array2, ArrayView2, ArrayViewMut2};
use std::fmt;

/// Gate order used everywhere weights are stored or serialized.
pub const GATE_NAMES: [&str; 4] = ["input", "forget", "cell", "output"];

#[derive(Debug)]
pub enum NdError {
    Shape(String),
    Invalid(String),
}

impl fmt::Display for NdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape(s) => write!(f, "shape error: {s}"),
            Self::Invalid(s) => write!(f, "invalid argument: {s}"),
        }
    }
}

impl std::error::Error for NdError {}

/// A batch of equally long sequences stacked time-major: row `t * batch + b`
/// holds sample `b` at timestep `t`. The layout keeps each timestep's rows
/// contiguous so the recurrent math runs as one matrix product per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqBatch {
    data: Array2<f64>,
    batch: usize,
    steps: usize,
}

impl SeqBatch {
    pub fn new(data: Array2<f64>, batch: usize) -> Result<Self, NdError> {
        if batch == 0 || data.nrows() == 0 || data.nrows() % batch != 0 {
            return Err(NdError::Shape(format!(
                "{} stacked rows do not divide into batches of {batch}",
                data.nrows()
            )));
        }
        let steps = data.nrows() / batch;
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        Ok(Self { data, batch, steps })
    }

    /// Stacks independent `steps x dim` sequences into one batch.
    pub fn from_sequences(seqs: &[ArrayView2<f64>]) -> Result<Self, NdError> {
        let first = seqs
            .first()
            .ok_or_else(|| NdError::Invalid("empty sequence list".into()))?;
        let (steps, dim) = first.dim();
        if steps == 0 {
            return Err(NdError::Shape("sequences must have at least one step".into()));
        }
        for (i, s) in seqs.iter().enumerate() {
            if s.dim() != (steps, dim) {
                return Err(NdError::Shape(format!(
                    "sequence {i} has shape {:?}, expected {:?}",
                    s.dim(),
                    (steps, dim)
                )));
            }
        }
        let batch = seqs.len();
        let mut data = Array2::zeros((steps * batch, dim));
        for t in 0..steps {
            for (b, seq) in seqs.iter().enumerate() {
                data.row_mut(t * batch + b).assign(&seq.row(t));
            }
        }
        Ok(Self { data, batch, steps })
    }

    pub fn from_single(seq: ArrayView2<f64>) -> Result<Self, NdError> {
        Self::from_sequences(&[seq])
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    /// View of one timestep's rows, shape `batch x dim`.
    pub fn step(&self, t: usize) -> ArrayView2<'_, f64> {
        self.data.slice(s![t * self.batch..(t + 1) * self.batch, ..])
    }

    /// Recovers sample `b` as a `steps x dim` sequence.
    pub fn sequence(&self, b: usize) -> Array2<f64> {
        let mut out = Array2::zeros((self.steps, self.data.ncols()));
        for t in 0..self.steps {
            out.row_mut(t).assign(&self.data.row(t * self.batch + b));
        }
        out
    }
}

pub(crate) fn block(stack: &Array2<f64>, t: usize, batch: usize) -> ArrayView2<'_, f64> {
    stack.slice(s![t * batch..(t + 1) * batch, ..])
}

pub(crate) fn block_mut(stack: &mut Array2<f64>, t: usize, batch: usize) -> ArrayViewMut2<'_, f64> {
    stack.slice_mut(s![t * batch..(t + 1) * batch, ..])
}

/// Branch-free exponential: range reduction to `2^n * e^t`, `|t| <= ln(2)/2`,
/// with a degree-10 polynomial for the fractional part. Relative error is
/// below 1e-13 over the clamped range and `exp_fast(0) == 1` exactly. The
/// vectorized LSTM cell kernel evaluates the same polynomial four lanes at a
/// time; see `cell.rs`.
#[inline]
pub fn exp_fast(x: f64) -> f64 {
    const LOG2_E: f64 = std::f64::consts::LOG2_E;
    const LN_2: f64 = std::f64::consts::LN_2;
    // magic-number round-to-nearest; valid for |y| < 2^51
    const SHIFT: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
    let x = x.clamp(-708.0, 708.0);
    let y = x * LOG2_E;
    let k = y + SHIFT;
    let n = k - SHIFT;
    let t = (y - n) * LN_2;
    // Taylor series of e^t, |t| <= 0.347
    let mut p = 1.0 / 3_628_800.0;
    p = p * t + 1.0 / 362_880.0;
    p = p * t + 1.0 / 40_320.0;
    p = p * t + 1.0 / 5_040.0;
    p = p * t + 1.0 / 720.0;
    p = p * t + 1.0 / 120.0;
    p = p * t + 1.0 / 24.0;
    p = p * t + 1.0 / 6.0;
    p = p * t + 0.5;
    p = p * t + 1.0;
    p = p * t + 1.0;
    // scale by 2^n, reading n from the mantissa bits of the magic sum
    let n_int = k.to_bits().wrapping_sub(SHIFT.to_bits()) as i64;
    p * f64::from_bits(((n_int + 1023) as u64) << 52)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp_fast(-x))
}

/// tanh from a single exponential, `2 sigmoid(2x) - 1`.
#[inline]
pub fn tanh_exp(x: f64) -> f64 {
    2.0 / (1.0 + exp_fast(-2.0 * x)) - 1.0
}

/// Prediction clamp applied before the BCE logarithms.
pub const BCE_CLAMP: f64 = 1e-7;

/// Binary cross-entropy of a single probability against a 0/1 target.
/// Returns `(loss, d loss / d pred)`; the clamp makes both total.
pub fn bce_loss(pred: f64, target: f64) -> (f64, f64) {
    let p = pred.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    let loss = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
    let grad = -target / p + (1.0 - target) / (1.0 - p);
    (loss, grad)
}

/// Central-difference gradient of `loss_fn` at `params`.
pub fn finite_diff_grad<F>(mut loss_fn: F, params: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut scratch = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = scratch[i];
        scratch[i] = orig + h;
        let up = loss_fn(&scratch);
        scratch[i] = orig - h;
        let down = loss_fn(&scratch);
        scratch[i] = orig;
        grad.push((up - down) / (2.0 * h));
    }
    grad
}
