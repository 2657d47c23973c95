//! LSTM cell: batched forward pass and exact backpropagation through time.
//!
//! Per timestep, with gates in the fixed order i, f, g, o:
//!
//! ```text
//! i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)      input gate
//! f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)      forget gate
//! g_t = tanh   (W_g x_t + U_g h_{t-1} + b_g)      cell candidate
//! o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)      output gate
//! c_t = f_t * c_{t-1} + i_t * g_t
//! h_t = o_t * tanh(c_t)
//! ```
//!
//! The four gates are stored row-stacked (`4*hidden x input` and
//! `4*hidden x hidden`), so the input contribution of every timestep and the
//! recurrent contribution of each step run as single matrix products. Only
//! the recurrent product stays inside the time loop.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use super::cell::lstm_cell_row;
use super::smallgemm::gemm_acc;
use super::{block, block_mut, NdError, SeqBatch};

pub(crate) const GATE_INPUT: usize = 0;
pub(crate) const GATE_FORGET: usize = 1;
pub(crate) const GATE_CELL: usize = 2;
pub(crate) const GATE_OUTPUT: usize = 3;

/// All parameters of one LSTM layer. Gate rows are stacked i, f, g, o.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    input_dim: usize,
    hidden_dim: usize,
    /// `4*hidden_dim x input_dim`
    w: Array2<f64>,
    /// `4*hidden_dim x hidden_dim`
    u: Array2<f64>,
    /// `4*hidden_dim`
    b: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w: Array2::zeros((4 * hidden_dim, input_dim)),
            u: Array2::zeros((4 * hidden_dim, hidden_dim)),
            b: Array1::zeros(4 * hidden_dim),
        }
    }

    /// Seeded initialization: weights uniform in `[-1/sqrt(hidden), +1/sqrt(hidden)]`,
    /// biases zero except the forget gate at 1.0.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden_dim as f64).sqrt();
        let mut p = Self::zeros(input_dim, hidden_dim);
        p.w.mapv_inplace(|_| rng.random_range(-bound..=bound));
        p.u.mapv_inplace(|_| rng.random_range(-bound..=bound));
        p.b.slice_mut(s![GATE_FORGET * hidden_dim..(GATE_FORGET + 1) * hidden_dim])
            .fill(1.0);
        p
    }

    /// Builds parameters from per-gate tensors in gate order i, f, g, o:
    /// `w[g]: hidden x input`, `u[g]: hidden x hidden`, `b[g]: hidden`.
    pub fn from_parts(
        w: [Array2<f64>; 4],
        u: [Array2<f64>; 4],
        b: [Array1<f64>; 4],
    ) -> Result<Self, NdError> {
        let (hidden_dim, input_dim) = w[0].dim();
        for g in 0..4 {
            if w[g].dim() != (hidden_dim, input_dim)
                || u[g].dim() != (hidden_dim, hidden_dim)
                || b[g].len() != hidden_dim
            {
                return Err(NdError::Shape(format!(
                    "inconsistent tensor shapes for gate {}",
                    super::GATE_NAMES[g]
                )));
            }
        }
        let mut p = Self::zeros(input_dim, hidden_dim);
        for g in 0..4 {
            p.w.slice_mut(s![g * hidden_dim..(g + 1) * hidden_dim, ..]).assign(&w[g]);
            p.u.slice_mut(s![g * hidden_dim..(g + 1) * hidden_dim, ..]).assign(&u[g]);
            p.b.slice_mut(s![g * hidden_dim..(g + 1) * hidden_dim]).assign(&b[g]);
        }
        Ok(p)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// `hidden x input` view of one gate's input weights.
    pub fn input_weights(&self, gate: usize) -> ArrayView2<'_, f64> {
        let h = self.hidden_dim;
        self.w.slice(s![gate * h..(gate + 1) * h, ..])
    }

    /// `hidden x hidden` view of one gate's recurrent weights.
    pub fn recurrent_weights(&self, gate: usize) -> ArrayView2<'_, f64> {
        let h = self.hidden_dim;
        self.u.slice(s![gate * h..(gate + 1) * h, ..])
    }

    /// One gate's bias vector.
    pub fn biases(&self, gate: usize) -> ArrayView1<'_, f64> {
        let h = self.hidden_dim;
        self.b.slice(s![gate * h..(gate + 1) * h])
    }

    /// Flat row-major parameter slices in the fixed order
    /// `w[i,f,g,o], u[i,f,g,o], b[i,f,g,o]`.
    pub fn param_slices(&self) -> Vec<&[f64]> {
        split_gate_slices(&self.w, &self.u, &self.b, self.hidden_dim, self.input_dim)
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        split_gate_slices_mut(&mut self.w, &mut self.u, &mut self.b, self.hidden_dim, self.input_dim)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.param_slices().concat()
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<(), NdError> {
        let total = self.w.len() + self.u.len() + self.b.len();
        if flat.len() != total {
            return Err(NdError::Shape(format!(
                "flat vector has {} entries, parameters need {total}",
                flat.len()
            )));
        }
        let mut offset = 0;
        for slice in self.param_slices_mut() {
            slice.copy_from_slice(&flat[offset..offset + slice.len()]);
            offset += slice.len();
        }
        Ok(())
    }
}

/// Splits the packed tensors into 12 per-gate flat slices (w, u, then b).
/// Row blocks of a standard-layout matrix are contiguous, so this is free.
fn split_gate_slices<'a>(
    w: &'a Array2<f64>,
    u: &'a Array2<f64>,
    b: &'a Array1<f64>,
    hidden: usize,
    input: usize,
) -> Vec<&'a [f64]> {
    let ws = w.as_slice().expect("standard layout");
    let us = u.as_slice().expect("standard layout");
    let bs = b.as_slice().expect("standard layout");
    let mut out = Vec::with_capacity(12);
    for g in 0..4 {
        out.push(&ws[g * hidden * input..(g + 1) * hidden * input]);
    }
    for g in 0..4 {
        out.push(&us[g * hidden * hidden..(g + 1) * hidden * hidden]);
    }
    for g in 0..4 {
        out.push(&bs[g * hidden..(g + 1) * hidden]);
    }
    out
}

fn split_gate_slices_mut<'a>(
    w: &'a mut Array2<f64>,
    u: &'a mut Array2<f64>,
    b: &'a mut Array1<f64>,
    hidden: usize,
    input: usize,
) -> Vec<&'a mut [f64]> {
    let ws = w.as_slice_mut().expect("standard layout");
    let us = u.as_slice_mut().expect("standard layout");
    let bs = b.as_slice_mut().expect("standard layout");
    let mut out = Vec::with_capacity(12);
    let mut rest = ws;
    for _ in 0..4 {
        let (head, tail) = rest.split_at_mut(hidden * input);
        out.push(head);
        rest = tail;
    }
    let mut rest = us;
    for _ in 0..4 {
        let (head, tail) = rest.split_at_mut(hidden * hidden);
        out.push(head);
        rest = tail;
    }
    let mut rest = bs;
    for _ in 0..4 {
        let (head, tail) = rest.split_at_mut(hidden);
        out.push(head);
        rest = tail;
    }
    out
}

/// Intermediates retained by [`lstm_forward`] for the backward pass.
/// All stacks are time-major like [`SeqBatch`].
#[derive(Debug, Clone)]
pub struct LstmCache {
    xs: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    /// Post-activation gate values, `(steps*batch) x 4*hidden`, columns i|f|g|o.
    gates: Array2<f64>,
    tanh_c: Array2<f64>,
    batch: usize,
    steps: usize,
}

/// Gradients produced by [`lstm_backward`], packed like [`LstmParams`].
/// `inputs` is stacked time-major with the same layout as the forward input.
#[derive(Debug, Clone)]
pub struct LstmGrads {
    hidden_dim: usize,
    input_dim: usize,
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
    pub inputs: Array2<f64>,
    pub h0: Array2<f64>,
    pub c0: Array2<f64>,
}

impl LstmGrads {
    /// Slices aligned with [`LstmParams::param_slices`].
    pub fn param_slices(&self) -> Vec<&[f64]> {
        split_gate_slices(&self.w, &self.u, &self.b, self.hidden_dim, self.input_dim)
    }
}

/// Runs the LSTM over a stacked batch. `h0`/`c0` are `batch x hidden`.
/// Returns the hidden-state sequence and the cache for the backward pass.
pub fn lstm_forward(
    params: &LstmParams,
    input: &SeqBatch,
    h0: &Array2<f64>,
    c0: &Array2<f64>,
) -> Result<(SeqBatch, LstmCache), NdError> {
    let (h_seq, cache) = forward_impl(params, input, h0, c0, true)?;
    Ok((h_seq, cache.expect("cache requested")))
}

/// Forward pass without retaining intermediates. Used for scoring and for
/// sample generation where no gradient will flow back through this network.
pub fn lstm_forward_nocache(
    params: &LstmParams,
    input: &SeqBatch,
    h0: &Array2<f64>,
    c0: &Array2<f64>,
) -> Result<SeqBatch, NdError> {
    let (h_seq, _) = forward_impl(params, input, h0, c0, false)?;
    Ok(h_seq)
}

fn forward_impl(
    params: &LstmParams,
    input: &SeqBatch,
    h0: &Array2<f64>,
    c0: &Array2<f64>,
    want_cache: bool,
) -> Result<(SeqBatch, Option<LstmCache>), NdError> {
    let bsz = input.batch();
    let steps = input.steps();
    let hd = params.hidden_dim;
    if input.dim() != params.input_dim {
        return Err(NdError::Shape(format!(
            "input dim {} does not match LSTM input dim {}",
            input.dim(),
            params.input_dim
        )));
    }
    if h0.dim() != (bsz, hd) || c0.dim() != (bsz, hd) {
        return Err(NdError::Shape(format!(
            "state shape {:?}/{:?} does not match (batch, hidden) = {:?}",
            h0.dim(),
            c0.dim(),
            (bsz, hd)
        )));
    }

    let rows = steps * bsz;
    // Input contribution of every timestep and the bias in one product. The
    // gate activations are then computed in place on top of it, so this stack
    // becomes the cache's post-activation gate store.
    let mut gates = Array2::zeros((rows, 4 * hd));
    general_mat_mul(1.0, input.data(), &params.w.t(), 0.0, &mut gates);
    gates += &params.b;

    let mut h_prev_stack = if want_cache { Array2::zeros((rows, hd)) } else { Array2::zeros((0, hd)) };
    let mut c_prev_stack = if want_cache { Array2::zeros((rows, hd)) } else { Array2::zeros((0, hd)) };
    let mut tanh_c_stack = if want_cache { Array2::zeros((rows, hd)) } else { Array2::zeros((0, hd)) };

    let mut h_seq = Array2::zeros((rows, hd));
    let mut h = h0.clone();
    // rolling cell state, overwritten in place each step
    let mut c = c0.clone();
    let mut tanh_c_row = vec![0.0; hd];
    // recurrent weights transposed once: rows become contiguous gate columns
    let u_t = params.u.t().as_standard_layout().to_owned();
    let u_t_s = u_t.as_slice().expect("standard layout");

    for t in 0..steps {
        if want_cache {
            block_mut(&mut h_prev_stack, t, bsz).assign(&h);
            block_mut(&mut c_prev_stack, t, bsz).assign(&c);
        }

        // pre-activations for all gates, accumulated into the gate stack
        {
            let start = t * bsz * 4 * hd;
            let acts = &mut gates.as_slice_mut().expect("standard layout")[start..start + bsz * 4 * hd];
            gemm_acc(acts, h.as_slice().expect("standard layout"), u_t_s, bsz, hd, 4 * hd);
        }

        let acts_s = {
            let start = t * bsz * 4 * hd;
            &mut gates.as_slice_mut().expect("standard layout")[start..start + bsz * 4 * hd]
        };
        let c_s = c.as_slice_mut().expect("standard layout");
        let h_s = h.as_slice_mut().expect("standard layout");
        for r in 0..bsz {
            let row = &mut acts_s[r * 4 * hd..(r + 1) * 4 * hd];
            let cp = &mut c_s[r * hd..(r + 1) * hd];
            let hn = &mut h_s[r * hd..(r + 1) * hd];
            let tc: &mut [f64] = if want_cache {
                let start = (t * bsz + r) * hd;
                &mut tanh_c_stack.as_slice_mut().expect("standard layout")[start..start + hd]
            } else {
                &mut tanh_c_row
            };
            lstm_cell_row(row, cp, hn, tc);
        }
        block_mut(&mut h_seq, t, bsz).assign(&h);
    }

    let cache = want_cache.then(|| LstmCache {
        xs: input.data().clone(),
        h_prev: h_prev_stack,
        c_prev: c_prev_stack,
        gates,
        tanh_c: tanh_c_stack,
        batch: bsz,
        steps,
    });
    Ok((SeqBatch::new(h_seq, bsz)?, cache))
}

/// Pre-activation gate gradients (packed columns i|f|g|o) plus the gradients
/// reaching h0/c0.
fn gate_grads(
    params: &LstmParams,
    cache: &LstmCache,
    grad_h: &SeqBatch,
) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>), NdError> {
    let bsz = cache.batch;
    let steps = cache.steps;
    let hd = params.hidden_dim;
    if grad_h.batch() != bsz || grad_h.steps() != steps || grad_h.dim() != hd {
        return Err(NdError::Shape(format!(
            "upstream gradient shape ({}, {}, {}) does not match cache ({steps}, {bsz}, {hd})",
            grad_h.steps(),
            grad_h.batch(),
            grad_h.dim()
        )));
    }

    let mut dgates = Array2::zeros((steps * bsz, 4 * hd));
    let mut dh_next = Array2::zeros((bsz, hd));
    let mut dc_next = Array2::zeros((bsz, hd));

    let gates_s = cache.gates.as_slice().expect("standard layout");
    let tanh_c_s = cache.tanh_c.as_slice().expect("standard layout");
    let c_prev_s = cache.c_prev.as_slice().expect("standard layout");

    for t in (0..steps).rev() {
        let mut dh = grad_h.step(t).to_owned();
        dh += &dh_next;

        {
            let dg_all = dgates.as_slice_mut().expect("standard layout");
            let dh_s = dh.as_slice().expect("standard layout");
            let dcn_s = dc_next.as_slice_mut().expect("standard layout");
            for r in 0..bsz {
                let row = t * bsz + r;
                let gates_row = &gates_s[row * 4 * hd..(row + 1) * 4 * hd];
                let (gi, rest) = gates_row.split_at(hd);
                let (gf, rest) = rest.split_at(hd);
                let (gc, go) = rest.split_at(hd);
                let tc = &tanh_c_s[row * hd..(row + 1) * hd];
                let cp = &c_prev_s[row * hd..(row + 1) * hd];
                let dh_row = &dh_s[r * hd..(r + 1) * hd];
                let dcn = &mut dcn_s[r * hd..(r + 1) * hd];

                let dg_row = &mut dg_all[row * 4 * hd..(row + 1) * 4 * hd];
                let (di, rest) = dg_row.split_at_mut(hd);
                let (df, rest) = rest.split_at_mut(hd);
                let (dgc, dgo) = rest.split_at_mut(hd);
                for k in 0..hd {
                    // dc carries the upstream cell gradient from step t+1
                    let dc = dh_row[k] * go[k] * (1.0 - tc[k] * tc[k]) + dcn[k];
                    di[k] = dc * gc[k] * gi[k] * (1.0 - gi[k]);
                    df[k] = dc * cp[k] * gf[k] * (1.0 - gf[k]);
                    dgc[k] = dc * gi[k] * (1.0 - gc[k] * gc[k]);
                    dgo[k] = dh_row[k] * tc[k] * go[k] * (1.0 - go[k]);
                    dcn[k] = dc * gf[k];
                }
            }
        }

        let mut next = Array2::zeros((bsz, hd));
        {
            let start = t * bsz * 4 * hd;
            let dg = &dgates.as_slice().expect("standard layout")[start..start + bsz * 4 * hd];
            gemm_acc(
                next.as_slice_mut().expect("standard layout"),
                dg,
                params.u.as_slice().expect("standard layout"),
                bsz,
                4 * hd,
                hd,
            );
        }
        dh_next = next;
    }

    Ok((dgates, dh_next, dc_next))
}

/// Full backward pass: exact analytic gradients of every parameter tensor,
/// the inputs, and the initial state, given per-step hidden-state gradients.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    grad_h: &SeqBatch,
) -> Result<LstmGrads, NdError> {
    let (dgates, dh0, dc0) = gate_grads(params, cache, grad_h)?;
    let hd = params.hidden_dim;
    let mut w = Array2::zeros((4 * hd, params.input_dim));
    general_mat_mul(1.0, &dgates.t(), &cache.xs, 0.0, &mut w);
    let mut u = Array2::zeros((4 * hd, hd));
    general_mat_mul(1.0, &dgates.t(), &cache.h_prev, 0.0, &mut u);
    let mut inputs = Array2::zeros((dgates.nrows(), params.input_dim));
    general_mat_mul(1.0, &dgates, &params.w, 0.0, &mut inputs);
    Ok(LstmGrads {
        hidden_dim: hd,
        input_dim: params.input_dim,
        w,
        u,
        b: dgates.sum_axis(Axis(0)),
        inputs,
        h0: dh0,
        c0: dc0,
    })
}

/// Input-side gradients only (stacked input grads, dh0, dc0). Used where the
/// caller updates a different network and the parameter gradients would be
/// discarded.
pub fn lstm_backward_inputs(
    params: &LstmParams,
    cache: &LstmCache,
    grad_h: &SeqBatch,
) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>), NdError> {
    let (dgates, dh0, dc0) = gate_grads(params, cache, grad_h)?;
    let mut inputs = Array2::zeros((dgates.nrows(), params.input_dim));
    general_mat_mul(1.0, &dgates, &params.w, 0.0, &mut inputs);
    Ok((inputs, dh0, dc0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::{bce_loss, finite_diff_grad, sigmoid, DenseParams};
    use ndarray::{arr1, arr2, array};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn forward_single(params: &LstmParams, seq: &Array2<f64>) -> (SeqBatch, LstmCache) {
        let input = SeqBatch::from_single(seq.view()).unwrap();
        let h0 = Array2::zeros((1, params.hidden_dim()));
        let c0 = Array2::zeros((1, params.hidden_dim()));
        lstm_forward(params, &input, &h0, &c0).unwrap()
    }

    #[test]
    fn zero_params_give_zero_hidden_states() {
        let params = LstmParams::zeros(3, 2);
        let seq = array![[1.0, -2.0, 0.5], [0.3, 0.0, 4.0]];
        let (h, _) = forward_single(&params, &seq);
        assert!(h.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_step_matches_hand_computation() {
        // scalar net: input_dim = hidden_dim = 1
        let w = [0.5, -0.3, 0.8, 0.2].map(|v| arr2(&[[v]]));
        let u = [0.1, 0.4, -0.2, 0.6].map(|v| arr2(&[[v]]));
        let b = [0.1, 1.0, -0.05, 0.3].map(|v| arr1(&[v]));
        let params = LstmParams::from_parts(w, u, b).unwrap();

        let x = 0.7;
        let (h, _) = forward_single(&params, &array![[x]]);

        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let i = sig(0.5 * x + 0.1);
        let f = sig(-0.3 * x + 1.0);
        let g = (0.8 * x - 0.05).tanh();
        let o = sig(0.2 * x + 0.3);
        let c = f * 0.0 + i * g;
        let expected = o * c.tanh();
        assert!((h.data()[[0, 0]] - expected).abs() < 1e-12);
    }

    #[test]
    fn gate_accessors_expose_packed_rows() {
        let w = [1.0, 2.0, 3.0, 4.0].map(|v| arr2(&[[v]]));
        let u = [5.0, 6.0, 7.0, 8.0].map(|v| arr2(&[[v]]));
        let b = [0.1, 0.2, 0.3, 0.4].map(|v| arr1(&[v]));
        let params = LstmParams::from_parts(w, u, b).unwrap();
        assert_eq!(params.input_weights(GATE_CELL)[[0, 0]], 3.0);
        assert_eq!(params.recurrent_weights(GATE_OUTPUT)[[0, 0]], 8.0);
        assert_eq!(params.biases(GATE_FORGET)[0], 0.2);
        let slices = params.param_slices();
        assert_eq!(slices.len(), 12);
        assert_eq!(slices[0], &[1.0]);
        assert_eq!(slices[7], &[8.0]);
        assert_eq!(slices[9], &[0.2]);
    }

    #[test]
    fn forward_is_deterministic_and_finite() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let params = LstmParams::init(3, 4, &mut rng);
        let seq = array![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let (h1, _) = forward_single(&params, &seq);
        let (h2, _) = forward_single(&params, &seq);
        assert_eq!(h1.data(), h2.data());
        assert!(h1.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn forget_bias_initialized_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let params = LstmParams::init(2, 3, &mut rng);
        assert!(params.biases(GATE_FORGET).iter().all(|v| *v == 1.0));
        assert!(params.biases(GATE_INPUT).iter().all(|v| *v == 0.0));
        let bound = 1.0 / 3f64.sqrt();
        assert!(params.w.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let params = LstmParams::zeros(3, 2);
        let input = SeqBatch::from_single(array![[1.0, 2.0]].view()).unwrap();
        let h0 = Array2::zeros((1, 2));
        assert!(lstm_forward(&params, &input, &h0, &h0.clone()).is_err());
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_grads() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let params = LstmParams::init(2, 3, &mut rng);
        let seq = array![[0.4, -0.2], [1.0, 0.3]];
        let (_, cache) = forward_single(&params, &seq);
        let grad_h = SeqBatch::from_single(Array2::zeros((2, 3)).view()).unwrap();
        let grads = lstm_backward(&params, &cache, &grad_h).unwrap();
        assert!(grads.param_slices().iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert!(grads.inputs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_is_homogeneous_in_upstream_gradient() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let params = LstmParams::init(2, 3, &mut rng);
        let seq = array![[0.4, -0.2], [1.0, 0.3], [-0.5, 0.8]];
        let (_, cache) = forward_single(&params, &seq);

        let g = Array2::from_shape_fn((3, 3), |(r, c)| 0.1 * (r as f64 + 1.0) - 0.05 * c as f64);
        let g1 = SeqBatch::from_single(g.view()).unwrap();
        let g2 = SeqBatch::from_single((&g * 2.0).view()).unwrap();

        let grads1 = lstm_backward(&params, &cache, &g1).unwrap();
        let grads2 = lstm_backward(&params, &cache, &g2).unwrap();
        for (a, b) in grads1.param_slices().iter().zip(grads2.param_slices()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((2.0 * x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_inputs_agrees_with_full_backward() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let params = LstmParams::init(3, 2, &mut rng);
        let seq = array![[0.4, -0.2, 0.1], [1.0, 0.3, -0.6]];
        let (_, cache) = forward_single(&params, &seq);
        let g = SeqBatch::from_single(array![[0.3, -0.1], [0.2, 0.7]].view()).unwrap();

        let full = lstm_backward(&params, &cache, &g).unwrap();
        let (dx, dh0, dc0) = lstm_backward_inputs(&params, &cache, &g).unwrap();
        assert_eq!(full.inputs, dx);
        assert_eq!(full.h0, dh0);
        assert_eq!(full.c0, dc0);
    }

    /// Reference check for every parameter, input, and initial-state gradient
    /// against central finite differences, on a loss that weights each hidden
    /// state with fixed coefficients.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for case in 0..6 {
            let input_dim = 1 + case % 3;
            let hidden_dim = 1 + (case + 1) % 4;
            let steps = 1 + case % 5;
            let batch = 1 + case % 2;

            let params = LstmParams::init(input_dim, hidden_dim, &mut rng);
            let seqs: Vec<Array2<f64>> = (0..batch)
                .map(|_| Array2::from_shape_fn((steps, input_dim), |_| rng.random_range(-1.0..1.0)))
                .collect();
            let views: Vec<_> = seqs.iter().map(|s| s.view()).collect();
            let input = SeqBatch::from_sequences(&views).unwrap();
            let h0 = Array2::from_shape_fn((batch, hidden_dim), |_| rng.random_range(-0.5..0.5));
            let c0 = Array2::from_shape_fn((batch, hidden_dim), |_| rng.random_range(-0.5..0.5));
            let weights =
                Array2::from_shape_fn((steps * batch, hidden_dim), |_| rng.random_range(-1.0..1.0));

            let loss = |p: &LstmParams| -> f64 {
                let (h, _) = lstm_forward(p, &input, &h0, &c0).unwrap();
                (h.data() * &weights).sum()
            };

            let (_, cache) = lstm_forward(&params, &input, &h0, &c0).unwrap();
            let grad_h = SeqBatch::new(weights.clone(), batch).unwrap();
            let analytic = lstm_backward(&params, &cache, &grad_h).unwrap();

            let flat = params.flatten();
            let numeric = finite_diff_grad(
                |f| {
                    let mut p = params.clone();
                    p.assign_from_flat(f).unwrap();
                    loss(&p)
                },
                &flat,
                1e-5,
            );
            let analytic_flat: Vec<f64> =
                analytic.param_slices().iter().flat_map(|s| s.iter().copied()).collect();
            assert_close_all(&analytic_flat, &numeric, "params");

            // input gradients
            let numeric_x = finite_diff_grad(
                |f| {
                    let data = Array2::from_shape_vec((steps * batch, input_dim), f.to_vec()).unwrap();
                    let inp = SeqBatch::new(data, batch).unwrap();
                    let (h, _) = lstm_forward(&params, &inp, &h0, &c0).unwrap();
                    (h.data() * &weights).sum()
                },
                input.data().as_slice().unwrap(),
                1e-5,
            );
            assert_close_all(analytic.inputs.as_slice().unwrap(), &numeric_x, "inputs");

            // initial-state gradients
            let numeric_h0 = finite_diff_grad(
                |f| {
                    let h0v = Array2::from_shape_vec((batch, hidden_dim), f.to_vec()).unwrap();
                    let (h, _) = lstm_forward(&params, &input, &h0v, &c0).unwrap();
                    (h.data() * &weights).sum()
                },
                h0.as_slice().unwrap(),
                1e-5,
            );
            assert_close_all(analytic.h0.as_slice().unwrap(), &numeric_h0, "h0");
        }
    }

    /// Composite chain LSTM -> dense -> sigmoid -> BCE, checked end to end
    /// against the finite-difference oracle on a small toy.
    #[test]
    fn composite_chain_matches_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let (input_dim, hidden_dim, steps) = (2, 3, 2);
        let params = LstmParams::init(input_dim, hidden_dim, &mut rng);
        let proj = DenseParams::init(hidden_dim, 1, 0.5, &mut rng);
        let seq = Array2::from_shape_fn((steps, input_dim), |_| rng.random_range(-1.0..1.0));
        let target = 1.0;

        let loss_of = |p: &LstmParams| -> f64 {
            let input = SeqBatch::from_single(seq.view()).unwrap();
            let h0 = Array2::zeros((1, hidden_dim));
            let (h, _) = lstm_forward(p, &input, &h0, &h0.clone()).unwrap();
            let scores = proj.forward(h.data()).mapv(sigmoid);
            let mean = scores.mean().unwrap();
            bce_loss(mean, target).0
        };

        // analytic path
        let input = SeqBatch::from_single(seq.view()).unwrap();
        let h0 = Array2::zeros((1, hidden_dim));
        let (h, cache) = lstm_forward(&params, &input, &h0, &h0.clone()).unwrap();
        let pre = proj.forward(h.data());
        let scores = pre.mapv(sigmoid);
        let mean = scores.mean().unwrap();
        let (_, dmean) = bce_loss(mean, target);
        let dscores = Array2::from_elem(scores.dim(), dmean / scores.len() as f64);
        let dpre = &dscores * &scores.mapv(|s| s * (1.0 - s));
        let (_, dh) = proj.backward(h.data(), &dpre);
        let grads =
            lstm_backward(&params, &cache, &SeqBatch::new(dh, 1).unwrap()).unwrap();

        let numeric = finite_diff_grad(
            |f| {
                let mut p = params.clone();
                p.assign_from_flat(f).unwrap();
                loss_of(&p)
            },
            &params.flatten(),
            1e-5,
        );
        let analytic_flat: Vec<f64> =
            grads.param_slices().iter().flat_map(|s| s.iter().copied()).collect();
        assert_close_all(&analytic_flat, &numeric, "composite");
    }

    // relative error < 1e-4 with an absolute floor of 1e-8 for near-zero entries
    fn assert_close_all(analytic: &[f64], numeric: &[f64], what: &str) {
        assert_eq!(analytic.len(), numeric.len());
        for (k, (a, n)) in analytic.iter().zip(numeric).enumerate() {
            let abs = (a - n).abs();
            let rel = abs / a.abs().max(n.abs()).max(f64::MIN_POSITIVE);
            assert!(
                abs < 1e-8 || rel < 1e-4,
                "{what}[{k}]: analytic {a} vs numeric {n} (rel {rel:.2e})"
            );
        }
    }
}
