//! Plain SGD and bias-corrected Adam over flat parameter slices.
//!
//! Both optimizers work on the slice lists produced by `param_slices_mut`,
//! so one call updates a whole network.

use super::NdError;

/// `theta <- theta - lr * g`, elementwise over every tensor.
pub fn sgd_step(mut params: Vec<&mut [f64]>, grads: &[&[f64]], lr: f64) -> Result<(), NdError> {
    check_alignment(&params, grads)?;
    for (p, g) in params.iter_mut().zip(grads) {
        for (pv, gv) in p.iter_mut().zip(g.iter()) {
            *pv -= lr * gv;
        }
    }
    Ok(())
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment accumulators, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    step_count: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state shaped like the given parameter slices.
    pub fn for_params(params: &[&[f64]]) -> Self {
        Self {
            step_count: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            epsilon: ADAM_EPSILON,
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One bias-corrected Adam update across every tensor; increments the shared
/// step count once.
pub fn adam_step(
    mut params: Vec<&mut [f64]>,
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NdError> {
    check_alignment(&params, grads)?;
    if state.m.len() != params.len()
        || state
            .m
            .iter()
            .zip(params.iter())
            .any(|(m, p)| m.len() != p.len())
    {
        return Err(NdError::Shape("Adam state does not match parameter shapes".into()));
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for k in 0..p.len() {
            let gv = g[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * gv;
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * gv * gv;
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

fn check_alignment(params: &[&mut [f64]], grads: &[&[f64]]) -> Result<(), NdError> {
    if params.len() != grads.len() {
        return Err(NdError::Shape(format!(
            "{} parameter tensors vs {} gradient tensors",
            params.len(),
            grads.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() {
            return Err(NdError::Shape(format!(
                "tensor {i}: parameter length {} vs gradient length {}",
                p.len(),
                g.len()
            )));
        }
    }
    Ok(())
}
