use crate::error::{Error, Result};
use crate::network::{Blocks, Gradients, ModelParams};

use super::TrainConfig;

/// First and second moment estimates plus the update count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub timestep: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            first_moment: Gradients::zeros(params.dims),
            second_moment: Gradients::zeros(params.dims),
            timestep: 0,
        }
    }
}

/// One bias-corrected Adam step, in place. A gradient holding a NaN or
/// infinity is rejected before anything is modified.
pub fn adam_update(
    params: &mut ModelParams,
    adam: &mut AdamState,
    grads: &Gradients,
    config: &TrainConfig,
) -> Result<()> {
    if !grads.matches(params.dims) || !adam.first_moment.matches(params.dims) {
        return Err(Error::Input("gradient shapes do not match the parameters".into()));
    }
    if let Some(block) = grads.first_non_finite() {
        return Err(Error::Numerical(format!("gradient block `{block}`")));
    }
    adam.timestep += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let t = adam.timestep as i32;
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);
    let lr = config.learning_rate;
    let eps = config.adam_eps;

    let blocks = params
        .blocks_mut()
        .into_iter()
        .zip(grads.blocks())
        .zip(adam.first_moment.blocks_mut())
        .zip(adam.second_moment.blocks_mut());
    for ((((_, theta), (_, g)), (_, m)), (_, v)) in blocks {
        for k in 0..theta.len() {
            let gk = g[k];
            m[k] = b1 * m[k] + (1.0 - b1) * gk;
            v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
            let m_hat = m[k] / correction1;
            let v_hat = v[k] / correction2;
            theta[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
