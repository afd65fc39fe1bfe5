//! Central finite-difference verification of [`backward`](super::backward).
//!
//! Only [`loss`](super::loss) is used to build the numerical gradient, so the
//! check does not share code with the backpropagation path.

use super::{loss, Blocks, ModelParams};
use crate::corpus::{NumberFeature, TokenId};
use crate::error::Result;

/// Relative deviations below this magnitude of both gradients are measured
/// against the floor instead, so exactly-zero entries do not divide by zero.
pub const RELATIVE_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_block: &'static str,
    pub worst_index: usize,
    pub checked: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares an analytic gradient with central differences of the loss for
/// every parameter entry.
pub fn check_gradients<G: Blocks>(
    params: &ModelParams,
    tokens: &[TokenId],
    gold: NumberFeature,
    analytic: &G,
    epsilon: f64,
) -> Result<GradCheckReport> {
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_block: "",
        worst_index: 0,
        checked: 0,
    };
    for (block_index, (name, expected)) in analytic.blocks().into_iter().enumerate() {
        for (i, &a) in expected.iter().enumerate() {
            let original = params.blocks()[block_index].1[i];
            probe.blocks_mut()[block_index].1[i] = original + epsilon;
            let up = loss(&probe, tokens, gold)?;
            probe.blocks_mut()[block_index].1[i] = original - epsilon;
            let down = loss(&probe, tokens, gold)?;
            probe.blocks_mut()[block_index].1[i] = original;
            let numeric = (up - down) / (2.0 * epsilon);
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst_block = name;
                report.worst_index = i;
            }
        }
    }
    Ok(report)
}
