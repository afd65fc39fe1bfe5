//! Embedding + single-layer LSTM + logistic number classifier.
//!
//! Gate blocks of the recurrent weight matrix are stacked in the order
//! input, forget, cell candidate, output (`IFGO`). Row `r` of the
//! `4h × (d + h)` matrix holds the weights of gate `r / h`, unit `r % h`,
//! applied to the concatenation `[embedding; previous hidden]`.

mod checkpoint;
pub mod gradcheck;
mod lstm;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_VERSION, GATE_ORDER};
pub(crate) use lstm::number_from_probability;
pub use lstm::{accumulate_gradients, backward, forward, forward_probe, forward_with, loss, predict, step, Workspace};

use crate::error::{Error, Result};
use crate::Rng;

/// Model dimensions: vocabulary size, embedding width, hidden width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
}

impl Dims {
    pub fn new(vocab: usize, embed: usize, hidden: usize) -> Self {
        Dims { vocab, embed, hidden }
    }

    pub(crate) fn input_width(&self) -> usize {
        self.embed + self.hidden
    }

    pub(crate) fn gate_rows(&self) -> usize {
        4 * self.hidden
    }
}

/// The two shipped model sizes.
pub const SMALL_DIMS: Dims = Dims {
    vocab: 50_000,
    embed: 50,
    hidden: 50,
};
pub const LARGE_DIMS: Dims = Dims {
    vocab: 50_000,
    embed: 50,
    hidden: 1000,
};

/// Iteration over the named weight blocks of a parameter-shaped value.
pub trait Blocks {
    fn blocks(&self) -> [(&'static str, &[f64]); 5];
    fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 5];

    fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    /// Name of the first block holding a NaN or infinity.
    fn first_non_finite(&self) -> Option<&'static str> {
        self.blocks()
            .into_iter()
            .find(|(_, b)| b.iter().any(|v| !v.is_finite()))
            .map(|(name, _)| name)
    }
}

macro_rules! impl_blocks {
    ($ty:ty) => {
        impl Blocks for $ty {
            fn blocks(&self) -> [(&'static str, &[f64]); 5] {
                [
                    ("embeddings", &self.embeddings),
                    ("lstm_weights", &self.lstm_weights),
                    ("lstm_bias", &self.lstm_bias),
                    ("output_weights", &self.output_weights),
                    ("output_bias", std::slice::from_ref(&self.output_bias)),
                ]
            }

            fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 5] {
                [
                    ("embeddings", &mut self.embeddings),
                    ("lstm_weights", &mut self.lstm_weights),
                    ("lstm_bias", &mut self.lstm_bias),
                    ("output_weights", &mut self.output_weights),
                    ("output_bias", std::slice::from_mut(&mut self.output_bias)),
                ]
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: Dims,
    pub seed: u64,
    /// `vocab × embed`, row-major.
    pub embeddings: Vec<f64>,
    /// `4·hidden × (embed + hidden)`, row-major, gate blocks `IFGO`.
    pub lstm_weights: Vec<f64>,
    pub lstm_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Derivatives of a scalar with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: Vec<f64>,
    pub lstm_weights: Vec<f64>,
    pub lstm_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl_blocks!(ModelParams);
impl_blocks!(Gradients);

impl Gradients {
    pub fn zeros(dims: Dims) -> Self {
        Gradients {
            embeddings: vec![0.0; dims.vocab * dims.embed],
            lstm_weights: vec![0.0; dims.gate_rows() * dims.input_width()],
            lstm_bias: vec![0.0; dims.gate_rows()],
            output_weights: vec![0.0; dims.hidden],
            output_bias: 0.0,
        }
    }

    pub fn reset(&mut self) {
        for (_, block) in self.blocks_mut() {
            block.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, block) in self.blocks_mut() {
            block.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn matches(&self, dims: Dims) -> bool {
        let expected = Gradients::zeros(dims);
        self.blocks()
            .iter()
            .zip(expected.blocks().iter())
            .all(|((_, a), (_, b))| a.len() == b.len())
    }
}

/// Hidden and cell vectors of the recurrent layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            hidden: vec![0.0; hidden],
            cell: vec![0.0; hidden],
        }
    }
}

/// Draws every weight uniformly from `[-1/sqrt(h), 1/sqrt(h)]`; the forget
/// gate bias starts at 1 and all other biases at 0.
pub fn init_params(dims: Dims, seed: u64) -> Result<ModelParams> {
    if dims.vocab == 0 || dims.embed == 0 || dims.hidden == 0 {
        return Err(Error::Input(format!("dimensions must be positive, got {dims:?}")));
    }
    let bound = 1.0 / (dims.hidden as f64).sqrt();
    let uniform = Uniform::new_inclusive(-bound, bound);
    let mut rng = Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| uniform.sample(&mut rng)).collect() };

    let embeddings = draw(dims.vocab * dims.embed);
    let lstm_weights = draw(dims.gate_rows() * dims.input_width());
    let output_weights = draw(dims.hidden);
    let mut lstm_bias = vec![0.0; dims.gate_rows()];
    lstm_bias[dims.hidden..2 * dims.hidden].fill(1.0);

    Ok(ModelParams {
        dims,
        seed,
        embeddings,
        lstm_weights,
        lstm_bias,
        output_weights,
        output_bias: 0.0,
    })
}

impl ModelParams {
    /// Parameters with every entry zero (useful for tests and baselines).
    pub fn zeros(dims: Dims) -> Self {
        let g = Gradients::zeros(dims);
        ModelParams {
            dims,
            seed: 0,
            embeddings: g.embeddings,
            lstm_weights: g.lstm_weights,
            lstm_bias: g.lstm_bias,
            output_weights: g.output_weights,
            output_bias: 0.0,
        }
    }
}
