use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::adam::{adam_update, AdamState};
use super::stopping::{run_with_early_stopping, EpochTrainer, TrainLog};
use super::TrainConfig;
use crate::corpus::Preamble;
use crate::error::{Error, Result};
use crate::network::{
    accumulate_gradients, forward_with, init_params, number_from_probability, Dims, Gradients, ModelParams, Workspace,
};
use crate::Rng;

/// Stream of the per-replica generator reserved for epoch shuffles, so the
/// shuffle order does not depend on how many draws initialization made.
const SHUFFLE_STREAM: u64 = 1;

/// Fraction of preambles whose predicted number differs from the gold one.
pub fn error_rate(params: &ModelParams, preambles: &[Preamble]) -> Result<f64> {
    if preambles.is_empty() {
        return Ok(0.0);
    }
    let mut ws = Workspace::new();
    let mut errors = 0usize;
    for p in preambles {
        let prob = forward_with(params, &p.tokens, &mut ws)?;
        if number_from_probability(prob) != p.gold {
            errors += 1;
        }
    }
    Ok(errors as f64 / preambles.len() as f64)
}

/// Epoch visiting orders over `0..n`, drawn from the shuffle stream of a
/// replica seed.
pub struct EpochShuffle {
    order: Vec<usize>,
    rng: Rng,
}

impl EpochShuffle {
    pub fn new(seed: u64, n: usize) -> Self {
        let mut rng = Rng::seed_from_u64(seed);
        rng.set_stream(SHUFFLE_STREAM);
        EpochShuffle {
            order: (0..n).collect(),
            rng,
        }
    }

    pub fn next_epoch(&mut self) -> &[usize] {
        self.order.shuffle(&mut self.rng);
        &self.order
    }
}

struct Replica<'a> {
    params: ModelParams,
    adam: AdamState,
    grads: Gradients,
    ws: Workspace,
    shuffle: EpochShuffle,
    corpus: &'a [Preamble],
    validation: &'a [Preamble],
    config: &'a TrainConfig,
}

impl EpochTrainer for Replica<'_> {
    type Snapshot = ModelParams;

    fn train_epoch(&mut self, epoch: usize) -> Result<f64> {
        let order = self.shuffle.next_epoch();
        let mut total = 0.0;
        for batch in order.chunks(self.config.batch_size) {
            self.grads.reset();
            for &i in batch {
                let p = &self.corpus[i];
                total += accumulate_gradients(&self.params, &p.tokens, p.gold, &mut self.grads, &mut self.ws)?;
            }
            self.grads.scale(1.0 / batch.len() as f64);
            adam_update(&mut self.params, &mut self.adam, &self.grads, self.config)?;
        }
        let mean = total / self.corpus.len() as f64;
        log::debug!("seed {} epoch {epoch}: loss {mean:.5}", self.params.seed);
        Ok(mean)
    }

    fn validation_error(&mut self) -> Result<f64> {
        let e = error_rate(&self.params, self.validation)?;
        log::debug!("seed {}: validation error {e:.5}", self.params.seed);
        Ok(e)
    }

    fn snapshot(&self) -> ModelParams {
        self.params.clone()
    }
}

/// Trains one replica from `seed` and returns the parameters of its best
/// validation epoch. Fully determined by the inputs and the seed.
pub fn train_replica(
    corpus: &[Preamble],
    validation: &[Preamble],
    vocab_len: usize,
    config: &TrainConfig,
    seed: u64,
) -> Result<(ModelParams, TrainLog)> {
    config.validate()?;
    if corpus.is_empty() || validation.is_empty() {
        return Err(Error::Input("training and validation sets must be non-empty".into()));
    }
    let dims: Dims = config.dims(vocab_len);
    let params = init_params(dims, seed)?;
    let mut replica = Replica {
        adam: AdamState::new(&params),
        grads: Gradients::zeros(dims),
        params,
        ws: Workspace::new(),
        shuffle: EpochShuffle::new(seed, corpus.len()),
        corpus,
        validation,
        config,
    };
    let (best, log) = run_with_early_stopping(&mut replica, config.max_epochs)?;
    debug_assert_eq!(
        replica.adam.timestep as usize,
        log.epochs() * corpus.len().div_ceil(config.batch_size)
    );
    Ok((best, log))
}
