use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::DEFAULT_CUTOFF;
use crate::error::{Error, Result};
use crate::network::Dims;

/// Training hyperparameters. Every field has a default, so a config file
/// only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Number of most frequent word forms that get their own embedding.
    pub vocab_cutoff: usize,
    pub embed: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub replicas: usize,
    pub seeds: Vec<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            vocab_cutoff: DEFAULT_CUTOFF,
            embed: 50,
            hidden: 50,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 64,
            max_epochs: 20,
            replicas: 20,
            seeds: (1..=20).collect(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(self.adam_beta1 > 0.0 && self.adam_beta1 < 1.0) {
            return fail("adam_beta1 must lie in (0, 1)");
        }
        if !(self.adam_beta2 > 0.0 && self.adam_beta2 < 1.0) {
            return fail("adam_beta2 must lie in (0, 1)");
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return fail("adam_eps must be positive");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return fail("batch_size and max_epochs must be at least 1");
        }
        if self.embed == 0 || self.hidden == 0 || self.vocab_cutoff == 0 {
            return fail("embed, hidden and vocab_cutoff must be at least 1");
        }
        if self.replicas != self.seeds.len() {
            return Err(Error::Config(format!(
                "replicas = {} but {} seeds are listed",
                self.replicas,
                self.seeds.len()
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: TrainConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Model dimensions for a vocabulary of `vocab_len` tokens.
    pub fn dims(&self, vocab_len: usize) -> Dims {
        Dims::new(vocab_len, self.embed, self.hidden)
    }

    /// Sets the replica count and seeds together.
    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.replicas = seeds.len();
        self.seeds = seeds;
        self
    }
}
