use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::replica::train_replica;
use super::stopping::TrainLog;
use super::TrainConfig;
use crate::corpus::Preamble;
use crate::error::{Error, Result};
use crate::network::{read_checkpoint, write_checkpoint, ModelParams};

/// Result of training one seed.
#[derive(Debug)]
pub struct ReplicaOutcome {
    pub seed: u64,
    pub result: Result<(ModelParams, TrainLog)>,
}

/// Trains one replica per seed. Replicas run in parallel on the current
/// rayon pool; a failing replica does not stop its siblings. Output order
/// matches `config.seeds`.
pub fn train_ensemble(
    corpus: &[Preamble],
    validation: &[Preamble],
    vocab_len: usize,
    config: &TrainConfig,
) -> Result<Vec<ReplicaOutcome>> {
    config.validate()?;
    Ok(config
        .seeds
        .par_iter()
        .map(|&seed| {
            let result = train_replica(corpus, validation, vocab_len, config, seed);
            match &result {
                Ok((_, log)) => log::info!(
                    "replica {seed}: {} epochs, best validation error {:.4}",
                    log.epochs(),
                    log.best_validation_error().unwrap_or(f64::NAN)
                ),
                Err(e) => log::warn!("replica {seed} failed: {e}"),
            }
            ReplicaOutcome { seed, result }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub checkpoint: String,
    pub log: String,
    pub epochs: usize,
    pub best_epoch: usize,
    pub validation_error: f64,
}

/// Index of a checkpoint directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub replicas: Vec<ManifestEntry>,
    pub failed_seeds: Vec<u64>,
    /// Fingerprint of the vocabulary the models were trained with.
    pub vocab_fingerprint: u64,
}

pub const MANIFEST_FILE: &str = "ensemble.json";

fn checkpoint_name(seed: u64) -> String {
    format!("replica-{seed}.ckpt")
}

/// Writes `replica-<seed>.ckpt`, `replica-<seed>.log.tsv` and
/// `ensemble.json` into `dir`. Returns the paths written.
pub fn save_ensemble(
    dir: &Path,
    outcomes: &[ReplicaOutcome],
    vocab_fingerprint: u64,
) -> Result<(EnsembleManifest, Vec<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut manifest = EnsembleManifest {
        replicas: Vec::new(),
        failed_seeds: Vec::new(),
        vocab_fingerprint,
    };
    for outcome in outcomes {
        match &outcome.result {
            Ok((params, log)) => {
                let checkpoint = checkpoint_name(outcome.seed);
                let log_name = format!("replica-{}.log.tsv", outcome.seed);
                let path = dir.join(&checkpoint);
                write_checkpoint(params, BufWriter::new(fs::File::create(&path)?))?;
                written.push(path);
                let path = dir.join(&log_name);
                fs::write(&path, log.to_tsv())?;
                written.push(path);
                manifest.replicas.push(ManifestEntry {
                    seed: outcome.seed,
                    checkpoint,
                    log: log_name,
                    epochs: log.epochs(),
                    best_epoch: log.best_epoch,
                    validation_error: log.best_validation_error().unwrap_or(f64::NAN),
                });
            }
            Err(_) => manifest.failed_seeds.push(outcome.seed),
        }
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    written.push(path);
    Ok((manifest, written))
}

/// Loads every checkpoint listed in a directory's manifest, in order.
pub fn load_ensemble(dir: &Path) -> Result<(EnsembleManifest, Vec<ModelParams>)> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: EnsembleManifest =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("manifest: {e}")))?;
    let models = manifest
        .replicas
        .iter()
        .map(|entry| {
            let file = fs::File::open(dir.join(&entry.checkpoint))?;
            read_checkpoint(BufReader::new(file))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, models))
}
