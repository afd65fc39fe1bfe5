//! Adam optimization, validation early stopping and replica ensembles.

mod adam;
mod config;
mod ensemble;
mod replica;
mod stopping;

pub use adam::{adam_update, AdamState};
pub use config::TrainConfig;
pub use ensemble::{
    load_ensemble, save_ensemble, train_ensemble, EnsembleManifest, ManifestEntry, ReplicaOutcome, MANIFEST_FILE,
};
pub use replica::{error_rate, train_replica, EpochShuffle};
pub use stopping::{run_with_early_stopping, EpochRecord, EpochTrainer, StopReason, TrainLog};
