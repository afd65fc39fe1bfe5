use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub training_loss: f64,
    pub validation_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Validation error failed to strictly decrease.
    ValidationPlateau,
    MaxEpochs,
}

/// Append-only record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    records: Vec<EpochRecord>,
    pub stop_reason: Option<StopReason>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl TrainLog {
    fn new() -> Self {
        TrainLog {
            records: Vec::new(),
            stop_reason: None,
            best_epoch: 0,
        }
    }

    fn push(&mut self, record: EpochRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    pub fn epochs(&self) -> usize {
        self.records.len()
    }

    pub fn best_validation_error(&self) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.epoch == self.best_epoch)
            .map(|r| r.validation_error)
    }

    /// Tab-separated rendering: a header, one line per epoch and a trailer
    /// comment with the stop reason.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttraining_loss\tvalidation_error\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{:.17e}\t{:.17e}",
                r.epoch, r.training_loss, r.validation_error
            );
        }
        let reason = match self.stop_reason {
            Some(StopReason::ValidationPlateau) => "validation_plateau",
            Some(StopReason::MaxEpochs) => "max_epochs",
            None => "running",
        };
        let _ = writeln!(out, "# stop={reason} best_epoch={}", self.best_epoch);
        out
    }
}

/// One unit of training driven by [`run_with_early_stopping`].
pub trait EpochTrainer {
    type Snapshot;

    /// Runs one pass over the training data and returns its mean loss.
    fn train_epoch(&mut self, epoch: usize) -> Result<f64>;
    /// Classification error rate on the validation set, in `[0, 1]`.
    fn validation_error(&mut self) -> Result<f64>;
    fn snapshot(&self) -> Self::Snapshot;
}

/// Trains until an epoch's validation error fails to strictly decrease, or
/// `max_epochs` is reached, and returns the best epoch's snapshot.
pub fn run_with_early_stopping<T: EpochTrainer>(trainer: &mut T, max_epochs: usize) -> Result<(T::Snapshot, TrainLog)> {
    let mut log = TrainLog::new();
    let mut best: Option<(f64, T::Snapshot)> = None;
    for epoch in 1..=max_epochs {
        let training_loss = trainer.train_epoch(epoch)?;
        let validation_error = trainer.validation_error()?;
        if validation_error.is_nan() {
            return Err(Error::Numerical(format!("validation error at epoch {epoch}")));
        }
        log.push(EpochRecord {
            epoch,
            training_loss,
            validation_error,
        });
        let improved = best.as_ref().is_none_or(|(b, _)| validation_error < *b);
        if improved {
            best = Some((validation_error, trainer.snapshot()));
            log.best_epoch = epoch;
        } else {
            log.stop_reason = Some(StopReason::ValidationPlateau);
            break;
        }
    }
    if log.stop_reason.is_none() {
        log.stop_reason = Some(StopReason::MaxEpochs);
    }
    let (_, snapshot) = best.ok_or_else(|| Error::Input("max_epochs must be at least 1".into()))?;
    Ok((snapshot, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replays a scripted validation curve.
    struct Scripted {
        curve: Vec<f64>,
        epoch: usize,
    }

    impl EpochTrainer for Scripted {
        type Snapshot = usize;

        fn train_epoch(&mut self, epoch: usize) -> Result<f64> {
            self.epoch = epoch;
            Ok(1.0 / epoch as f64)
        }

        fn validation_error(&mut self) -> Result<f64> {
            Ok(self.curve[self.epoch - 1])
        }

        fn snapshot(&self) -> usize {
            self.epoch
        }
    }

    #[test]
    fn stops_on_first_non_decrease() {
        let mut t = Scripted {
            curve: vec![0.3, 0.2, 0.2, 0.1],
            epoch: 0,
        };
        let (best, log) = run_with_early_stopping(&mut t, 10).unwrap();
        assert_eq!(best, 2);
        assert_eq!(log.epochs(), 3);
        assert_eq!(log.stop_reason, Some(StopReason::ValidationPlateau));
        assert_eq!(log.best_validation_error(), Some(0.2));
    }

    #[test]
    fn single_epoch_cap() {
        let mut t = Scripted {
            curve: vec![0.5, 0.4],
            epoch: 0,
        };
        let (best, log) = run_with_early_stopping(&mut t, 1).unwrap();
        assert_eq!((best, log.epochs()), (1, 1));
        assert_eq!(log.stop_reason, Some(StopReason::MaxEpochs));
    }

    #[test]
    fn nan_validation_aborts() {
        let mut t = Scripted {
            curve: vec![0.5, f64::NAN],
            epoch: 0,
        };
        assert!(matches!(run_with_early_stopping(&mut t, 5), Err(Error::Numerical(_))));
    }

    proptest! {
        #[test]
        fn stop_epoch_is_first_non_decrease(curve in prop::collection::vec(0u8..20, 1..15), cap in 1usize..20) {
            let curve: Vec<f64> = curve.into_iter().map(|v| v as f64 / 20.0).collect();
            let mut t = Scripted { curve: curve.clone(), epoch: 0 };
            let (best, log) = run_with_early_stopping(&mut t, cap.min(curve.len())).unwrap();
            let limit = cap.min(curve.len());
            let first_bad = (1..limit).find(|&i| curve[i] >= curve[i - 1]);
            match first_bad {
                Some(i) => {
                    prop_assert_eq!(log.epochs(), i + 1);
                    prop_assert_eq!(best, i);
                    prop_assert_eq!(log.stop_reason, Some(StopReason::ValidationPlateau));
                }
                None => {
                    prop_assert_eq!(log.epochs(), limit);
                    prop_assert_eq!(best, limit);
                }
            }
            prop_assert!(log.records().iter().all(|r| (0.0..=1.0).contains(&r.validation_error)));
        }
    }
}
