mod common;

use agreement_core::corpus::generate_corpus;
use agreement_core::network::{init_params, Dims};
use agreement_core::trainer::{
    adam_update, load_ensemble, save_ensemble, train_ensemble, train_replica, AdamState, EpochShuffle,
};
use agreement_core::{Gradients, ModelParams, TrainConfig};
use proptest::prelude::*;

fn scalar_model(value: f64) -> ModelParams {
    let mut p = ModelParams::zeros(Dims::new(1, 1, 1));
    p.output_bias = value;
    p
}

#[test]
fn two_adam_steps_match_hand_computation() {
    let config = TrainConfig::default();
    let mut params = scalar_model(0.5);
    let mut adam = AdamState::new(&params);
    let mut grads = Gradients::zeros(params.dims);
    grads.output_bias = 0.2;
    adam_update(&mut params, &mut adam, &grads, &config).unwrap();
    grads.output_bias = -0.1;
    adam_update(&mut params, &mut adam, &grads, &config).unwrap();

    // m1 = 0.1*0.2, v1 = 0.001*0.04; m2 = 0.9*m1 - 0.01, v2 = 0.999*v1 + 0.001*0.01
    let theta1 = 0.5 - 1e-3 * (0.02 / 0.1) / ((4e-5f64 / 0.001).sqrt() + 1e-8);
    let m2 = 0.008;
    let v2 = 4.996e-5;
    let theta2 = theta1 - 1e-3 * (m2 / 0.19) / ((v2 / 0.001999f64).sqrt() + 1e-8);
    assert_eq!(adam.timestep, 2);
    assert!((adam.first_moment.output_bias - m2).abs() < 1e-12);
    assert!((adam.second_moment.output_bias - v2).abs() < 1e-12);
    assert!(
        (params.output_bias - theta2).abs() < 1e-12,
        "{} vs {theta2}",
        params.output_bias
    );
    // entries with zero gradient never move
    assert!(params.lstm_weights.iter().all(|&w| w == 0.0));
}

fn tiny_setup() -> (
    Vec<agreement_core::Preamble>,
    Vec<agreement_core::Preamble>,
    usize,
    TrainConfig,
) {
    let vocab = common::shipped_vocab();
    let grammar = common::shipped_grammar();
    let train = generate_corpus(&grammar, &vocab, 300, 1).unwrap();
    let valid = generate_corpus(&grammar, &vocab, 100, 2).unwrap();
    let config = TrainConfig {
        embed: 4,
        hidden: 5,
        max_epochs: 3,
        batch_size: 16,
        ..TrainConfig::default()
    }
    .with_seeds(vec![11, 12, 13]);
    (train, valid, vocab.len(), config)
}

#[test]
fn training_is_deterministic() {
    let (train, valid, v, config) = tiny_setup();
    let (a, log_a) = train_replica(&train, &valid, v, &config, 7).unwrap();
    let (b, log_b) = train_replica(&train, &valid, v, &config, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(log_a, log_b);
    assert_eq!(log_a.to_tsv(), log_b.to_tsv());
    let (c, _) = train_replica(&train, &valid, v, &config, 8).unwrap();
    assert_ne!(a, c);
}

#[test]
fn ensemble_equals_independent_replicas_and_round_trips() {
    let (train, valid, v, config) = tiny_setup();
    let outcomes = train_ensemble(&train, &valid, v, &config).unwrap();
    assert_eq!(outcomes.iter().map(|o| o.seed).collect::<Vec<_>>(), vec![11, 12, 13]);
    for o in &outcomes {
        let (alone, _) = train_replica(&train, &valid, v, &config, o.seed).unwrap();
        assert_eq!(&o.result.as_ref().unwrap().0, &alone);
    }
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = save_ensemble(dir.path(), &outcomes, 99).unwrap();
    let (loaded_manifest, models) = load_ensemble(dir.path()).unwrap();
    assert_eq!(loaded_manifest, manifest);
    assert_eq!(loaded_manifest.vocab_fingerprint, 99);
    for (o, m) in outcomes.iter().zip(&models) {
        assert_eq!(&o.result.as_ref().unwrap().0, m);
    }
}

#[test]
fn adam_moments_stay_finite_while_training() {
    let (train, valid, v, config) = tiny_setup();
    let (params, log) = train_replica(&train, &valid, v, &config, 3).unwrap();
    assert!(log.records().iter().all(|r| r.training_loss.is_finite()));
    assert_eq!(params.dims, config.dims(v));
    let init = init_params(params.dims, 3).unwrap();
    assert_ne!(params, init);
}

proptest! {
    #[test]
    fn epoch_orders_are_permutations(seed in any::<u64>(), n in 0usize..200) {
        let mut a = EpochShuffle::new(seed, n);
        let mut b = EpochShuffle::new(seed, n);
        for _ in 0..3 {
            let order = a.next_epoch().to_vec();
            prop_assert_eq!(&order, &b.next_epoch().to_vec());
            let mut sorted = order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        }
    }
}
