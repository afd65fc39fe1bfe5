use agreement_core::corpus::{NumberFeature, TokenId};
use agreement_core::network::gradcheck::check_gradients;
use agreement_core::network::{
    backward, forward, forward_probe, init_params, loss, read_checkpoint, write_checkpoint, Blocks, Dims,
};
use agreement_core::Rng;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

fn random_case(rng: &mut Rng, seed: u64) -> (agreement_core::ModelParams, Vec<TokenId>, NumberFeature) {
    let dims = Dims::new(rng.gen_range(1..=20), rng.gen_range(1..=4), rng.gen_range(1..=4));
    let mut params = init_params(dims, seed).unwrap();
    // move away from the initial biases so every gate is exercised
    for (_, block) in params.blocks_mut() {
        for w in block.iter_mut() {
            *w += rng.gen_range(-0.5..0.5);
        }
    }
    let len = rng.gen_range(1..=6);
    let tokens = (0..len).map(|_| TokenId(rng.gen_range(0..dims.vocab as u32))).collect();
    let gold = if rng.gen_bool(0.5) {
        NumberFeature::Singular
    } else {
        NumberFeature::Plural
    };
    (params, tokens, gold)
}

#[test]
fn hundred_gradient_checks() {
    let mut rng = Rng::seed_from_u64(100);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let (params, tokens, gold) = random_case(&mut rng, trial);
        let (_, grads) = backward(&params, &tokens, gold).unwrap();
        let report = check_gradients(&params, &tokens, gold, &grads, 1e-4).unwrap();
        assert!(report.max_relative_error < 1e-3, "trial {trial}: {report:?}");
        worst = worst.max(report.max_relative_error);
    }
    assert!(worst > 0.0);
}

#[test]
fn backward_loss_equals_forward_loss() {
    let mut rng = Rng::seed_from_u64(5);
    for trial in 0..20 {
        let (params, tokens, gold) = random_case(&mut rng, trial);
        let (l, _) = backward(&params, &tokens, gold).unwrap();
        let p = forward(&params, &tokens).unwrap();
        let y = if gold == NumberFeature::Plural { 1.0 } else { 0.0 };
        let bce = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
        assert!((l - bce).abs() < 1e-12);
        assert_eq!(l, loss(&params, &tokens, gold).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_gradient_steps_do_not_increase_loss(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let (params, tokens, gold) = random_case(&mut rng, seed);
        let (before, grads) = backward(&params, &tokens, gold).unwrap();
        for step in [1e-3, 1e-4] {
            let mut moved = params.clone();
            for ((_, w), (_, g)) in moved.blocks_mut().into_iter().zip(grads.blocks()) {
                for (w, g) in w.iter_mut().zip(g) {
                    *w -= step * g;
                }
            }
            let after = loss(&moved, &tokens, gold).unwrap();
            prop_assert!(after <= before + 1e-15, "step {}: {} -> {}", step, before, after);
        }
    }

    #[test]
    fn probes_equal_prefix_forwards(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let (params, tokens, _) = random_case(&mut rng, seed);
        let points: Vec<usize> = (1..=tokens.len()).collect();
        let probes = forward_probe(&params, &tokens, &points).unwrap();
        for (k, p) in points.iter().zip(&probes) {
            prop_assert_eq!(*p, forward(&params, &tokens[..*k]).unwrap());
        }
    }

    #[test]
    fn checkpoints_preserve_outputs(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let (params, tokens, _) = random_case(&mut rng, seed);
        let mut bytes = Vec::new();
        write_checkpoint(&params, &mut bytes).unwrap();
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        prop_assert_eq!(forward(&back, &tokens).unwrap(), forward(&params, &tokens).unwrap());
        prop_assert_eq!(back, params);
    }
}
