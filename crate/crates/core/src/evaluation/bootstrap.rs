use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::Rng;

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Coverage of the percentile interval.
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
            level: 0.95,
        }
    }
}

/// Inverted-CDF quantile of an ascending sample.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// `(low, high)` percentile interval at the configured level.
pub fn interval(sorted: &[f64], level: f64) -> (f64, f64) {
    let tail = (1.0 - level) / 2.0;
    (percentile(sorted, tail), percentile(sorted, 1.0 - tail))
}

/// Number of distinct ordered resamples of `sizes` groups, if it fits.
fn enumeration_size(sizes: &[usize]) -> Option<usize> {
    sizes
        .iter()
        .try_fold(1usize, |acc, &k| (0..k).try_fold(acc, |a, _| a.checked_mul(k)))
}

/// Bootstrap distribution of `stat` over independent resamples of each
/// group. When the full set of ordered resamples is no larger than the
/// configured count, it is enumerated exactly instead of sampled.
/// Returned ascending.
pub fn distribution<F>(sizes: &[usize], config: &BootstrapConfig, mut stat: F) -> Vec<f64>
where
    F: FnMut(&[Vec<usize>]) -> f64,
{
    let mut picks: Vec<Vec<usize>> = sizes.iter().map(|&k| vec![0; k]).collect();
    let mut out = Vec::new();
    match enumeration_size(sizes) {
        Some(total) if total <= config.resamples => {
            out.reserve(total);
            'odometer: loop {
                out.push(stat(&picks));
                for (g, &k) in sizes.iter().enumerate() {
                    for digit in picks[g].iter_mut() {
                        *digit += 1;
                        if *digit < k {
                            continue 'odometer;
                        }
                        *digit = 0;
                    }
                }
                break;
            }
        }
        _ => {
            let mut rng = Rng::seed_from_u64(config.seed);
            out.reserve(config.resamples);
            for _ in 0..config.resamples {
                for (g, &k) in sizes.iter().enumerate() {
                    for digit in picks[g].iter_mut() {
                        *digit = rng.gen_range(0..k);
                    }
                }
                out.push(stat(&picks));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Two-sided probability that the sign of a bootstrapped difference is
/// unstable: twice the smaller tail mass at zero, capped at 1.
pub fn sign_instability(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let at_most = sorted.iter().filter(|&&d| d <= 0.0).count() as f64 / n;
    let at_least = sorted.iter().filter(|&&d| d >= 0.0).count() as f64 / n;
    (2.0 * at_most.min(at_least)).min(1.0)
}
