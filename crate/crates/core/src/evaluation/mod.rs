//! Scoring ensembles on stimuli and corpora, with item-bootstrap statistics.

mod bootstrap;
mod findings;
mod records;
mod stats;

pub use bootstrap::{distribution, interval, percentile, sign_instability, BootstrapConfig, DEFAULT_RESAMPLES};
pub use findings::{findings, Finding, DEFAULT_ALPHA};
pub use records::{
    attractor_condition, evaluate, evaluate_preambles, parse_records, records_to_tsv, EvalRecord, CORPUS_DESIGN,
};
pub use stats::{
    attractor_curve, baseline_errors, condition_stats, contrast, contrast_unpaired, exclude_outlier_items, group_stats,
    parse_stats, standard_error, stats_to_tsv, AttractorCurve, ConditionStats, Contrast, CurvePoint, MAX_ATTRACTORS,
};

/// Default cross-condition error above which an item is treated as an outlier.
pub const DEFAULT_EXCLUSION_THRESHOLD: f64 = 0.20;

/// Human error rates used as reference marks in plots.
pub mod reference {
    /// Experiment 2, singular subject with two plural attractors.
    pub const EXP2_TWO_PLURAL_ATTRACTORS: f64 = 0.127;
    /// Experiment 1, singular subject with a plural attractor inside an RC.
    pub const EXP1_RC_SINGULAR_MISMATCH: f64 = 0.226;
}

#[cfg(test)]
mod tests;
