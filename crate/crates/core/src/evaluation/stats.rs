use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bootstrap::{distribution, interval, sign_instability, BootstrapConfig};
use super::records::EvalRecord;
use crate::corpus::{NumberFeature, Preamble};
use crate::error::{Error, Result};

/// Error counts of one item, pooled over replicas and conditions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    errors: f64,
    n: f64,
}

fn tallies<'a>(records: impl IntoIterator<Item = &'a EvalRecord>) -> BTreeMap<&'a str, Tally> {
    let mut items: BTreeMap<&str, Tally> = BTreeMap::new();
    for r in records {
        let t = items.entry(&r.item_id).or_default();
        t.n += 1.0;
        t.errors += f64::from(u8::from(r.is_error));
    }
    items
}

fn rate(items: &[Tally], picks: &[usize]) -> f64 {
    let (e, n) = picks
        .iter()
        .fold((0.0, 0.0), |(e, n), &i| (e + items[i].errors, n + items[i].n));
    e / n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub design: String,
    pub condition: String,
    /// Number of records.
    pub n: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Standard error of the per-replica error rates.
    pub replica_se: f64,
    pub items: usize,
}

/// Sample standard error of the mean; zero for fewer than two values.
pub fn standard_error(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

/// Error rate, item-bootstrap interval and replica spread of one group.
pub fn group_stats(
    design: &str,
    condition: &str,
    records: &[&EvalRecord],
    config: &BootstrapConfig,
) -> Option<ConditionStats> {
    if records.is_empty() {
        return None;
    }
    let errors = records.iter().filter(|r| r.is_error).count();
    let n = records.len();
    let error_rate = errors as f64 / n as f64;
    let items: Vec<Tally> = tallies(records.iter().copied()).into_values().collect();
    let dist = distribution(&[items.len()], config, |p| rate(&items, &p[0]));
    let (low, high) = interval(&dist, config.level);
    let mut replicas: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for r in records {
        let e = replicas.entry(r.replica_seed).or_default();
        e.0 += f64::from(u8::from(r.is_error));
        e.1 += 1.0;
    }
    let per_replica: Vec<f64> = replicas.values().map(|(e, n)| e / n).collect();
    Some(ConditionStats {
        design: design.to_string(),
        condition: condition.to_string(),
        n,
        errors,
        error_rate,
        ci_low: low.min(error_rate),
        ci_high: high.max(error_rate),
        replica_se: standard_error(&per_replica),
        items: items.len(),
    })
}

/// One row per (design, condition), in order of first appearance.
pub fn condition_stats(records: &[EvalRecord], config: &BootstrapConfig) -> Vec<ConditionStats> {
    let mut order: Vec<(&str, &str)> = Vec::new();
    let mut groups: BTreeMap<(&str, &str), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.design.as_str(), r.condition.as_str());
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .filter_map(|key| group_stats(key.0, key.1, &groups[&key], config))
        .collect()
}

const STATS_HEADER: &str = "design\tcondition\tn\terrors\terror_rate\tci_low\tci_high\treplica_se\titems";

pub fn stats_to_tsv(stats: &[ConditionStats]) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}\t{}",
            s.design, s.condition, s.n, s.errors, s.error_rate, s.ci_low, s.ci_high, s.replica_se, s.items
        );
    }
    out
}

pub fn parse_stats(text: &str) -> Result<Vec<ConditionStats>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line == STATS_HEADER {
            continue;
        }
        let bad = || Error::parse(i + 1, "malformed stats row");
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(bad());
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        out.push(ConditionStats {
            design: f[0].to_string(),
            condition: f[1].to_string(),
            n: int(f[2])?,
            errors: int(f[3])?,
            error_rate: real(f[4])?,
            ci_low: real(f[5])?,
            ci_high: real(f[6])?,
            replica_se: real(f[7])?,
            items: int(f[8])?,
        });
    }
    Ok(out)
}

/// Difference in error rate between two groups of records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    /// Error rate of A minus error rate of B.
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided bootstrap probability that the sign of `delta` is unstable.
    pub p: f64,
    pub items: usize,
}

fn overall(records: &[&EvalRecord]) -> f64 {
    records.iter().filter(|r| r.is_error).count() as f64 / records.len() as f64
}

/// Paired item-level bootstrap contrast. Both groups must cover the same
/// items; each resample draws items and takes both groups' records for them.
pub fn contrast(a: &[&EvalRecord], b: &[&EvalRecord], config: &BootstrapConfig) -> Result<Contrast> {
    let ta = tallies(a.iter().copied());
    let tb = tallies(b.iter().copied());
    if ta.is_empty() || tb.is_empty() {
        return Err(Error::Input("contrast needs records in both groups".into()));
    }
    if !ta.keys().eq(tb.keys()) {
        let ka: BTreeSet<_> = ta.keys().collect();
        let shared = tb.keys().filter(|k| ka.contains(k)).count();
        return Err(Error::Input(format!(
            "paired contrast needs the same items in both groups ({} vs {} items, {shared} shared)",
            ta.len(),
            tb.len()
        )));
    }
    let ia: Vec<Tally> = ta.into_values().collect();
    let ib: Vec<Tally> = tb.into_values().collect();
    let dist = distribution(&[ia.len()], config, |p| rate(&ia, &p[0]) - rate(&ib, &p[0]));
    finish(overall(a) - overall(b), &dist, ia.len(), config)
}

/// Contrast between groups with unrelated items, resampled independently.
pub fn contrast_unpaired(a: &[&EvalRecord], b: &[&EvalRecord], config: &BootstrapConfig) -> Result<Contrast> {
    let ia: Vec<Tally> = tallies(a.iter().copied()).into_values().collect();
    let ib: Vec<Tally> = tallies(b.iter().copied()).into_values().collect();
    if ia.is_empty() || ib.is_empty() {
        return Err(Error::Input("contrast needs records in both groups".into()));
    }
    let dist = distribution(&[ia.len(), ib.len()], config, |p| rate(&ia, &p[0]) - rate(&ib, &p[1]));
    finish(overall(a) - overall(b), &dist, ia.len() + ib.len(), config)
}

fn finish(delta: f64, dist: &[f64], items: usize, config: &BootstrapConfig) -> Result<Contrast> {
    let (low, high) = interval(dist, config.level);
    Ok(Contrast {
        delta,
        ci_low: low.min(delta),
        ci_high: high.max(delta),
        p: sign_instability(dist),
        items,
    })
}

/// Drops items whose mean error over all their records exceeds
/// `threshold`. Returns the kept records and the excluded item ids.
pub fn exclude_outlier_items(records: &[EvalRecord], threshold: f64) -> (Vec<EvalRecord>, Vec<String>) {
    let excluded: BTreeSet<&str> = tallies(records)
        .into_iter()
        .filter(|(_, t)| t.errors / t.n > threshold)
        .map(|(id, _)| id)
        .collect();
    let kept = records
        .iter()
        .filter(|r| !excluded.contains(r.item_id.as_str()))
        .cloned()
        .collect();
    (kept, excluded.into_iter().map(str::to_string).collect())
}

pub const MAX_ATTRACTORS: usize = 4;

const CURVE_HEADER: &str = "attractors\terror_rate\tn";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub error_rate: f64,
    /// Preambles with this many attractors.
    pub n: usize,
}

/// Error rate by number of attractors, with the always-singular baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCurve {
    pub points: BTreeMap<usize, CurvePoint>,
    pub baseline_error_rate: f64,
    pub min_n: usize,
}

/// Error rates of always predicting singular and always predicting plural.
pub fn baseline_errors(corpus: &[Preamble]) -> (f64, f64) {
    if corpus.is_empty() {
        return (0.0, 0.0);
    }
    let plural = corpus.iter().filter(|p| p.gold == NumberFeature::Plural).count() as f64;
    let n = corpus.len() as f64;
    (plural / n, (n - plural) / n)
}

/// Builds the curve from corpus records (see `evaluate_preambles`). Counts
/// above [`MAX_ATTRACTORS`] or with fewer than `min_n` preambles are left out.
pub fn attractor_curve(records: &[EvalRecord], corpus: &[Preamble], min_n: usize) -> AttractorCurve {
    let mut points = BTreeMap::new();
    for k in 0..=MAX_ATTRACTORS {
        let label = super::records::attractor_condition(k);
        let group: Vec<&EvalRecord> = records.iter().filter(|r| r.condition == label).collect();
        let n = group.iter().map(|r| r.item_id.as_str()).collect::<BTreeSet<_>>().len();
        if n > 0 && n >= min_n {
            points.insert(
                k,
                CurvePoint {
                    error_rate: overall(&group),
                    n,
                },
            );
        }
    }
    AttractorCurve {
        points,
        baseline_error_rate: baseline_errors(corpus).0,
        min_n,
    }
}

impl AttractorCurve {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        let _ = writeln!(
            out,
            "# baseline_error_rate={:?} min_n={}",
            self.baseline_error_rate, self.min_n
        );
        for (k, p) in &self.points {
            let _ = writeln!(out, "{k}\t{:?}\t{}", p.error_rate, p.n);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut curve = AttractorCurve {
            points: BTreeMap::new(),
            baseline_error_rate: 0.0,
            min_n: 0,
        };
        for (i, line) in text.lines().enumerate() {
            let bad = || Error::parse(i + 1, "malformed curve row");
            if line.is_empty() || line == CURVE_HEADER {
                continue;
            }
            if let Some(meta) = line.strip_prefix("# ") {
                for kv in meta.split(' ') {
                    match kv.split_once('=') {
                        Some(("baseline_error_rate", v)) => curve.baseline_error_rate = v.parse().map_err(|_| bad())?,
                        Some(("min_n", v)) => curve.min_n = v.parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    }
                }
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let k: usize = f[0].parse().map_err(|_| bad())?;
            let point = CurvePoint {
                error_rate: f[1].parse().map_err(|_| bad())?,
                n: f[2].parse().map_err(|_| bad())?,
            };
            if curve.points.insert(k, point).is_some() {
                return Err(bad());
            }
        }
        Ok(curve)
    }
}
