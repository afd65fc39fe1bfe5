use proptest::prelude::*;

use super::*;
use crate::corpus::{parse_lexicon, NumberFeature, Preamble, Vocabulary};
use crate::network::{forward, init_params, Dims};
use crate::stimuli::{gen_exp1, gen_rc_length_probe, ItemFrame, StimulusSet};

fn rec(seed: u64, item: &str, condition: &str, error: bool) -> EvalRecord {
    let gold = NumberFeature::Singular;
    EvalRecord {
        replica_seed: seed,
        design: "exp1".into(),
        item_id: item.into(),
        condition: condition.into(),
        probe: None,
        gold,
        p_plural: if error { 0.9 } else { 0.1 },
        predicted: if error { gold.opposite() } else { gold },
        is_error: error,
    }
}

/// Records for one condition: item `i` gets `errors[i]` errors out of `n`.
fn group(condition: &str, errors: &[usize], n: usize) -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for (i, &e) in errors.iter().enumerate() {
        for k in 0..n {
            out.push(rec(k as u64, &format!("item{i}"), condition, k < e));
        }
    }
    out
}

fn refs(records: &[EvalRecord]) -> Vec<&EvalRecord> {
    records.iter().collect()
}

/// Percentile interval of an explicit list of equally likely outcomes,
/// written out independently of the library code.
fn oracle_interval(mut values: Vec<f64>) -> (f64, f64) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len() as f64;
    let lo = ((0.025 * n).ceil() as usize).max(1) - 1;
    let hi = ((0.975 * n).ceil() as usize).max(1) - 1;
    (values[lo], values[hi])
}

#[test]
fn all_correct_group() {
    let r = group("c", &[0, 0, 0, 0, 0], 4);
    let s = condition_stats(&r, &BootstrapConfig::default());
    assert_eq!(s.len(), 1);
    assert_eq!((s[0].error_rate, s[0].ci_low, s[0].ci_high), (0.0, 0.0, 0.0));
    assert_eq!((s[0].n, s[0].items, s[0].replica_se), (20, 5, 0.0));
}

#[test]
fn three_item_interval_matches_enumeration() {
    // item errors out of 5 replicas: 0, 2, 5
    let errors = [0usize, 2, 5];
    let r = group("c", &errors, 5);
    let s = &condition_stats(&r, &BootstrapConfig::default())[0];
    let mut all = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                all.push((errors[a] + errors[b] + errors[c]) as f64 / 15.0);
            }
        }
    }
    assert_eq!(all.len(), 27);
    let (lo, hi) = oracle_interval(all);
    assert_eq!((s.ci_low, s.ci_high), (lo, hi));
    assert_eq!(s.error_rate, 7.0 / 15.0);
}

#[test]
fn four_item_interval_matches_enumeration() {
    // unequal record counts per item
    let mut r = group("c", &[1, 0, 3], 4);
    r.extend((0..2).map(|k| rec(k, "item9", "c", true)));
    let s = &condition_stats(&r, &BootstrapConfig::default())[0];
    let items = [(1.0, 4.0), (0.0, 4.0), (3.0, 4.0), (2.0, 2.0)];
    let mut all = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let pick = [items[a], items[b], items[c], items[d]];
                    let e: f64 = pick.iter().map(|p| p.0).sum();
                    let n: f64 = pick.iter().map(|p| p.1).sum();
                    all.push(e / n);
                }
            }
        }
    }
    assert_eq!(oracle_interval(all), (s.ci_low, s.ci_high));
}

#[test]
fn paired_contrast_matches_enumeration() {
    let a = group("a", &[3, 1, 4, 2], 4);
    let b = group("b", &[1, 1, 0, 3], 4);
    let c = contrast(&refs(&a), &refs(&b), &BootstrapConfig::default()).unwrap();
    let ea = [3.0, 1.0, 4.0, 2.0];
    let eb = [1.0, 1.0, 0.0, 3.0];
    let (mut le, mut ge, mut deltas) = (0, 0, Vec::new());
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let idx = [i, j, k, l];
                    let d = idx.iter().map(|&x| ea[x] - eb[x]).sum::<f64>() / 16.0;
                    le += usize::from(d <= 0.0);
                    ge += usize::from(d >= 0.0);
                    deltas.push(d);
                }
            }
        }
    }
    let p = (2.0 * (le.min(ge) as f64 / 256.0)).min(1.0);
    assert_eq!(c.p, p);
    assert_eq!(c.delta, 10.0 / 16.0 - 5.0 / 16.0);
    let (lo, hi) = oracle_interval(deltas);
    assert_eq!((c.ci_low, c.ci_high), (lo, hi));
}

#[test]
fn contrast_edge_cases() {
    let cfg = BootstrapConfig::default();
    let a = group("a", &[1, 2, 0, 3, 1, 2], 3);
    let same = contrast(&refs(&a), &refs(&a), &cfg).unwrap();
    assert_eq!((same.delta, same.p), (0.0, 1.0));
    let all = group("a", &[3; 12], 3);
    let none = group("b", &[0; 12], 3);
    let c = contrast(&refs(&all), &refs(&none), &cfg).unwrap();
    assert_eq!((c.delta, c.p), (1.0, 0.0));
    let mut other = group("b", &[0; 3], 3);
    for r in &mut other {
        r.item_id = format!("x{}", r.item_id);
    }
    assert!(contrast(&refs(&all), &refs(&other), &cfg).is_err());
    let u = contrast_unpaired(&refs(&all), &refs(&other), &cfg).unwrap();
    assert_eq!((u.delta, u.p), (1.0, 0.0));
}

#[test]
fn bootstrap_is_deterministic() {
    let r = group("c", &(0..40).map(|i| i % 4).collect::<Vec<_>>(), 4);
    let cfg = BootstrapConfig::default();
    assert_eq!(condition_stats(&r, &cfg), condition_stats(&r, &cfg));
}

#[test]
fn exclusion_fixture_five_of_thirty_two() {
    // 32 items × 8 conditions × 10 replicas = 80 records per item.
    let outliers = [3usize, 9, 14, 22, 30];
    let errors_for = |i: usize| match i {
        3 => 17, // 21%
        9 => 40,
        14 => 80,
        22 => 24,
        30 => 33,
        1 | 5 => 16, // exactly 20%, kept
        _ => i % 7,
    };
    let mut records = Vec::new();
    for i in 0..32 {
        let e = errors_for(i);
        for k in 0..80 {
            let cond = format!("c{}", k % 8);
            records.push(rec((k / 8) as u64, &format!("item{i:02}"), &cond, k < e));
        }
    }
    let (kept, excluded) = exclude_outlier_items(&records, DEFAULT_EXCLUSION_THRESHOLD);
    let want: Vec<String> = outliers.iter().map(|i| format!("item{i:02}")).collect();
    assert_eq!(excluded, want);
    assert_eq!(kept.len(), 27 * 80);
    assert!(exclude_outlier_items(&records, 1.0).1.is_empty());
    let clean = group("c", &[0; 32], 8);
    assert!(exclude_outlier_items(&clean, DEFAULT_EXCLUSION_THRESHOLD).1.is_empty());
}

#[test]
fn records_file_round_trip() {
    let mut r = group("modifier=PP;subjectNumber=Sing;localMatch=Match", &[1, 2], 3);
    r[0].probe = Some(4);
    r[1].p_plural = 0.1 + 0.2;
    assert_eq!(parse_records(&records_to_tsv(&r)).unwrap(), r);
    assert!(parse_records("1\tx").is_err());
    let s = condition_stats(&r, &BootstrapConfig::default());
    assert_eq!(parse_stats(&stats_to_tsv(&s)).unwrap(), s);
}

#[test]
fn baseline_examples() {
    let lex = parse_lexicon("the\tDET\t-\t1\nkey\tN\tS\t2\nkeys\tN\tP\t3\n").unwrap();
    let v = Vocabulary::build(&lex, 10, ["N"]).unwrap();
    let make = |plural: bool| {
        let w = if plural { "keys" } else { "key" };
        let n = if plural {
            NumberFeature::Plural
        } else {
            NumberFeature::Singular
        };
        Preamble::from_tokens(vec![v.id("the").unwrap(), v.id(w).unwrap()], n, 1, &v).unwrap()
    };
    let corpus: Vec<_> = (0..100).map(|i| make(i >= 68)).collect();
    let (s, p) = baseline_errors(&corpus);
    assert!((s - 0.32).abs() < 1e-12 && (p - 0.68).abs() < 1e-12);
    let singular: Vec<_> = (0..10).map(|_| make(false)).collect();
    assert_eq!(baseline_errors(&singular).0, 0.0);
    let m = init_params(Dims::new(v.len(), 2, 2), 1).unwrap();
    let records = evaluate_preambles(std::slice::from_ref(&m), &singular).unwrap();
    let curve = attractor_curve(&records, &singular, 1);
    assert_eq!(curve.baseline_error_rate, 0.0);
    assert_eq!(curve.points.len(), 1);
    assert_eq!(curve.points[&0].n, 10);
}

const LEX: &str = "\
the\tDET\t-\t1
that\tREL\t-\t2
from\tP\t-\t3
tape\tN\tS\t4
tapes\tN\tP\t5
singer\tN\tS\t6
singers\tN\tP\t7
promoted\tVPAST\t-\t8
lion\tN\tS\t9
tigers\tN\tP\t10
ate\tVPAST\t-\t11
hungry\tADJ\t-\t12
extremely\tDEG\t-\t13
";

fn fixture() -> (Vocabulary, StimulusSet, StimulusSet) {
    let v = Vocabulary::build(&parse_lexicon(LEX).unwrap(), 100, ["N"]).unwrap();
    let tape = ItemFrame::new(
        "tape",
        &[
            ("head", "tape/tapes"),
            ("prep", "from"),
            ("rc_verb", "promoted"),
            ("local", "singer/singers"),
        ],
    );
    let lion = ItemFrame::new(
        "lion",
        &[
            ("head", "lion/lions"),
            ("embedded", "tiger/tigers"),
            ("embedded_verb", "ate"),
            ("adj", "hungry"),
            ("degree", "extremely"),
        ],
    );
    (v, gen_exp1(&[tape]).unwrap(), gen_rc_length_probe(&[lion]).unwrap())
}

#[test]
fn evaluate_counts_and_recounts() {
    let (v, exp1, _) = fixture();
    let ensemble: Vec<_> = (1..=3)
        .map(|s| init_params(Dims::new(v.len(), 3, 4), s).unwrap())
        .collect();
    let records = evaluate(&ensemble, &exp1, &v).unwrap();
    assert_eq!(records.len(), 3 * 8);
    assert_eq!(records, evaluate(&ensemble, &exp1, &v).unwrap());
    for s in condition_stats(&records, &BootstrapConfig::default()) {
        let (mut e, mut n) = (0, 0);
        for r in &records {
            if r.condition == s.condition {
                n += 1;
                if r.predicted != r.gold {
                    e += 1;
                }
            }
        }
        assert_eq!(s.error_rate, e as f64 / n as f64);
        assert!(s.ci_low <= s.error_rate && s.error_rate <= s.ci_high);
    }
}

#[test]
fn probe_records_use_prefix() {
    let (v, _, probe) = fixture();
    let m = init_params(Dims::new(v.len(), 3, 4), 7).unwrap();
    let records = evaluate(std::slice::from_ref(&m), &probe, &v).unwrap();
    for (s, r) in probe.stimuli.iter().zip(&records) {
        let ids = s.token_ids(&v).unwrap();
        assert_eq!(r.p_plural, forward(&m, &ids[..s.prediction_point()]).unwrap());
        assert_eq!(r.probe, s.probe);
    }
}

#[test]
fn unknown_tokens_and_mismatched_models_rejected() {
    let (v, mut exp1, _) = fixture();
    exp1.stimuli[2].tokens[1] = "tapez".into();
    let m = init_params(Dims::new(v.len(), 2, 2), 1).unwrap();
    match evaluate(std::slice::from_ref(&m), &exp1, &v) {
        Err(crate::Error::UnknownToken(t)) => assert_eq!(t, "tapez"),
        other => panic!("{other:?}"),
    }
    let small = init_params(Dims::new(v.len() - 1, 2, 2), 1).unwrap();
    let (_, exp1, _) = fixture();
    assert!(evaluate(&[small], &exp1, &v).is_err());
}

#[test]
fn findings_report_missing_designs() {
    let f = findings(&[], &BootstrapConfig::default(), DEFAULT_ALPHA);
    assert_eq!(f.len(), 6);
    assert!(f.iter().all(|x| !x.pass && x.contrast.is_none()));
}

proptest! {
    #[test]
    fn exclusion_is_monotone(errors in prop::collection::vec(0usize..=6, 1..20), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let r = group("c", &errors, 6);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let strict = exclude_outlier_items(&r, lo).1;
        let loose = exclude_outlier_items(&r, hi).1;
        prop_assert!(loose.iter().all(|id| strict.contains(id)));
    }

    #[test]
    fn baseline_never_above_half(plural in 0usize..50, singular in 0usize..50) {
        prop_assume!(plural + singular > 0);
        let lex = parse_lexicon("key\tN\tS\t1\nkeys\tN\tP\t2\n").unwrap();
        let v = Vocabulary::build(&lex, 10, ["N"]).unwrap();
        let one = |w: &str, n| Preamble::from_tokens(vec![v.id(w).unwrap()], n, 0, &v).unwrap();
        let mut corpus = vec![one("keys", NumberFeature::Plural); plural];
        corpus.extend(vec![one("key", NumberFeature::Singular); singular]);
        let (s, p) = baseline_errors(&corpus);
        prop_assert!(s.min(p) <= 0.5);
        prop_assert!((s + p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stats_recount(errors in prop::collection::vec(0usize..=5, 1..12)) {
        let r = group("c", &errors, 5);
        let s = &condition_stats(&r, &BootstrapConfig { resamples: 200, ..Default::default() })[0];
        let total: usize = errors.iter().sum();
        prop_assert_eq!(s.errors, total);
        prop_assert_eq!(s.error_rate, total as f64 / (5 * errors.len()) as f64);
        prop_assert!(s.ci_low <= s.error_rate && s.error_rate <= s.ci_high);
    }
}
