use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use agreement_core::corpus::{export_preambles, generate_corpus, ingest_preambles, Preamble, Recognizer, Vocabulary};
use agreement_core::evaluation::{
    attractor_condition, attractor_curve, condition_stats, contrast_unpaired, evaluate, evaluate_preambles,
    exclude_outlier_items, findings, parse_records, parse_stats, records_to_tsv, reference, stats_to_tsv,
    AttractorCurve, BootstrapConfig, ConditionStats, EvalRecord, CORPUS_DESIGN,
};
use agreement_core::stimuli::{check_stimuli, generate, parse_frames, ConditionLabel, Design, StimulusSet};
use agreement_core::trainer::{load_ensemble, save_ensemble, train_ensemble, MANIFEST_FILE};
use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::{beside, RunManifest};
use crate::plot::{bar_chart, line_chart, BarPanel, LinePanel};
use crate::{Cli, Command, Mode, Split};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenCorpus { split, count } => gen_corpus(cli, *split, *count),
        Command::Train {
            corpus,
            validation,
            replicas,
            max_epochs,
        } => train(cli, corpus, validation, *replicas, *max_epochs),
        Command::GenStimuli { design, frames } => gen_stimuli(cli, design, frames),
        Command::Evaluate {
            ensemble,
            stimuli,
            corpus,
            mode,
            resamples,
            exclude_threshold,
            min_n,
        } => {
            let bootstrap = BootstrapConfig {
                resamples: *resamples,
                seed: cli.seed.unwrap_or(0),
                ..BootstrapConfig::default()
            };
            match (stimuli, corpus) {
                (Some(s), None) if *mode == Mode::Conditions => {
                    evaluate_stimuli(cli, ensemble, s, &bootstrap, *exclude_threshold)
                }
                (Some(_), None) => bail!("curve mode needs --corpus"),
                (None, Some(c)) => evaluate_corpus(cli, ensemble, c, *mode, &bootstrap, *min_n),
                _ => bail!("give exactly one of --stimuli and --corpus"),
            }
        }
        Command::Report {
            stats,
            resamples,
            alpha,
        } => {
            let bootstrap = BootstrapConfig {
                resamples: *resamples,
                seed: cli.seed.unwrap_or(0),
                ..BootstrapConfig::default()
            };
            report(cli, stats, &bootstrap, *alpha)
        }
    }
}

fn out_path(cli: &Cli) -> Result<&Path> {
    cli.out.as_deref().ok_or_else(|| anyhow!("--out is required"))
}

struct Loaded {
    path: PathBuf,
    config: RunConfig,
    vocab: Vocabulary,
}

fn load_config(cli: &Cli) -> Result<Loaded> {
    let path = cli.config.clone().ok_or_else(|| anyhow!("--config is required"))?;
    let config = RunConfig::load(&path)?;
    let vocab = config.vocabulary()?;
    Ok(Loaded { path, config, vocab })
}

fn manifest_with_config(command: &str, loaded: &Loaded) -> Result<RunManifest> {
    let mut m = RunManifest::new(command);
    m.config = Some(serde_json::to_value(&loaded.config)?);
    m.input(&loaded.path)?;
    m.input(&loaded.config.data.lexicon)?;
    Ok(m)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_preambles(path: &Path, vocab: &Vocabulary) -> Result<Vec<Preamble>> {
    ingest_preambles(&read_file(path)?, vocab).with_context(|| format!("preambles {}", path.display()))
}

fn gen_corpus(cli: &Cli, split: Split, count: Option<usize>) -> Result<()> {
    let loaded = load_config(cli)?;
    let out = out_path(cli)?;
    let sizes = &loaded.config.corpus;
    let (default_n, default_seed) = match split {
        Split::Train => (sizes.train, 1),
        Split::Validation => (sizes.validation, 2),
        Split::Test => (sizes.test, 3),
    };
    let n = count.unwrap_or(default_n);
    let seed = cli.seed.unwrap_or(default_seed);
    let grammar = loaded.config.grammar()?;
    let corpus = generate_corpus(&grammar, &loaded.vocab, n, seed)?;
    write_file(out, &export_preambles(&corpus, &loaded.vocab))?;
    log::info!("wrote {} preambles to {}", corpus.len(), out.display());

    let mut m = manifest_with_config("gen-corpus", &loaded)?;
    m.seeds.push(seed);
    m.input(&loaded.config.data.grammar)?;
    m.output(out)?;
    m.write(&beside(out))
}

fn train(
    cli: &Cli,
    corpus: &Path,
    validation: &Path,
    replicas: Option<usize>,
    max_epochs: Option<usize>,
) -> Result<()> {
    let loaded = load_config(cli)?;
    let out = out_path(cli)?;
    let mut config = loaded.config.train.clone();
    if replicas.is_some() || cli.seed.is_some() {
        let n = replicas.unwrap_or(config.replicas) as u64;
        let base = cli.seed.unwrap_or(1);
        config = config.with_seeds((base..base + n).collect());
    }
    if let Some(e) = max_epochs {
        config.max_epochs = e;
    }
    config.validate()?;

    let train_set = read_preambles(corpus, &loaded.vocab)?;
    let valid_set = read_preambles(validation, &loaded.vocab)?;
    log::info!(
        "training {} replicas (h={}) on {} preambles, validating on {}",
        config.replicas,
        config.hidden,
        train_set.len(),
        valid_set.len()
    );
    let outcomes = train_ensemble(&train_set, &valid_set, loaded.vocab.len(), &config)?;
    for o in &outcomes {
        match &o.result {
            Ok((_, log)) => log::info!(
                "seed {}: {} epochs, best epoch {}, validation error {:.4}",
                o.seed,
                log.epochs(),
                log.best_epoch,
                log.best_validation_error().unwrap_or(f64::NAN)
            ),
            Err(e) => log::error!("seed {} failed: {e}", o.seed),
        }
    }
    let (ensemble, written) = save_ensemble(out, &outcomes, loaded.vocab.fingerprint())?;

    let mut m = manifest_with_config("train", &loaded)?;
    m.config = Some(serde_json::json!({ "run": m.config.take(), "effective_train": config }));
    m.seeds = config.seeds.clone();
    m.input(corpus)?;
    m.input(validation)?;
    for path in written.iter().chain(std::iter::once(&out.join(MANIFEST_FILE))) {
        m.output(path)?;
    }
    m.write(&out.join("train.manifest.json"))?;
    ensure!(
        ensemble.failed_seeds.is_empty(),
        "replicas failed for seeds {:?}",
        ensemble.failed_seeds
    );
    Ok(())
}

fn gen_stimuli(cli: &Cli, design: &str, frames_path: &Path) -> Result<()> {
    let out = out_path(cli)?;
    let design: Design = design.parse()?;
    let frames = parse_frames(&read_file(frames_path)?).with_context(|| format!("frames {}", frames_path.display()))?;
    let set = generate(design, &frames)?;
    set.check_complete()?;

    let mut m = RunManifest::new("gen-stimuli");
    m.input(frames_path)?;
    if cli.config.is_some() {
        // With a config the stimuli are also checked against the grammar.
        let loaded = load_config(cli)?;
        let recognizer = Recognizer::new(&loaded.config.grammar()?);
        let problems = check_stimuli(&set, &recognizer, &loaded.vocab);
        if !problems.is_empty() {
            let list: Vec<String> = problems.iter().map(|(id, why)| format!("{id}: {why}")).collect();
            bail!("{} stimuli fail validation:\n  {}", problems.len(), list.join("\n  "));
        }
        m = manifest_with_config("gen-stimuli", &loaded)?;
        m.input(frames_path)?;
        m.input(&loaded.config.data.grammar)?;
    }
    write_file(out, &set.to_tsv())?;
    log::info!("wrote {} {design} stimuli to {}", set.len(), out.display());
    m.output(out)?;
    m.write(&beside(out))
}

fn load_checked_ensemble(dir: &Path, vocab: &Vocabulary) -> Result<Vec<agreement_core::ModelParams>> {
    let (manifest, models) = load_ensemble(dir).with_context(|| format!("ensemble {}", dir.display()))?;
    ensure!(
        manifest.vocab_fingerprint == vocab.fingerprint(),
        "ensemble {} was trained with a different vocabulary",
        dir.display()
    );
    ensure!(!models.is_empty(), "ensemble {} has no replicas", dir.display());
    Ok(models)
}

fn ensemble_inputs(m: &mut RunManifest, dir: &Path) -> Result<()> {
    let (manifest, _) = load_ensemble(dir)?;
    m.input(&dir.join(MANIFEST_FILE))?;
    for r in &manifest.replicas {
        m.input(&dir.join(&r.checkpoint))?;
    }
    m.seeds = manifest.replicas.iter().map(|r| r.seed).collect();
    Ok(())
}

fn evaluate_stimuli(
    cli: &Cli,
    ensemble: &Path,
    stimuli: &Path,
    bootstrap: &BootstrapConfig,
    threshold: f64,
) -> Result<()> {
    let loaded = load_config(cli)?;
    let out = out_path(cli)?;
    let models = load_checked_ensemble(ensemble, &loaded.vocab)?;
    let set = StimulusSet::parse(&read_file(stimuli)?).with_context(|| format!("stimuli {}", stimuli.display()))?;
    let records = evaluate(&models, &set, &loaded.vocab)?;

    let mut by_design: BTreeMap<String, Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        by_design.entry(r.design.clone()).or_default().push(r);
    }
    let mut m = manifest_with_config("evaluate", &loaded)?;
    ensemble_inputs(&mut m, ensemble)?;
    m.input(stimuli)?;
    fs::create_dir_all(out)?;
    let mut tags = Vec::new();
    for (design, mut records) in by_design {
        if design == Design::Exp1.id() {
            let (kept, excluded) = exclude_outlier_items(&records, threshold);
            log::info!("{design}: excluded {} items {:?}", excluded.len(), excluded);
            let path = out.join(format!("excluded-{design}.txt"));
            write_file(&path, &excluded.iter().map(|id| format!("{id}\n")).collect::<String>())?;
            m.output(&path)?;
            records = kept;
        }
        let stats = condition_stats(&records, bootstrap);
        for s in &stats {
            log::info!(
                "{design} {}: {:.4} [{:.4}, {:.4}]",
                s.condition,
                s.error_rate,
                s.ci_low,
                s.ci_high
            );
        }
        write_records_and_stats(&mut m, out, &design, &records, &stats)?;
        tags.push(design);
    }
    m.seeds.push(bootstrap.seed);
    m.write(&out.join(format!("evaluate-{}.manifest.json", tags.join("+"))))
}

fn write_records_and_stats(
    m: &mut RunManifest,
    out: &Path,
    tag: &str,
    records: &[EvalRecord],
    stats: &[ConditionStats],
) -> Result<()> {
    let records_path = out.join(format!("records-{tag}.tsv"));
    let stats_path = out.join(format!("stats-{tag}.tsv"));
    write_file(&records_path, &records_to_tsv(records))?;
    write_file(&stats_path, &stats_to_tsv(stats))?;
    m.output(&records_path)?;
    m.output(&stats_path)
}

fn evaluate_corpus(
    cli: &Cli,
    ensemble: &Path,
    corpus_path: &Path,
    mode: Mode,
    bootstrap: &BootstrapConfig,
    min_n: usize,
) -> Result<()> {
    let loaded = load_config(cli)?;
    let out = out_path(cli)?;
    let models = load_checked_ensemble(ensemble, &loaded.vocab)?;
    let corpus = read_preambles(corpus_path, &loaded.vocab)?;
    let records = evaluate_preambles(&models, &corpus)?;
    let stats = condition_stats(&records, bootstrap);

    let mut m = manifest_with_config("evaluate", &loaded)?;
    ensemble_inputs(&mut m, ensemble)?;
    m.input(corpus_path)?;
    m.seeds.push(bootstrap.seed);
    fs::create_dir_all(out)?;
    write_records_and_stats(&mut m, out, CORPUS_DESIGN, &records, &stats)?;
    if mode == Mode::Curve {
        let curve = attractor_curve(&records, &corpus, min_n);
        for (k, p) in &curve.points {
            log::info!("{k} attractors: error {:.4} over {} preambles", p.error_rate, p.n);
        }
        let path = out.join("curve.tsv");
        write_file(&path, &curve.to_tsv())?;
        m.output(&path)?;
    }
    m.write(&out.join(format!("evaluate-{CORPUS_DESIGN}.manifest.json")))
}

#[derive(Debug, Serialize)]
struct ContrastSummary {
    id: String,
    description: String,
    pass: bool,
    delta: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    p: Option<f64>,
    detail: String,
}

#[derive(Debug, Serialize)]
struct Summary {
    alpha: f64,
    resamples: usize,
    seed: u64,
    findings: Vec<ContrastSummary>,
    /// Direction tests between adjacent attractor counts on the corpus.
    curve_steps: Vec<ContrastSummary>,
    figures: Vec<String>,
}

fn numbered_files(dir: &Path, prefix: &str) -> Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(tag) = name.strip_prefix(prefix).and_then(|r| r.strip_suffix(".tsv")) {
            found.push((tag.to_string(), path.clone()));
        }
    }
    found.sort();
    Ok(found)
}

/// Direction tests between adjacent attractor counts, 0→1 and 1→2.
fn curve_steps(records: &[EvalRecord], bootstrap: &BootstrapConfig, alpha: f64) -> Result<Vec<ContrastSummary>> {
    let mut steps = Vec::new();
    for k in 0..2 {
        let lo = attractor_condition(k);
        let hi = attractor_condition(k + 1);
        let a: Vec<&EvalRecord> = records.iter().filter(|r| r.condition == hi).collect();
        let b: Vec<&EvalRecord> = records.iter().filter(|r| r.condition == lo).collect();
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let c = contrast_unpaired(&a, &b, bootstrap)?;
        steps.push(ContrastSummary {
            id: format!("curve {k}->{}", k + 1),
            description: format!("error with {} attractors exceeds error with {k}", k + 1),
            pass: c.delta > 0.0 && c.p < alpha,
            delta: Some(c.delta),
            ci_low: Some(c.ci_low),
            ci_high: Some(c.ci_high),
            p: Some(c.p),
            detail: String::new(),
        });
    }
    Ok(steps)
}

fn report(cli: &Cli, dir: &Path, bootstrap: &BootstrapConfig, alpha: f64) -> Result<()> {
    let out = cli.out.as_deref().unwrap_or(dir);
    let stats_files = numbered_files(dir, "stats-")?;
    let curve_path = dir.join("curve.tsv");
    ensure!(
        !stats_files.is_empty() || curve_path.exists(),
        "no stats files (stats-*.tsv or curve.tsv) in {}",
        dir.display()
    );
    fs::create_dir_all(out)?;
    let mut m = RunManifest::new("report");
    m.seeds.push(bootstrap.seed);

    let mut stats: BTreeMap<String, Vec<ConditionStats>> = BTreeMap::new();
    for (tag, path) in &stats_files {
        stats.insert(
            tag.clone(),
            parse_stats(&read_file(path)?).with_context(|| format!("stats {}", path.display()))?,
        );
        m.input(path)?;
    }
    let mut stimulus_records = Vec::new();
    let mut corpus_records = Vec::new();
    for (tag, path) in numbered_files(dir, "records-")? {
        let records = parse_records(&read_file(&path)?).with_context(|| format!("records {}", path.display()))?;
        m.input(&path)?;
        if tag == CORPUS_DESIGN {
            corpus_records = records;
        } else {
            stimulus_records.extend(records);
        }
    }

    let mut summary = Summary {
        alpha,
        resamples: bootstrap.resamples,
        seed: bootstrap.seed,
        findings: Vec::new(),
        curve_steps: Vec::new(),
        figures: Vec::new(),
    };
    if !stimulus_records.is_empty() {
        for f in findings(&stimulus_records, bootstrap, alpha) {
            log::info!("({}) {}: {}", f.id, if f.pass { "PASS" } else { "FAIL" }, f.detail);
            summary.findings.push(ContrastSummary {
                id: f.id,
                description: f.description,
                pass: f.pass,
                delta: f.contrast.map(|c| c.delta),
                ci_low: f.contrast.map(|c| c.ci_low),
                ci_high: f.contrast.map(|c| c.ci_high),
                p: f.contrast.map(|c| c.p),
                detail: f.detail,
            });
        }
    }
    summary.curve_steps = curve_steps(&corpus_records, bootstrap, alpha)?;

    let mut figure = |name: &str| -> PathBuf {
        summary.figures.push(name.to_string());
        out.join(name)
    };
    if curve_path.exists() {
        let curve = AttractorCurve::parse(&read_file(&curve_path)?)?;
        m.input(&curve_path)?;
        let path = figure("fig1.svg");
        line_chart(&path, &fig1(&curve))?;
    }
    // A design whose cells were all excluded has nothing to plot.
    let skip = |name: &str, e: anyhow::Error| log::warn!("skipping {name}: {e:#}");
    if let Some(s) = stats.get(Design::Exp1.id()) {
        match fig2b(s) {
            Ok(panel) => bar_chart(&figure("fig2b.svg"), &[panel])?,
            Err(e) => skip("fig2b.svg", e),
        }
    }
    let exp2: Result<Vec<BarPanel>> = [Design::Exp2, Design::Exp2Reversed]
        .into_iter()
        .filter_map(|d| stats.get(d.id()).map(|s| fig3b_panel(d, s)))
        .collect();
    match exp2 {
        Ok(panels) if !panels.is_empty() => bar_chart(&figure("fig3b.svg"), &panels)?,
        Ok(_) => {}
        Err(e) => skip("fig3b.svg", e),
    }
    if let Some(s) = stats.get(Design::RcLengthProbe.id()) {
        match fig4(s) {
            Ok(panel) => line_chart(&figure("fig4.svg"), &panel)?,
            Err(e) => skip("fig4.svg", e),
        }
    }

    let summary_path = out.join("summary.json");
    write_file(&summary_path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    let contrasts_path = out.join("contrasts.tsv");
    let mut tsv = String::from("id\tpass\tdelta\tci_low\tci_high\tp\n");
    for c in summary.findings.iter().chain(&summary.curve_steps) {
        let f = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:?}"));
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            c.id,
            c.pass,
            f(c.delta),
            f(c.ci_low),
            f(c.ci_high),
            f(c.p)
        ));
    }
    write_file(&contrasts_path, &tsv)?;
    for name in &summary.figures {
        m.output(&out.join(name))?;
    }
    m.output(&summary_path)?;
    m.output(&contrasts_path)?;
    m.write(&out.join("report.manifest.json"))
}

fn lookup(stats: &[ConditionStats], design: Design, levels: &[(&str, &str)]) -> Result<(f64, f64)> {
    let label = ConditionLabel::new(design, levels)?.to_string();
    let s = stats
        .iter()
        .find(|s| s.condition == label)
        .ok_or_else(|| anyhow!("stats for {design} lack condition {label}"))?;
    Ok((s.error_rate, s.replica_se))
}

fn fig1(curve: &AttractorCurve) -> LinePanel {
    let max = curve.points.keys().max().copied().unwrap_or(0);
    LinePanel {
        title: "Error rate by number of attractors".into(),
        x_label: "attractors".into(),
        ticks: (0..=max).map(|k| k.to_string()).collect(),
        lines: vec![(
            "ensemble".into(),
            curve.points.iter().map(|(&k, p)| (k, p.error_rate, 0.0)).collect(),
        )],
        reference: Some((curve.baseline_error_rate, "always singular".into())),
    }
}

fn fig2b(stats: &[ConditionStats]) -> Result<BarPanel> {
    let mut groups = Vec::new();
    let mut values = vec![Vec::new(), Vec::new()];
    for modifier in ["PP", "RC"] {
        for subject in ["Sing", "Plur"] {
            groups.push(format!("{modifier} {subject}"));
            for (s, local) in ["Match", "Mismatch"].into_iter().enumerate() {
                values[s].push(lookup(
                    stats,
                    Design::Exp1,
                    &[
                        ("modifier", modifier),
                        ("subjectNumber", subject),
                        ("localMatch", local),
                    ],
                )?);
            }
        }
    }
    Ok(BarPanel {
        title: "Experiment 1: error by modifier and subject number".into(),
        groups,
        series: vec!["match".into(), "mismatch".into()],
        values,
        reference: Some((
            reference::EXP1_RC_SINGULAR_MISMATCH,
            "human, RC singular mismatch".into(),
        )),
    })
}

fn fig3b_panel(design: Design, stats: &[ConditionStats]) -> Result<BarPanel> {
    let n1_levels = ["Absent", "Sing", "Plur"];
    let mut values = vec![Vec::new(), Vec::new()];
    for n1 in n1_levels {
        for (s, n2) in ["Sing", "Plur"].into_iter().enumerate() {
            values[s].push(lookup(stats, design, &[("n1", n1), ("n2", n2)])?);
        }
    }
    let title = match design {
        Design::Exp2Reversed => "Reversed materials: error by attractor numbers",
        _ => "Experiment 2: error by attractor numbers",
    };
    Ok(BarPanel {
        title: title.into(),
        groups: n1_levels.iter().map(|l| format!("first {l}")).collect(),
        series: vec!["second Sing".into(), "second Plur".into()],
        values,
        reference: Some((
            reference::EXP2_TWO_PLURAL_ATTRACTORS,
            "human, two plural attractors".into(),
        )),
    })
}

fn fig4(stats: &[ConditionStats]) -> Result<LinePanel> {
    let lengths = ["Short", "Medium", "Long"];
    let mut lines = Vec::new();
    for site in ["InsideRC", "OutsideRC"] {
        let mut points = Vec::new();
        for (x, len) in lengths.into_iter().enumerate() {
            let (rate, se) = lookup(stats, Design::RcLengthProbe, &[("rcLength", len), ("probeSite", site)])?;
            points.push((x, rate, se));
        }
        lines.push((site.to_string(), points));
    }
    Ok(LinePanel {
        title: "Probe error by relative clause length".into(),
        x_label: "RC length".into(),
        ticks: lengths.iter().map(|s| s.to_string()).collect(),
        lines,
        reference: None,
    })
}
