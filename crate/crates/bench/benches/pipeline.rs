use std::path::PathBuf;

use agreement_core::corpus::{build_vocabulary, generate_corpus, parse_lexicon, GrammarSpec, DEFAULT_CUTOFF};
use agreement_core::network::{backward, forward, init_params, Dims};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn network(c: &mut Criterion) {
    let vocab = build_vocabulary(&parse_lexicon(&data("lexicon.tsv")).unwrap(), DEFAULT_CUTOFF).unwrap();
    let grammar = GrammarSpec::parse(&data("grammar.pcfg")).unwrap();
    let preambles = generate_corpus(&grammar, &vocab, 256, 1).unwrap();
    let tokens: usize = preambles.iter().map(|p| p.tokens.len()).sum();

    let mut group = c.benchmark_group("network");
    group.throughput(Throughput::Elements(tokens as u64));
    for hidden in [50, 200] {
        let params = init_params(Dims::new(vocab.len(), 50, hidden), 1).unwrap();
        group.bench_with_input(BenchmarkId::new("forward", hidden), &params, |b, params| {
            b.iter(|| {
                for p in &preambles {
                    black_box(forward(params, &p.tokens).unwrap());
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("backward", hidden), &params, |b, params| {
            b.iter(|| {
                for p in &preambles {
                    black_box(backward(params, &p.tokens, p.gold).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn corpus(c: &mut Criterion) {
    let vocab = build_vocabulary(&parse_lexicon(&data("lexicon.tsv")).unwrap(), DEFAULT_CUTOFF).unwrap();
    let grammar = GrammarSpec::parse(&data("grammar.pcfg")).unwrap();
    let mut group = c.benchmark_group("corpus");
    group.throughput(Throughput::Elements(1000));
    group.bench_function("generate_1000", |b| {
        b.iter(|| black_box(generate_corpus(&grammar, &vocab, 1000, 7).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, network, corpus);
criterion_main!(benches);
