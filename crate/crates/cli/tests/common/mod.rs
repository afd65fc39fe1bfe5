#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .canonicalize()
        .unwrap()
}

/// Runs the binary in `cwd` and returns its output whatever the status.
pub fn run_in(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agreement"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawning agreement")
}

/// Runs the binary and panics with its stderr unless it succeeds.
pub fn ok(cwd: &Path, args: &[&str]) {
    let out = run_in(cwd, args);
    assert!(
        out.status.success(),
        "agreement {} failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// A config with a small network, reading the shipped lexicon and grammar.
pub fn tiny_config(dir: &Path) -> PathBuf {
    let data = data_dir();
    let path = dir.join("tiny.cfg");
    std::fs::write(
        &path,
        format!(
            "[data]\nlexicon = {:?}\ngrammar = {:?}\n\n[corpus]\ntrain = 300\nvalidation = 100\ntest = 300\n\n\
             [train]\nembed = 6\nhidden = 6\nmax_epochs = 2\nreplicas = 2\nseeds = [1, 2]\n",
            data.join("lexicon.tsv"),
            data.join("grammar.pcfg")
        ),
    )
    .unwrap();
    path
}
