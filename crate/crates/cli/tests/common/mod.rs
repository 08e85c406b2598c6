//! Helpers for driving the `ladiff` binary against synthetic corpora.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FAKE_WORDS: [&str; 8] = ["miracle", "cure", "hoax", "secret", "garlic", "5g", "conspiracy", "banned"];
const REAL_WORDS: [&str; 8] = ["ministry", "report", "cases", "hospital", "vaccine", "trial", "official", "data"];
const HOSTILE_WORDS: [[&str; 3]; 4] = [
    ["rumour", "fabricated", "hoax"],
    ["vermin", "invaders", "subhuman"],
    ["idiot", "stupid", "loser"],
    ["fraudster", "thief", "liar"],
];
const FILLER: [&str; 14] = ["the", "a", "is", "of", "to", "in", "on", "for", "and", "with", "today", "this", "new", "says"];

pub fn ladiff() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ladiff"));
    cmd.env_remove("LADIFF_SEED");
    cmd
}

/// Runs `ladiff args...` inside `dir`.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    ladiff().current_dir(dir).args(args).output().expect("spawn ladiff")
}

/// Like [`run_in`] but panics with stderr on a nonzero exit.
pub fn ok_in(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "ladiff {args:?} exited {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn sentence(rng: &mut ChaCha8Rng, topical: &[&str], n_topical: usize) -> String {
    let mut words: Vec<String> = (0..n_topical).map(|_| topical[rng.gen_range(0..topical.len())].to_string()).collect();
    words.extend((0..6).map(|_| FILLER[rng.gen_range(0..FILLER.len())].to_string()));
    words.extend((0..2).map(|_| format!("w{}", rng.gen_range(0..300))));
    words.shuffle(rng);
    if rng.gen_bool(0.2) {
        words[0] = words[0].to_uppercase();
    }
    if rng.gen_bool(0.1) {
        words.push("#Covid19".into());
    }
    words.join(" ")
}

/// `id,text,label` rows whose label is recoverable from topical words.
pub fn binary_corpus(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("id,text,label\n");
    for i in 0..n {
        let fake = rng.gen_bool(0.5);
        let text = sentence(&mut rng, if fake { &FAKE_WORDS } else { &REAL_WORDS }, 5);
        out.push_str(&format!("{i},{text},{}\n", if fake { "fake" } else { "real" }));
    }
    out
}

/// Label sets drawn over the four hostile classes; about a third of the
/// rows are non-hostile.
pub fn multilabel_corpus(n: usize, seed: u64) -> String {
    const NAMES: [&str; 4] = ["fake", "hate", "offensive", "defamation"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("id,text,label\n");
    for i in 0..n {
        let mut labels = Vec::new();
        let mut topical = Vec::new();
        if !rng.gen_bool(0.35) {
            for k in 0..4 {
                if rng.gen_bool(0.35) {
                    labels.push(NAMES[k]);
                    topical.extend(HOSTILE_WORDS[k]);
                }
            }
            if labels.is_empty() {
                labels.push(NAMES[i % 4]);
                topical.extend(HOSTILE_WORDS[i % 4]);
            }
        }
        let text = if topical.is_empty() { sentence(&mut rng, &REAL_WORDS, 3) } else { sentence(&mut rng, &topical, 4) };
        let label = if labels.is_empty() { "non-hostile".to_string() } else { labels.join(",") };
        out.push_str(&format!("{i},{text},\"{label}\"\n"));
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).expect("write fixture");
    p
}

pub fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Files a full pipeline run leaves behind, compared byte for byte.
pub const PIPELINE_ARTIFACTS: [&str; 8] = [
    "clean.csv",
    "vocab.txt",
    "lm.ckpt",
    "lm.ckpt.losses.csv",
    "clf.ckpt",
    "clf.ckpt.losses.csv",
    "report.csv",
    "clf.ckpt.resolved.cfg",
];

/// preprocess → build-vocab → train-lm → train-clf → evaluate inside `dir`,
/// which must hold `raw.csv`. `extra_lm` / `extra_clf` are `-s` overrides.
pub fn pipeline(dir: &Path, extra_lm: &[&str], extra_clf: &[&str]) {
    ok_in(dir, &["preprocess", "--input", "raw.csv", "--output", "clean.csv"]);
    ok_in(dir, &["build-vocab", "--input", "clean.csv", "--output", "vocab.txt"]);
    let mut lm = vec!["train-lm", "--input", "clean.csv", "--vocab", "vocab.txt", "--output", "lm.ckpt", "--seed", "7"];
    for s in extra_lm {
        lm.extend(["-s", s]);
    }
    ok_in(dir, &lm);
    let mut clf = vec!["train-clf", "--input", "clean.csv", "--lm", "lm.ckpt", "--output", "clf.ckpt", "--seed", "7"];
    for s in extra_clf {
        clf.extend(["-s", s]);
    }
    ok_in(dir, &clf);
    ok_in(dir, &["evaluate", "--model", "clf.ckpt", "--input", "raw.csv", "--output", "report.csv"]);
}
