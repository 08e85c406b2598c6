//! `ladiff`: preprocess, build vocabularies, train language models,
//! classifiers and baselines, and evaluate them.
//!
//! Every subcommand reads `key = value` params from an optional config file
//! (`-c`), then `-s key=value` overrides, then its dedicated flags. The
//! resolved params are written to `<output>.resolved.cfg`.

mod commands;
mod data;
mod error;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Invocation;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ladiff", version, about = "Layer-differentiated ULMFiT training for tweet classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(short = 'c', long = "config", value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Where to write the resolved config [default: <output>.resolved.cfg].
    #[arg(long, value_name = "FILE")]
    resolved_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite the text column (or every line) through the preprocessing pipeline.
    Preprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        output: Option<String>,
        /// Print every stage's output for the first N rows.
        #[arg(long, value_name = "N")]
        trace: Option<String>,
        /// en or hi.
        #[arg(long)]
        language: Option<String>,
    },
    /// Print per-class label counts and the row count of a labeled file.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        /// binary or multilabel.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Build a vocabulary file from preprocessed texts.
    BuildVocab {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        min_freq: Option<String>,
        #[arg(long)]
        max_size: Option<String>,
    },
    /// Train a language model with staged unfreezing.
    TrainLm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        valid: Option<String>,
        #[arg(long)]
        vocab: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Fine-tune a classifier initialized from a language-model checkpoint.
    TrainClf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        valid: Option<String>,
        /// Language-model checkpoint to initialize from.
        #[arg(long)]
        lm: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Train a TF-IDF random forest or logistic regression baseline.
    TrainBaseline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        /// forest or logreg.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Score a classifier or baseline on a labeled file.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        output: Option<String>,
        /// Scale scores to 0-100.
        #[arg(long)]
        percent: bool,
    },
    /// Write the per-batch loss log stored in a checkpoint as CSV.
    ExportLosses {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<String>,
        #[arg(long)]
        output: Option<String>,
    },
}

type Runner = fn(Invocation) -> Result<(), CliError>;

fn invocation(common: Common, flags: Vec<(&'static str, Option<String>)>) -> Invocation {
    Invocation {
        config: common.config,
        sets: common.set,
        flags,
        resolved_config: common.resolved_config,
        env_seed: std::env::var(params::SEED_ENV).ok(),
    }
}

fn dispatch(command: Command) -> (Runner, Invocation) {
    use commands::{baseline, evaluate, neural, text};
    match command {
        Command::Preprocess { common, input, output, trace, language } => (
            text::run_preprocess,
            invocation(common, vec![("input", input), ("output", output), ("trace", trace), ("language", language)]),
        ),
        Command::Stats { common, input, scheme, output } => (
            text::run_stats,
            invocation(common, vec![("input", input), ("scheme", scheme), ("output", output)]),
        ),
        Command::BuildVocab { common, input, output, min_freq, max_size } => (
            text::run_build_vocab,
            invocation(
                common,
                vec![("input", input), ("output", output), ("min_freq", min_freq), ("max_size", max_size)],
            ),
        ),
        Command::TrainLm { common, input, valid, vocab, output, seed } => (
            neural::run_train_lm,
            invocation(
                common,
                vec![("input", input), ("valid", valid), ("vocab", vocab), ("output", output), ("seed", seed)],
            ),
        ),
        Command::TrainClf { common, input, valid, lm, output, scheme, seed } => (
            neural::run_train_clf,
            invocation(
                common,
                vec![
                    ("input", input),
                    ("valid", valid),
                    ("lm", lm),
                    ("output", output),
                    ("scheme", scheme),
                    ("seed", seed),
                ],
            ),
        ),
        Command::TrainBaseline { common, input, output, scheme, model, seed } => (
            baseline::run_train_baseline,
            invocation(
                common,
                vec![("input", input), ("output", output), ("scheme", scheme), ("model", model), ("seed", seed)],
            ),
        ),
        Command::Evaluate { common, model, input, scheme, output, percent } => (
            evaluate::run_evaluate,
            invocation(
                common,
                vec![
                    ("model", model),
                    ("input", input),
                    ("scheme", scheme),
                    ("output", output),
                    ("percent", percent.then(|| "true".to_string())),
                ],
            ),
        ),
        Command::ExportLosses { common, checkpoint, output } => (
            neural::run_export_losses,
            invocation(common, vec![("checkpoint", checkpoint), ("output", output)]),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (run, inv) = dispatch(cli.command);
    match run(inv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
