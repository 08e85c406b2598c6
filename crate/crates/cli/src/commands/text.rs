use std::io::Write;

use ladiff_core::corpus::{format_distribution, label_distribution};
use ladiff_core::preprocess::{preprocess, preprocess_traced, PreprocessConfig};
use ladiff_core::tokenizer::{tokenize, Vocab, DEFAULT_MAX_SIZE, DEFAULT_MIN_FREQ};

use crate::data::{self, InputFormat};
use crate::error::{at, CliError};
use crate::params::Schema;

use super::Invocation;

pub fn preprocess_schema() -> Schema {
    let mut s: Schema = vec![("input", String::new()), ("output", String::new()), ("trace", "0".into())];
    s.extend(data::format_schema());
    s.extend(data::preprocess_schema());
    s
}

pub fn run_preprocess(inv: Invocation) -> Result<(), CliError> {
    let mut params = inv.resolve(preprocess_schema())?;
    let mut t = params.typed();
    let input = t.path("input");
    let output = t.path("output");
    let trace = t.usize("trace");
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    let cfg = data::preprocess_config(&mut params)?;
    params.write_sidecar(inv.sidecar(), "preprocess")?;

    let mut traced = 0usize;
    let mut rewrite = |text: &str| {
        if traced < trace {
            traced += 1;
            print_trace(traced, text, &cfg);
        }
        preprocess(text, &cfg)
    };
    let rows = if format.lines {
        let text = std::fs::read_to_string(&input).map_err(|e| at(&input, e))?;
        let mut out = String::new();
        let mut n = 0;
        for line in text.lines() {
            out.push_str(&rewrite(line));
            out.push('\n');
            n += 1;
        }
        data::write_file(&output, &out)?;
        n
    } else {
        rewrite_delimited(&input, &output, &format, &mut rewrite)?
    };
    eprintln!("preprocessed {rows} rows -> {}", output.display());
    Ok(())
}

fn print_trace(row: usize, text: &str, cfg: &PreprocessConfig) {
    let trace = preprocess_traced(text, cfg);
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{row}\tinput\t{}", trace.input);
    for (stage, value) in &trace.stage_outputs {
        let _ = writeln!(out, "{row}\t{stage}\t{value}");
    }
}

/// Copies a delimited file, replacing only the text column.
fn rewrite_delimited(
    input: &std::path::Path,
    output: &std::path::Path,
    format: &InputFormat,
    rewrite: &mut dyn FnMut(&str) -> String,
) -> Result<usize, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.spec.delimiter)
        .from_path(input)
        .map_err(|e| at(input, e))?;
    let headers = rdr.headers().map_err(|e| at(input, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == format.spec.text_column)
        .ok_or_else(|| at(input, format!("missing column `{}`", format.spec.text_column)))?;
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(format.spec.delimiter)
        .from_path(output)
        .map_err(|e| at(output, e))?;
    wtr.write_record(&headers).map_err(|e| at(output, e))?;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| at(input, e))?;
        let fields: Vec<String> = record
            .iter()
            .enumerate()
            .map(|(i, f)| if i == col { rewrite(f) } else { f.to_string() })
            .collect();
        wtr.write_record(&fields).map_err(|e| at(output, e))?;
        rows += 1;
    }
    wtr.flush().map_err(|e| at(output, e))?;
    Ok(rows)
}

pub fn stats_schema() -> Schema {
    let mut s: Schema = vec![("input", String::new()), ("output", String::new()), ("scheme", "binary".into())];
    s.extend(data::format_schema());
    s
}

pub fn run_stats(inv: Invocation) -> Result<(), CliError> {
    let params = inv.resolve(stats_schema())?;
    let mut t = params.typed();
    let input = t.path("input");
    let output = t.optional_path("output");
    let scheme = data::scheme(&mut t, "scheme");
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    params.write_sidecar(inv.sidecar(), "stats")?;

    let raw = std::fs::read_to_string(&input).map_err(|e| at(&input, e))?;
    if raw.trim().is_empty() {
        return Err(at(&input, "no rows"));
    }
    let split = data::read_labeled(&input, &format, &scheme)?;
    if split.is_empty() {
        return Err(at(&input, "no rows"));
    }
    let dist = label_distribution(&split, &scheme)?;
    let report = format!("{}rows,{}\n", format_distribution(&dist), split.len());
    print!("{report}");
    if let Some(path) = output {
        data::write_file(&path, &report)?;
    }
    Ok(())
}

pub fn build_vocab_schema() -> Schema {
    let mut s: Schema = vec![
        ("input", String::new()),
        ("output", String::new()),
        ("min_freq", DEFAULT_MIN_FREQ.to_string()),
        ("max_size", DEFAULT_MAX_SIZE.to_string()),
    ];
    s.extend(data::format_schema());
    s.extend(data::preprocess_schema());
    s
}

pub fn run_build_vocab(inv: Invocation) -> Result<(), CliError> {
    let mut params = inv.resolve(build_vocab_schema())?;
    let mut t = params.typed();
    let input = t.path("input");
    let output = t.path("output");
    let min_freq = t.usize_min("min_freq", 1);
    let max_size = t.usize_min("max_size", 4);
    let format = data::input_format(&mut t, &params);
    t.finish()?;
    let cfg = data::preprocess_config(&mut params)?;
    params.write_sidecar(inv.sidecar(), "build-vocab")?;

    let texts = data::read_texts(&input, &format)?;
    let seqs: Vec<_> = texts.iter().map(|t| tokenize(&preprocess(t, &cfg))).collect();
    let vocab = Vocab::build(&seqs, min_freq, max_size)?;
    vocab.save(&output).map_err(|e| at(&output, e))?;
    eprintln!("vocabulary of {} tokens from {} rows -> {}", vocab.len(), texts.len(), output.display());
    Ok(())
}
