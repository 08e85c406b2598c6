//! Dataset ingestion for the binary fake-news task and the multi-label
//! hostility task, label encoding, and label distributions.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const BINARY_CLASSES: [&str; 2] = ["real", "fake"];
/// Hostile classes first, in multi-hot order, then the exclusive non-hostile label.
pub const MULTILABEL_CLASSES: [&str; 5] = ["fake", "hate", "offensive", "defamation", "non-hostile"];
pub const NON_HOSTILE: &str = "non-hostile";
pub const NUM_HOSTILE: usize = 4;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{0}")]
    Io(String),
    #[error("delimited parse error: {0}")]
    Parse(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row_id}: unknown label `{label}`")]
    UnknownLabel { row_id: String, label: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("row {row_id}: non-hostile cannot be combined with hostile labels")]
    Exclusivity { row_id: String },
    #[error("row {row_id}: no labels")]
    NoLabels { row_id: String },
    #[error("row {row_id}: binary scheme needs exactly one label")]
    BinaryArity { row_id: String },
    #[error("row {row}: empty id")]
    EmptyId { row: usize },
    #[error("split is unlabeled")]
    Unlabeled,
    #[error("label vector of length {got}, scheme expects {expected}")]
    TargetLength { got: usize, expected: usize },
    #[error("unknown scheme `{0}` (expected binary or multilabel)")]
    UnknownScheme(String),
    #[error("unknown split `{0}` (expected train, validation or test)")]
    UnknownSplit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Binary,
    Multilabel,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Binary => "binary",
            SchemeKind::Multilabel => "multilabel",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(SchemeKind::Binary),
            "multilabel" => Ok(SchemeKind::Multilabel),
            other => Err(CorpusError::UnknownScheme(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelScheme {
    pub kind: SchemeKind,
    pub classes: Vec<String>,
}

impl LabelScheme {
    pub fn binary() -> Self {
        LabelScheme { kind: SchemeKind::Binary, classes: BINARY_CLASSES.iter().map(|s| s.to_string()).collect() }
    }

    pub fn multilabel() -> Self {
        LabelScheme {
            kind: SchemeKind::Multilabel,
            classes: MULTILABEL_CLASSES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn for_kind(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::Binary => Self::binary(),
            SchemeKind::Multilabel => Self::multilabel(),
        }
    }

    pub fn is_multilabel(&self) -> bool {
        self.kind == SchemeKind::Multilabel
    }

    /// Width of the target vector: 2 for binary, 4 hostile outputs otherwise.
    pub fn num_outputs(&self) -> usize {
        match self.kind {
            SchemeKind::Binary => self.classes.len(),
            SchemeKind::Multilabel => self.classes.len() - 1,
        }
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// One-hot (binary) or multi-hot over hostile classes (multilabel;
    /// non-hostile is the all-zero vector).
    pub fn encode(&self, labels: &[String]) -> Result<Vec<f64>, CorpusError> {
        let mut target = vec![0.0; self.num_outputs()];
        for label in labels {
            let idx = self.class_index(label).ok_or_else(|| CorpusError::UnknownLabel {
                row_id: String::new(),
                label: label.clone(),
            })?;
            if idx < target.len() {
                target[idx] = 1.0;
            }
        }
        Ok(target)
    }

    pub fn decode(&self, target: &[f64]) -> Result<Vec<String>, CorpusError> {
        if target.len() != self.num_outputs() {
            return Err(CorpusError::TargetLength { got: target.len(), expected: self.num_outputs() });
        }
        let active: Vec<String> = target
            .iter()
            .zip(&self.classes)
            .filter(|(v, _)| **v > 0.5)
            .map(|(_, c)| c.clone())
            .collect();
        if active.is_empty() && self.is_multilabel() {
            return Ok(vec![NON_HOSTILE.to_string()]);
        }
        Ok(active)
    }

    /// Hostile-class flags in multi-hot order.
    pub fn hostile_flags(&self, labels: &[String]) -> [bool; NUM_HOSTILE] {
        let mut flags = [false; NUM_HOSTILE];
        for (i, c) in MULTILABEL_CLASSES[..NUM_HOSTILE].iter().enumerate() {
            flags[i] = labels.iter().any(|l| l == c);
        }
        flags
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    /// Labels in scheme order, without duplicates. Empty for unlabeled rows.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl FromStr for SplitName {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitName::Train),
            "validation" | "val" => Ok(SplitName::Validation),
            "test" => Ok(SplitName::Test),
            other => Err(CorpusError::UnknownSplit(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub examples: Vec<LabeledExample>,
    pub labeled: bool,
    /// Non-fatal problems, e.g. downgraded exclusivity violations.
    pub warnings: Vec<String>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclusivity {
    Strict,
    Warn,
}

/// Column layout of a delimited dataset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatSpec {
    pub id_column: String,
    pub text_column: String,
    /// `None` reads an unlabeled split.
    pub label_column: Option<String>,
    pub delimiter: u8,
    pub exclusivity: Exclusivity,
}

impl Default for FormatSpec {
    fn default() -> Self {
        FormatSpec {
            id_column: "id".into(),
            text_column: "text".into(),
            label_column: Some("label".into()),
            delimiter: b',',
            exclusivity: Exclusivity::Strict,
        }
    }
}

pub fn load_delimited(
    path: &Path,
    spec: &FormatSpec,
    scheme: &LabelScheme,
    name: SplitName,
) -> Result<DatasetSplit, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::Io(format!("{}: {e}", path.display())))?;
    read_delimited(file, spec, scheme, name)
}

pub fn read_delimited<R: Read>(
    reader: R,
    spec: &FormatSpec,
    scheme: &LabelScheme,
    name: SplitName,
) -> Result<DatasetSplit, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(spec.delimiter).has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CorpusError::Parse(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let id_col = column(&spec.id_column)?;
    let text_col = column(&spec.text_column)?;
    let label_col = spec.label_column.as_deref().map(column).transpose()?;

    let mut examples = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CorpusError::Parse(e.to_string()))?;
        let id = record.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(CorpusError::EmptyId { row: row_idx + 1 });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        let text = record.get(text_col).unwrap_or("").to_string();
        let labels = match label_col {
            Some(col) => {
                let (labels, warning) =
                    parse_labels(record.get(col).unwrap_or(""), &id, scheme, spec.exclusivity)?;
                warnings.extend(warning);
                labels
            }
            None => Vec::new(),
        };
        examples.push(LabeledExample { id, text, labels });
    }
    Ok(DatasetSplit { name, examples, labeled: label_col.is_some(), warnings })
}

fn parse_labels(
    cell: &str,
    row_id: &str,
    scheme: &LabelScheme,
    exclusivity: Exclusivity,
) -> Result<(Vec<String>, Option<String>), CorpusError> {
    let raw: Vec<&str> = cell.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if raw.is_empty() {
        return Err(CorpusError::NoLabels { row_id: row_id.to_string() });
    }
    let mut present = vec![false; scheme.classes.len()];
    for label in &raw {
        let idx = scheme.class_index(label).ok_or_else(|| CorpusError::UnknownLabel {
            row_id: row_id.to_string(),
            label: label.to_string(),
        })?;
        present[idx] = true;
    }
    let labels: Vec<String> = scheme
        .classes
        .iter()
        .zip(&present)
        .filter(|(_, p)| **p)
        .map(|(c, _)| c.clone())
        .collect();
    let mut warning = None;
    match scheme.kind {
        SchemeKind::Binary if labels.len() != 1 => {
            return Err(CorpusError::BinaryArity { row_id: row_id.to_string() });
        }
        SchemeKind::Multilabel if labels.len() > 1 && labels.iter().any(|l| l == NON_HOSTILE) => {
            let err = CorpusError::Exclusivity { row_id: row_id.to_string() };
            match exclusivity {
                Exclusivity::Strict => return Err(err),
                Exclusivity::Warn => warning = Some(err.to_string()),
            }
        }
        _ => {}
    }
    Ok((labels, warning))
}

/// Per-class label assignment counts, in scheme order.
pub fn label_distribution(split: &DatasetSplit, scheme: &LabelScheme) -> Result<Vec<(String, usize)>, CorpusError> {
    if !split.labeled {
        return Err(CorpusError::Unlabeled);
    }
    Ok(count_labels(split.examples.iter().map(|e| e.labels.as_slice()), scheme))
}

pub fn count_labels<'a>(labels: impl Iterator<Item = &'a [String]>, scheme: &LabelScheme) -> Vec<(String, usize)> {
    let mut counts = vec![0usize; scheme.classes.len()];
    for set in labels {
        for l in set {
            if let Some(i) = scheme.class_index(l) {
                counts[i] += 1;
            }
        }
    }
    scheme.classes.iter().cloned().zip(counts).collect()
}

/// `class,count` lines under a header.
pub fn format_distribution(dist: &[(String, usize)]) -> String {
    let mut out = String::from("class,count\n");
    for (class, count) in dist {
        out.push_str(&format!("{class},{count}\n"));
    }
    out
}
