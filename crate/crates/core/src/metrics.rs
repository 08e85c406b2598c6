//! Evaluation metrics for the binary fake-news task and the multi-label
//! hostility task, plus report formatting.
//!
//! Precision, recall and F1 use zero for any 0/0 ratio. Binary reports average
//! per-class values weighted by gold support. Fine-grained F1 averages the
//! one-vs-rest F1 of each hostile class weighted by gold positives.

use thiserror::Error;

use crate::corpus::NUM_HOSTILE;

/// Hostile-class flags in the order fake, hate, offensive, defamation.
pub type HostileFlags = [bool; NUM_HOSTILE];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} items but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("no items to evaluate")]
    Empty,
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(usize),
    #[error("undefined metric: no hostile class has gold support")]
    UndefinedMetric,
    #[error("report kind does not match the requested table")]
    KindMismatch,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub support: usize,
}

impl ClassCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class counts for single-label predictions over `num_classes` classes.
pub fn confusion(gold: &[usize], pred: &[usize], num_classes: usize) -> Vec<ClassCounts> {
    let mut counts = vec![ClassCounts::default(); num_classes];
    for (&g, &p) in gold.iter().zip(pred) {
        counts[g].support += 1;
        if g == p {
            counts[g].tp += 1;
        } else {
            counts[g].fn_ += 1;
            counts[p].fp += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineGrained {
    /// F1 per hostile class, in fake, hate, offensive, defamation order.
    pub per_class: [f64; NUM_HOSTILE],
    pub support: [usize; NUM_HOSTILE],
    pub weighted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultilabelReport {
    pub coarse_f1: f64,
    pub fine: FineGrained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricsReport {
    Binary(BinaryReport),
    Multilabel(MultilabelReport),
}

fn check_lengths(gold: usize, pred: usize) -> Result<(), MetricsError> {
    if gold != pred {
        return Err(MetricsError::LengthMismatch { gold, pred });
    }
    if gold == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

pub fn binary_report(gold: &[usize], pred: &[usize]) -> Result<BinaryReport, MetricsError> {
    check_lengths(gold.len(), pred.len())?;
    if let Some(&bad) = gold.iter().chain(pred).find(|&&l| l > 1) {
        return Err(MetricsError::InvalidLabel(bad));
    }
    let counts = confusion(gold, pred, 2);
    let n = gold.len() as f64;
    let weighted = |f: fn(&ClassCounts) -> f64| counts.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / n;
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(BinaryReport {
        accuracy: correct as f64 / n,
        precision: weighted(ClassCounts::precision),
        recall: weighted(ClassCounts::recall),
        f1: weighted(ClassCounts::f1),
    })
}

fn hostile(flags: &HostileFlags) -> usize {
    flags.iter().any(|&f| f) as usize
}

/// Weighted binary F1 after collapsing each post to hostile / non-hostile.
pub fn coarse_f1(gold: &[HostileFlags], pred: &[HostileFlags]) -> Result<f64, MetricsError> {
    check_lengths(gold.len(), pred.len())?;
    let g: Vec<usize> = gold.iter().map(hostile).collect();
    let p: Vec<usize> = pred.iter().map(hostile).collect();
    Ok(binary_report(&g, &p)?.f1)
}

pub fn fine_grained_f1(gold: &[HostileFlags], pred: &[HostileFlags]) -> Result<FineGrained, MetricsError> {
    check_lengths(gold.len(), pred.len())?;
    let mut per_class = [0.0; NUM_HOSTILE];
    let mut support = [0usize; NUM_HOSTILE];
    for c in 0..NUM_HOSTILE {
        let mut counts = ClassCounts::default();
        for (g, p) in gold.iter().zip(pred) {
            match (g[c], p[c]) {
                (true, true) => counts.tp += 1,
                (false, true) => counts.fp += 1,
                (true, false) => counts.fn_ += 1,
                (false, false) => {}
            }
        }
        counts.support = counts.tp + counts.fn_;
        support[c] = counts.support;
        per_class[c] = counts.f1();
    }
    let total: usize = support.iter().sum();
    if total == 0 {
        return Err(MetricsError::UndefinedMetric);
    }
    let weighted = (0..NUM_HOSTILE).map(|c| support[c] as f64 * per_class[c]).sum::<f64>() / total as f64;
    Ok(FineGrained { per_class, support, weighted })
}

pub fn multilabel_report(gold: &[HostileFlags], pred: &[HostileFlags]) -> Result<MultilabelReport, MetricsError> {
    Ok(MultilabelReport { coarse_f1: coarse_f1(gold, pred)?, fine: fine_grained_f1(gold, pred)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Binary,
    Multilabel,
}

pub const BINARY_COLUMNS: [&str; 4] = ["accuracy", "precision", "recall", "f1-score"];
pub const MULTILABEL_COLUMNS: [&str; 6] = [
    "coarse_grained_hostility_f1",
    "defamation_f1",
    "fake_f1",
    "hate_f1",
    "offensive_f1",
    "weighted_fine_grained_f1",
];

impl MetricsReport {
    pub fn kind(&self) -> TableKind {
        match self {
            MetricsReport::Binary(_) => TableKind::Binary,
            MetricsReport::Multilabel(_) => TableKind::Multilabel,
        }
    }

    /// (column, value) pairs in table order.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        match self {
            MetricsReport::Binary(r) => BINARY_COLUMNS.into_iter().zip([r.accuracy, r.precision, r.recall, r.f1]).collect(),
            MetricsReport::Multilabel(r) => {
                let [fake, hate, offensive, defamation] = r.fine.per_class;
                MULTILABEL_COLUMNS
                    .into_iter()
                    .zip([r.coarse_f1, defamation, fake, hate, offensive, r.fine.weighted])
                    .collect()
            }
        }
    }
}

/// Comma-separated header and value row, six decimals. With `percent`,
/// values are scaled to 0–100.
pub fn format_report(report: &MetricsReport, kind: TableKind, percent: bool) -> Result<String, MetricsError> {
    if report.kind() != kind {
        return Err(MetricsError::KindMismatch);
    }
    let cols = report.columns();
    let scale = if percent { 100.0 } else { 1.0 };
    let header: Vec<&str> = cols.iter().map(|(n, _)| *n).collect();
    let row: Vec<String> = cols.iter().map(|(_, v)| format!("{:.6}", v * scale)).collect();
    Ok(format!("{}\n{}\n", header.join(","), row.join(",")))
}

/// Machine-readable `key=value` lines.
pub fn format_kv(report: &MetricsReport) -> String {
    report.columns().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}
