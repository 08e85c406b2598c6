//! Classical baselines: TF-IDF features with logistic regression or a
//! random forest. Multilabel data is handled one-vs-rest.

mod forest;
mod logreg;
mod tfidf;
mod tree;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::container::{ContainerError, Reader, Writer};

pub use forest::{train_forest, Forest, ForestConfig, DEFAULT_MIN_SAMPLES_SPLIT, DEFAULT_N_ESTIMATORS, DEFAULT_RANDOM_STATE};
pub use logreg::{train_logreg, LogRegConfig, LogRegMode, LogRegModel, DEFAULT_EPOCHS, DEFAULT_L2_LAMBDA, DEFAULT_LR};
pub use tfidf::TfidfModel;
pub use tree::{best_split, class_counts, gini, DecisionTree, Node, Split, TreeConfig, IMPURITY_TOL};

pub const MODEL_KIND: &str = "baseline-model";

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("empty data")]
    EmptyData,
    #[error("gini of an empty node")]
    EmptyNode,
    #[error("{rows} feature rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("label {0} out of range")]
    InvalidLabel(usize),
    #[error("invalid baseline config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Container(#[from] ContainerError),
}

/// Sparse feature row with strictly increasing column indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    pub fn get(&self, col: usize) -> f64 {
        match self.idx.binary_search(&col) {
            Ok(k) => self.val[k],
            Err(_) => 0.0,
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut row = SparseRow::default();
        for (c, &v) in values.iter().enumerate() {
            if v != 0.0 {
                row.idx.push(c);
                row.val.push(v);
            }
        }
        row
    }

    pub fn norm(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub rows: Vec<SparseRow>,
    pub n_features: usize,
}

impl FeatureMatrix {
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_features = rows.iter().map(Vec::len).max().unwrap_or(0);
        FeatureMatrix { rows: rows.iter().map(|r| SparseRow::from_dense(r)).collect(), n_features }
    }
}

/// Training targets: one class per row, or a label set per row.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Single { classes: Vec<usize>, n_classes: usize },
    Multi { rows: Vec<Vec<bool>>, n_labels: usize },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Single { classes, .. } => classes.len(),
            Labels::Multi { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, n_rows: usize) -> Result<(), BaselineError> {
        if self.len() != n_rows {
            return Err(BaselineError::LengthMismatch { rows: n_rows, targets: self.len() });
        }
        match self {
            Labels::Single { classes, n_classes } => {
                if let Some(&bad) = classes.iter().find(|&&c| c >= *n_classes) {
                    return Err(BaselineError::InvalidLabel(bad));
                }
            }
            Labels::Multi { rows, n_labels } => {
                if let Some(r) = rows.iter().find(|r| r.len() != *n_labels) {
                    return Err(BaselineError::InvalidLabel(r.len()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Single(Vec<usize>),
    Multi(Vec<Vec<bool>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineClassifier {
    LogReg(LogRegModel),
    Forest(Forest),
    /// One binary forest per label.
    ForestOvr(Vec<Forest>),
}

/// Trains a forest for single-class targets or one binary forest per label.
pub fn train_forest_classifier(x: &FeatureMatrix, labels: &Labels, cfg: &ForestConfig) -> Result<BaselineClassifier, BaselineError> {
    labels.check(x.rows.len())?;
    match labels {
        Labels::Single { classes, n_classes } => Ok(BaselineClassifier::Forest(train_forest(x, classes, *n_classes, cfg)?)),
        Labels::Multi { rows, n_labels } => {
            let forests = (0..*n_labels)
                .map(|k| {
                    let y: Vec<usize> = rows.iter().map(|r| r[k] as usize).collect();
                    train_forest(x, &y, 2, cfg)
                })
                .collect::<Result<_, _>>()?;
            Ok(BaselineClassifier::ForestOvr(forests))
        }
    }
}

impl BaselineClassifier {
    pub fn predict(&self, x: &FeatureMatrix) -> Predictions {
        match self {
            BaselineClassifier::LogReg(m) => {
                let probs: Vec<Vec<f64>> = x.rows.iter().map(|r| m.predict_proba(r)).collect();
                match m.mode {
                    LogRegMode::Softmax => Predictions::Single(probs.iter().map(|p| crate::model::argmax(p)).collect()),
                    LogRegMode::OneVsRest => Predictions::Multi(probs.iter().map(|p| p.iter().map(|&v| v >= 0.5).collect()).collect()),
                }
            }
            BaselineClassifier::Forest(f) => Predictions::Single(f.predict_all(x)),
            BaselineClassifier::ForestOvr(fs) => {
                let per_label: Vec<Vec<usize>> = fs.iter().map(|f| f.predict_all(x)).collect();
                Predictions::Multi((0..x.rows.len()).map(|i| per_label.iter().map(|p| p[i] == 1).collect()).collect())
            }
        }
    }

    pub fn is_multilabel(&self) -> bool {
        match self {
            BaselineClassifier::LogReg(m) => m.mode == LogRegMode::OneVsRest,
            BaselineClassifier::Forest(_) => false,
            BaselineClassifier::ForestOvr(_) => true,
        }
    }
}

/// Featurizer plus classifier plus named text attachments.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub tfidf: TfidfModel,
    pub classifier: BaselineClassifier,
    pub attachments: Vec<(String, String)>,
}

const TAG_LOGREG: u8 = 0;
const TAG_FOREST: u8 = 1;
const TAG_FOREST_OVR: u8 = 2;

fn write_forest<W: Write>(w: &mut Writer<W>, f: &Forest) -> Result<(), ContainerError> {
    w.usize(f.n_classes)?;
    w.usize(f.trees.len())?;
    for t in &f.trees {
        w.usize(t.n_classes)?;
        w.usize(t.nodes.len())?;
        for node in &t.nodes {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    w.u8(0)?;
                    w.usize(*feature)?;
                    w.f64(*threshold)?;
                    w.usize(*left)?;
                    w.usize(*right)?;
                }
                Node::Leaf { counts } => {
                    w.u8(1)?;
                    w.usize(counts.len())?;
                    for &c in counts {
                        w.usize(c)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn read_forest<R: Read>(r: &mut Reader<R>) -> Result<Forest, ContainerError> {
    let n_classes = r.usize()?;
    let n_trees = r.usize()?;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        let tree_classes = r.usize()?;
        let n_nodes = r.usize()?;
        let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
        for _ in 0..n_nodes {
            nodes.push(match r.u8()? {
                0 => Node::Split { feature: r.usize()?, threshold: r.f64()?, left: r.usize()?, right: r.usize()? },
                1 => {
                    let n = r.usize()?;
                    Node::Leaf { counts: (0..n).map(|_| r.usize()).collect::<Result<_, _>>()? }
                }
                t => return Err(ContainerError::Malformed(format!("unknown node tag {t}"))),
            });
        }
        for node in &nodes {
            if let Node::Split { left, right, .. } = node {
                if *left >= n_nodes || *right >= n_nodes {
                    return Err(ContainerError::Malformed("tree child index out of range".into()));
                }
            }
        }
        trees.push(DecisionTree { n_classes: tree_classes, nodes });
    }
    Ok(Forest { n_classes, trees })
}

impl BaselineModel {
    pub fn predict<S: AsRef<str>>(&self, docs: &[Vec<S>]) -> Predictions {
        self.classifier.predict(&self.tfidf.transform_all(docs))
    }

    pub fn attachment(&self, name: &str) -> Option<&str> {
        self.attachments.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn write_to<W: Write>(&self, inner: W) -> Result<W, ContainerError> {
        let mut w = Writer::new(inner, MODEL_KIND)?;
        w.usize(self.attachments.len())?;
        for (n, t) in &self.attachments {
            w.str(n)?;
            w.str(t)?;
        }
        w.usize(self.tfidf.n_docs)?;
        let mut tokens: Vec<(&String, &usize)> = self.tfidf.vocabulary.iter().collect();
        tokens.sort_by_key(|(_, &c)| c);
        w.strings(&tokens.into_iter().map(|(t, _)| t.clone()).collect::<Vec<_>>())?;
        w.f64_slice(&self.tfidf.idf)?;
        match &self.classifier {
            BaselineClassifier::LogReg(m) => {
                w.u8(TAG_LOGREG)?;
                w.u8(match m.mode {
                    LogRegMode::Softmax => 0,
                    LogRegMode::OneVsRest => 1,
                })?;
                w.f64(m.l2_lambda)?;
                w.tensor("weights", &[m.n_outputs, m.n_features], &m.weights)?;
                w.tensor("bias", &[m.n_outputs], &m.bias)?;
            }
            BaselineClassifier::Forest(f) => {
                w.u8(TAG_FOREST)?;
                write_forest(&mut w, f)?;
            }
            BaselineClassifier::ForestOvr(fs) => {
                w.u8(TAG_FOREST_OVR)?;
                w.usize(fs.len())?;
                for f in fs {
                    write_forest(&mut w, f)?;
                }
            }
        }
        w.finish()
    }

    pub fn read_from<R: Read>(inner: R) -> Result<Self, ContainerError> {
        let mut r = Reader::new(inner)?;
        r.expect_kind(MODEL_KIND)?;
        let n_att = r.usize()?;
        let mut attachments = Vec::with_capacity(n_att.min(64));
        for _ in 0..n_att {
            attachments.push((r.str()?, r.str()?));
        }
        let n_docs = r.usize()?;
        let tokens = r.strings()?;
        let idf = r.f64_vec()?;
        if tokens.len() != idf.len() {
            return Err(ContainerError::Malformed("vocabulary and idf lengths differ".into()));
        }
        let vocabulary = tokens.into_iter().enumerate().map(|(c, t)| (t, c)).collect();
        let classifier = match r.u8()? {
            TAG_LOGREG => {
                let mode = match r.u8()? {
                    0 => LogRegMode::Softmax,
                    1 => LogRegMode::OneVsRest,
                    m => return Err(ContainerError::Malformed(format!("unknown logreg mode {m}"))),
                };
                let l2_lambda = r.f64()?;
                let (_, shape, weights) = r.tensor()?;
                let (_, _, bias) = r.tensor()?;
                if shape.len() != 2 || bias.len() != shape[0] {
                    return Err(ContainerError::Malformed("logreg shapes".into()));
                }
                BaselineClassifier::LogReg(LogRegModel { mode, n_outputs: shape[0], n_features: shape[1], weights, bias, l2_lambda })
            }
            TAG_FOREST => BaselineClassifier::Forest(read_forest(&mut r)?),
            TAG_FOREST_OVR => {
                let n = r.usize()?;
                BaselineClassifier::ForestOvr((0..n).map(|_| read_forest(&mut r)).collect::<Result<_, _>>()?)
            }
            t => return Err(ContainerError::Malformed(format!("unknown classifier tag {t}"))),
        };
        r.finish()?;
        Ok(BaselineModel { tfidf: TfidfModel { vocabulary, idf, n_docs }, classifier, attachments })
    }

    pub fn save(&self, path: &Path) -> Result<(), ContainerError> {
        self.write_to(BufWriter::new(File::create(path)?))?.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ContainerError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
