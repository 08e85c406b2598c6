use std::collections::{BTreeMap, BTreeSet};

use super::{BaselineError, FeatureMatrix, SparseRow};

/// Smoothed TF-IDF: `idf(c) = ln((1 + N) / (1 + df_c)) + 1`, rows scaled to
/// unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    /// Column index of each token; columns follow sorted token order.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub n_docs: usize,
}

impl TfidfModel {
    pub fn fit<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<Self, BaselineError> {
        if corpus.is_empty() {
            return Err(BaselineError::EmptyData);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            let distinct: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for tok in distinct {
                *df.entry(tok).or_default() += 1;
            }
        }
        let n = corpus.len();
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (col, (tok, d)) in df.into_iter().enumerate() {
            vocabulary.insert(tok.to_string(), col);
            idf.push(((1 + n) as f64 / (1 + d) as f64).ln() + 1.0);
        }
        Ok(TfidfModel { vocabulary, idf, n_docs: n })
    }

    pub fn n_features(&self) -> usize {
        self.idf.len()
    }

    pub fn idf_of(&self, token: &str) -> Option<f64> {
        self.vocabulary.get(token).map(|&c| self.idf[c])
    }

    /// Unseen tokens are ignored; an empty result is the zero row.
    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseRow {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in doc {
            if let Some(&c) = self.vocabulary.get(tok.as_ref()) {
                *tf.entry(c).or_default() += 1.0;
            }
        }
        let mut row = SparseRow::default();
        for (c, count) in tf {
            row.idx.push(c);
            row.val.push(count * self.idf[c]);
        }
        let norm = row.val.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.val.iter_mut().for_each(|v| *v /= norm);
        }
        row
    }

    pub fn transform_all<S: AsRef<str>>(&self, docs: &[Vec<S>]) -> FeatureMatrix {
        FeatureMatrix { rows: docs.iter().map(|d| self.transform(d)).collect(), n_features: self.n_features() }
    }
}
