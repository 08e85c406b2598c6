//! Text classification toolkit for short social-media posts: special-token
//! preprocessing, a layer-grouped recurrent language model and classifier
//! trained with staged unfreezing, TF-IDF baselines, and the evaluation
//! metrics used for fake-news and hostility detection.

pub mod container;
pub mod kv;
pub mod preprocess;
pub mod tokenizer;
pub mod corpus;
pub mod metrics;
pub mod model;
pub mod trainer;
pub mod baselines;
