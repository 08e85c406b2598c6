//! Binary checkpoints: config header, then each group's tensors in order,
//! then named text attachments (vocabulary, preprocessing config, ...).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::container::{ContainerError, Reader, Writer};

use super::{LayerGroupedModel, ModelConfig, ModelKind, ParamGroup, Tensor};

pub const LM_KIND: &str = "lm-checkpoint";
pub const CLF_KIND: &str = "classifier-checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: LayerGroupedModel,
    pub attachments: Vec<(String, String)>,
}

pub fn kind_tag(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::LanguageModel => LM_KIND,
        ModelKind::Classifier => CLF_KIND,
    }
}

impl Checkpoint {
    pub fn new(model: LayerGroupedModel) -> Self {
        Checkpoint { model, attachments: Vec::new() }
    }

    pub fn attach(&mut self, name: &str, text: impl Into<String>) {
        let text = text.into();
        match self.attachments.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = text,
            None => self.attachments.push((name.to_string(), text)),
        }
    }

    pub fn attachment(&self, name: &str) -> Option<&str> {
        self.attachments.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn write_to<W: Write>(&self, inner: W) -> Result<W, ContainerError> {
        let m = &self.model;
        let cfg = &m.config;
        let mut w = Writer::new(inner, kind_tag(m.kind))?;
        for v in [cfg.vocab_size, cfg.embed_dim, cfg.hidden_dim, cfg.num_recurrent_layers, cfg.num_classes] {
            w.usize(v)?;
        }
        w.bool(cfg.multilabel)?;
        w.u64(cfg.seed)?;
        w.usize(m.groups.len())?;
        for g in &m.groups {
            w.str(&g.name)?;
            w.usize(g.tensors.len())?;
            for t in &g.tensors {
                w.tensor(&t.name, &t.shape, &t.data)?;
            }
        }
        w.usize(self.attachments.len())?;
        for (name, text) in &self.attachments {
            w.str(name)?;
            w.str(text)?;
        }
        w.finish()
    }

    pub fn read_from<R: Read>(inner: R) -> Result<Self, ContainerError> {
        let mut r = Reader::new(inner)?;
        let kind = match r.kind() {
            LM_KIND => ModelKind::LanguageModel,
            CLF_KIND => ModelKind::Classifier,
            other => return Err(ContainerError::Kind { expected: "model checkpoint".into(), found: other.into() }),
        };
        let cfg = ModelConfig {
            vocab_size: r.usize()?,
            embed_dim: r.usize()?,
            hidden_dim: r.usize()?,
            num_recurrent_layers: r.usize()?,
            num_classes: r.usize()?,
            multilabel: r.bool()?,
            seed: r.u64()?,
        };
        let n_groups = r.usize()?;
        let mut groups = Vec::with_capacity(n_groups.min(1024));
        for _ in 0..n_groups {
            let name = r.str()?;
            let n = r.usize()?;
            let mut tensors = Vec::with_capacity(n.min(64));
            for _ in 0..n {
                let (name, shape, data) = r.tensor()?;
                tensors.push(Tensor { name, shape, data });
            }
            groups.push(ParamGroup { name, tensors });
        }
        let n_att = r.usize()?;
        let mut attachments = Vec::with_capacity(n_att.min(64));
        for _ in 0..n_att {
            attachments.push((r.str()?, r.str()?));
        }
        r.finish()?;
        let model = LayerGroupedModel { config: cfg, kind, groups };
        cfg_check(&model)?;
        Ok(Checkpoint { model, attachments })
    }

    pub fn save(&self, path: &Path) -> Result<(), ContainerError> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file))?.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ContainerError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn cfg_check(model: &LayerGroupedModel) -> Result<(), ContainerError> {
    model.config.validate().map_err(|e| ContainerError::Malformed(e.to_string()))?;
    model.check_shapes().map_err(|e| ContainerError::Malformed(e.to_string()))
}
