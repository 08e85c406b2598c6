use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::params::{Params, Schema};

pub mod baseline;
pub mod evaluate;
pub mod neural;
pub mod text;

/// Everything a subcommand needs to resolve its params.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub flags: Vec<(&'static str, Option<String>)>,
    pub resolved_config: Option<PathBuf>,
    pub env_seed: Option<String>,
}

impl Invocation {
    pub fn resolve(&self, schema: Schema) -> Result<Params, CliError> {
        Params::resolve(schema, self.config.as_deref(), &self.sets, &self.flags, self.env_seed.as_deref())
    }

    pub fn sidecar(&self) -> Option<&Path> {
        self.resolved_config.as_deref()
    }
}
