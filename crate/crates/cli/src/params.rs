//! Run-config resolution: schema defaults, then a config file, then `--set`
//! pairs, then dedicated flags, then `LADIFF_SEED`.

use std::path::{Path, PathBuf};

use ladiff_core::kv;

use crate::error::CliError;

pub const SEED_ENV: &str = "LADIFF_SEED";

/// Keys whose value `LADIFF_SEED` replaces when present in a schema.
const SEED_KEYS: [&str; 2] = ["seed", "random_state"];

pub type Schema = Vec<(&'static str, String)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Set,
    Flag,
    Env,
}

#[derive(Debug, Clone)]
struct Entry {
    key: &'static str,
    value: String,
    source: Source,
}

#[derive(Debug, Clone)]
pub struct Params {
    entries: Vec<Entry>,
}

impl Params {
    pub fn from_schema(schema: Schema) -> Self {
        Params {
            entries: schema.into_iter().map(|(key, value)| Entry { key, value, source: Source::Default }).collect(),
        }
    }

    pub fn resolve(
        schema: Schema,
        config: Option<&Path>,
        sets: &[String],
        flags: &[(&'static str, Option<String>)],
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        let mut params = Params::from_schema(schema);
        let mut errors = Vec::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("config file {}: {e}", path.display())))?;
            let pairs = kv::parse(&text).map_err(|e| CliError::config(format!("config file {}: {e}", path.display())))?;
            for (k, v) in pairs {
                if let Err(e) = params.set(&k, v, Source::File) {
                    errors.push(e);
                }
            }
        }
        for raw in sets {
            match raw.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = params.set(k.trim(), v.trim().to_string(), Source::Set) {
                        errors.push(e);
                    }
                }
                None => errors.push(format!("--set {raw:?}: expected key=value")),
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                if let Err(e) = params.set(k, v.clone(), Source::Flag) {
                    errors.push(e);
                }
            }
        }
        if let Some(seed) = env_seed {
            if seed.trim().parse::<u64>().is_err() {
                errors.push(format!("`{SEED_ENV}`: expected unsigned integer, got {seed:?}"));
            } else {
                for key in SEED_KEYS {
                    if params.has(key) {
                        params.set(key, seed.trim().to_string(), Source::Env).expect("key in schema");
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(params)
        } else {
            Err(CliError::Config(errors))
        }
    }

    fn set(&mut self, key: &str, value: String, source: Source) -> Result<(), String> {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value;
                e.source = source;
                Ok(())
            }
            None => Err(format!("unknown key `{key}`")),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> &str {
        &self.entry(key).value
    }

    pub fn source(&self, key: &str) -> Source {
        self.entry(key).source
    }

    fn entry(&self, key: &str) -> &Entry {
        self.entries.iter().find(|e| e.key == key).unwrap_or_else(|| panic!("key `{key}` not in schema"))
    }

    /// Replaces a value with its effective form (filled-in defaults), keeping
    /// the recorded source.
    pub fn fill(&mut self, key: &str, value: impl Into<String>) {
        let source = self.source(key);
        self.set(key, value.into(), source).expect("key in schema");
    }

    pub fn render(&self) -> String {
        let pairs: Vec<(&str, &str)> = self.entries.iter().map(|e| (e.key, e.value.as_str())).collect();
        kv::render(&pairs)
    }

    /// Writes the resolved config next to the output (or to `explicit`).
    pub fn write_sidecar(&self, explicit: Option<&Path>, command: &str) -> Result<PathBuf, CliError> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => sidecar_path(if self.has("output") { self.get("output") } else { "" }, command),
        };
        std::fs::write(&path, self.render()).map_err(|e| crate::error::at(&path, e))?;
        Ok(path)
    }

    pub fn typed(&self) -> Typed<'_> {
        Typed { params: self, errors: Vec::new() }
    }
}

pub fn sidecar_path(output: &str, command: &str) -> PathBuf {
    if output.is_empty() {
        PathBuf::from(format!("ladiff-{command}.resolved.cfg"))
    } else {
        PathBuf::from(format!("{output}.resolved.cfg"))
    }
}

/// Typed accessors that collect every bad key before failing.
pub struct Typed<'a> {
    params: &'a Params,
    errors: Vec<String>,
}

impl Typed<'_> {
    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.params.get(key);
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("`{key}`: expected {what}, got {raw:?}"));
                None
            }
        }
    }

    pub fn usize(&mut self, key: &str) -> usize {
        self.parse(key, "unsigned integer").unwrap_or(0)
    }

    /// Integer that must be at least `min`.
    pub fn usize_min(&mut self, key: &str, min: usize) -> usize {
        match self.parse::<usize>(key, "unsigned integer") {
            Some(v) if v >= min => v,
            Some(v) => {
                self.errors.push(format!("`{key}`: must be >= {min}, got {v}"));
                min
            }
            None => min,
        }
    }

    pub fn u64(&mut self, key: &str) -> u64 {
        self.parse(key, "unsigned integer").unwrap_or(0)
    }

    pub fn f64(&mut self, key: &str) -> f64 {
        match self.parse::<f64>(key, "number") {
            Some(v) if v.is_finite() => v,
            Some(v) => {
                self.errors.push(format!("`{key}`: must be finite, got {v}"));
                0.0
            }
            None => 0.0,
        }
    }

    pub fn bool(&mut self, key: &str) -> bool {
        let raw = self.params.get(key);
        kv::parse_bool(raw).unwrap_or_else(|| {
            self.errors.push(format!("`{key}`: expected true or false, got {raw:?}"));
            false
        })
    }

    pub fn choice(&mut self, key: &str, options: &[&'static str]) -> &'static str {
        let raw = self.params.get(key);
        match options.iter().find(|o| **o == raw) {
            Some(o) => o,
            None => {
                self.errors.push(format!("`{key}`: expected one of {}, got {raw:?}", options.join(", ")));
                options[0]
            }
        }
    }

    pub fn optional_path(&mut self, key: &str) -> Option<PathBuf> {
        let raw = self.params.get(key);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }

    pub fn path(&mut self, key: &str) -> PathBuf {
        let raw = self.params.get(key);
        if raw.is_empty() {
            self.errors.push(format!("`{key}`: required"));
        }
        PathBuf::from(raw)
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.errors.push(message.into());
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(self.errors))
        }
    }
}
