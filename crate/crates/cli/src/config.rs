use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use toml::Value;

use crate::error::CliError;

/// Sections a config may contain. Keys in sections that the running
/// subcommand does not read are ignored; anything else must be consumed.
const KNOWN_SECTIONS: [&str; 11] =
    ["mirror", "dipole", "scan", "lens", "collection", "trap", "drive", "optimize", "compensate", "thermal", "pid"];
const TOP_LEVEL: [&str; 2] = ["seed", "output_dir"];

/// Flattened `section.key = value` document with read tracking.
#[derive(Debug)]
pub struct Config {
    values: BTreeMap<String, Value>,
    read: RefCell<BTreeSet<String>>,
}

pub const DEFAULT_SEED: u64 = 1;

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", &Value::Table(table), &mut values);
        for key in values.keys() {
            match key.split_once('.') {
                Some((section, _)) if KNOWN_SECTIONS.contains(&section) => {}
                None if TOP_LEVEL.contains(&key.as_str()) => {}
                _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
            }
        }
        Ok(Self { values, read: RefCell::new(BTreeSet::new()) })
    }

    fn take(&self, key: &str) -> Option<&Value> {
        self.read.borrow_mut().insert(key.to_string());
        self.values.get(key)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(type_error(key, "a number", other)),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(other) => Err(type_error(key, "a non-negative integer", other)),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.usize_or(key, default as usize)? as u64)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(type_error(key, "true or false", other)),
        }
    }

    pub fn str_opt(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(type_error(key, "a string", other)),
        }
    }

    pub fn f64_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(type_error(key, "a list of numbers", other)),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(other) => Err(type_error(key, "a list of numbers", other)),
        }
    }

    pub fn str_list_opt(&self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    other => Err(type_error(key, "a list of strings", other)),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(other) => Err(type_error(key, "a list of strings", other)),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.u64_or("seed", DEFAULT_SEED)
    }

    /// Reject keys in `sections` (and top-level keys) that were never read.
    pub fn finish(&self, sections: &[&str]) -> Result<(), CliError> {
        let read = self.read.borrow();
        for key in self.values.keys() {
            let owned = match key.split_once('.') {
                Some((section, _)) => sections.contains(&section),
                None => key != "output_dir",
            };
            if owned && !read.contains(key) {
                return Err(CliError::Config(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn type_error(key: &str, expected: &str, got: &Value) -> CliError {
    CliError::Config(format!("`{key}` must be {expected}, got {got}"))
}
