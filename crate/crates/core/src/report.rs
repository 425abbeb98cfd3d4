//! Experiment reports: canonical JSON, content-addressed names.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::params::ScaleParams;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    /// everything that determines the output
    pub inputs: Value,
    pub params: Value,
    pub provenance: Value,
    pub records: Vec<Value>,
    pub summary: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ExperimentReport {
    pub fn new(name: &str, inputs: Value, params: &ScaleParams) -> Self {
        ExperimentReport {
            name: name.to_string(),
            inputs,
            params: params.snapshot(),
            provenance: json!({ "crate_version": env!("CARGO_PKG_VERSION") }),
            records: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn with_provenance(mut self, key: &str, v: Value) -> Self {
        if let Value::Object(m) = &mut self.provenance {
            m.insert(key.to_string(), v);
        }
        self
    }

    pub fn push<T: Serialize>(&mut self, record: &T) -> Result<()> {
        self.records.push(serde_json::to_value(record)?);
        Ok(())
    }

    /// First 12 hex digits of sha256 over the canonical inputs and parameters.
    pub fn param_hash(&self) -> String {
        let key = json!({ "name": self.name, "inputs": self.inputs, "params": self.params });
        sha256_hex(key.to_string().as_bytes())[..12].to_string()
    }

    pub fn file_name(&self) -> String {
        format!("{}-{}.json", self.name, self.param_hash())
    }

    /// Pretty JSON with sorted object keys and a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_json()?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_bytes_are_stable() {
        let p = ScaleParams::new(1000.0).unwrap();
        let mut a = ExperimentReport::new("demo", json!({"x": 1}), &p);
        a.push(&json!({"b": 2, "a": 1})).unwrap();
        let b = a.clone();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.file_name(), b.file_name());
        assert!(
            a.file_name().starts_with("demo-") && a.file_name().len() == "demo-".len() + 12 + 5
        );
        let c = ExperimentReport::new("demo", json!({"x": 2}), &p);
        assert_ne!(a.param_hash(), c.param_hash());
        // keys come out sorted
        let s = a.to_json().unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }

    #[test]
    fn sha_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
