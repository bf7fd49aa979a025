//! Flat `key=value` run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bumped whenever a CSV column changes.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    /// Command line without the program name, paths made absolute.
    pub args: Vec<String>,
    pub command: String,
    /// Resolved parameter values, defaults included.
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// `sha256:<hex>` of every input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    /// Same for every file written, keyed by file name.
    pub outputs: BTreeMap<String, String>,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            args,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "manifest_version=1");
        let _ = writeln!(out, "csv_schema={CSV_SCHEMA}");
        let _ = writeln!(out, "command={}", escape(&self.command));
        let _ = writeln!(out, "version={}", self.version);
        for (i, a) in self.args.iter().enumerate() {
            let _ = writeln!(out, "arg.{i}={}", escape(a));
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed={s}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k}={}", escape(v));
        }
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "input.{k}={v}");
        }
        for (k, v) in &self.outputs {
            let _ = writeln!(out, "output.{k}={v}");
        }
        let _ = writeln!(out, "started_unix={:.6}", self.started_unix);
        let _ = writeln!(out, "finished_unix={:.6}", self.finished_unix);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::default();
        let mut args: BTreeMap<usize, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad number {v:?}")))
            };
            if let Some(idx) = key.strip_prefix("arg.") {
                let idx = idx
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad argument index {idx:?}")))?;
                args.insert(idx, unescape(value));
            } else if let Some(k) = key.strip_prefix("param.") {
                m.params.insert(k.to_string(), unescape(value));
            } else if let Some(k) = key.strip_prefix("input.") {
                m.inputs.insert(k.to_string(), value.to_string());
            } else if let Some(k) = key.strip_prefix("output.") {
                m.outputs.insert(k.to_string(), value.to_string());
            } else {
                match key {
                    "command" => m.command = unescape(value),
                    "version" => m.version = value.to_string(),
                    "seed" => {
                        m.seed = Some(
                            value
                                .parse()
                                .map_err(|_| Error::parse(i + 1, format!("bad seed {value:?}")))?,
                        )
                    }
                    "started_unix" => m.started_unix = num(value)?,
                    "finished_unix" => m.finished_unix = num(value)?,
                    "manifest_version" | "csv_schema" => {}
                    other => log::warn!("manifest line {}: unknown key {other:?}", i + 1),
                }
            }
        }
        if args.keys().copied().ne(0..args.len()) {
            return Err(Error::Validation(
                "manifest arguments are not numbered 0..n".into(),
            ));
        }
        m.args = args.into_values().collect();
        if m.args.is_empty() {
            return Err(Error::Validation("manifest records no command line".into()));
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = RunManifest::new(
            "optimize",
            vec!["optimize".into(), "--k".into(), "a=b\nc".into()],
        );
        m.seed = Some(42);
        m.param("lambda", 0.5);
        m.inputs.insert("graph".into(), "sha256:00".into());
        m.outputs
            .insert("iterations.csv".into(), "sha256:11".into());
        m.finished_unix = m.started_unix + 1.0;
        let back = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(back.args, m.args);
        assert_eq!(back.seed, Some(42));
        assert_eq!(back.params, m.params);
        assert_eq!(back.inputs, m.inputs);
        assert_eq!(back.outputs, m.outputs);
        assert!((back.started_unix - m.started_unix).abs() < 1e-5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(RunManifest::parse("no equals sign").is_err());
        assert!(RunManifest::parse("arg.1=x").is_err());
        assert!(RunManifest::parse("seed=1").is_err());
    }
}
