//! Provenance hashing and deterministic output files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over the command name, its effective parameters and the bytes of every input file.
/// Output paths are not part of the hash.
pub struct ConfigHasher(Sha256);

impl ConfigHasher {
    pub fn new(command: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"interplay\0");
        h.update(command.as_bytes());
        h.update([0]);
        Self(h)
    }

    pub fn params<T: Serialize>(&mut self, label: &str, value: &T) -> &mut Self {
        let json = serde_json::to_vec(value).expect("parameters serialize");
        self.bytes(label, &json)
    }

    pub fn bytes(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        self.0.update(label.as_bytes());
        self.0.update([0]);
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool_version: &'static str,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config_hash: String) -> Self {
        Self { tool_version: TOOL_VERSION, config_hash }
    }
}

/// A JSON document with provenance fields first.
#[derive(Serialize)]
pub struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    pub provenance: &'a Provenance,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

pub fn json_document<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// CSV text with a leading `#` provenance comment.
pub fn csv_document(prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    writeln!(out, "# interplay {} config_hash={}", prov.tool_version, prov.config_hash).unwrap();
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

/// Shortest round-trip decimal form, so equal values always print identically.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_every_part() {
        let h = |cmd: &str, seed: u64, data: &[u8]| {
            let mut c = ConfigHasher::new(cmd);
            c.params("seed", &seed).bytes("input", data);
            c.finish()
        };
        let base = h("profile", 1, b"abc");
        assert_eq!(base, h("profile", 1, b"abc"));
        assert_ne!(base, h("estimate", 1, b"abc"));
        assert_ne!(base, h("profile", 2, b"abc"));
        assert_ne!(base, h("profile", 1, b"abd"));
        assert_eq!(base.len(), 64);
    }

    #[test]
    fn csv_has_provenance_line() {
        let prov = Provenance::new("ff".into());
        let text = csv_document(&prov, &["a", "b"], &[vec!["x,y".into(), num(0.1)]]);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# interplay ") && lines[0].ends_with("config_hash=ff"));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "\"x,y\",0.1");
        assert_eq!(num(1.0), "1.0");
    }
}
