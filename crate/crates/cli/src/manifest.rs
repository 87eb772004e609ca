use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record written next to the outputs of every invocation. Everything except
/// `timestamp_unix` is a function of the inputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_digest: String,
    pub versions: BTreeMap<String, String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub pass: bool,
    pub summary: Vec<String>,
    pub timestamp_unix: u64,
}

/// Accumulates the bytes that define a run: arguments and input file contents.
#[derive(Default)]
pub struct Digest256 {
    hasher: Sha256,
}

impl Digest256 {
    pub fn feed(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("prolong-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("prolong-core".to_string(), prolong_core::VERSION.to_string()),
    ])
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// `report.json` -> `report.manifest.json`; prefixes get the suffix appended.
pub fn manifest_path(base: &Path) -> PathBuf {
    let stem = match base.extension() {
        Some(_) => base.with_extension(""),
        None => base.to_path_buf(),
    };
    let mut name = stem.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    stem.with_file_name(name)
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_names() {
        assert_eq!(
            manifest_path(Path::new("out/report.json")),
            PathBuf::from("out/report.manifest.json")
        );
        assert_eq!(
            manifest_path(Path::new("out/run")),
            PathBuf::from("out/run.manifest.json")
        );
    }

    #[test]
    fn digest_separates_fields() {
        let mut a = Digest256::default();
        a.feed("ab", b"c");
        let mut b = Digest256::default();
        b.feed("a", b"bc");
        assert_ne!(a.finish(), b.finish());
    }
}
