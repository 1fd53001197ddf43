use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Milliseconds since the Unix epoch.
pub fn now_millis() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub code_version: String,
    pub started_ms: u128,
    pub finished_ms: u128,
    /// `Some(false)` when a verifying experiment's comparison failed.
    pub verdict: Option<bool>,
    pub outputs: Vec<OutputEntry>,
}

/// An output file held in memory until the finalize phase.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        Self::new(name, bytes)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes every artifact and the manifest into `dir`.
pub fn finalize(dir: &Path, artifacts: &[Artifact], mut manifest: RunManifest) -> Result<RunManifest, HarnessError> {
    let mut names: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) || names.contains(&MANIFEST_FILE) {
        return Err(HarnessError::Config("duplicate output file name".into()));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    manifest.outputs = artifacts
        .iter()
        .map(|a| OutputEntry {
            file: a.name.clone(),
            sha256: sha256_hex(&a.bytes),
            bytes: a.bytes.len(),
        })
        .collect();
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(io_err(&path))?;
    }
    manifest.finished_ms = now_millis();
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            experiment: "photon-demo".into(),
            config_sha256: String::new(),
            seed: None,
            code_version: "0".into(),
            started_ms: 0,
            finished_ms: 0,
            verdict: None,
            outputs: Vec::new(),
        }
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn duplicate_names_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let a = [Artifact::new("a.csv", vec![1]), Artifact::new("a.csv", vec![2])];
        assert!(finalize(&out, &a, manifest()).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn manifest_lists_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let m = finalize(dir.path(), &[Artifact::new("x.txt", b"abc".to_vec())], manifest()).unwrap();
        assert_eq!(m.outputs[0].sha256, sha256_hex(b"abc"));
        let back: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
