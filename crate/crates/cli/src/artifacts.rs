//! Staged outputs, written atomically with a manifest of content hashes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// In-memory outputs of one run; nothing touches the disk until [`commit`].
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config: &'a ExperimentConfig,
    artifacts: Vec<ManifestEntry<'a>>,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map(|_| target)
}

/// Writes every artifact plus `<subcommand>.manifest.json` into `dir`.
/// On any failure, files written by this call are removed again.
pub fn commit(
    dir: &Path,
    subcommand: &str,
    config: &ExperimentConfig,
    artifacts: &Artifacts,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        subcommand,
        config,
        artifacts: artifacts
            .files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                file: name,
                bytes: bytes.len(),
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect(),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    let manifest_name = format!("{subcommand}.manifest.json");

    let mut written = Vec::new();
    let all = artifacts
        .files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_slice()))
        .chain(std::iter::once((
            manifest_name.as_str(),
            manifest_bytes.as_slice(),
        )));
    for (name, bytes) in all {
        match write_atomic(dir, name, bytes) {
            Ok(p) => written.push(p),
            Err(e) => {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_manifest_with_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::default();
        a.add("x.csv", "a,b\n1,2\n");
        let paths = commit(dir.path(), "demo", &ExperimentConfig::default(), &a).unwrap();
        assert_eq!(paths.len(), 2);
        let manifest = fs::read_to_string(dir.path().join("demo.manifest.json")).unwrap();
        let expected = hex::encode(Sha256::digest(b"a,b\n1,2\n"));
        assert!(manifest.contains(&expected));
        // no leftover temporaries
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(names.iter().all(|n| !n.starts_with('.')));
    }

    #[test]
    fn failed_commit_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::default();
        a.add("ok.txt", "fine");
        // a directory in the way makes the second rename fail
        fs::create_dir(dir.path().join("blocked.txt")).unwrap();
        fs::write(dir.path().join("blocked.txt").join("keep"), "x").unwrap();
        a.add("blocked.txt", "nope");
        assert!(commit(dir.path(), "demo", &ExperimentConfig::default(), &a).is_err());
        assert!(!dir.path().join("ok.txt").exists());
        assert!(!dir.path().join("demo.manifest.json").exists());
    }
}
