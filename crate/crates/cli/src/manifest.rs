//! Run manifests: what was run, with which configuration and seed, and the
//! digests of the files it wrote.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Path relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub working_dir: PathBuf,
    pub config: Option<serde_json::Value>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Where the manifest of a run writing to `out` goes: inside `out` when it is
/// a directory, next to it otherwise.
pub fn manifest_path(out: &Path, out_is_dir: bool) -> PathBuf {
    if out_is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: Option<serde_json::Value>, seed: Option<u64>) -> Self {
        RunManifest {
            tool: "patternforge".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line,
            working_dir: std::env::current_dir().unwrap_or_default(),
            config,
            seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    pub fn record_outputs(&mut self, base: &Path, files: &[PathBuf]) -> std::io::Result<()> {
        for f in files {
            let rel = f.strip_prefix(base).unwrap_or(f);
            self.outputs.push(OutputDigest { file: rel.display().to_string(), sha256: sha256_file(f)? });
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| crate::failure::CliError::Malformed(format!("{}: {e}", path.display())).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_locations() {
        assert_eq!(manifest_path(Path::new("out/bag.txt"), false), Path::new("out/bag.txt.manifest.json"));
        assert_eq!(manifest_path(Path::new("out/sweep"), true), Path::new("out/sweep/manifest.json"));
    }

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(sha256_file(&p).unwrap(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
