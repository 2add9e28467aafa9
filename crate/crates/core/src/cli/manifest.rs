use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliResult;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Run record written next to every output. Contains no timestamps or host
/// details, so identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub failures: Vec<BTreeMap<String, String>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)?;
        self.input_bytes(&path.display().to_string(), &bytes);
        Ok(())
    }

    pub fn input_bytes(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)?;
        self.outputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn failure(&mut self, file: &str, error: &str) {
        let mut m = BTreeMap::new();
        m.insert("file".to_string(), file.to_string());
        m.insert("error".to_string(), error.to_string());
        self.failures.push(m);
    }

    /// Writes pretty JSON to `path` with a trailing newline.
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(crate::Error::from)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// `<output>.manifest.json` beside a single-file output.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_and_path() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            manifest_path(Path::new("out/model.json")),
            PathBuf::from("out/model.json.manifest.json")
        );
    }
}
