use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

/// Manifest echoed next to a command's outputs. The output directory itself
/// is left out so reruns elsewhere produce the same bytes.
#[derive(Serialize)]
struct Manifest<'a, A: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    args: &'a A,
    resolved: Value,
    inputs: Vec<InputRecord>,
    outputs: &'a [String],
}

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
    inputs: Vec<InputRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            inputs: Vec::new(),
        })
    }

    /// Reads an input file and records its digest for the manifest.
    pub fn input(&mut self, path: &Path) -> Result<String> {
        let text = read_text(path)?;
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(text)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(
        mut self,
        command: &str,
        seed: u64,
        args: &impl Serialize,
        resolved: Value,
    ) -> Result<()> {
        let outputs = std::mem::take(&mut self.written);
        let manifest = Manifest {
            tool: "looptop",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            args,
            resolved,
            inputs: std::mem::take(&mut self.inputs),
            outputs: &outputs,
        };
        self.write_json("manifest.json", &manifest)
    }
}
