//! Output collection, atomic writes and the provenance manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::scenario::sha256_hex;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Files produced by a command, keyed by path relative to the output root.
#[derive(Debug, Default, Clone)]
pub struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rel: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(rel.into(), bytes.into());
    }

    pub fn add_json<T: Serialize>(&mut self, rel: impl Into<String>, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::new("output", e))?;
        text.push('\n');
        self.add(rel, text);
        Ok(())
    }

    pub fn get(&self, rel: &str) -> Option<&[u8]> {
        self.files.get(rel).map(Vec::as_slice)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn extend(&mut self, other: Outputs) {
        self.files.extend(other.files);
    }

    pub fn hashes(&self) -> BTreeMap<String, String> {
        self.files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect()
    }

    /// Writes every file under `root`.
    pub fn write_all(&self, root: &Path) -> CliResult<()> {
        for (rel, bytes) in &self.files {
            write_atomic(&root.join(rel), bytes)?;
        }
        Ok(())
    }
}

/// Writes to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::new("output", format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().ok_or_else(|| CliError::new("output", format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub name: String,
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
    pub outputs: BTreeMap<String, String>,
    /// Stages or items that were skipped, with the reason.
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            tool: "npnkit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            inputs: Vec::new(),
            outputs: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, name: &str, sha256: Option<String>) {
        self.inputs.push(InputRecord { role: role.into(), name: name.into(), sha256 });
    }

    /// Records hashes of `outputs` and adds the manifest itself to them.
    pub fn seal(mut self, outputs: &mut Outputs) -> CliResult<()> {
        self.outputs = outputs.hashes();
        outputs.add_json(MANIFEST_NAME, &self)
    }
}
