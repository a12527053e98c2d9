//! Output files and run manifests. Every file a run writes goes through an
//! [`OutputSet`], which records a git blob id for it; the manifest carries
//! those ids, the full configuration and the seed, so a rerun from the
//! manifest can be checked file by file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::error::{invalid, Result};

pub const TOOL_NAME: &str = "contrarian";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Object id git would give `bytes` as a blob.
pub fn git_blob_id(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub blob: String,
}

/// Files written into one output directory.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputSet {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(OutputSet {
            dir,
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Renders a file in memory, writes it and records its blob id.
    pub fn write<F>(&mut self, name: &str, render: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        if name == MANIFEST_FILE || name.contains(['/', '\\']) {
            return Err(invalid(format!("bad output file name {name:?}")));
        }
        let mut buf = Vec::new();
        render(&mut buf)?;
        fs::write(self.dir.join(name), &buf)?;
        self.entries.retain(|e| e.file != name);
        self.entries.push(OutputEntry {
            file: name.to_string(),
            bytes: buf.len() as u64,
            blob: git_blob_id(&buf),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    /// Entries sorted by file name.
    pub fn entries(&self) -> Vec<OutputEntry> {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| a.file.cmp(&b.file));
        e
    }
}

/// Id over all outputs: the blob id of the sorted `blob  file` listing.
pub fn outputs_digest(entries: &[OutputEntry]) -> String {
    let mut lines: Vec<String> = entries
        .iter()
        .map(|e| format!("{}  {}\n", e.blob, e.file))
        .collect();
    lines.sort();
    git_blob_id(lines.concat().as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Fully resolved configuration; feeding it back reproduces the run.
    pub config: serde_json::Value,
    /// Command-specific results (spectrum summary, mixture record, verdicts).
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
    pub outputs_digest: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new<C: Serialize, S: Serialize>(
        command: &str,
        config: &C,
        seed: Option<u64>,
        summary: &S,
        outputs: &OutputSet,
        started: Instant,
    ) -> Result<Self> {
        let entries = outputs.entries();
        Ok(RunManifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config)?,
            summary: serde_json::to_value(summary)?,
            outputs_digest: outputs_digest(&entries),
            outputs: entries,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut f = fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    /// Files whose current content in `dir` differs from the recorded blob
    /// id, or that are missing.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|e| match fs::read(dir.join(&e.file)) {
                Ok(bytes) => git_blob_id(&bytes) != e.blob,
                Err(_) => true,
            })
            .map(|e| e.file.clone())
            .collect()
    }
}
