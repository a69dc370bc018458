//! Run manifests: a small provenance record written next to every output
//! file.
//!
//! A manifest lists the subcommand, its parameters in declaration order, a
//! SHA-256 digest of every input file, and the tool version. Identical
//! manifests imply identical outputs for deterministic commands, so a
//! pipeline can be audited file by file.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Manifest {
    command: &'static str,
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            entries: Vec::new(),
        }
    }

    /// Record a parameter; insertion order is preserved in the file.
    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.entries.push((format!("param.{key}"), value.to_string()));
        self
    }

    /// Record SHA-256 digests of input files.
    pub fn inputs<'a>(
        mut self,
        paths: impl Iterator<Item = &'a PathBuf>,
    ) -> anyhow::Result<Self> {
        for path in paths {
            let bytes = std::fs::read(path)?;
            let digest = Sha256::digest(&bytes);
            let mut hex = String::with_capacity(64);
            for b in digest {
                hex.push_str(&format!("{b:02x}"));
            }
            self.entries
                .push((format!("input.{}", path.display()), format!("sha256:{hex}")));
        }
        Ok(self)
    }

    /// Write `<out_path>.manifest`.
    pub fn write_for(&self, out_path: &Path) -> anyhow::Result<()> {
        let mut text = format!(
            "tool=mcsa {}\ncommand={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        for (key, value) in &self.entries {
            text.push_str(key);
            text.push('=');
            text.push_str(value);
            text.push('\n');
        }
        if let Some(name) = out_path.file_name() {
            text.push_str(&format!("output={}\n", name.to_string_lossy()));
        }
        let manifest_path = PathBuf::from(format!("{}.manifest", out_path.display()));
        std::fs::write(manifest_path, text)?;
        Ok(())
    }
}
