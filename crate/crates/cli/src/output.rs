use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Run directory. Files must be claimed before anything is written so that
/// a refused overwrite leaves no partial output behind.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>, force: bool) -> Self {
        Self {
            root: root.into(),
            force,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Fails if any of `names` already exists (unless forced), then creates
    /// the directory.
    pub fn claim(&self, names: &[&str]) -> Result<()> {
        if !self.force {
            if let Some(p) = names.iter().map(|n| self.path(n)).find(|p| p.exists()) {
                return Err(CliError::OutputExists { path: p });
            }
        }
        fs::create_dir_all(&self.root).map_err(|e| CliError::io(&self.root, e))
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| CliError::io(path, e))
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Core(e.into()))?;
        w.write_all(b"\n")
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(self.path(name), e))
    }

    /// Runs `f` on a buffered writer for `name` and flushes it.
    pub fn write_with<F>(&self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let mut w = self.writer(name)?;
        f(&mut w)?;
        w.flush().map_err(|e| CliError::io(self.path(name), e))
    }
}
