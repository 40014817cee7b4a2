// SPDX-License-Identifier: Apache-2.0

//! All-or-nothing output: results are rendered in memory first, and a failed
//! write removes whatever this run had already put on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct OutputDir {
    dir: PathBuf,
    created: bool,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn open(dir: &Path) -> Result<Self> {
        let created = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            created,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Marks `name` as produced by this run so a later failure removes it.
    pub fn track(&mut self, name: &str) {
        self.written.push(self.dir.join(name));
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn rollback(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

/// Writes every `(name, contents)` pair into `dir`, or nothing at all.
pub fn commit(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let mut out = OutputDir::open(dir)?;
    for (name, contents) in files {
        if let Err(e) = out.write(name, contents.as_bytes()) {
            out.rollback();
            return Err(e);
        }
    }
    Ok(out.written)
}
