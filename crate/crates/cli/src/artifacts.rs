use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records a digest for every file it writes. The
/// manifest is only written by [`ArtifactDir::finish`], so a failed run
/// leaves none behind.
pub struct ArtifactDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl ArtifactDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let stale = root.join(MANIFEST);
        if stale.exists() {
            fs::remove_file(&stale).with_context(|| format!("removing {}", stale.display()))?;
        }
        Ok(ArtifactDir {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let bytes = contents.as_ref();
        let path = self.root.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.insert(name.to_string(), digest(bytes));
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.written.keys().cloned().collect()
    }

    /// Writes `manifest.txt`: `<sha256>  <name>` per artifact, sorted by name.
    pub fn finish(self) -> Result<Vec<String>> {
        let mut text = String::new();
        for (name, hash) in &self.written {
            text.push_str(&format!("{hash}  {name}\n"));
        }
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.written.into_keys().collect())
    }
}

/// Recomputes every digest in `dir/manifest.txt`; returns the number of
/// artifacts checked.
pub fn verify(dir: &Path) -> Result<usize> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut problems = Vec::new();
    let mut checked = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let Some((hash, name)) = line.split_once("  ") else {
            bail!("{}: malformed line {}", path.display(), i + 1);
        };
        checked += 1;
        match fs::read(dir.join(name)) {
            Ok(bytes) if digest(&bytes) == hash => {}
            Ok(_) => problems.push(format!("{name}: digest mismatch")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    if !problems.is_empty() {
        bail!("{} of {checked} artifacts failed: {}", problems.len(), problems.join("; "));
    }
    Ok(checked)
}
