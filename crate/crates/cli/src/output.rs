use std::fs;
use std::path::{Path, PathBuf};

use lppl::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Contains no timestamps or host
/// details so identical runs give identical bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// JSON outputs carry the name of the manifest that produced them.
#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    manifest: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Collects the files of one run and writes them with their manifest.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let tagged = Tagged { manifest: MANIFEST, body };
        let mut bytes = serde_json::to_vec_pretty(&tagged).map_err(|e| Error::InvalidInput(e.to_string()))?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
    {
        let mut bytes = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            fill(&mut w)?;
            w.flush().map_err(|e| Error::Csv(e.into()))?;
        }
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Writes every collected file, then the manifest listing their digests.
    pub fn finish(self, mut manifest: RunManifest) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(io_err(&path))?;
            manifest.outputs.push(FileDigest {
                path: name.clone(),
                sha256: sha256_hex(bytes),
            });
            written.push(path);
        }
        let path = self.dir.join(MANIFEST);
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
        Ok(written)
    }
}
