//! Output directory writing and run manifests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_digest(path: &Path) -> io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Reproduction record: tool version, command, effective seed, and the
/// digests of the config, every input file and every output written.
pub fn manifest(
    command: &str,
    seed: u64,
    config: &Path,
    inputs: &[PathBuf],
    outputs: &[(String, String)],
) -> io::Result<String> {
    let mut out = format!("tool = trc {}\ncommand = {command}\nseed = {seed}\n", env!("CARGO_PKG_VERSION"));
    out += &format!("config = {} sha256:{}\n", config.display(), file_digest(config)?);
    for p in inputs {
        out += &format!("input = {} sha256:{}\n", p.display(), file_digest(p)?);
    }
    for (name, body) in outputs {
        out += &format!("output = {name} sha256:{}\n", sha256_hex(body.as_bytes()));
    }
    Ok(out)
}

/// Writes every file, then `manifest.txt`. On failure, removes whatever this
/// call wrote, including the directory if it created it.
pub fn write_all(dir: &Path, files: &[(String, String)], manifest: &str) -> io::Result<()> {
    let created = !dir.exists();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let result = files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_str()))
        .chain(std::iter::once(("manifest.txt", manifest)))
        .try_for_each(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        });
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}
