use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use salem_core::kaufman_engine::schedule::{Caps, ModeKind};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub mode: ModeKind,
    pub caps: Caps,
    pub library_version: String,
    pub wall_time_ms: u128,
    pub exit_code: i32,
    pub input_digests: BTreeMap<String, String>,
    pub output_digests: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable payload");
    s.push('\n');
    s.into_bytes()
}

/// Collected artifacts of one run.
#[derive(Default)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub stdout: Vec<u8>,
}

impl Artifacts {
    pub fn main(&mut self, out: &Option<PathBuf>, bytes: Vec<u8>) {
        match out {
            Some(p) => self.files.push((p.clone(), bytes)),
            None => self.stdout.extend(bytes),
        }
    }

    pub fn side(&mut self, out: &Option<PathBuf>, suffix: &str, bytes: Vec<u8>) {
        if let Some(p) = out {
            self.files.push((sidecar(p, suffix), bytes));
        }
    }
}
