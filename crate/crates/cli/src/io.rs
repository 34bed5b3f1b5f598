use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use pulab_core::{BodySpec, Error};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Unsupported(_)) {
            2
        } else {
            1
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A parsed body spec together with the hash of the file it came from.
pub struct LoadedSpec {
    pub body: BodySpec,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Parses a JSON document, naming the offending field on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." {
            String::new()
        } else {
            format!(" at field `{at}`")
        };
        CliError::usage(format!("{}: malformed{at}: {}", path.display(), e.inner()))
    })
}

pub fn load_spec(path: &Path) -> CliResult<LoadedSpec> {
    let bytes = read(path)?;
    let body = parse_json(path, &bytes)?;
    Ok(LoadedSpec {
        body,
        sha256: sha256_hex(&bytes),
    })
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<(T, String)> {
    let bytes = read(path)?;
    Ok((parse_json(path, &bytes)?, sha256_hex(&bytes)))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub input_sha256: Option<String>,
    pub seeds: Vec<u64>,
    pub tool_version: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(input_sha256: Option<String>, seeds: Vec<u64>) -> Self {
        RunManifest {
            command_line: std::env::args().collect(),
            input_sha256,
            seeds,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Writes `contents` to `out` and the manifest next to it.
pub fn write_with_manifest(out: &Path, contents: &str, manifest: &RunManifest) -> CliResult<()> {
    write(out, contents)?;
    let json = serde_json::to_string_pretty(manifest).expect("manifest serialisation cannot fail");
    write(&manifest_path(out), &(json + "\n"))
}
