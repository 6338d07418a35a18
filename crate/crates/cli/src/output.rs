//! Artifact writing with embedded provenance.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

impl InputFile {
    pub fn new(path: &Path, data: &[u8]) -> Self {
        InputFile { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(data)), bytes: data.len() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub inputs: Vec<InputFile>,
    /// Resolved parameters of the run, enough to reproduce every artifact.
    pub config: Value,
}

/// Collects artifacts for one run under the output directory.
pub struct Output {
    dir: PathBuf,
    stamp: Option<u64>,
    pub provenance: Provenance,
    pub artifacts: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf, stamp: bool, subcommand: &str, inputs: Vec<InputFile>, config: Value) -> Self {
        let stamp = stamp.then(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()));
        Output {
            dir,
            stamp,
            provenance: Provenance { tool: "eigenstrain", version: env!("CARGO_PKG_VERSION"), subcommand: subcommand.into(), inputs, config },
            artifacts: Vec::new(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        eigenstrain::io::write_file(&self.dir.join(name), body).map_err(CliError::Lib)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn provenance_line(&self) -> String {
        serde_json::to_string(&self.provenance).expect("provenance serialises")
    }

    /// CSV with a leading `# provenance: {...}` comment line.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# provenance: {}\n{body}", self.provenance_line());
        self.write(name, text.as_bytes())
    }

    /// SVG with the provenance (and the time only under `--stamp`) in a comment after the root tag.
    pub fn svg(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let mut note = format!("<!-- provenance: {} -->\n", self.provenance_line().replace("--", "- -"));
        if let Some(t) = self.stamp {
            note.push_str(&format!("<!-- generated at unix time {t} -->\n"));
        }
        let text = match body.find('\n') {
            Some(i) => format!("{}{note}{}", &body[..=i], &body[i + 1..]),
            None => format!("{body}\n{note}"),
        };
        self.write(name, text.as_bytes())
    }

    /// The JSON report envelope; written last so it can list every artifact.
    pub fn report(&mut self, name: &str, result: Value, warnings: Vec<String>) -> Result<Value, CliError> {
        self.artifacts.push(name.to_string());
        let env = json!({
            "schema_version": SCHEMA_VERSION,
            "subcommand": self.provenance.subcommand,
            "provenance": self.provenance,
            "artifacts": self.artifacts,
            "result": result,
            "warnings": warnings,
        });
        let text = eigenstrain::io::to_json_string(&env);
        eigenstrain::io::write_file(&self.dir.join(name), text.as_bytes()).map_err(CliError::Lib)?;
        Ok(env)
    }
}
