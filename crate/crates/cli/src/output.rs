//! Output files with provenance headers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CommonArgs, Source};
use crate::error::{CliError, CliResult};

/// Configuration fingerprint recorded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the command name and its serialized arguments, output directory excluded.
    pub config_hash: String,
    pub seed: u64,
    pub source: Source,
    pub backend: &'static str,
    pub pruning: bool,
    pub primal_tolerance: f64,
    pub optimality_tolerance: f64,
}

impl Provenance {
    pub fn new(
        command: &'static str,
        args: &impl Serialize,
        common: &CommonArgs,
        source: Source,
    ) -> CliResult<Self> {
        let config = serde_json::to_string(args).map_err(|e| CliError::Config(e.to_string()))?;
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0]);
        hasher.update(config.as_bytes());
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: format!("{:x}", hasher.finalize()),
            seed: common.seed,
            source,
            backend: match common.backend {
                crate::config::BackendChoice::Reference => "reference",
                crate::config::BackendChoice::External => "external",
            },
            pruning: common.pruning(),
            primal_tolerance: common.primal_tolerance,
            optimality_tolerance: common.optimality_tolerance,
        })
    }

    /// `# key: value` lines for CSV headers.
    pub fn comment_block(&self) -> String {
        let value = serde_json::to_value(self).expect("provenance serializes");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                out.push_str(&format!("# {k}: {v}\n"));
            }
        }
        out
    }
}

/// Destination directory for a command's files.
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// CSV preceded by the provenance comment block.
    pub fn write_csv<R: Serialize>(
        &self,
        name: &str,
        provenance: &Provenance,
        rows: &[R],
    ) -> CliResult<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let body = w
            .into_inner()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let text =
            provenance.comment_block() + &String::from_utf8(body).expect("csv output is UTF-8");
        self.write_text(name, &text)
    }

    /// `{"provenance": ..., "result": ...}`.
    pub fn write_json<T: Serialize>(
        &self,
        name: &str,
        provenance: &Provenance,
        result: &T,
    ) -> CliResult<PathBuf> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            provenance: &'a Provenance,
            result: &'a T,
        }
        let text = serde_json::to_string_pretty(&Envelope { provenance, result })
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.write_text(name, &(text + "\n"))
    }
}
