use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{CliError, RunManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Where results go: stdout in the chosen format, plus artifact files and a
/// manifest under --out when given. Commands register a JSON result (always)
/// and optional text/csv renderings; the sink prints whichever matches the
/// requested format.
pub struct OutputSink {
    pub format: Format,
    out_dir: Option<PathBuf>,
    manifest: RunManifest,
    result: serde_json::Value,
    text: Vec<String>,
    csv: Option<String>,
}

impl OutputSink {
    pub fn new(
        format: Format,
        out_dir: Option<PathBuf>,
        seed: u64,
        command_line: &[String],
    ) -> Result<OutputSink, CliError> {
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(OutputSink {
            format,
            out_dir,
            manifest: RunManifest::new(command_line, seed),
            result: serde_json::Value::Null,
            text: Vec::new(),
            csv: None,
        })
    }

    /// Read a config file, folding its digest into the manifest.
    pub fn read_config(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
        self.manifest.record_config(&bytes);
        Ok(bytes)
    }

    pub fn set_result(&mut self, result: serde_json::Value) {
        self.result = result;
    }

    pub fn push_text(&mut self, line: String) {
        self.text.push(line);
    }

    pub fn set_csv(&mut self, csv: String) {
        self.csv = Some(csv);
    }

    /// Write an artifact under --out (no-op without --out). Returns whether
    /// it was written.
    pub fn write_artifact(&mut self, name: &str, bytes: &[u8]) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.out_dir else {
            return Ok(None);
        };
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        self.manifest.record_output(&path);
        Ok(Some(path))
    }

    /// Print the result and, under --out, persist the manifest.
    pub fn finish(mut self) -> Result<(), CliError> {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        match self.format {
            Format::Json => {
                let envelope = serde_json::json!({
                    "manifest": &self.manifest,
                    "result": &self.result,
                });
                writeln!(lock, "{}", serde_json::to_string_pretty(&envelope)?)?;
            }
            Format::Text => {
                if self.text.is_empty() {
                    writeln!(lock, "{}", serde_json::to_string_pretty(&self.result)?)?;
                } else {
                    for line in &self.text {
                        writeln!(lock, "{line}")?;
                    }
                }
            }
            Format::Csv => match &self.csv {
                Some(csv) => write!(lock, "{csv}")?,
                None => writeln!(lock, "{}", serde_json::to_string_pretty(&self.result)?)?,
            },
        }
        if self.out_dir.is_some() {
            let manifest_bytes = serde_json::to_vec_pretty(&self.manifest)?;
            // The manifest lists everything written before it.
            self.write_artifact("manifest.json", &manifest_bytes)?;
        }
        Ok(())
    }
}
