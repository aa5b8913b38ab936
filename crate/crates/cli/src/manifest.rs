use serde::{Deserialize, Serialize};

/// Record of what produced a run's outputs: the command line, a digest of
/// the config file (when one was read), the seed, and the tool version.
/// Identical manifests imply identical outputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config_digest: Option<String>,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &[String], seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_vec(),
            config_digest: None,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn record_config(&mut self, bytes: &[u8]) {
        self.config_digest = Some(chainbench_core::crypto::sha256d(bytes).to_hex());
    }

    pub fn record_output(&mut self, path: &std::path::Path) {
        self.outputs.push(path.display().to_string());
    }
}
