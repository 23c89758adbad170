use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Provenance block embedded in every report.
///
/// `wall_time` is only filled in when timing is requested, so that reruns
/// with the same arguments produce byte-identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time: Option<f64>,
    pub artifact_paths: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            wall_time: None,
            artifact_paths: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifact_paths.push(path.display().to_string());
    }
}
