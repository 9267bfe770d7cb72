//! Run manifests and the report document wrapped around every result.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{Command, Seeds};
use crate::error::{CliError, CliResult};
use crate::io::write_file;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seeds: Option<Seeds>,
    /// The full parameter set; replaying it reruns the command.
    pub params: Command,
    /// Seconds since the Unix epoch. Only the sidecar file carries it, so
    /// outputs stay byte-identical across replays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn new(params: &Command) -> Self {
        RunManifest {
            command: params.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: params.seeds().copied(),
            params: params.clone(),
            timestamp: None,
        }
    }

    pub fn stamped(&self) -> Self {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            timestamp: Some(now),
            ..self.clone()
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{} is not a run manifest: {e}", path.display())))
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// `{ manifest, records, summary }`, pretty-printed with a trailing newline.
/// The embedded manifest omits the output path so the document does not
/// depend on where it is written.
pub fn report(manifest: &RunManifest, records: Vec<Value>, summary: Value) -> String {
    let mut embedded = serde_json::to_value(manifest).expect("manifest serializes");
    if let Some(params) = embedded.get_mut("params").and_then(Value::as_object_mut) {
        params.remove("output");
    }
    let doc = serde_json::json!({
        "manifest": embedded,
        "records": records,
        "summary": summary,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

/// Writes the command's output and, next to it, its timestamped manifest.
pub fn write_with_manifest(output: &Path, contents: &str, manifest: &RunManifest) -> CliResult<()> {
    write_file(output, contents)?;
    let mut text = serde_json::to_string_pretty(&manifest.stamped()).expect("manifest serializes");
    text.push('\n');
    write_file(&manifest_path(output), &text)
}
