//! Run manifests and output emission.
//!
//! JSON documents embed their manifest; CSV stays bare so repeated runs are
//! byte-identical, and gets a `<file>.manifest.json` sidecar when written to
//! disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }
}

/// A finished command result: a JSON document and/or CSV text.
pub struct CmdOutput {
    pub json: Option<Value>,
    pub csv: Option<String>,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl CmdOutput {
    /// Writes the requested format to stdout and, when `out` is given, to a
    /// file as well (CSV files get a manifest sidecar).
    pub fn emit(mut self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        if let Some(Value::Object(map)) = self.json.as_mut() {
            map.insert("manifest".into(), json!(self.manifest));
        }
        let text = match format {
            Format::Json => {
                let doc = self
                    .json
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("this command has no JSON output".into()))?;
                let mut s = serde_json::to_string_pretty(doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| CliError::Usage("this command has no CSV output".into()))?,
        };
        print!("{text}");
        if let Some(path) = out {
            fs::write(path, &text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if format == Format::Csv {
                let sidecar = sidecar_path(path);
                let manifest = serde_json::to_string_pretty(&self.manifest)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                fs::write(&sidecar, manifest + "\n")
                    .map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
            }
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Scientific form without the fixed-width exponent: `1e-2`, `3e-3`, `1e-12`.
pub fn format_eps(eps: f64) -> String {
    format!("{eps:e}")
}

/// The comparison-table CSV: fixed 14 decimals for the parameter columns,
/// scientific for the (small) difference column.
pub fn comparison_csv(rows: &[foldcrest_core::ComparisonRow]) -> String {
    let mut out = String::from("eps,a_num,a_asym,diff\n");
    for row in rows {
        let a_num = row.a_num.map_or(String::new(), |v| format!("{v:.14}"));
        let diff = row.diff.map_or(String::new(), |v| format!("{v:.6e}"));
        out.push_str(&format!(
            "{},{},{:.14},{}\n",
            format_eps(row.eps),
            a_num,
            row.a_asym,
            diff
        ));
    }
    out
}
