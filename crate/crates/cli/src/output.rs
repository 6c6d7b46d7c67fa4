//! Output emission: CSV (12 significant digits, locale-free), JSON
//! ({config, data, diagnostics}) and SVG, to a file or stdout.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::{Format, Resolved};
use crate::CliError;

/// One command's renderable result.
pub struct Artifact {
    pub csv: String,
    pub svg: String,
    pub data: Value,
    pub diagnostics: Value,
}

/// 12 significant digits, scientific, locale-independent.
pub fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Quote a CSV field if it contains a delimiter, quote or newline.
pub fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn emit(resolved: &Resolved, artifact: Artifact) -> Result<(), CliError> {
    let payload = match resolved.format {
        Format::Csv => artifact.csv,
        Format::Svg => artifact.svg,
        Format::Json => {
            let doc = json!({
                "config": resolved,
                "data": artifact.data,
                "diagnostics": artifact.diagnostics,
            });
            let mut text = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Config(format!("json serialization: {e}")))?;
            text.push('\n');
            text
        }
    };
    match &resolved.out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(payload.as_bytes())?;
        }
    }
    Ok(())
}
