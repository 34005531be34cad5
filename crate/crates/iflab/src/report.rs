//! Run reports: canonical config digests, JSON documents, CSV tables.
//!
//! Reports are deterministic: identical inputs produce byte-identical
//! files. Wall-clock timing is therefore omitted unless explicitly set,
//! and the config digest hashes the parsed JSON value (whose object keys
//! serialize sorted), so whitespace and key order never change identity.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// The machine-readable outcome of one subcommand run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    /// Subcommand that produced the report.
    pub command: String,
    /// Canonical digest of the input configuration.
    pub config_digest: String,
    /// Wall-clock milliseconds; `None` (and omitted) by default so that
    /// identical runs emit byte-identical files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    /// Non-fatal notes: ignored flags, skipped levels, and the like.
    pub warnings: Vec<String>,
    /// Subcommand-specific payload.
    pub results: Value,
}

impl RunReport {
    /// Assembles a report over the raw config text.
    pub fn new(
        command: &str,
        config_text: &str,
        warnings: Vec<String>,
        results: Value,
    ) -> Result<RunReport, serde_json::Error> {
        Ok(RunReport {
            command: command.to_string(),
            config_digest: config_digest(config_text)?,
            timing_ms: None,
            warnings,
            results,
        })
    }

    /// Pretty JSON document, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Digest of a configuration document: sha256 over the compact rendering
/// of the reparsed JSON value. Object keys serialize in sorted order, so
/// reformatting or reordering the document leaves the digest unchanged.
pub fn config_digest(text: &str) -> Result<String, serde_json::Error> {
    let value: Value = serde_json::from_str(text)?;
    let canonical = serde_json::to_string(&value)?;
    let hash = Sha256::digest(canonical.as_bytes());
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

/// A CSV table with a fixed column count: header row, `.` decimals,
/// `\n` line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    body: String,
}

impl Csv {
    /// Starts a table with the given header row.
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            columns: header.len(),
            body: format!("{}\n", header.join(",")),
        }
    }

    /// Appends one row; the cell count must match the header.
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "csv row arity");
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    /// The finished document.
    pub fn finish(self) -> String {
        self.body
    }
}

/// Renders a float for CSV cells and JSON-adjacent text: shortest
/// round-trip form, always with a `.` decimal separator.
pub fn cell(x: f64) -> String {
    format!("{x}")
}
