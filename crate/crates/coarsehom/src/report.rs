//! Report envelope with a versioned schema tag.
//!
//! Reports hold the config echo, the payload, and deterministic solver
//! counters. Wall-clock timings never enter a report: two runs with the
//! same config and seed must serialize to identical bytes, so timing goes
//! to the log stream instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current report schema. Readers reject anything else.
pub const SCHEMA_VERSION: &str = "coarsehom.report.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub seed: u64,
    /// Echo of the resolved run configuration.
    pub config: serde_json::Value,
    pub payload: serde_json::Value,
    /// Deterministic counters (evaluations, solver runs, mesh sizes).
    pub diagnostics: BTreeMap<String, u64>,
}

impl Report {
    pub fn new<C: Serialize, P: Serialize>(
        command: &str,
        seed: u64,
        config: &C,
        payload: &P,
    ) -> Result<Report> {
        Ok(Report {
            schema: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config).map_err(|e| Error::InvalidSpec(e.to_string()))?,
            payload: serde_json::to_value(payload)
                .map_err(|e| Error::InvalidSpec(e.to_string()))?,
            diagnostics: BTreeMap::new(),
        })
    }

    pub fn with_diagnostic(mut self, key: &str, value: u64) -> Report {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    /// Serializes to pretty JSON with a trailing newline; field order is
    /// fixed by the struct, map order by the sorted keys, so bytes are
    /// reproducible.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out =
            serde_json::to_vec_pretty(self).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    /// Parses a report, rejecting unknown schema versions outright.
    pub fn from_slice(bytes: &[u8]) -> Result<Report> {
        let value: serde_json::Value = serde_json::from_slice(bytes)
            .map_err(|e| Error::InvalidSpec(format!("malformed report: {e}")))?;
        let schema = value
            .get("schema")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::InvalidSpec("report has no schema tag".into()))?;
        if schema != SCHEMA_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported report schema {schema:?}; this build reads {SCHEMA_VERSION:?}"
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let report = Report::new("decide", 0, &serde_json::json!({"reach": 1}), &[1, 2, 3])
            .unwrap()
            .with_diagnostic("maxflow_runs", 42);
        let bytes = report.to_bytes().unwrap();
        let back = Report::from_slice(&bytes).unwrap();
        assert_eq!(report, back);
        assert_eq!(bytes, back.to_bytes().unwrap());
    }

    #[test]
    fn old_schemas_are_rejected() {
        let mut report = Report::new("decide", 0, &(), &()).unwrap();
        report.schema = "coarsehom.report.v0".into();
        let bytes = report.to_bytes().unwrap();
        let err = Report::from_slice(&bytes).unwrap_err();
        assert!(err.to_string().contains("unsupported report schema"));
    }
}
