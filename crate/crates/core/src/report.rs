//! Machine-readable run reports.
//!
//! Every CLI invocation emits one JSON report with a stable schema: common
//! header fields, the fully resolved configuration as flat key-value
//! strings, and at most one command-specific payload section. Consumers
//! should dispatch on `command` and ignore unknown fields.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SubspaceReport;
use crate::error::{Error, Result};
use crate::factor::{GaussianFactorization, GeneralFactorization};
use crate::learner::{EvalReport, LearnOutcome};

/// Current report schema. Bump only on breaking shape changes.
pub const SCHEMA_VERSION: &str = "1";

/// Learning payload without the (separately stored) model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnSummary {
    pub holdout: EvalReport,
    pub b1: usize,
    pub b2: usize,
    pub padded: usize,
}

impl From<&LearnOutcome> for LearnSummary {
    fn from(o: &LearnOutcome) -> Self {
        LearnSummary {
            holdout: o.holdout.clone(),
            b1: o.b1,
            b2: o.b2,
            padded: o.padded,
        }
    }
}

/// Payload of a data generation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSummary {
    pub rows: usize,
    pub cols: usize,
    pub labeled: bool,
    pub output: String,
}

/// Payload of a whitening run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitenSummary {
    pub rows: usize,
    pub cols: usize,
    pub eigenvalues: Vec<f64>,
    pub output: String,
}

/// One timed pipeline stage of a bench run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchEntry {
    pub instance: String,
    pub stage: String,
    pub rows: usize,
    pub cols: usize,
    pub elapsed_ms: u64,
    pub detail: String,
}

/// Top-level report written by every command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub elapsed_ms: u64,
    /// Every setting the run actually used, flattened to strings.
    pub resolved_config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_gaussian: Option<GaussianFactorization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_general: Option<GeneralFactorization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learn: Option<LearnSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub whiten: Option<WhitenSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<Vec<BenchEntry>>,
    /// Alignment against ground truth, when truth was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceReport>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, resolved_config: BTreeMap<String, String>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            seed,
            elapsed_ms: 0,
            resolved_config,
            factor_gaussian: None,
            factor_general: None,
            learn: None,
            eval: None,
            gen: None,
            whiten: None,
            bench: None,
            subspace: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Other(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_roundtrips_and_omits_empty_sections() {
        let mut cfg = BTreeMap::new();
        cfg.insert("m_max".to_string(), "6".to_string());
        let mut r = RunReport::new("factor", 42, cfg);
        r.elapsed_ms = 1234;
        let json = r.to_json().unwrap();
        assert!(json.contains("\"schema_version\": \"1\""));
        assert!(!json.contains("factor_gaussian"));
        assert!(!json.contains("bench"));
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.command, "factor");
        assert_eq!(back.seed, 42);
        assert_eq!(back.resolved_config["m_max"], "6");
    }
}
