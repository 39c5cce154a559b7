//! Machine-readable JSON reports shared by every CLI subcommand.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub seed: u64,
    pub payload: serde_json::Value,
    pub checks: Vec<Check>,
    pub elapsed_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads_env: Option<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl From<&crate::spaces::CheckEntry> for Check {
    fn from(e: &crate::spaces::CheckEntry) -> Self {
        Check {
            name: e.name.clone(),
            pass: e.pass,
            witness: e.witness.clone(),
        }
    }
}
