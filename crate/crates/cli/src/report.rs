//! The JSON report. `report.schema.json` next to the crate manifest
//! describes the same shape.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub file: String,
    pub methods: Vec<MethodReport>,
    /// Parse and analysis errors, with spans.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub pre: String,
    pub post: String,
    pub loops: Vec<LoopJson>,
    pub timings_ms: f64,
    pub unsatisfiable: bool,
    /// Maximum bodies whose non-negativity was not established.
    pub unverified: Vec<String>,
    pub extensions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopJson {
    pub span: String,
    pub invariant_used: String,
    pub under_invariant_used: String,
    pub exhale_free: bool,
    pub counter_added: bool,
    pub soundness: SoundnessJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessJson {
    pub mode: String,
    pub detail: String,
}

/// All file reports of a run as a JSON array.
pub fn to_json(reports: &[FileReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}
