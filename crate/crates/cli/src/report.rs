//! Machine-readable run reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub visible_chase_ms: f64,
    pub safety_check_ms: f64,
    pub repair_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct Counts {
    pub tgds_in: usize,
    pub tgds_out: usize,
    pub bags: usize,
    pub active_triggers: usize,
    pub unsafe_bags: usize,
    pub repairs_applied: usize,
}

/// One report per command run; see `docs/report.schema.json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub verdict: Option<String>,
    pub outputs: Value,
    pub timings: Timings,
    pub counts: Counts,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Vec<String>) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            verdict: None,
            outputs: Value::Null,
            timings: Timings::default(),
            counts: Counts::default(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
