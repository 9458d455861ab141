//! Check results and the versioned report format.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const REPORT_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Inconclusive,
    Violation,
}

impl Status {
    /// The worse of two statuses.
    pub fn join(self, other: Status) -> Status {
        self.max(other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub params: Value,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    /// Counters and other non-witness output.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub stats: Value,
    /// Wall-clock time; left out unless timings are requested, since it
    /// would break byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl Check {
    pub fn new(name: impl Into<String>, params: Value) -> Check {
        Check { name: name.into(), params, status: Status::Ok, witness: None, stats: Value::Null, runtime_ms: None }
    }

    /// Record a violation. The first witness is kept.
    pub fn violation(&mut self, witness: Value) {
        self.status = Status::Violation;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }

    pub fn inconclusive(&mut self) {
        self.status = self.status.join(Status::Inconclusive);
    }

    pub fn with_stats(mut self, stats: Value) -> Check {
        self.stats = stats;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(seed: u64, mut checks: Vec<Check>) -> Report {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Report { version: REPORT_VERSION.to_string(), seed, checks }
    }

    pub fn status(&self) -> Status {
        self.checks.iter().fold(Status::Ok, |s, c| s.join(c.status))
    }

    /// 0 all ok, 1 any violation, 2 inconclusive only.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
