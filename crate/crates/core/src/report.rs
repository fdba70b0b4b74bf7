//! Machine-readable command reports.
//!
//! Reports are plain serde structs, so JSON keys come out in declaration
//! order and identical inputs give byte-identical output.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::connection::SubfamilyTag;
use crate::metrizability::{LagrangianDescriptor, MetrizabilityReport};
use crate::verification::{OrderEstimate, VerifyReport};

pub const TOOL: &str = "finsler-metrize";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Decide,
    Verify,
    Integrate,
}

/// How the command ended; maps onto the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    /// A check ran and came out negative.
    Negative,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagReport {
    pub tag: SubfamilyTag,
    pub constraint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySection {
    pub lagrangian: LagrangianDescriptor,
    /// "decide", "decide-rejected" or "inline"
    pub source: String,
    /// c1 actually used for the connection, after any perturbation.
    pub c1: f64,
    pub result: VerifyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub index: usize,
    /// "autoparallel" or "geodesic"
    pub kind: String,
    pub x0: [f64; 4],
    pub v0: [f64; 4],
    pub states: usize,
    pub final_s: f64,
    pub final_x: [f64; 4],
    pub final_v: [f64; 4],
    pub truncated: Option<String>,
    pub csv: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateSection {
    pub step: f64,
    pub steps: usize,
    pub lagrangian: Option<LagrangianDescriptor>,
    pub trajectories: Vec<TrajectorySummary>,
    pub order: Option<OrderEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub subfamilies: Vec<TagReport>,
    pub decide: Option<MetrizabilityReport>,
    pub verify: Option<VerifySection>,
    pub integrate: Option<IntegrateSection>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
