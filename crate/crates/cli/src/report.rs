//! Self-describing output of `hdcp detect`.

use hdcp::engine::SeparationRule;
use hdcp::{SegmentRecord, TestOutcome};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub tool: String,
    pub version: String,
    pub input: InputDigest,
    pub settings: Settings,
    pub dependence: DependenceChoice,
    pub global_test: TestOutcome,
    /// Location of the maximum of `L_t` over the whole series.
    pub argmax: usize,
    pub change_points: Vec<usize>,
    pub segments: Vec<SegmentRecord>,
    /// `L_t` for `t = 1..n-1`.
    pub statistic_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub n: usize,
    pub p: usize,
    pub delimiter: String,
    pub header: Option<Vec<String>>,
}

/// Every tunable that influenced the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub alpha: f64,
    pub fwer: bool,
    /// Level actually applied to each segment during segmentation.
    pub segment_level: f64,
    pub min_segment_len: usize,
    /// `auto` or the fixed order requested.
    pub m_requested: String,
    pub drop_ratio: f64,
    pub h_max: Option<usize>,
    pub separation: SeparationRule,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMethod {
    Fixed,
    Elbow,
    /// The elbow could not be computed and `M = 0` was used instead.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceChoice {
    pub m_used: usize,
    pub method: OrderMethod,
    /// Estimated lag energies `w(0..=h_max)` when the elbow method ran.
    pub curve: Option<Vec<f64>>,
    pub saturated: bool,
}
