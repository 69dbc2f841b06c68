//! Tests, single change point estimation and binary segmentation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::{
    build_trace_table_with, ContrastMatrix, DependenceDesign, SeparationRule, TraceEstimator,
    VarianceEstimate,
};
use crate::error::{Error, Result};
use crate::gram::{compute_gram, GramSummary};
use crate::model::{
    validate_input, ChangePointSet, DependenceWindow, Segment, SegmentRecord, SegmentStatus,
    SeriesMatrix, TestOutcome,
};
use crate::numeric::compensated_sum;

/// Test levels and segmentation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Level of the global test.
    pub alpha: f64,
    /// Per-segment level during segmentation; `None` reuses `alpha`.
    pub alpha_seg: Option<f64>,
    /// Segments shorter than this are never tested; `None` picks
    /// [`default_min_segment_len`].
    pub min_segment_len: Option<usize>,
    /// Use `1 / (n log n)` as the per-segment level.
    pub fwer_mode: bool,
    pub separation: SeparationRule,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { alpha: 0.05, alpha_seg: None, min_segment_len: None, fwer_mode: false, separation: SeparationRule::default() }
    }
}

/// Smallest length on which every estimator term has admissible tuples:
/// four indices pairwise more than `M` apart need `3M + 4` time points.
pub fn default_min_segment_len(window: DependenceWindow) -> usize {
    let m = window.m();
    (2 * (m + 2)).max(3 * m + 4).max(4)
}

impl InferenceConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn validate(&self, window: DependenceWindow) -> Result<()> {
        let level_ok = |a: f64| a > 0.0 && a < 1.0;
        if !level_ok(self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1); got {}", self.alpha)));
        }
        if let Some(a) = self.alpha_seg {
            if !level_ok(a) {
                return Err(Error::InvalidConfig(format!("alpha_seg must lie in (0, 1); got {a}")));
            }
        }
        let floor = default_min_segment_len(window);
        if let Some(len) = self.min_segment_len {
            if len < floor {
                return Err(Error::InvalidConfig(format!(
                    "min_segment_len {len} is below {floor}, the shortest analyzable length for M = {}",
                    window.m()
                )));
            }
        }
        Ok(())
    }

    pub fn min_segment_len(&self, window: DependenceWindow) -> usize {
        self.min_segment_len.unwrap_or_else(|| default_min_segment_len(window))
    }

    /// Level applied to each segment of a length-`n` series.
    pub fn segment_level(&self, n: usize) -> f64 {
        if self.fwer_mode {
            let nf = n as f64;
            return 1.0 / (nf * nf.ln());
        }
        self.alpha_seg.unwrap_or(self.alpha)
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Upper-`alpha` standard normal quantile.
pub fn upper_quantile(alpha: f64) -> f64 {
    standard_normal().inverse_cdf(1.0 - alpha)
}

fn outcome(statistic: f64, variance: VarianceEstimate, alpha: f64) -> TestOutcome {
    let zscore = statistic / variance.value.sqrt();
    let pvalue = standard_normal().cdf(-zscore);
    TestOutcome {
        statistic,
        variance: variance.value,
        zscore,
        pvalue,
        reject: !variance.degenerate && zscore > upper_quantile(alpha),
        degenerate: variance.degenerate,
    }
}

/// Everything computed for one stretch of data: the `L_t` trace and the
/// machinery needed to calibrate it.
pub struct Analysis {
    gram: GramSummary,
    design: DependenceDesign,
    window: DependenceWindow,
    separation: SeparationRule,
    /// `L_t` for `t = 1..n-1`.
    pub trace: Vec<f64>,
}

impl Analysis {
    pub fn new(series: &SeriesMatrix, window: DependenceWindow, separation: SeparationRule) -> Result<Self> {
        validate_input(series, &window)?;
        let gram = compute_gram(series);
        let design = DependenceDesign::new(series.n(), window)?;
        let trace = crate::engine::statistic_trace(&gram, &design)?;
        Ok(Self { gram, design, window, separation, trace })
    }

    pub fn n(&self) -> usize {
        self.gram.n()
    }

    pub fn gram(&self) -> &GramSummary {
        &self.gram
    }

    /// `sum_t L_t`.
    pub fn aggregate(&self) -> f64 {
        compensated_sum(self.trace.iter().copied())
    }

    /// Smallest `t` attaining the maximum of `L_t`.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.trace.iter().enumerate() {
            if v > self.trace[best] {
                best = i;
            }
        }
        best + 1
    }

    fn null_variance(&self, b: &ContrastMatrix) -> Result<VarianceEstimate> {
        let estimator = TraceEstimator::new(&self.gram, self.window.m(), self.separation);
        let table = build_trace_table_with(&estimator, self.window)?;
        Ok(crate::engine::variance_estimate(b, &table, self.window))
    }

    pub fn test_aggregate(&self, alpha: f64) -> Result<TestOutcome> {
        let b = ContrastMatrix::aggregate(&self.design)?;
        Ok(outcome(self.aggregate(), self.null_variance(&b)?, alpha))
    }

    pub fn test_split(&self, t: usize, alpha: f64) -> Result<TestOutcome> {
        let b = ContrastMatrix::single(&self.design, t)?;
        Ok(outcome(self.trace[t - 1], self.null_variance(&b)?, alpha))
    }
}

/// Aggregated test: rejects when `sum_t L_t / s` exceeds the upper-`alpha`
/// normal quantile.
pub fn test_global(series: &SeriesMatrix, window: DependenceWindow, cfg: &InferenceConfig) -> Result<TestOutcome> {
    cfg.validate(window)?;
    Analysis::new(series, window, cfg.separation)?.test_aggregate(cfg.alpha)
}

/// Test at a fixed split point `t` using `L_t / s_t`.
pub fn test_at(series: &SeriesMatrix, t: usize, window: DependenceWindow, cfg: &InferenceConfig) -> Result<TestOutcome> {
    cfg.validate(window)?;
    if t == 0 || t >= series.n() {
        return Err(Error::IndexOutOfRange { t, max: series.n().saturating_sub(1) });
    }
    Analysis::new(series, window, cfg.separation)?.test_split(t, cfg.alpha)
}

/// Location of the maximum of `L_t`, ties to the smallest `t`.
pub fn estimate_single(series: &SeriesMatrix, window: DependenceWindow) -> Result<usize> {
    Ok(Analysis::new(series, window, SeparationRule::default())?.argmax())
}

/// Recursive test-and-split. Every segment is analysed on its own data
/// (own Gram, own centering, own variance estimate).
pub fn binary_segmentation(
    series: &SeriesMatrix,
    window: DependenceWindow,
    cfg: &InferenceConfig,
) -> Result<ChangePointSet> {
    cfg.validate(window)?;
    validate_input(series, &window)?;
    let min_len = cfg.min_segment_len(window);
    let level = cfg.segment_level(series.n());
    let mut queue = VecDeque::from([Segment::new(1, series.n())]);
    let mut result = ChangePointSet::default();
    while let Some(seg) = queue.pop_front() {
        if seg.len() < min_len {
            result.trace.push(SegmentRecord { segment: seg, status: SegmentStatus::Skipped });
            continue;
        }
        let analysis = Analysis::new(&series.segment(seg), window, cfg.separation)?;
        let outcome = analysis.test_aggregate(level)?;
        let argmax = seg.lo - 1 + analysis.argmax();
        result.trace.push(SegmentRecord { segment: seg, status: SegmentStatus::Tested { outcome, argmax } });
        if outcome.reject {
            result.points.push(argmax);
            queue.push_back(Segment::new(seg.lo, argmax));
            queue.push_back(Segment::new(argmax + 1, seg.hi));
        }
    }
    result.points.sort_unstable();
    result.trace.sort_by_key(|r| r.segment);
    Ok(result)
}

/// Outcome of matching estimated change points to the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_positives: usize,
}

/// One-to-one matching within `tolerance`, closest pairs first (ties by
/// smaller estimate, then smaller true point).
pub fn classify_errors(estimated: &[usize], truth: &[usize], tolerance: usize) -> ErrorCounts {
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (ei, &e) in estimated.iter().enumerate() {
        for (ti, &t) in truth.iter().enumerate() {
            let d = e.abs_diff(t);
            if d <= tolerance {
                pairs.push((d, ei, ti));
            }
        }
    }
    pairs.sort_unstable();
    let mut used_e = vec![false; estimated.len()];
    let mut used_t = vec![false; truth.len()];
    let mut tp = 0;
    for (_, ei, ti) in pairs {
        if !used_e[ei] && !used_t[ti] {
            used_e[ei] = true;
            used_t[ti] = true;
            tp += 1;
        }
    }
    ErrorCounts { false_positives: estimated.len() - tp, false_negatives: truth.len() - tp, true_positives: tp }
}
