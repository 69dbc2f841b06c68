//! Choosing the dependence order `M` from the decay of the lag energies
//! `tr{C(h) C(h)^T}`.

use serde::{Deserialize, Serialize};

use crate::engine::{SeparationRule, TraceEstimator};
use crate::error::{Error, Result};
use crate::gram::compute_gram;
use crate::model::SeriesMatrix;

/// Default threshold of [`select_m`], relative to `w(0)`.
pub const DEFAULT_DROP_RATIO: f64 = 0.02;

/// A drop smaller than this fraction of the current level also counts as
/// flat.
pub const FLATNESS_RATIO: f64 = 0.2;

/// Estimated lag energies `w(h)` for `h = 0..=h_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagEnergyCurve {
    pub h_max: usize,
    pub w_hat: Vec<f64>,
}

/// `min(10, floor(sqrt(n)))`, further capped so that four indices pairwise
/// more than `h_max` apart still fit in the series.
pub fn default_h_max(n: usize) -> usize {
    let root = (n as f64).sqrt().floor() as usize;
    10.min(root).min(n.saturating_sub(4) / 3)
}

/// Estimates `w(h)` by the trace-product estimator at lags `(h, -h)` with
/// separation gap `h`.
pub fn lag_energy_curve(series: &SeriesMatrix, h_max: usize) -> Result<LagEnergyCurve> {
    lag_energy_curve_with(series, h_max, SeparationRule::default())
}

pub fn lag_energy_curve_with(series: &SeriesMatrix, h_max: usize, rule: SeparationRule) -> Result<LagEnergyCurve> {
    let required = 2 * (h_max + 2);
    if series.n() < required {
        return Err(Error::DimensionTooSmall { n: series.n(), m: h_max, required });
    }
    let gram = compute_gram(series);
    let w_hat = (0..=h_max)
        .map(|h| TraceEstimator::new(&gram, h, rule).estimate(h as i64, -(h as i64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LagEnergyCurve { h_max, w_hat })
}

/// Selected order and whether the curve never dropped below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSelection {
    pub m: usize,
    pub saturated: bool,
}

/// Elbow of the curve: the smallest `h` after which the curve has either
/// collapsed, `w(h + 1) < drop_ratio * w(0)`, or flattened, meaning the next
/// drop `w(h + 1) - w(h + 2)` is below `drop_ratio * w(0)` or below
/// [`FLATNESS_RATIO`]` * w(h + 1)`. The second condition keeps the choice
/// stable when mean changes lift the tail of the curve. Returns
/// `h_max` (flagged saturated) when neither happens.
pub fn select_m(curve: &LagEnergyCurve, drop_ratio: f64) -> Result<OrderSelection> {
    if !(drop_ratio > 0.0 && drop_ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("drop_ratio must lie in (0, 1); got {drop_ratio}")));
    }
    let w = &curve.w_hat;
    let base = w.first().copied().unwrap_or(0.0);
    if !(base > 0.0) {
        return Err(Error::NonPositiveBaseline(base));
    }
    let threshold = drop_ratio * base;
    let collapsed = |h: usize| w[h + 1] < threshold;
    let flattened =
        |h: usize| h + 2 <= curve.h_max && w[h + 1] - w[h + 2] < threshold.max(FLATNESS_RATIO * w[h + 1]);
    let m = (0..curve.h_max).find(|&h| collapsed(h) || flattened(h));
    Ok(match m {
        Some(m) => OrderSelection { m, saturated: false },
        None => OrderSelection { m: curve.h_max, saturated: true },
    })
}
