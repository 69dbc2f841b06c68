//! Domain types shared across the crate.
//!
//! Time indices exposed by this crate are 1-based: observation `X_1` is row 0
//! of the underlying matrix, and a split point `t` separates `X_1..X_t` from
//! `X_{t+1}..X_n`. Conversion to 0-based offsets happens only inside kernels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` time-ordered observations of dimension `p`; row `i - 1` holds `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    values: DMatrix<f64>,
}

impl SeriesMatrix {
    /// Wraps an `n x p` matrix, rejecting non-finite entries.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::InvalidConfig("series must have p >= 1 coordinates".into()));
        }
        // column-major storage, so the first hit is the earliest coordinate scan
        for (col, column) in values.column_iter().enumerate() {
            if let Some(row) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry { time: row + 1, coord: col + 1 });
            }
        }
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidConfig("rows have unequal lengths".into()));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Observation `X_i` for 1-based `i`.
    pub fn observation(&self, i: usize) -> Vec<f64> {
        self.values.row(i - 1).iter().copied().collect()
    }

    /// Rows `lo..=hi` (1-based, inclusive) as a new series.
    pub fn segment(&self, seg: Segment) -> SeriesMatrix {
        let rows = seg.len();
        SeriesMatrix { values: self.values.rows(seg.lo - 1, rows).into_owned() }
    }

    /// Time-reversed copy: row `i` becomes row `n + 1 - i`.
    pub fn reversed(&self) -> SeriesMatrix {
        let n = self.n();
        SeriesMatrix { values: DMatrix::from_fn(n, self.p(), |i, j| self.values[(n - 1 - i, j)]) }
    }
}

/// Lag-truncation order `M` and the lag set `{0, ±1, ..., ±M}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceWindow {
    m: usize,
}

impl DependenceWindow {
    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Lags `-M..=M` in increasing order.
    pub fn lags(&self) -> impl Iterator<Item = i64> + Clone {
        let m = self.m as i64;
        -m..=m
    }

    /// Smallest series length the window can be paired with: `2(M + 2)`.
    pub fn min_series_len(&self) -> usize {
        2 * (self.m + 2)
    }
}

/// Inclusive 1-based time range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
}

impl Segment {
    pub fn new(lo: usize, hi: usize) -> Self {
        debug_assert!(1 <= lo && lo <= hi);
        Self { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Result of one normal-calibrated test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub variance: f64,
    pub zscore: f64,
    pub pvalue: f64,
    pub reject: bool,
    /// Set when the variance estimate fell below the floor and was clamped.
    pub degenerate: bool,
}

/// How a segment was handled during binary segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SegmentStatus {
    Tested {
        outcome: TestOutcome,
        /// Segment-local argmax of `L_t` mapped to a global time index.
        argmax: usize,
    },
    /// Shorter than the minimum segment length; never tested.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment: Segment,
    #[serde(flatten)]
    pub status: SegmentStatus,
}

/// Estimated change points and the per-segment record of how they were found.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSet {
    pub points: Vec<usize>,
    pub trace: Vec<SegmentRecord>,
}

/// Checks the series against the window: `n >= 2(M + 2)`. Entry finiteness is
/// already guaranteed by [`SeriesMatrix::new`].
pub fn validate_input<'a>(
    series: &'a SeriesMatrix,
    window: &DependenceWindow,
) -> Result<(&'a SeriesMatrix, DependenceWindow)> {
    let required = window.min_series_len().max(4);
    if series.n() < required {
        return Err(Error::DimensionTooSmall { n: series.n(), m: window.m(), required });
    }
    Ok((series, *window))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(n: usize, p: usize) -> SeriesMatrix {
        SeriesMatrix::new(DMatrix::zeros(n, p)).unwrap()
    }

    #[test]
    fn accepts_wide_series() {
        let s = zeros(100, 200);
        assert!(validate_input(&s, &DependenceWindow::new(0)).is_ok());
    }

    #[test]
    fn rejects_short_series_for_window() {
        let s = zeros(6, 3);
        let err = validate_input(&s, &DependenceWindow::new(2)).unwrap_err();
        assert_eq!(err, Error::DimensionTooSmall { n: 6, m: 2, required: 8 });
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DMatrix::zeros(5, 2);
        m[(3, 1)] = f64::NAN;
        assert_eq!(SeriesMatrix::new(m).unwrap_err(), Error::NonFiniteEntry { time: 4, coord: 2 });
        let mut m = DMatrix::zeros(5, 2);
        m[(0, 0)] = f64::INFINITY;
        assert!(matches!(SeriesMatrix::new(m), Err(Error::NonFiniteEntry { .. })));
    }

    #[test]
    fn validation_is_idempotent() {
        let s = zeros(10, 2);
        let w = DependenceWindow::new(1);
        let (s1, w1) = validate_input(&s, &w).unwrap();
        let (s2, w2) = validate_input(s1, &w1).unwrap();
        assert_eq!(s2, &s);
        assert_eq!(w2, w);
    }

    #[test]
    fn segment_and_reverse() {
        let s = SeriesMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(s.segment(Segment::new(2, 3)).values().as_slice(), &[2.0, 3.0]);
        assert_eq!(s.reversed().values().as_slice(), &[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(DependenceWindow::new(2).lags().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
    }
}
