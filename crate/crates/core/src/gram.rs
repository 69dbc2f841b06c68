//! Inner-product summary of a series. Every statistic in the crate is a
//! function of these two `n x n` matrices.

use rayon::prelude::*;

use crate::model::SeriesMatrix;
use crate::numeric::{compensated_sum, dot};

/// Dense square matrix with 2-D prefix sums for O(1) block sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixMatrix {
    n: usize,
    data: Vec<f64>,
    /// `(n + 1)^2` table; `prefix[a][b]` sums rows `< a`, columns `< b`.
    prefix: Vec<f64>,
}

impl PrefixMatrix {
    fn new(n: usize, data: Vec<f64>) -> Self {
        let w = n + 1;
        let mut prefix = vec![0.0; w * w];
        for i in 0..n {
            let mut row_acc = 0.0;
            for j in 0..n {
                row_acc += data[i * n + j];
                prefix[(i + 1) * w + j + 1] = prefix[i * w + j + 1] + row_acc;
            }
        }
        Self { n, data, prefix }
    }

    /// Entry at 0-based `(i, j)`.
    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sum over 0-based rows `r0..r1` and columns `c0..c1` (half-open).
    #[inline]
    pub(crate) fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        if r0 >= r1 || c0 >= c1 {
            return 0.0;
        }
        let w = self.n + 1;
        self.prefix[r1 * w + c1] - self.prefix[r0 * w + c1] - self.prefix[r1 * w + c0]
            + self.prefix[r0 * w + c0]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry at 1-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.at(i - 1, j - 1)
    }

    /// Sum over the 1-based inclusive block `[r_lo, r_hi] x [c_lo, c_hi]`.
    pub fn block_sum(&self, r_lo: usize, r_hi: usize, c_lo: usize, c_hi: usize) -> f64 {
        self.block(r_lo - 1, r_hi, c_lo - 1, c_hi)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.block(i - 1, i, 0, self.n)
    }

    pub fn total(&self) -> f64 {
        self.block(0, self.n, 0, self.n)
    }
}

/// Raw inner products `X_i^T X_j` and centered ones `(X_i - X̄)^T (X_j - X̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSummary {
    raw: PrefixMatrix,
    centered: PrefixMatrix,
}

impl GramSummary {
    pub fn n(&self) -> usize {
        self.raw.n
    }

    pub fn raw(&self) -> &PrefixMatrix {
        &self.raw
    }

    pub fn centered(&self) -> &PrefixMatrix {
        &self.centered
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (1..=self.n()).map(|i| self.raw.row_sum(i)).collect()
    }

    pub fn total_sum(&self) -> f64 {
        self.raw.total()
    }
}

fn gram_of_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| dot(&rows[i], &rows[j])).collect())
        .collect();
    let mut out = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + k;
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// Builds both Gram matrices. The centered one is computed from explicitly
/// centered rows rather than derived from the raw matrix, which avoids
/// cancellation when the series mean is large.
pub fn compute_gram(series: &SeriesMatrix) -> GramSummary {
    let n = series.n();
    let p = series.p();
    let x = series.values();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let means: Vec<f64> =
        (0..p).map(|j| compensated_sum(x.column(j).iter().copied()) / n as f64).collect();
    let centered_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect();
    GramSummary {
        raw: PrefixMatrix::new(n, gram_of_rows(&rows)),
        centered: PrefixMatrix::new(n, gram_of_rows(&centered_rows)),
    }
}
