use nalgebra::{DMatrix, DVector, LU, Dyn};

use crate::error::{Error, Result};
use crate::model::DependenceWindow;

/// Condition numbers above this are treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Boundary weight vector `f_t` of length `M + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryWeights {
    pub f: Vec<f64>,
}

/// Evaluates `f_t` for split point `t` in a series of length `n`.
///
/// `f_t(1) = 1`; for lag `k = i - 1 >= 1` the entry weighs how much lag-`k`
/// autocovariance leaks into the between-segment contrast.
pub fn f_vector(n: usize, t: usize, m: usize) -> Result<BoundaryWeights> {
    if t == 0 || t >= n {
        return Err(Error::IndexOutOfRange { t, max: n.saturating_sub(1) });
    }
    let nf = n as f64;
    let tf = t as f64;
    let rest = (n - t) as f64;
    let mut f = Vec::with_capacity(m + 1);
    f.push(1.0);
    for i in 2..=m + 1 {
        let left = if t + 1 > i { rest * (t + 1 - i) as f64 / (nf * tf) } else { 0.0 };
        let right = if n - t + 1 > i { tf * (n - t + 1 - i) as f64 / (nf * rest) } else { 0.0 };
        let straddle = (1..i).filter(|&l| t >= l && n - t >= i - l).count() as f64;
        f.push(2.0 * ((left + right) - straddle / nf));
    }
    Ok(BoundaryWeights { f })
}

/// `sum_{t=1}^{n-1} f_t`, used by the aggregated contrast.
pub fn f_vector_sum(n: usize, m: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; m + 1];
    for t in 1..n {
        for (a, v) in acc.iter_mut().zip(f_vector(n, t, m)?.f) {
            *a += v;
        }
    }
    Ok(acc)
}

/// The `(M + 1) x (M + 1)` matrix linking `E(V)` to lag traces, kept in
/// factorized form.
#[derive(Debug, Clone)]
pub struct DependenceDesign {
    n: usize,
    m: usize,
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
}

/// `#{b in 1..=n : |x - b| = d}` for `x` in `1..=n`.
fn at_distance(n: usize, x: usize, d: usize) -> usize {
    if d == 0 {
        return 1;
    }
    usize::from(x > d) + usize::from(x + d <= n)
}

impl DependenceDesign {
    pub fn new(n: usize, window: DependenceWindow) -> Result<Self> {
        let m = window.m();
        if n < window.min_series_len() {
            return Err(Error::DimensionTooSmall { n, m, required: window.min_series_len() });
        }
        let nf = n as f64;
        let matrix = DMatrix::from_fn(m + 1, m + 1, |r, c| {
            let (i, j) = (r + 1, c + 1);
            let wi = 1.0 - (i - 1) as f64 / nf;
            let wj = 1.0 - (j - 1) as f64 / nf;
            let diag = if i == j { wi } else { 0.0 };
            let ends = wi * wj * (2.0 - if j == 1 { 1.0 } else { 0.0 }) / nf;
            let d = j - 1;
            let pairs: usize = (1..=n - i + 1)
                .map(|a| at_distance(n, a, d) + at_distance(n, a + i - 1, d))
                .sum();
            diag + (ends - pairs as f64 / (nf * nf))
        });
        let sv = matrix.clone().singular_values();
        let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularDesign { n, m, condition });
        }
        let lu = matrix.clone().lu();
        let lu_t = matrix.transpose().lu();
        Ok(Self { n, m, matrix, lu, lu_t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `F^{-1} v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let x = self.lu.solve(&DVector::from_column_slice(v)).expect("design checked non-singular");
        x.iter().copied().collect()
    }

    /// `(f^T F^{-1})^T = F^{-T} f`.
    pub fn solve_transposed(&self, f: &[f64]) -> Vec<f64> {
        let x = self.lu_t.solve(&DVector::from_column_slice(f)).expect("design checked non-singular");
        x.iter().copied().collect()
    }
}
