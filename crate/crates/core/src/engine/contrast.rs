use crate::engine::design::{f_vector, f_vector_sum, DependenceDesign};
use crate::error::{Error, Result};
use crate::model::DependenceWindow;

/// An `n x n` contrast matrix `B` with `L = n^{-2} sum_{i,j} B(i,j) X_i^T X_j`.
/// Lookups outside `[1, n]^2` return 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ContrastMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 1-based `(i, j)`, zero when either index leaves `[1, n]`.
    #[inline]
    pub fn get(&self, i: i64, j: i64) -> f64 {
        let n = self.n as i64;
        if i < 1 || j < 1 || i > n || j > n {
            return 0.0;
        }
        self.data[(i - 1) as usize * self.n + (j - 1) as usize]
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `B_t` for one split point.
    pub fn single(design: &DependenceDesign, t: usize) -> Result<Self> {
        let n = design.n();
        if t == 0 || t >= n {
            return Err(Error::IndexOutOfRange { t, max: n - 1 });
        }
        let g = design.solve_transposed(&f_vector(n, t, design.m())?.f);
        let (tf, rf) = (t as f64, (n - t) as f64);
        Ok(Self::build(n, &g, |i, j| match (i <= t, j <= t) {
            (true, true) => rf / tf,
            (true, false) => -2.0,
            (false, false) => tf / rf,
            (false, true) => 0.0,
        }))
    }

    /// `sum_{t=1}^{n-1} B_t`, accumulated in closed form: the block part via
    /// running sums over `t`, the correction part via `F^{-T} sum_t f_t`.
    pub fn aggregate(design: &DependenceDesign) -> Result<Self> {
        let n = design.n();
        let g = design.solve_transposed(&f_vector_sum(n, design.m())?);
        let nf = n as f64;
        // left[k] = sum_{t=k}^{n-1} (n-t)/t ; right[k] = sum_{t=1}^{k} t/(n-t)
        let mut left = vec![0.0; n + 1];
        for t in (1..n).rev() {
            left[t] = left[t + 1] + (nf - t as f64) / t as f64;
        }
        let mut right = vec![0.0; n + 1];
        for t in 1..n {
            right[t] = right[t - 1] + t as f64 / (nf - t as f64);
        }
        Ok(Self::build(n, &g, |i, j| {
            let lo = i.min(j);
            let hi = i.max(j);
            let mut v = left[hi] + right[lo - 1];
            if i < j {
                v -= 2.0 * (j - i) as f64;
            }
            v
        }))
    }

    fn build(n: usize, g: &[f64], block: impl Fn(usize, usize) -> f64) -> Self {
        let nf = n as f64;
        let mut data = vec![0.0; n * n];
        for i in 1..=n {
            for j in 1..=n {
                let mut correction = 0.0;
                for (h, &gh) in g.iter().enumerate() {
                    let lag = if i >= j && i - j == h { 1.0 } else { 0.0 };
                    let ends = (usize::from(j > h) + usize::from(j + h <= n)) as f64 / nf;
                    correction += gh * (lag - ends + (n - h) as f64 / (nf * nf));
                }
                data[(i - 1) * n + (j - 1)] = block(i, j) - correction;
            }
        }
        Self { n, data }
    }
}

pub fn b_matrix(n: usize, t: usize, window: DependenceWindow) -> Result<ContrastMatrix> {
    ContrastMatrix::single(&DependenceDesign::new(n, window)?, t)
}

pub fn b_aggregate(n: usize, window: DependenceWindow) -> Result<ContrastMatrix> {
    ContrastMatrix::aggregate(&DependenceDesign::new(n, window)?)
}
