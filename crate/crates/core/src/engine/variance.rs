use crate::engine::contrast::ContrastMatrix;
use crate::engine::trace::TraceTable;
use crate::model::DependenceWindow;
use crate::numeric::CompensatedSum;

/// Variance estimate with the floor applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Value before flooring.
    pub unfloored: f64,
    pub degenerate: bool,
}

/// Weight of `tr{C(h1) C(h2)}` in `var(n^{-2} sum B(i,j) X_i^T X_j)`:
/// `n^{-4} sum_{i,j} B(i,j) {B(i+h2, j-h1) + B(j-h1, i+h2)}`.
/// Returned as a `(2M+1)^2` table laid out like [`TraceTable`].
pub fn variance_coefficients(b: &ContrastMatrix, window: DependenceWindow) -> TraceTable {
    let n = b.n() as i64;
    let n4 = (b.n() as f64).powi(4);
    TraceTable::from_fn(window.m(), |h1, h2| {
        let mut acc = CompensatedSum::new();
        for i in 1..=n {
            let mut row = 0.0;
            for j in 1..=n {
                let bij = b.get(i, j);
                if bij == 0.0 {
                    continue;
                }
                row += bij * (b.get(i + h2, j - h1) + b.get(j - h1, i + h2));
            }
            acc.add(row);
        }
        acc.value() / n4
    })
}

/// Plug-in null variance `sum_{h1,h2} coef(h1,h2) * est(h1,h2)`, floored at
/// `1e-12 * (n^{-4} sum B^2 + 1)`.
pub fn variance_estimate(
    b: &ContrastMatrix,
    table: &TraceTable,
    window: DependenceWindow,
) -> VarianceEstimate {
    let coef = variance_coefficients(b, window);
    let mut acc = CompensatedSum::new();
    for (c, t) in coef.values().iter().zip(table.values()) {
        acc.add(c * t);
    }
    let unfloored = acc.value();
    let floor = 1e-12 * (b.sum_of_squares() / (b.n() as f64).powi(4) + 1.0);
    if unfloored > floor {
        VarianceEstimate { value: unfloored, unfloored, degenerate: false }
    } else {
        VarianceEstimate { value: floor, unfloored, degenerate: true }
    }
}
