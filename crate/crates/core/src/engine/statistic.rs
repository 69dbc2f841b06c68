use crate::engine::design::{f_vector, DependenceDesign};
use crate::error::Result;
use crate::gram::GramSummary;
use crate::model::DependenceWindow;
use crate::numeric::compensated_sum;

/// Lag-`k` centered autocovariance traces `V(1..=M+1)`, each scaled by `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagTraceVector {
    pub v: Vec<f64>,
}

pub fn v_vector(gram: &GramSummary, m: usize) -> LagTraceVector {
    let n = gram.n();
    let c = gram.centered();
    let v = (0..=m)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            compensated_sum((0..n - lag).map(|h| c.at(h, h + lag))) / n as f64
        })
        .collect();
    LagTraceVector { v }
}

/// `L_t` for `t = 1..n-1` (element `t - 1` of the result).
///
/// The between-segment term comes from centered block sums in O(1) per `t`;
/// the correction `f_t^T F^{-1} V / n` reuses one solve of `F x = V`.
pub fn l_trace(gram: &GramSummary, window: DependenceWindow) -> Result<Vec<f64>> {
    let design = DependenceDesign::new(gram.n(), window)?;
    l_trace_with(gram, &design)
}

pub(crate) fn l_trace_with(gram: &GramSummary, design: &DependenceDesign) -> Result<Vec<f64>> {
    let n = gram.n();
    let nf = n as f64;
    let c = gram.centered();
    let v = v_vector(gram, design.m());
    let weights = design.solve(&v.v);
    let mut out = Vec::with_capacity(n - 1);
    for t in 1..n {
        let (tf, rf) = (t as f64, (n - t) as f64);
        let within_left = c.block(0, t, 0, t);
        let across = c.block(0, t, t, n);
        let within_right = c.block(t, n, t, n);
        let diff_sq = within_left / (tf * tf) - 2.0 * across / (tf * rf) + within_right / (rf * rf);
        let f = f_vector(n, t, design.m())?;
        let correction: f64 = f.f.iter().zip(&weights).map(|(a, b)| a * b).sum();
        out.push(tf * rf / (nf * nf) * diff_sq - correction / nf);
    }
    Ok(out)
}
