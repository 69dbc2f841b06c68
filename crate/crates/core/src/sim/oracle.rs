//! Exact moments of `L_t` under a known model: the leading mean term and the
//! Gaussian variance (trace part over the lag window plus the mean-driven
//! part over the generator's full lag support).

use nalgebra::{DMatrix, DVector};

use crate::engine::{variance_coefficients, ContrastMatrix, DependenceDesign, f_vector};
use crate::error::Result;
use crate::model::DependenceWindow;
use crate::sim::process::OracleModel;

/// Which statistic the variance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceTarget {
    /// `L_t` at one split point.
    Split(usize),
    /// `sum_t L_t`.
    Aggregate,
}

/// `E(L_t)` up to the vanishing remainder, for `t = 1..n-1`.
pub fn oracle_mean_trace(model: &OracleModel, window: DependenceWindow) -> Result<Vec<f64>> {
    let mu = &model.means;
    let (n, p) = (mu.nrows(), mu.ncols());
    let nf = n as f64;
    let design = DependenceDesign::new(n, window)?;
    let grand: DVector<f64> = mu.row_sum().transpose() / nf;
    let centered = DMatrix::from_fn(n, p, |i, j| mu[(i, j)] - grand[j]);
    let vb: Vec<f64> = (0..=window.m())
        .map(|k| (0..n - k).map(|i| centered.row(i).dot(&centered.row(i + k))).sum::<f64>() / nf)
        .collect();
    let weights = design.solve(&vb);
    let total: DVector<f64> = mu.row_sum().transpose();
    let mut running = DVector::zeros(p);
    let mut out = Vec::with_capacity(n - 1);
    for t in 1..n {
        running += mu.row(t - 1).transpose();
        let (tf, rf) = (t as f64, nf - t as f64);
        let diff = &running / tf - (&total - &running) / rf;
        let f = f_vector(n, t, window.m())?;
        let corr: f64 = f.f.iter().zip(&weights).map(|(a, b)| a * b).sum();
        out.push(tf * rf / (nf * nf) * diff.norm_squared() - corr / nf);
    }
    Ok(out)
}

pub fn oracle_mean_l(t: usize, model: &OracleModel, window: DependenceWindow) -> Result<f64> {
    let n = model.n();
    if t == 0 || t >= n {
        return Err(crate::Error::IndexOutOfRange { t, max: n - 1 });
    }
    Ok(oracle_mean_trace(model, window)?[t - 1])
}

fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(&b.transpose()).sum()
}

/// Variance of `L_t` (or of `sum_t L_t`) for Gaussian innovations.
pub fn oracle_variance(target: VarianceTarget, model: &OracleModel, window: DependenceWindow) -> Result<f64> {
    let n = model.n();
    let design = DependenceDesign::new(n, window)?;
    let b = match target {
        VarianceTarget::Split(t) => ContrastMatrix::single(&design, t)?,
        VarianceTarget::Aggregate => ContrastMatrix::aggregate(&design)?,
    };
    let m = window.m() as i64;
    let process = &model.process;
    let lagged: Vec<DMatrix<f64>> = (-m..=m).map(|h| process.autocov(h)).collect();
    let coef = variance_coefficients(&b, window);
    let mut trace_part = 0.0;
    for h1 in -m..=m {
        for h2 in -m..=m {
            let tr = trace_of_product(&lagged[(h1 + m) as usize], &lagged[(h2 + m) as usize]);
            trace_part += coef.get(h1, h2) * tr;
        }
    }

    let mu = &model.means;
    if mu.iter().all(|&v| v == 0.0) {
        return Ok(trace_part);
    }
    // linear part: n^{-2} sum_i eps_i^T c_i with c_i = sum_j (B_ij + B_ji) mu_j
    let p = mu.ncols();
    let ni = n as i64;
    let c: Vec<DVector<f64>> = (1..=ni)
        .map(|i| {
            let mut acc = DVector::zeros(p);
            for j in 1..=ni {
                let w = b.get(i, j) + b.get(j, i);
                if w != 0.0 {
                    acc += w * mu.row((j - 1) as usize).transpose();
                }
            }
            acc
        })
        .collect();
    let support = process.max_lag() as i64;
    let mut mean_part = 0.0;
    for h in -support..=support {
        let ch = process.autocov(h);
        for i in 0..ni {
            let k = i + h;
            if (0..ni).contains(&k) {
                mean_part += c[i as usize].dot(&(&ch * &c[k as usize]));
            }
        }
    }
    Ok(trace_part + mean_part / (n as f64).powi(4))
}
