//! Direct-from-data reference implementations. Everything here is computed
//! from first principles (expectations of quadratic forms, explicit tuple
//! enumeration, polarization) without the Gram/prefix-sum machinery.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub type Data = Vec<Vec<f64>>;

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lag_count(h: i64, m: usize) -> Option<usize> {
    let a = h.unsigned_abs() as usize;
    (a <= m).then_some(a)
}

/// Coefficients of `gamma_0..gamma_M` (`gamma_h = tr C(h) = tr C(-h)`) in
/// `E t(n-t)/n * |mean_left - mean_right|^2` under a constant mean.
pub fn boundary_weights(n: usize, t: usize, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|i| if i <= t { 1.0 / t as f64 } else { -1.0 / (n - t) as f64 }).collect();
    let mut f = vec![0.0; m + 1];
    for i in 0..n {
        for j in 0..n {
            if let Some(h) = lag_count(i as i64 - j as i64, m) {
                f[h] += w[i] * w[j];
            }
        }
    }
    let scale = (t * (n - t)) as f64 / n as f64;
    f.iter().map(|v| v * scale).collect()
}

/// `E V_k = sum_h F(k, h) gamma_h`, from expanding the centered products.
pub fn design_matrix(n: usize, m: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let mut out = DMatrix::zeros(m + 1, m + 1);
    for k in 0..=m {
        for i in 0..n - k {
            let j = i + k;
            let mut add = |a: usize, b: usize, c: f64| {
                if let Some(h) = lag_count(a as i64 - b as i64, m) {
                    out[(k, h)] += c / nf;
                }
            };
            add(i, j, 1.0);
            for b in 0..n {
                add(i, b, -1.0 / nf);
                add(b, j, -1.0 / nf);
            }
            for a in 0..n {
                for b in 0..n {
                    add(a, b, 1.0 / (nf * nf));
                }
            }
        }
    }
    out
}

pub fn lag_traces(x: &Data, m: usize) -> Vec<f64> {
    let n = x.len();
    let p = x[0].len();
    let mean: Vec<f64> = (0..p).map(|c| x.iter().map(|r| r[c]).sum::<f64>() / n as f64).collect();
    let centered: Data = x.iter().map(|r| r.iter().zip(&mean).map(|(a, b)| a - b).collect()).collect();
    (0..=m)
        .map(|k| if k >= n { 0.0 } else { (0..n - k).map(|i| inner(&centered[i], &centered[i + k])).sum::<f64>() / n as f64 })
        .collect()
}

pub fn l_stat(x: &Data, t: usize, m: usize) -> f64 {
    let n = x.len();
    let p = x[0].len();
    let left: Vec<f64> = (0..p).map(|c| x[..t].iter().map(|r| r[c]).sum::<f64>() / t as f64).collect();
    let right: Vec<f64> = (0..p).map(|c| x[t..].iter().map(|r| r[c]).sum::<f64>() / (n - t) as f64).collect();
    let gap: f64 = left.iter().zip(&right).map(|(a, b)| (a - b) * (a - b)).sum();
    let f = DVector::from_vec(boundary_weights(n, t, m));
    let v = DVector::from_vec(lag_traces(x, m));
    let w = design_matrix(n, m).lu().solve(&v).expect("invertible");
    (t * (n - t)) as f64 / (n * n) as f64 * gap - f.dot(&w) / n as f64
}

/// Symmetric coefficient matrix of a statistic that is a quadratic form in
/// scalar observations, `stat(x) = n^{-2} sum B(i,j) x_i x_j`, recovered by
/// polarization.
pub fn polarize(n: usize, stat: impl Fn(&Data) -> f64) -> DMatrix<f64> {
    let unit = |idx: &[usize]| -> Data {
        (0..n).map(|i| vec![idx.iter().filter(|&&k| k == i).count() as f64]).collect()
    };
    let scale = (n * n) as f64;
    let diag: Vec<f64> = (0..n).map(|i| stat(&unit(&[i])) * scale).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else {
            (stat(&unit(&[i, j])) * scale - diag[i] - diag[j]) / 2.0
        }
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rule {
    Base,
    Group,
}

/// Trace-product estimate by explicit enumeration of admissible tuples.
pub fn trace_product(x: &Data, h1: i64, h2: i64, gap: usize, rule: Rule) -> f64 {
    let n = x.len() as i64;
    let gap = gap as i64;
    let g = |i: i64, j: i64| inner(&x[i as usize], &x[j as usize]);
    let ok = |i: i64| i >= 0 && i < n;
    let span = |b: i64, h: i64| if rule == Rule::Group { (b.min(b + h), b.max(b + h)) } else { (b, b) };
    let far = |a: (i64, i64), b: (i64, i64)| a.0 - b.1 > gap || b.0 - a.1 > gap;
    let single = |i: i64| (i, i);

    let mut t1 = (0.0, 0.0);
    for s in 0..n {
        for t in 0..n {
            if ok(s + h1) && ok(t + h2) && far(span(s, h1), span(t, h2)) {
                t1.0 += g(t + h2, s) * g(s + h1, t);
                t1.1 += 1.0;
            }
        }
    }
    let t2 = |h: i64| {
        let mut acc = (0.0, 0.0);
        for r in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let grp = span(s, h);
                    if ok(s + h) && far(single(r), grp) && far(single(t), grp) && far(single(r), single(t)) {
                        acc.0 += g(r, s) * g(s + h, t);
                        acc.1 += 1.0;
                    }
                }
            }
        }
        acc.0 / acc.1
    };
    let mut t4 = (0.0, 0.0);
    for q in 0..n {
        for r in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let idx = [q, r, s, t];
                    let apart = (0..4).all(|a| (a + 1..4).all(|b| (idx[a] - idx[b]).abs() > gap));
                    if apart {
                        t4.0 += g(q, r) * g(s, t);
                        t4.1 += 1.0;
                    }
                }
            }
        }
    }
    t1.0 / t1.1 - t2(h1) - t2(h2) + t4.0 / t4.1
}

/// `sum_{h1,h2} n^{-4} sum_{i,j} B(i,j){B(i+h2,j-h1) + B(j-h1,i+h2)} T(h1,h2)`
/// with out-of-range entries of `B` read as zero.
pub fn plug_in_variance(b: &DMatrix<f64>, x: &Data, m: usize, rule: Rule) -> f64 {
    let n = b.nrows() as i64;
    let at = |i: i64, j: i64| if i < 0 || j < 0 || i >= n || j >= n { 0.0 } else { b[(i as usize, j as usize)] };
    let mi = m as i64;
    let mut total = 0.0;
    for h1 in -mi..=mi {
        for h2 in -mi..=mi {
            let mut coef = 0.0;
            for i in 0..n {
                for j in 0..n {
                    coef += at(i, j) * (at(i + h2, j - h1) + at(j - h1, i + h2));
                }
            }
            total += coef / (n as f64).powi(4) * trace_product(x, h1, h2, m, rule);
        }
    }
    total
}

pub fn split_variance(x: &Data, t: usize, m: usize, rule: Rule) -> f64 {
    let b = polarize(x.len(), |y| l_stat(y, t, m));
    plug_in_variance(&b, x, m, rule)
}

pub fn aggregate_variance(x: &Data, m: usize, rule: Rule) -> f64 {
    let n = x.len();
    let b = polarize(n, |y| (1..n).map(|t| l_stat(y, t, m)).sum());
    plug_in_variance(&b, x, m, rule)
}
