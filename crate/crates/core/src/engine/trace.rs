//! Four-term U-statistic estimate of `tr{C(h1) C(h2)}`.
//!
//! With `G(i, j) = X_i^T X_j` (uncentered) the estimate is
//!
//! ```text
//!   T1/n1 - T2(h1)/n2 - T2(h2)/n3 + T4/n4
//!   T1     = sum* G(t+h2, s) G(s+h1, t)
//!   T2(h)  = sum* G(r, s) G(s+h, t)
//!   T4     = sum* G(q, r) G(s, t)
//! ```
//!
//! where each `sum*` runs over index tuples whose members are kept apart by
//! more than a separation gap, and each `n*` counts the admissible tuples.
//! Shifted subscripts must stay inside `[1, n]`.

use crate::error::{Error, Result};
use crate::gram::{GramSummary, PrefixMatrix};
use crate::model::DependenceWindow;
use crate::numeric::CompensatedSum;

/// Which subscripts the separation gap applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationRule {
    /// Only the base indices (`s, t`, `r, s, t`, `q, r, s, t`) must be
    /// pairwise more than `gap` apart.
    BaseIndex,
    /// A base index and its shifted partner form a group (`{s, s+h1}`,
    /// `{t, t+h2}`); the spans of distinct groups must be more than `gap`
    /// apart. Removes the cross-pairings `E(X_{t+h2}^T X_s)` that survive
    /// under [`SeparationRule::BaseIndex`] when the process is dependent.
    #[default]
    ObservationGroup,
}

/// Read access shared by the Gram matrix and the all-ones matrix used for
/// tuple counting.
trait Entries {
    fn dim(&self) -> usize;
    fn at(&self, i: usize, j: usize) -> f64;
    /// Half-open block sum.
    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64;
}

impl Entries for PrefixMatrix {
    fn dim(&self) -> usize {
        PrefixMatrix::dim(self)
    }
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        PrefixMatrix::at(self, i, j)
    }
    #[inline]
    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        PrefixMatrix::block(self, r0, r1, c0, c1)
    }
}

struct Ones {
    n: usize,
}

impl Entries for Ones {
    fn dim(&self) -> usize {
        self.n
    }
    #[inline]
    fn at(&self, _: usize, _: usize) -> f64 {
        1.0
    }
    #[inline]
    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        (r1.saturating_sub(r0) * c1.saturating_sub(c0)) as f64
    }
}

/// Closed 0-based interval, clamped to `[0, n)`.
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: usize,
    hi: usize,
}

fn widen(lo: i64, hi: i64, gap: i64, n: usize) -> Span {
    Span { lo: (lo - gap).max(0) as usize, hi: ((hi + gap).min(n as i64 - 1)) as usize }
}

/// Sum and count of one estimator term.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    sum: f64,
    count: f64,
}

impl Term {
    fn mean(self, name: &'static str, n: usize, gap: usize) -> Result<f64> {
        if self.count == 0.0 {
            return Err(Error::EmptySumRange { term: name, n, gap });
        }
        Ok(self.sum / self.count)
    }
}

/// Evaluates the estimator for arbitrary lag pairs on one series. The
/// lag-free fourth term is computed once at construction.
#[derive(Debug, Clone)]
pub struct TraceEstimator<'a> {
    gram: &'a GramSummary,
    gap: usize,
    rule: SeparationRule,
    fourth: Result<f64>,
}

impl<'a> TraceEstimator<'a> {
    pub fn new(gram: &'a GramSummary, gap: usize, rule: SeparationRule) -> Self {
        let n = gram.n();
        let sum = fourth_term(gram.raw(), gap);
        let count = fourth_term(&Ones { n }, gap);
        let fourth = Term { sum, count }.mean("fourth (q,r,s,t)", n, gap);
        Self { gram, gap, rule, fourth }
    }

    pub fn gap(&self) -> usize {
        self.gap
    }

    /// Estimate of `tr{C(h1) C(h2)}`; may be negative in finite samples.
    pub fn estimate(&self, h1: i64, h2: i64) -> Result<f64> {
        let n = self.gram.n();
        let g = self.gram.raw();
        let first = self.first_term(g, h1, h2).mean("first (s,t)", n, self.gap)?;
        let second = self.middle_term(h1).mean("second (r,s,t)", n, self.gap)?;
        let third = self.middle_term(h2).mean("third (r,s,t)", n, self.gap)?;
        let fourth = self.fourth.clone()?;
        Ok(first - second - third + fourth)
    }

    fn group(&self, base: usize, shift: i64) -> Option<(i64, i64)> {
        let b = base as i64;
        let s = b + shift;
        if s < 0 || s >= self.gram.n() as i64 {
            return None;
        }
        Some(match self.rule {
            SeparationRule::BaseIndex => (b, b),
            SeparationRule::ObservationGroup => (b.min(s), b.max(s)),
        })
    }

    fn first_term(&self, g: &PrefixMatrix, h1: i64, h2: i64) -> Term {
        let n = self.gram.n();
        let gap = self.gap as i64;
        let mut sum = CompensatedSum::new();
        let mut count = 0usize;
        for s in 0..n {
            let Some((s_lo, s_hi)) = self.group(s, h1) else { continue };
            let s1 = (s as i64 + h1) as usize;
            let mut row = 0.0;
            for t in 0..n {
                let Some((t_lo, t_hi)) = self.group(t, h2) else { continue };
                if t_lo - s_hi <= gap && s_lo - t_hi <= gap {
                    continue;
                }
                let t2 = (t as i64 + h2) as usize;
                row += g.at(t2, s) * g.at(s1, t);
                count += 1;
            }
            sum.add(row);
        }
        Term { sum: sum.value(), count: count as f64 }
    }

    /// `sum* G(r, s) G(s+h, t)` and its count.
    fn middle_term(&self, h: i64) -> Term {
        let n = self.gram.n();
        let g = self.gram.raw();
        let gap = self.gap as i64;
        let mut sum = CompensatedSum::new();
        let mut count = CompensatedSum::new();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut b_prefix = vec![0.0; n + 1];
        let mut mask = vec![0.0; n];
        let mut mask_prefix = vec![0.0; n + 1];
        for s in 0..n {
            let Some((lo, hi)) = self.group(s, h) else { continue };
            let forbidden = widen(lo, hi, gap, n);
            let s1 = (s as i64 + h) as usize;
            for i in 0..n {
                let ok = i < forbidden.lo || i > forbidden.hi;
                mask[i] = if ok { 1.0 } else { 0.0 };
                a[i] = if ok { g.at(i, s) } else { 0.0 };
                b[i] = if ok { g.at(s1, i) } else { 0.0 };
                b_prefix[i + 1] = b_prefix[i] + b[i];
                mask_prefix[i + 1] = mask_prefix[i] + mask[i];
            }
            let (b_total, m_total) = (b_prefix[n], mask_prefix[n]);
            let mut row = 0.0;
            let mut row_count = 0.0;
            for r in 0..n {
                if mask[r] == 0.0 {
                    continue;
                }
                let w = widen(r as i64, r as i64, gap, n);
                row += a[r] * (b_total - (b_prefix[w.hi + 1] - b_prefix[w.lo]));
                row_count += m_total - (mask_prefix[w.hi + 1] - mask_prefix[w.lo]);
            }
            sum.add(row);
            count.add(row_count);
        }
        Term { sum: sum.value(), count: count.value() }
    }
}

/// `sum_{q,r,s,t pairwise > gap apart} E(q, r) E(s, t)` in O(n^2 gap).
///
/// For each admissible `(q, r)` the inner sum over `(s, t)` is the band-free
/// total minus the rows and columns inside the windows around `q` and `r`,
/// with the doubly removed window block added back.
fn fourth_term<E: Entries>(e: &E, gap: usize) -> f64 {
    let n = e.dim();
    let g = gap as i64;
    // row_free[s] = sum over t with |s - t| > gap
    let mut row_free_prefix = vec![0.0; n + 1];
    for s in 0..n {
        let w = widen(s as i64, s as i64, g, n);
        let v = e.block(s, s + 1, 0, n) - e.block(s, s + 1, w.lo, w.hi + 1);
        row_free_prefix[s + 1] = row_free_prefix[s] + v;
    }
    let band_free_total = row_free_prefix[n];
    let row_free = |sp: Span| row_free_prefix[sp.hi + 1] - row_free_prefix[sp.lo];

    let mut total = CompensatedSum::new();
    let mut spans: Vec<Span> = Vec::with_capacity(2);
    for q in 0..n {
        let mut row = 0.0;
        for r in (q + gap + 1)..n {
            let wq = widen(q as i64, q as i64, g, n);
            let wr = widen(r as i64, r as i64, g, n);
            spans.clear();
            if wr.lo <= wq.hi + 1 {
                spans.push(Span { lo: wq.lo, hi: wr.hi });
            } else {
                spans.push(wq);
                spans.push(wr);
            }
            let mut removed = 0.0;
            let mut window_block = 0.0;
            for &a in &spans {
                removed += row_free(a);
                for &b in &spans {
                    window_block += e.block(a.lo, a.hi + 1, b.lo, b.hi + 1);
                }
            }
            // entries of the window block that lie within the band
            let mut window_band = 0.0;
            for &a in &spans {
                for s in a.lo..=a.hi {
                    let w = widen(s as i64, s as i64, g, n);
                    for &b in &spans {
                        let lo = w.lo.max(b.lo);
                        let hi = w.hi.min(b.hi);
                        if lo <= hi {
                            window_band += e.block(s, s + 1, lo, hi + 1);
                        }
                    }
                }
            }
            let inner = band_free_total - 2.0 * removed + (window_block - window_band);
            row += e.at(q, r) * inner;
        }
        total.add(2.0 * row);
    }
    total.value()
}

/// Single estimate with separation gap `M` from the window.
pub fn trace_product_estimate(gram: &GramSummary, h1: i64, h2: i64, window: DependenceWindow) -> Result<f64> {
    TraceEstimator::new(gram, window.m(), SeparationRule::default()).estimate(h1, h2)
}

/// Estimates of `tr{C(h1) C(h2)}` for all `h1, h2` in `-M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    m: usize,
    values: Vec<f64>,
}

impl TraceTable {
    /// Table built from explicit values, indexed like [`TraceTable::get`].
    pub fn from_fn(m: usize, mut f: impl FnMut(i64, i64) -> f64) -> Self {
        let width = 2 * m + 1;
        let mut values = vec![0.0; width * width];
        let mi = m as i64;
        for h1 in -mi..=mi {
            for h2 in -mi..=mi {
                values[((h1 + mi) as usize) * width + (h2 + mi) as usize] = f(h1, h2);
            }
        }
        Self { m, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, h1: i64, h2: i64) -> f64 {
        let mi = self.m as i64;
        debug_assert!(h1.abs() <= mi && h2.abs() <= mi);
        self.values[((h1 + mi) as usize) * (2 * self.m + 1) + (h2 + mi) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Orbit representative under `(h1,h2) ~ (h2,h1) ~ (-h1,-h2)`.
fn canonical(h1: i64, h2: i64) -> (i64, i64) {
    [(h1, h2), (h2, h1), (-h1, -h2), (-h2, -h1)].into_iter().max().unwrap()
}

pub fn build_trace_table(gram: &GramSummary, window: DependenceWindow) -> Result<TraceTable> {
    build_trace_table_with(&TraceEstimator::new(gram, window.m(), SeparationRule::default()), window)
}

/// Fills the table from one estimator, evaluating each symmetry orbit once.
pub fn build_trace_table_with(estimator: &TraceEstimator<'_>, window: DependenceWindow) -> Result<TraceTable> {
    let m = window.m() as i64;
    let mut cache = std::collections::BTreeMap::new();
    for h1 in -m..=m {
        for h2 in -m..=m {
            let key = canonical(h1, h2);
            if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(estimator.estimate(key.0, key.1)?);
            }
        }
    }
    Ok(TraceTable::from_fn(window.m(), |h1, h2| cache[&canonical(h1, h2)]))
}
