//! Summation helpers.

const CHUNK: usize = 64;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Dot product: plain accumulation inside fixed-size chunks, compensated
/// across chunks. The chunk order is fixed, so results are reproducible.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = CompensatedSum::new();
    for (ca, cb) in a.chunks(CHUNK).zip(b.chunks(CHUNK)) {
        let mut lanes = [0.0f64; 4];
        let mut ia = ca.chunks_exact(4);
        let mut ib = cb.chunks_exact(4);
        for (x, y) in (&mut ia).zip(&mut ib) {
            lanes[0] += x[0] * y[0];
            lanes[1] += x[1] * y[1];
            lanes[2] += x[2] * y[2];
            lanes[3] += x[3] * y[3];
        }
        let mut tail = 0.0;
        for (x, y) in ia.remainder().iter().zip(ib.remainder()) {
            tail += x * y;
        }
        acc.add((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail);
    }
    acc.value()
}
