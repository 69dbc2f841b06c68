use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SeriesMatrix;
use crate::sim::profile::MeanProfile;
use crate::sim::seed;

/// Innovation distribution, always scaled to unit variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
    StudentT { df: f64 },
}

/// Parameters of the linear process generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProcessSpec {
    pub n: usize,
    pub p: usize,
    /// Dependence order of the dominant coefficients `Q_0..Q_M`.
    pub m_true: usize,
    /// Decay of `Q_l(i, j) = rho^{|i-j|} / (M - l + 1)`.
    pub rho: f64,
    /// Fraction of nonzero entries per row of the perturbation `Q_{M+1} = Q_{M+2}`.
    pub perturb_sparsity: f64,
    /// Perturbation entries are uniform on `(0, perturb_scale)`.
    pub perturb_scale: f64,
    pub innovation: Innovation,
    pub seed: u64,
}

impl LinearProcessSpec {
    pub fn new(n: usize, p: usize, m_true: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            m_true,
            rho: 0.6,
            perturb_sparsity: 0.05,
            perturb_scale: 0.05,
            innovation: Innovation::Gaussian,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!("rho must lie in (0, 1); got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.perturb_sparsity) {
            return Err(Error::InvalidConfig("perturb_sparsity must lie in [0, 1]".into()));
        }
        if !(self.perturb_scale >= 0.0) {
            return Err(Error::InvalidConfig("perturb_scale must be non-negative".into()));
        }
        if let Innovation::StudentT { df } = self.innovation {
            if !(df > 2.0) {
                return Err(Error::InvalidConfig("student_t needs df > 2 for unit variance".into()));
            }
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidConfig("n and p must be positive".into()));
        }
        Ok(())
    }
}

/// Coefficient matrices of the process. `Q_0..Q_M` are stored implicitly
/// (Toeplitz `rho^{|i-j|}` scaled by `1/(M-l+1)`); the shared sparse
/// perturbation is stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProcess {
    p: usize,
    m: usize,
    rho: f64,
    /// Row `i` lists `(column, value)`; empty when `M = 0`.
    perturbation: Vec<Vec<(usize, f64)>>,
}

impl LinearProcess {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m_true(&self) -> usize {
        self.m
    }

    /// Largest lag with a possibly nonzero autocovariance.
    pub fn max_lag(&self) -> usize {
        if self.m == 0 {
            0
        } else {
            self.m + 2
        }
    }

    /// Dense `Q_l` for `l = 0..=M+2`.
    pub fn q_matrix(&self, l: usize) -> DMatrix<f64> {
        let p = self.p;
        if l <= self.m {
            let scale = 1.0 / (self.m - l + 1) as f64;
            return DMatrix::from_fn(p, p, |i, j| scale * self.rho.powi(i.abs_diff(j) as i32));
        }
        let mut q = DMatrix::zeros(p, p);
        if l <= self.m + 2 {
            for (i, row) in self.perturbation.iter().enumerate() {
                for &(j, v) in row {
                    q[(i, j)] = v;
                }
            }
        }
        q
    }

    /// `C(h) = E(X_i X_{i+h}^T) = sum_l Q_l Q_{l+h}^T`, with `C(-h) = C(h)^T`.
    pub fn autocov(&self, h: i64) -> DMatrix<f64> {
        if h < 0 {
            return self.autocov(-h).transpose();
        }
        let h = h as usize;
        let top = self.m + 2;
        let mut c = DMatrix::zeros(self.p, self.p);
        if h > top {
            return c;
        }
        for l in 0..=top - h {
            c += self.q_matrix(l) * self.q_matrix(l + h).transpose();
        }
        c
    }

    /// `y = T u` for the Toeplitz matrix `T(i, j) = rho^{|i-j|}`, via a
    /// forward and a backward first-order recursion.
    fn toeplitz_apply(&self, u: &[f64], out: &mut [f64]) {
        let p = u.len();
        let mut acc = 0.0;
        for k in 0..p {
            acc = u[k] + self.rho * acc;
            out[k] = acc;
        }
        acc = 0.0;
        for k in (0..p).rev() {
            acc = u[k] + self.rho * acc;
            out[k] += acc - u[k];
        }
    }

    /// Draws innovations `eps_{1-(M+2)}, ..., eps_n` (time-major) and
    /// assembles `X_i = mu_i + sum_l Q_l eps_{i-l}`.
    pub fn sample(&self, means: &DMatrix<f64>, innovation: Innovation, seed: u64) -> SeriesMatrix {
        let (n, p) = (means.nrows(), self.p);
        let lead = self.m + 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = draw_innovations(&mut rng, (n + lead) * p, innovation);
        let eps = |k: usize| &draws[k * p..(k + 1) * p];
        let mut values = means.clone();
        let mut mix = vec![0.0; p];
        let mut filtered = vec![0.0; p];
        for i in 0..n {
            // eps_{i-l} sits at offset i + lead - l
            mix.iter_mut().for_each(|v| *v = 0.0);
            for l in 0..=self.m {
                let w = 1.0 / (self.m - l + 1) as f64;
                for (v, e) in mix.iter_mut().zip(eps(i + lead - l)) {
                    *v += w * e;
                }
            }
            self.toeplitz_apply(&mix, &mut filtered);
            if self.m > 0 {
                let (e1, e2) = (eps(i + lead - self.m - 1), eps(i + lead - self.m - 2));
                for (r, row) in self.perturbation.iter().enumerate() {
                    filtered[r] += row.iter().map(|&(c, v)| v * (e1[c] + e2[c])).sum::<f64>();
                }
            }
            for j in 0..p {
                values[(i, j)] += filtered[j];
            }
        }
        SeriesMatrix::new(values).expect("finite draws")
    }
}

fn draw_innovations(rng: &mut ChaCha8Rng, count: usize, innovation: Innovation) -> Vec<f64> {
    match innovation {
        Innovation::Gaussian => (0..count).map(|_| StandardNormal.sample(rng)).collect(),
        Innovation::StudentT { df } => {
            let dist = StudentT::new(df).expect("validated df");
            let scale = ((df - 2.0) / df).sqrt();
            (0..count).map(|_| scale * dist.sample(rng)).collect()
        }
    }
}

/// Draws the perturbation coefficients. When `M = 0` the process is
/// temporally independent and no perturbation is drawn.
pub fn build_coefficients(spec: &LinearProcessSpec) -> Result<OracleModel> {
    spec.validate()?;
    let p = spec.p;
    let mut perturbation = Vec::new();
    if spec.m_true > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(spec.seed, seed::COEFFICIENTS, 0));
        let k = (spec.perturb_sparsity * p as f64).floor() as usize;
        perturbation = (0..p)
            .map(|_| {
                let mut cols = sample(&mut rng, p, k).into_vec();
                cols.sort_unstable();
                cols.into_iter().map(|c| (c, spec.perturb_scale * rng.random::<f64>())).collect()
            })
            .collect();
    }
    let process = LinearProcess { p, m: spec.m_true, rho: spec.rho, perturbation };
    Ok(OracleModel { process, means: DMatrix::zeros(spec.n, p), innovation: spec.innovation })
}

/// A fully specified data-generating model: coefficients plus means.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleModel {
    pub process: LinearProcess,
    /// `n x p`, row `i - 1` is `mu_i`.
    pub means: DMatrix<f64>,
    pub innovation: Innovation,
}

impl OracleModel {
    pub fn n(&self) -> usize {
        self.means.nrows()
    }

    pub fn with_profile(mut self, profile: &MeanProfile) -> Result<Self> {
        self.means = profile.means(self.n(), self.process.p)?;
        Ok(self)
    }

    pub fn sample(&self, seed: u64) -> SeriesMatrix {
        self.process.sample(&self.means, self.innovation, seed)
    }
}

/// One draw from the model implied by `spec` and `profile`.
pub fn generate_series(spec: &LinearProcessSpec, profile: &MeanProfile) -> Result<SeriesMatrix> {
    let model = build_coefficients(spec)?.with_profile(profile)?;
    Ok(model.sample(seed::derive(spec.seed, seed::INNOVATIONS, 0)))
}
