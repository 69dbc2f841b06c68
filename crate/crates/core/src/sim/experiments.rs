//! Monte Carlo runners. Each is a pure function of its design: replication
//! `r` draws innovations from `derive(seed, INNOVATIONS, r)` and results are
//! collected in replication order before any aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dependence::{default_h_max, lag_energy_curve_with, select_m, DEFAULT_DROP_RATIO};
use crate::engine::SeparationRule;
use crate::error::{Error, Result};
use crate::inference::{binary_segmentation, classify_errors, estimate_single, Analysis, InferenceConfig};
use crate::model::{DependenceWindow, SeriesMatrix};
use crate::numeric::CompensatedSum;
use crate::sim::process::{build_coefficients, Innovation, LinearProcessSpec, OracleModel};
use crate::sim::profile::MeanProfile;
use crate::sim::seed;

fn model_for(
    n: usize,
    p: usize,
    m_true: usize,
    innovation: Innovation,
    profile: &MeanProfile,
    master: u64,
) -> Result<OracleModel> {
    let mut spec = LinearProcessSpec::new(n, p, m_true, master);
    spec.innovation = innovation;
    build_coefficients(&spec)?.with_profile(profile)
}

fn draw(model: &OracleModel, master: u64, r: usize) -> SeriesMatrix {
    model.sample(seed::derive(master, seed::INNOVATIONS, r as u64))
}

fn replicate<T: Send>(count: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if count == 0 {
        return Err(Error::InvalidConfig("replications must be positive".into()));
    }
    (0..count).into_par_iter().map(f).collect()
}

fn proportion(hits: usize, total: usize) -> (f64, f64) {
    let rate = hits as f64 / total as f64;
    (rate, (rate * (1.0 - rate) / total as f64).sqrt())
}

/// Sample mean, standard deviation (denominator `k - 1`) and the standard
/// error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub std_error: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        let mut sum = CompensatedSum::new();
        values.iter().for_each(|&v| sum.add(v));
        let mean = sum.value() / k;
        let mut sq = CompensatedSum::new();
        values.iter().for_each(|&v| sq.add((v - mean) * (v - mean)));
        let sd = if values.len() > 1 { (sq.value() / (k - 1.0)).sqrt() } else { 0.0 };
        Self { mean, sd, std_error: sd / k.sqrt() }
    }
}

/// Rejection rate of the global test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerDesign {
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    pub m_used: usize,
    pub alpha: f64,
    pub replications: usize,
    pub profile: MeanProfile,
    #[serde(default)]
    pub innovation: Innovation,
    #[serde(default)]
    pub separation: SeparationRule,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerResult {
    pub replications: usize,
    pub rejections: usize,
    pub rate: f64,
    pub std_error: f64,
    /// Replications whose variance estimate hit the floor.
    pub degenerate: usize,
}

pub fn run_size_power(design: &SizePowerDesign) -> Result<SizePowerResult> {
    let model = model_for(design.n, design.p, design.m_true, design.innovation, &design.profile, design.seed)?;
    let window = DependenceWindow::new(design.m_used);
    let outcomes = replicate(design.replications, |r| {
        Analysis::new(&draw(&model, design.seed, r), window, design.separation)?.test_aggregate(design.alpha)
    })?;
    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let (rate, std_error) = proportion(rejections, design.replications);
    Ok(SizePowerResult {
        replications: design.replications,
        rejections,
        rate,
        std_error,
        degenerate: outcomes.iter().filter(|o| o.degenerate).count(),
    })
}

/// Binary segmentation against a known set of change points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCpDesign {
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    pub m_used: usize,
    pub change_points: Vec<usize>,
    /// One magnitude per regime.
    pub deltas: Vec<f64>,
    pub inference: InferenceConfig,
    #[serde(default)]
    pub tolerance: usize,
    pub replications: usize,
    #[serde(default)]
    pub innovation: Innovation,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCpResult {
    pub replications: usize,
    pub false_positives: Summary,
    pub false_negatives: Summary,
    pub true_positives: Summary,
}

pub fn run_multi_cp(design: &MultiCpDesign) -> Result<MultiCpResult> {
    let profile = MeanProfile {
        change_points: design.change_points.clone(),
        deltas: design.deltas.clone(),
        support_size: None,
        sign_seed: seed::derive(design.seed, seed::PROFILE, 0),
    };
    let model = model_for(design.n, design.p, design.m_true, design.innovation, &profile, design.seed)?;
    let window = DependenceWindow::new(design.m_used);
    let counts = replicate(design.replications, |r| {
        let found = binary_segmentation(&draw(&model, design.seed, r), window, &design.inference)?;
        Ok(classify_errors(&found.points, &design.change_points, design.tolerance))
    })?;
    let column = |f: fn(&crate::inference::ErrorCounts) -> usize| {
        Summary::of(&counts.iter().map(|c| f(c) as f64).collect::<Vec<_>>())
    };
    Ok(MultiCpResult {
        replications: design.replications,
        false_positives: column(|c| c.false_positives),
        false_negatives: column(|c| c.false_negatives),
        true_positives: column(|c| c.true_positives),
    })
}

/// Exact-recovery probability of the single change point estimator over a
/// grid of locations, dimensions and magnitudes. Within a `(tau, p)` pair
/// every magnitude reuses the same coefficients, mean support and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDesign {
    pub n: usize,
    pub taus: Vec<usize>,
    pub dims: Vec<usize>,
    pub deltas: Vec<f64>,
    pub m_true: usize,
    pub m_used: usize,
    pub replications: usize,
    #[serde(default)]
    pub innovation: Innovation,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCell {
    pub tau: usize,
    pub p: usize,
    pub delta: f64,
    pub detections: usize,
    pub probability: f64,
    pub std_error: f64,
}

pub fn run_boundary_curve(design: &BoundaryDesign) -> Result<Vec<BoundaryCell>> {
    let window = DependenceWindow::new(design.m_used);
    let mut cells = Vec::with_capacity(design.taus.len() * design.dims.len() * design.deltas.len());
    for &tau in &design.taus {
        for &p in &design.dims {
            let sign_seed = seed::derive(design.seed, seed::PROFILE, p as u64);
            let base = model_for(design.n, p, design.m_true, design.innovation, &MeanProfile::null(), design.seed)?;
            let shapes = MeanProfile::single(tau, 1.0, sign_seed).means(design.n, p)?;
            let noise = replicate(design.replications, |r| Ok(draw(&base, design.seed, r).values().clone()))?;
            for &delta in &design.deltas {
                let shift = &shapes * delta;
                let hits = noise
                    .par_iter()
                    .map(|x| Ok(estimate_single(&SeriesMatrix::new(x + &shift)?, window)? == tau))
                    .collect::<Result<Vec<bool>>>()?;
                let detections = hits.iter().filter(|&&h| h).count();
                let (probability, std_error) = proportion(detections, design.replications);
                cells.push(BoundaryCell { tau, p, delta, detections, probability, std_error });
            }
        }
    }
    Ok(cells)
}

/// Lag energy curves and the dependence orders they select.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowDesign {
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    pub profile: MeanProfile,
    #[serde(default)]
    pub h_max: Option<usize>,
    #[serde(default = "default_drop_ratio")]
    pub drop_ratio: f64,
    pub replications: usize,
    #[serde(default)]
    pub innovation: Innovation,
    #[serde(default)]
    pub separation: SeparationRule,
    pub seed: u64,
}

fn default_drop_ratio() -> f64 {
    DEFAULT_DROP_RATIO
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowResult {
    pub h_max: usize,
    /// Average of `w_hat(h)` over replications, `h = 0..=h_max`.
    pub mean_curve: Vec<f64>,
    pub selections: Vec<usize>,
    pub saturated: usize,
    /// Fraction of replications selecting `m_true`.
    pub recovery: f64,
}

pub fn run_elbow(design: &ElbowDesign) -> Result<ElbowResult> {
    let model = model_for(design.n, design.p, design.m_true, design.innovation, &design.profile, design.seed)?;
    let h_max = design.h_max.unwrap_or_else(|| default_h_max(design.n));
    let runs = replicate(design.replications, |r| {
        let curve = lag_energy_curve_with(&draw(&model, design.seed, r), h_max, design.separation)?;
        let choice = select_m(&curve, design.drop_ratio)?;
        Ok((curve.w_hat, choice))
    })?;
    let mean_curve = (0..=h_max)
        .map(|h| Summary::of(&runs.iter().map(|(w, _)| w[h]).collect::<Vec<_>>()).mean)
        .collect();
    let selections: Vec<usize> = runs.iter().map(|(_, c)| c.m).collect();
    let hits = selections.iter().filter(|&&m| m == design.m_true).count();
    Ok(ElbowResult {
        h_max,
        mean_curve,
        saturated: runs.iter().filter(|(_, c)| c.saturated).count(),
        recovery: hits as f64 / design.replications as f64,
        selections,
    })
}

/// Null distribution of the standardized statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityDesign {
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    pub m_used: usize,
    /// Split points whose `L_t / s_t` is recorded next to the aggregate.
    pub splits: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub innovation: Innovation,
    #[serde(default)]
    pub separation: SeparationRule,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSample {
    /// `None` for the aggregate statistic.
    pub split: Option<usize>,
    pub zscores: Vec<f64>,
    pub ks_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub samples: Vec<StandardizedSample>,
}

pub fn run_normality(design: &NormalityDesign) -> Result<NormalityResult> {
    let model = model_for(design.n, design.p, design.m_true, design.innovation, &MeanProfile::null(), design.seed)?;
    let window = DependenceWindow::new(design.m_used);
    let rows = replicate(design.replications, |r| {
        let analysis = Analysis::new(&draw(&model, design.seed, r), window, design.separation)?;
        let mut z = vec![analysis.test_aggregate(0.05)?.zscore];
        for &t in &design.splits {
            z.push(analysis.test_split(t, 0.05)?.zscore);
        }
        Ok(z)
    })?;
    let targets = std::iter::once(None).chain(design.splits.iter().map(|&t| Some(t)));
    let samples = targets
        .enumerate()
        .map(|(k, split)| {
            let zscores: Vec<f64> = rows.iter().map(|z| z[k]).collect();
            StandardizedSample { split, ks_distance: ks_distance_normal(&zscores), zscores }
        })
        .collect();
    Ok(NormalityResult { samples })
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `values` and the standard normal.
pub fn ks_distance_normal(values: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = normal.cdf(v);
            (cdf - i as f64 / k).max((i + 1) as f64 / k - cdf)
        })
        .fold(0.0, f64::max)
}
