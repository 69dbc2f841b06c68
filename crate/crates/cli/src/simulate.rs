//! `hdcp simulate`: flat TOML experiment descriptions dispatched to the
//! Monte Carlo runners.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hdcp::engine::SeparationRule;
use hdcp::inference::InferenceConfig;
use hdcp::sim::{
    self, seed, BoundaryCell, BoundaryDesign, ElbowDesign, ElbowResult, Innovation, MeanProfile, MultiCpDesign,
    MultiCpResult, NormalityDesign, NormalityResult, SizePowerDesign, SizePowerResult, Summary,
};
use serde::{Deserialize, Serialize};

use crate::detect::emit;
use crate::failure::Failure;
use crate::SimulateArgs;

const DEFAULT_T_DF: f64 = 8.0;

fn default_alpha() -> f64 {
    0.05
}

fn null_deltas() -> Vec<f64> {
    vec![0.0]
}

fn default_drop_ratio() -> f64 {
    hdcp::dependence::DEFAULT_DROP_RATIO
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationKind {
    #[default]
    Gaussian,
    StudentT,
}

fn innovation(kind: InnovationKind, df: Option<f64>) -> Result<Innovation, Failure> {
    match (kind, df) {
        (InnovationKind::Gaussian, None) => Ok(Innovation::Gaussian),
        (InnovationKind::Gaussian, Some(_)) => Err(Failure::Usage("df is only meaningful with innovation = \"student_t\"".into())),
        (InnovationKind::StudentT, df) => Ok(Innovation::StudentT { df: df.unwrap_or(DEFAULT_T_DF) }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizePowerConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    /// Defaults to `m_true`.
    pub m_used: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub change_points: Vec<usize>,
    #[serde(default = "null_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub separation: SeparationRule,
    #[serde(default)]
    pub innovation: InnovationKind,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiCpConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub p: usize,
    pub m_true: usize,
    pub m_used: Option<usize>,
    pub change_points: Vec<usize>,
    pub deltas: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub fwer: bool,
    pub min_seg: Option<usize>,
    #[serde(default)]
    pub tolerance: usize,
    #[serde(default)]
    pub separation: SeparationRule,
    #[serde(default)]
    pub innovation: InnovationKind,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub taus: Vec<usize>,
    pub dims: Vec<usize>,
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub m_true: usize,
    pub m_used: Option<usize>,
    #[serde(default)]
    pub innovation: InnovationKind,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Orders {
    One(usize),
    Many(Vec<usize>),
}

impl Orders {
    fn to_vec(&self) -> Vec<usize> {
        match self {
            Orders::One(m) => vec![*m],
            Orders::Many(ms) => ms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElbowConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub p: usize,
    /// One order or a list; each gets its own curve.
    pub m_true: Orders,
    /// When present, every order is also run under this alternative.
    #[serde(default)]
    pub change_points: Vec<usize>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    pub h_max: Option<usize>,
    #[serde(default = "default_drop_ratio")]
    pub drop_ratio: f64,
    #[serde(default)]
    pub separation: SeparationRule,
    #[serde(default)]
    pub innovation: InnovationKind,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalityConfig {
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub m_true: usize,
    pub m_used: Option<usize>,
    #[serde(default)]
    pub splits: Vec<usize>,
    #[serde(default)]
    pub separation: SeparationRule,
    #[serde(default)]
    pub innovation: InnovationKind,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum ExperimentConfig {
    SizePower(SizePowerConfig),
    MultiCp(MultiCpConfig),
    Boundary(BoundaryConfig),
    Elbow(ElbowConfig),
    Normality(NormalityConfig),
}

impl ExperimentConfig {
    fn seed(&self) -> u64 {
        match self {
            Self::SizePower(c) => c.seed,
            Self::MultiCp(c) => c.seed,
            Self::Boundary(c) => c.seed,
            Self::Elbow(c) => c.seed,
            Self::Normality(c) => c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSetting {
    Null,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowRun {
    pub m_true: usize,
    pub means: MeanSetting,
    pub result: ElbowResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Results {
    SizePower(SizePowerResult),
    MultiCp(MultiCpResult),
    Boundary(Vec<BoundaryCell>),
    Elbow(Vec<ElbowRun>),
    Normality(NormalityResult),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutput<'a> {
    pub design: &'static str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub results: Results,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, Failure> {
    toml::from_str(text).map_err(|e| Failure::Usage(format!("invalid experiment config: {e}")))
}

fn regime_profile(change_points: &[usize], deltas: &[f64], master: u64) -> MeanProfile {
    MeanProfile {
        change_points: change_points.to_vec(),
        deltas: deltas.to_vec(),
        support_size: None,
        sign_seed: seed::derive(master, seed::PROFILE, 0),
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<(&'static str, Results), Failure> {
    let lib = Failure::from_config;
    Ok(match config {
        ExperimentConfig::SizePower(c) => {
            let design = SizePowerDesign {
                n: c.n,
                p: c.p,
                m_true: c.m_true,
                m_used: c.m_used.unwrap_or(c.m_true),
                alpha: c.alpha,
                replications: c.replications,
                profile: regime_profile(&c.change_points, &c.deltas, c.seed),
                innovation: innovation(c.innovation, c.df)?,
                separation: c.separation,
                seed: c.seed,
            };
            ("size_power", Results::SizePower(sim::run_size_power(&design).map_err(lib)?))
        }
        ExperimentConfig::MultiCp(c) => {
            let design = MultiCpDesign {
                n: c.n,
                p: c.p,
                m_true: c.m_true,
                m_used: c.m_used.unwrap_or(c.m_true),
                change_points: c.change_points.clone(),
                deltas: c.deltas.clone(),
                inference: InferenceConfig {
                    alpha: c.alpha,
                    alpha_seg: None,
                    min_segment_len: c.min_seg,
                    fwer_mode: c.fwer,
                    separation: c.separation,
                },
                tolerance: c.tolerance,
                replications: c.replications,
                innovation: innovation(c.innovation, c.df)?,
                seed: c.seed,
            };
            ("multi_cp", Results::MultiCp(sim::run_multi_cp(&design).map_err(lib)?))
        }
        ExperimentConfig::Boundary(c) => {
            let design = BoundaryDesign {
                n: c.n,
                taus: c.taus.clone(),
                dims: c.dims.clone(),
                deltas: c.deltas.clone(),
                m_true: c.m_true,
                m_used: c.m_used.unwrap_or(c.m_true),
                replications: c.replications,
                innovation: innovation(c.innovation, c.df)?,
                seed: c.seed,
            };
            ("boundary", Results::Boundary(sim::run_boundary_curve(&design).map_err(lib)?))
        }
        ExperimentConfig::Elbow(c) => {
            let noise = innovation(c.innovation, c.df)?;
            let mut settings = vec![(MeanSetting::Null, MeanProfile::null())];
            if !c.change_points.is_empty() {
                settings.push((MeanSetting::Alternative, regime_profile(&c.change_points, &c.deltas, c.seed)));
            } else if !c.deltas.is_empty() {
                return Err(Failure::Usage("deltas given without change_points".into()));
            }
            let mut runs = Vec::new();
            for m_true in c.m_true.to_vec() {
                for (means, profile) in &settings {
                    let design = ElbowDesign {
                        n: c.n,
                        p: c.p,
                        m_true,
                        profile: profile.clone(),
                        h_max: c.h_max,
                        drop_ratio: c.drop_ratio,
                        replications: c.replications,
                        innovation: noise,
                        separation: c.separation,
                        seed: c.seed,
                    };
                    let result = sim::run_elbow(&design).map_err(lib)?;
                    runs.push(ElbowRun { m_true, means: means.clone(), result });
                }
            }
            ("elbow", Results::Elbow(runs))
        }
        ExperimentConfig::Normality(c) => {
            let design = NormalityDesign {
                n: c.n,
                p: c.p,
                m_true: c.m_true,
                m_used: c.m_used.unwrap_or(c.m_true),
                splits: c.splits.clone(),
                replications: c.replications,
                innovation: innovation(c.innovation, c.df)?,
                separation: c.separation,
                seed: c.seed,
            };
            ("normality", Results::Normality(sim::run_normality(&design).map_err(lib)?))
        }
    })
}

fn summary_row(out: &mut String, name: &str, s: &Summary) {
    let _ = writeln!(out, "{name},{},{},{}", s.mean, s.sd, s.std_error);
}

/// Flat CSV of the quantities a table or figure would display.
pub fn plot_data(results: &Results) -> String {
    let mut out = String::new();
    match results {
        Results::SizePower(r) => {
            out.push_str("replications,rejections,rate,std_error,degenerate\n");
            let _ = writeln!(out, "{},{},{},{},{}", r.replications, r.rejections, r.rate, r.std_error, r.degenerate);
        }
        Results::MultiCp(r) => {
            out.push_str("count,mean,sd,std_error\n");
            summary_row(&mut out, "false_positives", &r.false_positives);
            summary_row(&mut out, "false_negatives", &r.false_negatives);
            summary_row(&mut out, "true_positives", &r.true_positives);
        }
        Results::Boundary(cells) => {
            out.push_str("tau,p,delta,detections,probability,std_error\n");
            for c in cells {
                let _ = writeln!(out, "{},{},{},{},{},{}", c.tau, c.p, c.delta, c.detections, c.probability, c.std_error);
            }
        }
        Results::Elbow(runs) => {
            out.push_str("m_true,means,h,w_hat\n");
            for run in runs {
                let means = match run.means {
                    MeanSetting::Null => "null",
                    MeanSetting::Alternative => "alternative",
                };
                for (h, w) in run.result.mean_curve.iter().enumerate() {
                    let _ = writeln!(out, "{},{means},{h},{w}", run.m_true);
                }
            }
        }
        Results::Normality(r) => {
            out.push_str("statistic,replication,zscore\n");
            for sample in &r.samples {
                let name = sample.split.map_or_else(|| "aggregate".to_string(), |t| format!("t={t}"));
                for (i, z) in sample.zscores.iter().enumerate() {
                    let _ = writeln!(out, "{name},{},{z}", i + 1);
                }
            }
        }
    }
    out
}

pub fn run(args: &SimulateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let (design, results) = execute(&config)?;
    if let Some(path) = &args.plot_data {
        write_plot_data(path, &results)?;
    }
    let output = SimulationOutput { design, seed: config.seed(), config: &config, results };
    let mut json = serde_json::to_string_pretty(&output).expect("results serialize");
    json.push('\n');
    emit(args.output.as_deref(), &json)
}

fn write_plot_data(path: &Path, results: &Results) -> Result<(), Failure> {
    fs::write(path, plot_data(results)).map_err(|e| Failure::io(path, e))
}
