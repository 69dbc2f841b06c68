//! Synthetic data from the multivariate linear process
//! `X_i = mu_i + sum_{l=0}^{M+2} Q_l eps_{i-l}`, exact moment oracles for
//! `L_t`, and seeded Monte Carlo experiment runners.

mod experiments;
mod oracle;
mod process;
mod profile;
pub mod seed;

pub use experiments::{
    ks_distance_normal, run_boundary_curve, run_elbow, run_multi_cp, run_normality, run_size_power, BoundaryCell,
    BoundaryDesign, ElbowDesign, ElbowResult, MultiCpDesign, MultiCpResult, NormalityDesign, NormalityResult,
    SizePowerDesign, SizePowerResult, StandardizedSample, Summary,
};
pub use oracle::{oracle_mean_l, oracle_mean_trace, oracle_variance, VarianceTarget};
pub use process::{build_coefficients, generate_series, Innovation, LinearProcess, LinearProcessSpec, OracleModel};
pub use profile::MeanProfile;
