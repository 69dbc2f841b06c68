use std::fmt::Write as _;
use std::fs;

use hdcp::sim::{generate_series, seed, Innovation, LinearProcessSpec, MeanProfile};

use crate::failure::Failure;
use crate::GenerateArgs;

pub fn run(args: &GenerateArgs) -> Result<(), Failure> {
    let mut spec = LinearProcessSpec::new(args.n, args.p, args.m, args.seed);
    if let Some(df) = args.student_t {
        spec.innovation = Innovation::StudentT { df };
    }
    let deltas = if args.deltas.is_empty() && args.change_points.is_empty() { vec![0.0] } else { args.deltas.clone() };
    let profile = MeanProfile {
        change_points: args.change_points.clone(),
        deltas,
        support_size: None,
        sign_seed: seed::derive(args.seed, seed::PROFILE, 0),
    };
    let series = generate_series(&spec, &profile).map_err(Failure::from_config)?;
    let values = series.values();
    let mut out = String::new();
    for i in 0..series.n() {
        for j in 0..series.p() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", values[(i, j)]);
        }
        out.push('\n');
    }
    fs::write(&args.output, out).map_err(|e| Failure::io(&args.output, e))
}
