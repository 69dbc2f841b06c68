use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hdcp::dependence::{default_h_max, lag_energy_curve_with, select_m};
use hdcp::engine::SeparationRule;
use hdcp::inference::{binary_segmentation, Analysis, InferenceConfig};
use hdcp::{DependenceWindow, SegmentStatus};

use crate::failure::Failure;
use crate::input::{self, LoadedMatrix};
use crate::report::{DependenceChoice, DetectReport, InputDigest, OrderMethod, Settings};
use crate::DetectArgs;

enum OrderRequest {
    Auto,
    Fixed(usize),
}

fn parse_order(raw: &str) -> Result<OrderRequest, Failure> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(OrderRequest::Auto);
    }
    raw.parse()
        .map(OrderRequest::Fixed)
        .map_err(|_| Failure::Usage(format!("--m expects a non-negative integer or 'auto', got '{raw}'")))
}

fn choose_order(
    data: &LoadedMatrix,
    request: &OrderRequest,
    args: &DetectArgs,
    rule: SeparationRule,
    warnings: &mut Vec<String>,
) -> Result<DependenceChoice, Failure> {
    if let OrderRequest::Fixed(m) = *request {
        return Ok(DependenceChoice { m_used: m, method: OrderMethod::Fixed, curve: None, saturated: false });
    }
    if !(args.drop_ratio > 0.0 && args.drop_ratio < 1.0) {
        return Err(Failure::Usage(format!("--drop-ratio must lie in (0, 1); got {}", args.drop_ratio)));
    }
    let h_max = args.h_max.unwrap_or_else(|| default_h_max(data.series.n()));
    let curve = lag_energy_curve_with(&data.series, h_max, rule).map_err(Failure::from_data)?;
    match select_m(&curve, args.drop_ratio) {
        Ok(sel) => {
            if sel.saturated {
                warnings.push(format!("lag energy curve never levelled off up to h_max = {h_max}; M set to h_max"));
            }
            Ok(DependenceChoice { m_used: sel.m, method: OrderMethod::Elbow, curve: Some(curve.w_hat), saturated: sel.saturated })
        }
        Err(hdcp::Error::NonPositiveBaseline(w0)) => {
            warnings.push(format!("lag energy baseline w(0) = {w0} is not positive; falling back to M = 0"));
            Ok(DependenceChoice { m_used: 0, method: OrderMethod::Fallback, curve: Some(curve.w_hat), saturated: false })
        }
        Err(e) => Err(Failure::from_data(e)),
    }
}

pub fn build_report(args: &DetectArgs) -> Result<DetectReport, Failure> {
    let request = parse_order(&args.m)?;
    let data = input::load(&args.input, args.delimiter.as_deref())?;
    let rule = SeparationRule::from(args.separation);
    let mut warnings = Vec::new();
    let dependence = choose_order(&data, &request, args, rule, &mut warnings)?;
    let window = DependenceWindow::new(dependence.m_used);

    let cfg = InferenceConfig {
        alpha: args.alpha,
        alpha_seg: None,
        min_segment_len: args.min_seg,
        fwer_mode: args.fwer,
        separation: rule,
    };
    cfg.validate(window).map_err(Failure::from_data)?;
    let analysis = Analysis::new(&data.series, window, rule).map_err(Failure::from_data)?;
    let global_test = analysis.test_aggregate(cfg.alpha).map_err(Failure::from_data)?;
    let segmentation = binary_segmentation(&data.series, window, &cfg).map_err(Failure::from_data)?;

    if global_test.degenerate {
        warnings.push("variance estimate of the global test is degenerate; no rejection possible".into());
    }
    let degenerate_segments = segmentation
        .trace
        .iter()
        .filter(|r| matches!(r.status, SegmentStatus::Tested { outcome, .. } if outcome.degenerate))
        .count();
    if degenerate_segments > 0 {
        warnings.push(format!("{degenerate_segments} segment test(s) had a degenerate variance estimate"));
    }

    let n = data.series.n();
    Ok(DetectReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: InputDigest {
            path: args.input.display().to_string(),
            sha256: data.sha256,
            n,
            p: data.series.p(),
            delimiter: data.delimiter.to_string(),
            header: data.header,
        },
        settings: Settings {
            alpha: cfg.alpha,
            fwer: cfg.fwer_mode,
            segment_level: cfg.segment_level(n),
            min_segment_len: cfg.min_segment_len(window),
            m_requested: args.m.to_ascii_lowercase(),
            drop_ratio: args.drop_ratio,
            h_max: match request {
                OrderRequest::Auto => Some(args.h_max.unwrap_or_else(|| default_h_max(n))),
                OrderRequest::Fixed(_) => None,
            },
            separation: rule,
            seed: args.seed,
        },
        dependence,
        global_test,
        argmax: analysis.argmax(),
        change_points: segmentation.points,
        segments: segmentation.trace,
        statistic_trace: analysis.trace,
        warnings,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_trace_files(prefix: &Path, report: &DetectReport) -> Result<(), Failure> {
    let mut body = String::from("t,L_t\n");
    for (i, v) in report.statistic_trace.iter().enumerate() {
        body.push_str(&format!("{},{v}\n", i + 1));
    }
    let path = with_suffix(prefix, "_statistic.csv");
    fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
    if let Some(curve) = &report.dependence.curve {
        let mut body = String::from("h,w_hat\n");
        for (h, w) in curve.iter().enumerate() {
            body.push_str(&format!("{h},{w}\n"));
        }
        let path = with_suffix(prefix, "_elbow.csv");
        fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
    }
    Ok(())
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(format!("cannot write to standard output: {e}"))),
    }
}

pub fn run(args: &DetectArgs) -> Result<(), Failure> {
    let report = build_report(args)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(args.output.as_deref(), &text)?;
    if let Some(prefix) = &args.trace {
        write_trace_files(prefix, &report)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use clap::Parser;

    use super::*;
    use crate::Cli;

    fn args(input: &Path, extra: &[&str]) -> DetectArgs {
        let mut argv = vec!["hdcp", "detect", "--input", input.to_str().unwrap()];
        argv.extend_from_slice(extra);
        match Cli::parse_from(argv).command {
            crate::Command::Detect(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let mut body = String::from("c1,c2,c3\n");
        for i in 0..40u32 {
            let shift = if i >= 20 { 2.5 } else { 0.0 };
            let (a, b, c) = ((i * 37 % 11) as f64 / 7.0, (i * 13 % 7) as f64 / 3.0, (i * 5 % 9) as f64 / 11.0);
            body.push_str(&format!("{},{},{}\n", a + shift, b - shift, c / 3.0));
        }
        fs::write(&path, body).unwrap();
        for extra in [&[][..], &["--m", "1", "--fwer", "--seed", "3"][..]] {
            let report = build_report(&args(&path, extra)).unwrap();
            let text = serde_json::to_string_pretty(&report).unwrap();
            let back: DetectReport = serde_json::from_str(&text).unwrap();
            assert_eq!(back, report);
            assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        }
    }

    #[test]
    fn order_argument() {
        assert!(matches!(parse_order("AUTO"), Ok(OrderRequest::Auto)));
        assert!(matches!(parse_order("3"), Ok(OrderRequest::Fixed(3))));
        assert!(parse_order("-1").is_err());
    }
}
