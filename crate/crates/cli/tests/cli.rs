use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdcp::inference::classify_errors;
use serde_json::Value;
use tempfile::TempDir;

fn hdcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdcp")).args(args).output().expect("spawn hdcp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn detect_json(args: &[&str]) -> Value {
    let out = hdcp(&[&["detect"], args].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let out = hdcp(&[&["generate", "--output", s(&path)], extra].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

#[test]
fn constant_series_reports_degenerate_variance() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "const.csv", &"3.5,-1,2\n".repeat(12));
    let report = detect_json(&["--input", s(&input)]);
    assert_eq!(report["change_points"].as_array().unwrap().len(), 0);
    assert_eq!(report["global_test"]["degenerate"], true);
    assert_eq!(report["global_test"]["reject"], false);
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("degenerate")));
    assert_eq!(report["dependence"]["method"], "fallback");
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&hdcp(&["--help"])), 0);
    assert_eq!(code(&hdcp(&["--version"])), 0);
    assert_eq!(code(&hdcp(&["detect", "--help"])), 0);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", &"1,2\n3,4\n5,7\n2,2\n8,1\n0,0\n1,1\n4,4\n".repeat(2));
    assert_eq!(code(&hdcp(&["detect"])), 1);
    assert_eq!(code(&hdcp(&["detect", "--input", s(&input), "--bogus"])), 1);
    assert_eq!(code(&hdcp(&["detect", "--input", s(&input), "--m", "two"])), 1);
    assert_eq!(code(&hdcp(&["detect", "--input", s(&input), "--alpha", "1.5"])), 1);
    assert_eq!(code(&hdcp(&["detect", "--input", s(&input), "--min-seg", "2"])), 1);
    assert_eq!(code(&hdcp(&["detect", "--input", s(&input), "--drop-ratio", "0"])), 1);
    let cfg = write(&dir, "bad.cfg", "design = \"size_power\"\nseed = 1\nreplications = 5\nn = 30\np = 4\nm_true = 0\nextra = 1\n");
    let out = hdcp(&["simulate", "--config", s(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("extra"), "{}", stderr(&out));
    let cfg = write(&dir, "zero.cfg", "design = \"boundary\"\nseed = 1\nreplications = 0\nn = 30\ntaus = [5]\ndims = [4]\ndeltas = [1.0]\n");
    assert_eq!(code(&hdcp(&["simulate", "--config", s(&cfg)])), 1);
}

#[test]
fn data_errors_exit_with_two_and_locate_the_problem() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    assert_eq!(code(&hdcp(&["detect", "--input", s(&missing)])), 2);

    let bad = write(&dir, "bad.csv", "a,b,c\n1,2,3\n4,5,6\n7,oops,9\n");
    let out = hdcp(&["detect", "--input", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4, column 2"), "{}", stderr(&out));

    let ragged = write(&dir, "ragged.csv", "1,2,3\n4,5\n");
    let out = hdcp(&["detect", "--input", s(&ragged)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let short = write(&dir, "short.csv", "1\n2\n3\n");
    assert_eq!(code(&hdcp(&["detect", "--input", s(&short), "--m", "0"])), 2);

    let nonfinite = write(&dir, "nan.csv", "1,2\nNaN,1\n3,3\n4,4\n5,5\n");
    assert_eq!(code(&hdcp(&["detect", "--input", s(&nonfinite), "--m", "0"])), 2);
}

#[test]
fn header_and_delimiter_are_detected() {
    let dir = TempDir::new().unwrap();
    let mut body = String::from("left; right\n");
    for i in 0..12 {
        body.push_str(&format!("{}; {}\n", i % 3, (i * 7) % 5));
    }
    let input = write(&dir, "semi.csv", &body);
    let report = detect_json(&["--input", s(&input), "--m", "0"]);
    assert_eq!(report["input"]["delimiter"], ";");
    assert_eq!(report["input"]["header"], serde_json::json!(["left", "right"]));
    assert_eq!(report["input"]["n"], 12);
    assert_eq!(report["input"]["p"], 2);
    assert_eq!(report["dependence"]["method"], "fixed");

    let tabbed = write(&dir, "tab.txt", &body.replace("; ", "|"));
    let report = detect_json(&["--input", s(&tabbed), "--m", "0", "--delimiter", "|"]);
    assert_eq!(report["input"]["delimiter"], "|");
}

#[test]
fn report_echoes_settings_and_writes_trace_files() {
    let dir = TempDir::new().unwrap();
    let input = generate(&dir, "d.csv", &["--n", "60", "--p", "20", "--change-points", "30", "--deltas", "0,1", "--seed", "2"]);
    let prefix = dir.path().join("plot");
    let out_path = dir.path().join("report.json");
    let out = hdcp(&[
        "detect", "--input", s(&input), "--alpha", "0.1", "--fwer", "--seed", "77", "--output", s(&out_path), "--trace", s(&prefix),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let settings = &report["settings"];
    assert_eq!(settings["alpha"], 0.1);
    assert_eq!(settings["fwer"], true);
    assert_eq!(settings["seed"], 77);
    assert_eq!(settings["m_requested"], "auto");
    assert!((settings["segment_level"].as_f64().unwrap() - 1.0 / (60.0 * 60f64.ln())).abs() < 1e-15);
    assert_eq!(report["statistic_trace"].as_array().unwrap().len(), 59);

    let statistic = fs::read_to_string(dir.path().join("plot_statistic.csv")).unwrap();
    assert_eq!(statistic.lines().next(), Some("t,L_t"));
    assert_eq!(statistic.lines().count(), 60);
    let elbow = fs::read_to_string(dir.path().join("plot_elbow.csv")).unwrap();
    let h_max = settings["h_max"].as_u64().unwrap() as usize;
    assert_eq!(elbow.lines().count(), h_max + 2);
}

#[test]
fn auto_order_recovers_two_on_dependent_data() {
    let dir = TempDir::new().unwrap();
    let seeds = 10;
    let mut hits = 0;
    for seed in 0..seeds {
        let input = generate(&dir, "m2.csv", &["--n", "150", "--p", "600", "--m", "2", "--seed", &seed.to_string()]);
        let report = detect_json(&["--input", s(&input)]);
        assert_eq!(report["dependence"]["method"], "elbow");
        assert!(report["dependence"]["curve"].as_array().unwrap().len() > 3);
        hits += usize::from(report["dependence"]["m_used"] == 2);
    }
    assert!(hits * 10 >= seeds * 8, "M = 2 recovered in {hits}/{seeds} runs");
}

#[test]
fn strong_multiple_changes_are_found() {
    let dir = TempDir::new().unwrap();
    let truth = [15usize, 75, 105];
    let runs = 10;
    let (mut fp, mut fn_, mut tp) = (0, 0, 0);
    for seed in 0..runs {
        let input = generate(
            &dir,
            "t2.csv",
            &["--n", "150", "--p", "200", "--change-points", "15,75,105", "--deltas", "0,1.5,0,1.5", "--seed", &seed.to_string()],
        );
        let report = detect_json(&["--input", s(&input), "--m", "0", "--fwer"]);
        let found: Vec<usize> =
            report["change_points"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
        let c = classify_errors(&found, &truth, 0);
        fp += c.false_positives;
        fn_ += c.false_negatives;
        tp += c.true_positives;
    }
    let mean = |k: usize| k as f64 / runs as f64;
    assert!(mean(tp) >= 2.6 && mean(fp) <= 0.45 && mean(fn_) <= 0.45, "TP {tp} FP {fp} FN {fn_} over {runs}");
}

#[test]
fn simulate_is_repeatable_and_writes_plot_data() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "elbow.cfg",
        "design = \"elbow\"\nseed = 4\nreplications = 6\nn = 60\np = 30\nm_true = [0, 2]\nchange_points = [30]\ndeltas = [0.0, 1.0]\n",
    );
    let plot = dir.path().join("curves.csv");
    let first = hdcp(&["simulate", "--config", s(&cfg), "--plot-data", s(&plot)]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let second = hdcp(&["simulate", "--config", s(&cfg)]);
    assert_eq!(first.stdout, second.stdout);

    let results: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(results["design"], "elbow");
    assert_eq!(results["seed"], 4);
    assert_eq!(results["config"]["replications"], 6);
    let runs = results["results"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    let csv = fs::read_to_string(&plot).unwrap();
    assert_eq!(csv.lines().next(), Some("m_true,means,h,w_hat"));
    let h_max = runs[0]["result"]["h_max"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), 1 + 4 * (h_max + 1));
    assert!(csv.lines().any(|l| l.starts_with("2,alternative,0,")));
}

#[test]
fn worker_count_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_hdcp")).args(["--version"]).env("HDCP_THREADS", "0").output().unwrap();
    // Parsing succeeds before the pool is configured, so `--version` is unaffected.
    assert_eq!(code(&out), 0);
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", "1\n2\n3\n4\n5\n6\n");
    let out = Command::new(env!("CARGO_BIN_EXE_hdcp"))
        .args(["detect", "--input", s(&input)])
        .env("HDCP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}
