use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_clr-magcount"));
    c.env_remove("CLR_MAGCOUNT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The CSV body without the `#` provenance lines.
fn body(o: &Output) -> String {
    stdout(o).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("clr-magcount-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn count_prints_per_channel_table() {
    let o = run(&["count", "--field", "gaussian:alpha=2.5", "--potential", "disk:r=1", "--lambda", "1e-4", "--operator", "pauli"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("# total(lambda=1.0000000000000000e-4): 3"), "{out}");
    let b = body(&o);
    let mut lines = b.lines();
    assert_eq!(lines.next(), Some("lambda,spin,m,count,near_zero"));
    let total: u64 = lines.map(|l| l.split(',').nth(3).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 3);
}

#[test]
fn functionals_flag_divergence() {
    let o = run(&["functionals", "--potential", "w_sigma:sigma=2", "--p", "2", "--a", "1"]);
    assert!(o.status.success());
    let b = body(&o);
    let row = |name: &str| b.lines().find(|l| l.starts_with(name)).unwrap().split(',').map(String::from).collect::<Vec<_>>();
    assert_eq!(row("mixed_norm")[3], "false");
    assert_eq!(row("log_global")[3], "true");
    assert_eq!(row("bracket_a")[3], "false");
    let v: f64 = row("bracket_a")[1].parse().unwrap();
    assert!(v.is_finite() && v > 0.0);
}

#[test]
fn config_errors_exit_2() {
    let o = run(&["count", "--field", "gaussian:alpha=0.3", "--potential", "disk:r=1", "--lambda", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty lambda list"));
    assert_eq!(run(&["count", "--potential", "blob", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--potential", "disk", "--lambda-range", "10,1,3"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--case", "pauli_int", "--field", "gaussian:alpha=2", "--potential", "w_sigma:sigma=2", "--lambda-range", "1,10,2"]).status.code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_3() {
    let o = run(&["count", "--potential", "disk", "--lambda", "1e6"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
}

#[test]
fn reruns_and_thread_counts_agree() {
    let args = ["sweep", "--field", "gaussian:alpha=1.5", "--potential", "gaussian:width=1", "--lambda-range", "0.1,300,6"];
    let a = bin().args(args).arg("--threads").arg("1").output().unwrap();
    let b = bin().args(args).env("CLR_MAGCOUNT_THREADS", "4").output().unwrap();
    let c = bin().args(args).arg("--threads").arg("3").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));
    let t = bin().args(args).arg("--timestamps").output().unwrap();
    assert!(stdout(&t).contains("# timestamp:"));
    assert_eq!(body(&t), body(&a));
}

#[test]
fn seventeen_significant_digits() {
    let o = run(&["functionals", "--potential", "disk:r=1"]);
    let b = body(&o);
    let l1 = b.lines().find(|l| l.starts_with("l1_norm")).unwrap().split(',').nth(1).unwrap().to_string();
    let mantissa = l1.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{l1}");
    assert!((l1.parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn config_file_supplies_defaults() {
    let cfg = scratch("count.json");
    std::fs::write(&cfg, r#"{"subcommand": "count", "field": "gaussian:alpha=1", "potential": "disk:r=1", "lambda": "1e-4", "format": "json"}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["provenance"]["subcommand"], "count");
    assert_eq!(doc["result"]["reports"][0]["total"], 2);
    // a flag overrides the file
    let o = run(&["count", "--config", cfg.to_str().unwrap(), "--operator", "schrodinger"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["result"]["reports"][0]["total"], 0);
    std::fs::write(&cfg, r#"{"subcommand": "count", "colour": "blue"}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_potential_documents() {
    let o = run(&["functionals", "--potential", r#"{"type": "gaussian", "amplitude": 2.0, "width": 1.0}"#, "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let l1 = doc["result"]["l1_norm"]["value"].as_f64().unwrap();
    assert!((l1 - 2.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn verify_writes_summary_and_plot() {
    let plot = scratch("verify.dat");
    let summary = scratch("verify.md");
    let o = run(&[
        "verify",
        "--case",
        "schrodinger_nonint",
        "--field",
        "gaussian:alpha=0.5",
        "--potential",
        "disk",
        "--lambda-range",
        "0.01,100,5",
        "--plot",
        plot.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(body(&o).starts_with("lambda,count,rhs_shape"));
    let md = std::fs::read_to_string(&summary).unwrap();
    assert!(md.contains("| schrodinger_nonint |"), "{md}");
    let dat = std::fs::read_to_string(&plot).unwrap();
    assert!(dat.starts_with("# lambda count rhs_shape"));
    assert_eq!(dat.lines().count(), 6);
}

#[test]
fn verify_comparison_and_weak_coupling() {
    let o = run(&["verify", "--case", "comparison", "--field", "gaussian:alpha=1.5", "--potential", "disk", "--lambda-range", "1,100,3"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("| true |"));
    let o = run(&["verify", "--case", "weak_coupling", "--field", "gaussian:alpha=2.5", "--potential", "disk", "--lambda-range", "1e-4,1e-4,1"]);
    assert!(o.status.success());
    assert!(body(&o).contains("1.0000000000000000e-4,3,0"), "{}", body(&o));
}

#[test]
fn kernels_and_hardy_reports() {
    let o = run(&["kernels", "--kernel", "log_interior", "--potential", "disk:r=1", "--lambda", "0,10", "--samples", "32"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = body(&o);
    assert!(b.contains("trace,,2.5000000000000000e-1") || b.contains("trace,,2.4999999999999"), "{b}");
    assert!(b.contains("psd_pass,,true"));
    assert!(b.contains("count,0.0000000000000000e0,0"));
    assert_eq!(run(&["kernels", "--kernel", "min_power"]).status.code(), Some(2));

    let o = run(&["hardy", "--format", "json", "--trials", "10"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = doc["result"]["verification"]["constant"]["value"]["value"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-6);
    assert_eq!(doc["result"]["verification"]["pass"], true);
    let o = run(&["hardy", "--case", "channel", "--m", "1", "--alpha", "2.5", "--outer", "--elements", "2000", "--trials", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(body(&o).lines().filter(|l| l.starts_with("negative(")).all(|l| l.ends_with(",0")));
}
