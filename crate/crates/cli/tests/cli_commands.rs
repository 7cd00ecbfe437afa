use std::path::Path;
use std::process::Command;

use prony_bath::prony::{fit_part, FitPolicy};
use prony_bath::spectral::{analytic_lorentzian_real_part, sample_correlation};
use prony_bath::{BathParameters, Part, QuadratureConfig, SpectralDensity, TimeGrid};
use prony_bath_cli::output::json_bytes;
use prony_bath_cli::{
    cmd_compare, cmd_cost, cmd_fit, cmd_spectrum, read_series, CliError, FailureKind, RunConfig,
    SpectrumPart,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prony-bath"))
}

fn config(json: &str) -> RunConfig {
    RunConfig::from_json(json).unwrap()
}

fn error_json(stderr: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(stderr);
    let line = text.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).unwrap()
}

fn run_with_config(dir: &Path, json: &str, args: &[&str]) -> std::process::Output {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    bin()
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn unknown_keys_are_rejected() {
    for bad in [
        r#"{"bogus": 1}"#,
        r#"{"grid": {"t_cut": 80, "n": 100, "dt": 1}}"#,
        r#"{"density": {"kind": "lorentzian", "width": 10, "delta": 2}}"#,
        r#"{"fit": {"k_i": 4, "target_error": 1e-3}}"#,
        r#"{"fit": {"k_i": 0}}"#,
        r#"{"compare": {"betas": [10, 100], "anchor_k": [5]}}"#,
        r#"{"psd": {"p_range": [0, 10]}}"#,
        r#"{"bath": {"beta": -1}}"#,
    ] {
        let e = RunConfig::from_json(bad).unwrap_err();
        assert_eq!(e.kind, FailureKind::Config, "{bad}: {e}");
    }
    let defaults = config("{}");
    assert_eq!(defaults, RunConfig::default());
    assert_eq!(defaults.grid.n, 1000);
    assert_eq!(defaults.grid.t_cut, 80.0);
    assert_eq!(defaults.bath.beta, 10.0);
    assert_eq!(defaults.k_imag(), Some(4));
}

#[test]
fn exit_codes_and_error_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with_config(dir.path(), r#"{"bogus": 1}"#, &["fit"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out.stderr);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["exit_code"], 2);
    assert!(e["error"]["message"].as_str().unwrap().contains("bogus"));

    let semicircle = r#"{"density": {"kind": "semicircle", "width": 10}, "fit": {"k_r": "analytic", "k_i": 8}, "grid": {"t_cut": 80, "n": 100}}"#;
    let out = run_with_config(dir.path(), semicircle, &["fit"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_json(&out.stderr)["error"]["kind"], "unsupported");

    let psd_semicircle = r#"{"density": {"kind": "semicircle", "width": 10}, "compare": {"betas": [10], "k_range": [3], "methods": ["psd"], "anchor_k": []}}"#;
    let out = run_with_config(dir.path(), psd_semicircle, &["compare"]);
    assert_eq!(out.status.code(), Some(4));

    let out = bin().args(["cost", "--k", "2.5", "--l", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out.stderr)["error"]["exit_code"], 2);

    let out = bin()
        .args(["spectrum", "--series"])
        .arg(dir.path().join("missing.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let err = CliError::from(prony_bath::Error::RootsNotConverged { iterations: 3, degree: 9 });
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn thread_flag_overrides_environment() {
    let out = bin()
        .args(["cost", "--k", "5", "--n-u", "2", "--l", "6"])
        .env("PRONY_BATH_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["cost", "--k", "5", "--n-u", "2", "--l", "6", "--threads", "2"])
        .env("PRONY_BATH_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["first"]["n_ado"], "60459");
}

#[test]
fn cost_examples() {
    let c = cmd_cost(5, 1, 2, 6, None).unwrap();
    assert_eq!(c.first.n_ado.to_string(), "60459");
    assert_eq!(c.first.k_tilde, 20);
    assert!(c.ratio.is_none());
    let one = cmd_cost(7, 2, 3, 1, None).unwrap();
    assert_eq!(one.first.n_ado.to_string(), one.first.k_tilde.to_string());
    // fitted K against four times as many pole terms at L = 6
    let r = cmd_cost(5, 1, 2, 6, Some((20, 6))).unwrap().ratio.unwrap();
    assert_eq!(r.order(), -4);
    assert!(cmd_cost(0, 1, 1, 1, None).is_err());
}

#[test]
fn series_file_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with_config(dir.path(), r#"{"grid": {"t_cut": 80, "n": 200}}"#, &["fit"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("series.json");
    let first = std::fs::read(&path).unwrap();
    let series = read_series(&path).unwrap();
    assert_eq!(json_bytes(&series).unwrap(), first);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    // a negative real root is emitted as two half-amplitude terms
    assert_eq!(report["terms"], series.len());
    assert_eq!(report["terms"], report["imag"]["terms"].as_u64().unwrap() + 1);
    assert_eq!(report["k_i"], 4);
    assert_eq!(report["k_r"], "analytic");
}

#[test]
fn samples_csv_is_written_on_request() {
    let cfg = config(r#"{"grid": {"t_cut": 8, "n": 50}, "output": {"samples_csv": true}}"#);
    let out = cmd_fit(&cfg).unwrap();
    let files = out.artifacts().unwrap();
    let csv = files.iter().find(|a| a.name == "samples.csv").unwrap();
    let text = String::from_utf8(csv.bytes.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,c_real,c_imag"));
    assert_eq!(lines.count(), 101);
    assert!(text.contains("0.0000000000000000e0,5.0000000000000000e0,"));
}

#[test]
fn analytic_real_part_spectrum_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let d = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
    let s = analytic_lorentzian_real_part(&d).unwrap();
    let path = dir.path().join("real.json");
    std::fs::write(&path, json_bytes(&s).unwrap()).unwrap();
    let out = cmd_spectrum(&RunConfig::default(), &read_series(&path).unwrap(), SpectrumPart::Real).unwrap();
    assert!(out.summary.max_abs_diff <= 1e-10);
    let csv = String::from_utf8(out.artifacts().unwrap()[0].bytes.clone()).unwrap();
    for line in csv.lines().skip(1) {
        let diff: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(diff <= 1e-10);
    }
}

#[test]
fn semicircle_fit_and_spectrum() {
    let cfg = config(r#"{"density": {"kind": "semicircle", "width": 10}, "fit": {"k_r": 7, "k_i": 8}}"#);
    let fit = cmd_fit(&cfg).unwrap();
    assert_eq!(fit.series.len(), 15);
    assert_eq!(fit.report.terms, 15);
    let out = cmd_spectrum(&cfg, &fit.series, SpectrumPart::Full).unwrap();
    let c = &out.curve;
    let outside = c.omega.iter().zip(&c.exact).filter(|(w, _)| w.abs() > 10.0);
    let mut count = 0;
    for (_, e) in outside {
        assert_eq!(*e, 0.0);
        count += 1;
    }
    assert!(count > 100);
}

#[test]
fn target_error_search_matches_exhaustive_scan() {
    let json = r#"{"grid": {"t_cut": 80, "n": 200}, "fit": {"target_error": 5e-2, "k_max": 12}}"#;
    let cfg = config(json);
    let out = cmd_fit(&cfg).unwrap();

    let d = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
    let b = BathParameters::fermionic(10.0).unwrap();
    let grid = TimeGrid::new(80.0, 200).unwrap();
    let s = sample_correlation(&d, &b, &grid, Part::Imag, &QuadratureConfig::default()).unwrap();
    let scan = (1..=12)
        .find(|&k| fit_part(&s, k, &FitPolicy::default()).unwrap().1.relative_residual <= 5e-2)
        .expect("some K reaches the target");
    assert_eq!(out.report.k_i, scan);
    assert!(out.report.imag.relative_residual <= 5e-2);
    assert_eq!(out.report.target_error, Some(5e-2));
}

#[test]
fn compare_table_shapes() {
    let base = r#""grid": {"t_cut": 80, "n": 150}, "compare": {"betas": [10], "k_range": [4]"#;
    let single = config(&format!(r#"{{{base}, "methods": ["psd"], "anchor_k": [4]}}}}"#));
    let out = cmd_compare(&single).unwrap();
    assert!(out.summary.ratios.is_none());
    assert_eq!(out.summary.tables.len(), 1);
    assert_eq!(out.summary.tables[0].rows.len(), 1);
    let json = String::from_utf8(out.artifacts().unwrap()[1].bytes.clone()).unwrap();
    assert!(!json.contains("ratios"));

    let both = config(&format!(r#"{{{base}, "methods": ["pfd", "psd"], "anchor_k": [4]}}}}"#));
    let out = cmd_compare(&both).unwrap();
    assert_eq!(out.summary.tables[0].rows.len(), 2);
    let ratios = out.summary.ratios.as_ref().unwrap();
    assert_eq!(ratios.len(), 1);
    assert!(ratios[0].psd_error <= ratios[0].pfd_error);
    let csv = String::from_utf8(out.artifacts().unwrap()[0].bytes.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("beta,method,k,error"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn selftest_passes() {
    let out = bin().args(["selftest", "--seed", "11"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}
