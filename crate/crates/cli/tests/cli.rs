//! End-to-end tests driving the compiled binary: exit codes, format
//! selection, config-file precedence and the numeric claims each
//! subcommand prints.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_l1rates"))
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        stderr(out)
    );
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

/// Extracts one numeric field from a pretty-printed JSON payload.
fn json_number(payload: &str, key: &str) -> f64 {
    let needle = format!("\"{key}\":");
    let line = payload
        .lines()
        .find(|l| l.trim_start().starts_with(&needle))
        .unwrap_or_else(|| panic!("no key {key} in {payload}"));
    line.split(':')
        .nth(1)
        .unwrap()
        .trim()
        .trim_end_matches(',')
        .parse()
        .unwrap_or_else(|e| panic!("bad number for {key}: {e}"))
}

#[test]
fn help_and_version_exit_zero() {
    assert_exit(&run(&["--help"]), 0);
    assert_exit(&run(&["--version"]), 0);
    assert_exit(&run(&["verify-source-sets", "--help"]), 0);
}

#[test]
fn verify_families_default_to_a_json_report() {
    let out = run(&[
        "verify-source-sets",
        "--construction",
        "bidiagonal",
        "--c",
        "0.5",
        "--n",
        "1,2,4",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert_eq!(text.matches("\"pass\": true").count(), 3, "{text}");
    assert_eq!(text.matches("\"c\": 0.5").count(), 3, "{text}");
}

#[test]
fn verify_accepts_the_operator_spelling_too() {
    let out = run(&[
        "verify-source-sets",
        "--operator",
        "bidiagonal",
        "--c",
        "0.5",
        "--n",
        "2",
        "--format",
        "csv",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.starts_with("n,c,depth,cond_i_max_error,max_col_sum,pass\n"), "{text}");
    assert!(text.contains(",true"), "{text}");
}

#[test]
fn verify_smoothing_families_fix_their_own_constant() {
    let out = run(&[
        "verify-source-sets",
        "--construction",
        "haar",
        "--n",
        "1,2",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert_eq!(text.matches("\"pass\": true").count(), 2, "{text}");

    // Passing --c with the haar construction is invalid input.
    let out = run(&[
        "verify-source-sets",
        "--construction",
        "haar",
        "--n",
        "1",
        "--c",
        "0.5",
    ]);
    assert_exit(&out, 1);
}

#[test]
fn unknown_operator_is_invalid_input() {
    let out = run(&[
        "verify-source-sets",
        "--operator",
        "fourier",
        "--c",
        "0.5",
        "--n",
        "1",
    ]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("fourier"), "{}", stderr(&out));
}

#[test]
fn missing_required_value_is_invalid_input() {
    let out = run(&["verify-source-sets", "--construction", "bidiagonal"]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("--n"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_invalid_input_but_help_is_not() {
    let out = run(&["verify-source-sets", "--bogus"]);
    assert_exit(&out, 1);
}

#[test]
fn phi_matches_the_closed_form_example() {
    // Reference = first unit sequence, c = 1/2, single family n = 1:
    // phi(t) = (4 sqrt 2 / 3) t and the exponent is 1/3.
    let out = run(&[
        "compute-phi",
        "--construction",
        "bidiagonal",
        "--c",
        "0.5",
        "--n-ladder",
        "1",
        "--xdag",
        "e1",
        "--t",
        "1.0,0.5",
        "--format",
        "json",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    let slope = 4.0 * 2f64.sqrt() / 3.0;
    assert!((json_number(&text, "beta") - 1.0 / 3.0).abs() < 1e-12, "{text}");
    let phi1 = text.lines().filter(|l| l.contains("\"phi\"")).count();
    assert_eq!(phi1, 2, "{text}");
    // First row is t = 1.
    let first_phi = json_number(&text, "phi");
    assert!((first_phi - slope).abs() < 1e-12, "{text}");
}

#[test]
fn phi_defaults_to_a_log_grid_csv() {
    let out = run(&[
        "compute-phi",
        "--construction",
        "bidiagonal",
        "--c",
        "0.5",
        "--n-ladder",
        "1,2,4",
        "--xdag",
        "k2:64",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,phi");
    assert_eq!(lines.len(), 26, "header + 25 grid points: {text}");
    let first: Vec<&str> = lines[1].split(',').collect();
    let last: Vec<&str> = lines[25].split(',').collect();
    let t0: f64 = first[0].parse().unwrap();
    let t_end: f64 = last[0].parse().unwrap();
    assert!((t0 - 1e-6).abs() < 1e-18, "{text}");
    assert!((t_end - 1.0).abs() < 1e-12, "{text}");
    // phi is increasing along the grid.
    let phis: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(phis.windows(2).all(|w| w[0] <= w[1]), "{text}");
}

#[test]
fn vie_sampling_reports_nonnegative_margins() {
    let out = run(&[
        "check-vie",
        "--construction",
        "bidiagonal",
        "--c",
        "0.5",
        "--n-ladder",
        "1,2,4,8",
        "--xdag",
        "e1",
        "--samples",
        "200",
        "--seed",
        "11",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("\"pass\": true"), "{text}");
    let min_margin = json_number(&text, "min_margin");
    let mean_margin = json_number(&text, "mean_margin");
    assert!(min_margin >= -1e-9, "{text}");
    assert!(mean_margin >= min_margin, "{text}");
}

#[test]
fn vie_with_an_inflated_exponent_fails_numerically() {
    // At beta = 1 the inequality must fail on random candidates.
    let out = run(&[
        "check-vie",
        "--construction",
        "bidiagonal",
        "--c",
        "0.5",
        "--n-ladder",
        "1,2,4,8",
        "--xdag",
        "e1",
        "--beta",
        "1.0",
        "--samples",
        "500",
        "--seed",
        "3",
    ]);
    assert_exit(&out, 2);
    let text = stdout(&out);
    assert!(text.contains("\"pass\": false"), "{text}");
    assert!(json_number(&text, "min_margin") < -1e-9, "{text}");
}

#[test]
fn solve_returns_zero_when_the_weight_dominates() {
    // alpha beyond the dual norm of the data forces the zero minimizer.
    let out = run(&[
        "solve",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--alpha",
        "10.0",
        "--dim",
        "8",
        "--format",
        "csv",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let value = line.split(',').nth(1).unwrap();
        assert_eq!(value.parse::<f64>().unwrap(), 0.0, "{text}");
    }
}

#[test]
fn solve_reads_data_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let ypath = dir.path().join("y.csv");
    // Exact image of e1 under the bidiagonal map is e1 itself.
    std::fs::write(&ypath, "index,value\n1,1.0\n").unwrap();
    let out = run(&[
        "solve",
        "--operator",
        "bidiagonal",
        "--y",
        ypath.to_str().unwrap(),
        "--alpha",
        "1e-8",
        "--dim",
        "16",
        "--tol",
        "1e-12",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(json_number(&text, "residual") < 1e-6, "{text}");
    assert!(json_number(&text, "objective") < 1e-6, "{text}");
    assert!(json_number(&text, "optimality_residual") < 1e-11, "{text}");
    assert!(text.contains("\"iterations\""), "{text}");
}

#[test]
fn solve_rejects_both_data_sources_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let ypath = dir.path().join("y.csv");
    std::fs::write(&ypath, "index,value\n1,1.0\n").unwrap();
    let out = run(&[
        "solve",
        "--operator",
        "bidiagonal",
        "--y",
        ypath.to_str().unwrap(),
        "--xdag",
        "e1",
        "--alpha",
        "0.1",
        "--dim",
        "8",
    ]);
    assert_exit(&out, 1);
}

#[test]
fn select_alpha_meets_the_discrepancy_bound() {
    let out = run(&[
        "select-alpha",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--delta",
        "1e-2",
        "--dim",
        "64",
        "--seed",
        "5",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    let residual = json_number(&text, "residual");
    let bound = json_number(&text, "bound");
    assert!((bound - 1.5e-2).abs() < 1e-15, "{text}");
    assert!(residual <= bound, "{text}");
}

#[test]
fn exhausted_weight_grid_is_a_numerical_failure() {
    // Two huge weights cannot push the residual below the tiny bound.
    let out = run(&[
        "select-alpha",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--delta",
        "1e-12",
        "--dim",
        "8",
        "--alpha0",
        "10.0",
        "--ratio",
        "0.9",
        "--count",
        "2",
    ]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("exhausted"), "{}", stderr(&out));
}

#[test]
fn sweep_csv_is_deterministic_per_seed() {
    let args = [
        "sweep",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--deltas",
        "1e-1,1e-2",
        "--dim",
        "32",
        "--n-ladder",
        "1,2",
        "--c",
        "0.5",
        "--seed",
        "42",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_success(&first);
    let a = stdout(&first);
    let b = stdout(&second);
    assert_eq!(a, b);
    assert!(
        a.starts_with("delta,alpha,l1_error,residual,phi_delta,iterations,status\n"),
        "{a}"
    );
    assert_eq!(a.matches(",ok").count(), 2, "{a}");

    let mut other_args = args;
    other_args[14] = "43";
    let third = run(&other_args);
    assert_success(&third);
    assert_ne!(a, stdout(&third));
}

#[test]
fn beta1_demo_ratios_double_with_depth() {
    let out = run(&[
        "beta1-demo",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--n",
        "1,2,4,8",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.starts_with("n,gap,image_distance,ratio\n"), "{text}");
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios, vec![2.0, 4.0, 8.0, 16.0], "{text}");
}

#[test]
fn config_supplies_defaults_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# defaults for family verification\nconstruction = bidiagonal\nc = 0.3\nn = 1,2\nformat = csv\n",
    )
    .unwrap();

    let c_column = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect()
    };

    let from_config = run(&["verify-source-sets", "--config", cfg.to_str().unwrap()]);
    assert_success(&from_config);
    assert_eq!(c_column(&stdout(&from_config)), vec!["0.3", "0.3"]);

    let overridden = run(&[
        "verify-source-sets",
        "--config",
        cfg.to_str().unwrap(),
        "--c",
        "0.5",
    ]);
    assert_success(&overridden);
    assert_eq!(c_column(&stdout(&overridden)), vec!["0.5", "0.5"]);
}

#[test]
fn malformed_config_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "construction bidiagonal\n").unwrap();
    let out = run(&[
        "verify-source-sets",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "1",
    ]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("key=value"), "{}", stderr(&out));
}

#[test]
fn out_flag_writes_the_payload_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let out = run(&[
        "beta1-demo",
        "--operator",
        "bidiagonal",
        "--xdag",
        "e1",
        "--n",
        "1,2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("n,gap,image_distance,ratio\n"), "{written}");
    assert_eq!(written.lines().count(), 3, "{written}");
}

#[test]
fn diagonal_operator_reads_weights_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("weights.csv");
    std::fs::write(&weights, "index,value\n1,1.0\n2,0.5\n3,0.25\n").unwrap();
    let op = format!("diagonal:{}", weights.to_str().unwrap());
    // Identity-like first coordinate: minimizer of
    // (1/2)(x1 - 1)^2 + alpha |x1| is 1 - alpha.
    let out = run(&[
        "solve",
        "--operator",
        &op,
        "--xdag",
        "e1",
        "--alpha",
        "0.25",
        "--dim",
        "3",
        "--format",
        "csv",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    let first: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - 0.75).abs() < 1e-9, "{text}");
}
