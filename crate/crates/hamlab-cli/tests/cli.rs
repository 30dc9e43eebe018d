//! End-to-end tests through the compiled binary: schemas, exit codes,
//! byte-level determinism, and the qualitative shape of the two figures.

use std::path::Path;
use std::process::{Command, Output};

fn hamlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("nonempty csv")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn catalog_lists_the_four_systems() {
    let out = hamlab(&["catalog"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let names: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["free_particle", "l4_linear", "cherry", "variation_like"]
    );
}

#[test]
fn analyze_reproduces_the_taxonomy_over_the_wire() {
    for (args, expected) in [
        (vec!["analyze", "l4_linear"], "WEAKLY_UNSTABLE"),
        (
            vec!["analyze", "cherry", "--sigma", "1"],
            "UNSTABLE_WITH_ASYMPTOTIC_MOTION",
        ),
        (
            vec!["analyze", "variation_like", "--sigma", "1"],
            "WEAKLY_UNSTABLE",
        ),
    ] {
        let out = hamlab(&args);
        assert!(out.status.success(), "{args:?} failed: {out:?}");
        let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(report["verdict"], expected, "{args:?}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        vec!["analyze", "variation_like", "--sigma", "1", "--seed", "9"],
        vec!["probe", "l4_linear", "--format", "csv"],
        vec!["period-scan", "--amplitudes", "0.1,0.2"],
        vec!["certify", "l4_linear", "--seed", "5"],
    ] {
        let a = hamlab(&args);
        let b = hamlab(&args);
        assert!(a.status.success(), "{args:?}: {a:?}");
        assert_eq!(a.stdout, b.stdout, "nondeterministic output for {args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "nosuch"],
        vec!["analyze", "l4_linear", "--sigma", "1"],
        vec!["integrate", "free_particle", "--state", "1,2,3"],
        vec!["period-scan", "--g-coeffs", "-1"],
        vec!["plot", "variation-unbounded", "--tmax", "0"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let out = hamlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {out:?}");
    }
}

#[test]
fn zero_length_span_writes_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig.svg");
    let out = hamlab(&[
        "plot",
        "cherry-asymptotic",
        "--t0",
        "-5",
        "--t1",
        "-5",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!svg.exists());
    assert!(!dir.path().join("fig.csv").exists());
}

#[test]
fn blow_up_reports_a_numerical_failure_body() {
    let out = hamlab(&[
        "integrate", "cherry", "--sigma", "1", "--state", "0.5,0,0,0", "--t0", "0", "--t1", "20",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["status"], "numerical_failure");
    assert!(body["error"].as_str().unwrap().contains("corrector"));
}

#[test]
fn trajectory_csv_has_the_documented_schema() {
    let out = hamlab(&[
        "integrate", "free_particle", "--state", "0,0.5", "--t0", "0", "--t1", "1", "--step",
        "0.01",
    ]);
    assert!(out.status.success());
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["t", "q1", "p1", "H"]);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        let h: f64 = row[3].parse().unwrap();
        assert!((h - 0.125).abs() < 1e-14, "free drift conserves H = p^2/2");
    }
    let q_final: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((q_final - 0.5).abs() < 1e-12, "q(1) = p t exactly");
}

#[test]
fn period_scan_schemas_and_verdicts() {
    let out = hamlab(&["period-scan"]);
    assert!(out.status.success());
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["amplitude", "period", "method"]);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let period: f64 = row[1].parse().unwrap();
        assert!((6.2..6.7).contains(&period));
        assert_eq!(row[2], "implicit_midpoint_return");
    }

    let out = hamlab(&["period-scan", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "UNSTABLE_NONZERO_RESIDUAL");
    assert_eq!(report["residual"], "-20/3");

    let out = hamlab(&[
        "period-scan", "--g-coeffs", "1", "--amplitudes", "0.1,0.3,0.5", "--format", "json",
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "ISOCHRONOUS_WITHIN_TOLERANCE");
    assert_eq!(report["residual"], "0");
}

#[test]
fn certificates_over_the_wire() {
    let out = hamlab(&["certify", "l4_linear"]);
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["verdict"], "CERTIFIED_NO_ASYMPTOTIC_MOTION");

    let out = hamlab(&["certify", "cherry", "--sigma", "1"]);
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["verdict"], "NOT_CERTIFIED");

    let out = hamlab(&["certify", "free_particle", "--format", "csv"]);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["stage", "pinned", "max_residual", "conserved"]);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

fn column_extent(rows: &[Vec<String>], col: usize) -> f64 {
    let values: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
}

#[test]
fn variation_plot_preserves_the_figure_shape() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("fig2.svg");
    let out = hamlab(&[
        "plot",
        "variation-unbounded",
        "--sigma",
        "1",
        "--tmax",
        "200",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.contains("width=\"800\"") && svg.contains("height=\"600\""));
    assert!(svg.contains(">q1<") && svg.contains(">q2<"), "axes labeled");

    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let (header, rows) = parse_csv(&csv);
    assert_eq!(header, ["t", "q1", "q2"]);
    let (q1_extent, q2_extent) = (column_extent(&rows, 1), column_extent(&rows, 2));
    assert!(
        q2_extent >= 5.0 * q1_extent,
        "q2 extent {q2_extent} vs q1 extent {q1_extent}"
    );
}

#[test]
fn cherry_plot_shrinks_into_the_past() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("fig1.svg");
    let out = hamlab(&[
        "plot",
        "cherry-asymptotic",
        "--sigma",
        "1",
        "--t0",
        "-60",
        "--t1",
        "-1",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    let (_, rows) = parse_csv(&csv);
    let radius = |row: &Vec<String>| -> (f64, f64) {
        let t: f64 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        let y: f64 = row[2].parse().unwrap();
        (t, x.hypot(y))
    };
    let deep_past = rows
        .iter()
        .map(&radius)
        .filter(|(t, _)| *t <= -30.0)
        .map(|(_, r)| r)
        .fold(0.0_f64, f64::max);
    let recent = rows
        .iter()
        .map(&radius)
        .filter(|(t, _)| *t > -10.0)
        .map(|(_, r)| r)
        .fold(0.0_f64, f64::max);
    assert!(
        deep_past < 0.2 * recent,
        "orbit must shrink into the past: {deep_past} vs {recent}"
    );
}

#[test]
fn out_flag_and_stdout_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.json");
    let direct = hamlab(&["probe", "free_particle", "--epsilons", "0.5,0.1"]);
    let to_file = hamlab(&[
        "probe",
        "free_particle",
        "--epsilons",
        "0.5,0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(direct.status.success() && to_file.status.success());
    assert!(Path::new(&path).exists());
    assert_eq!(stdout(&direct), std::fs::read_to_string(&path).unwrap());
}
