//! End-to-end tests of the command-line surface: subcommands, flags, and
//! the CSV formats they emit.

use std::io::Write;
use std::process::{Command, Output};

fn fastqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastqmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.to_string())
        .collect()
}

fn parse_row(line: &str) -> Vec<f64> {
    line.split(',').map(|t| t.parse().unwrap()).collect()
}

#[test]
fn points_reproduces_worked_example() {
    let out = fastqmc(&["points", "--n", "7", "--s", "3", "--gvec", "1 5 3"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 7);
    let expected: [[f64; 3]; 7] = [
        [0.0, 0.0, 0.0],
        [1.0, 5.0, 3.0],
        [5.0, 4.0, 1.0],
        [4.0, 6.0, 5.0],
        [6.0, 2.0, 4.0],
        [2.0, 3.0, 6.0],
        [3.0, 1.0, 2.0],
    ];
    for (line, row) in lines.iter().zip(&expected) {
        let got = parse_row(line);
        for (g, &num) in got.iter().zip(row) {
            assert_eq!(*g, num / 7.0);
        }
    }
}

#[test]
fn points_equal_generating_components_give_equal_coordinates() {
    let out = fastqmc(&[
        "points",
        "--n",
        "7",
        "--s",
        "3",
        "--gvec",
        "1 1 1",
        "--transform",
        "identity",
    ]);
    assert!(out.status.success());
    for line in stdout_lines(&out) {
        let row = parse_row(&line);
        assert!(row.iter().all(|&v| v == row[0]), "{line}");
    }
}

#[test]
fn points_korobov_k3_multiset() {
    let out = fastqmc(&["points", "--k", "3", "--s", "2"]);
    assert!(out.status.success());
    let mut rows: Vec<Vec<i64>> = stdout_lines(&out)
        .iter()
        .map(|l| {
            parse_row(l)
                .into_iter()
                .map(|v| (v * 3.0).round() as i64)
                .collect()
        })
        .collect();
    rows.sort();
    assert_eq!(rows, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
}

#[test]
fn points_invnorm_drops_zero_row_by_default() {
    let out = fastqmc(&[
        "points",
        "--n",
        "7",
        "--s",
        "2",
        "--gvec",
        "1 3",
        "--transform",
        "invnorm",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_lines(&out).len(), 6);
}

#[test]
fn points_gvec_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gvec.txt");
    std::fs::write(&path, "7 3\n1 5 3\n").unwrap();
    let out = fastqmc(&[
        "points",
        "--n",
        "7",
        "--s",
        "3",
        "--gvec",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_lines(&out).len(), 7);
}

#[test]
fn matvec_both_methods_agree() {
    let out = fastqmc(&[
        "matvec",
        "--n",
        "53",
        "--s",
        "20",
        "--transform",
        "tent",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "fast,std");
    assert_eq!(lines.len(), 54);
    for line in &lines[1..] {
        let row = parse_row(line);
        assert!((row[0] - row[1]).abs() <= 1e-9);
    }
}

#[test]
fn normalgen_with_identity_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.csv");
    let mut f = std::fs::File::create(&sigma).unwrap();
    writeln!(f, "1,0,0").unwrap();
    writeln!(f, "0,1,0").unwrap();
    writeln!(f, "0,0,1").unwrap();
    drop(f);
    let out = fastqmc(&[
        "normalgen",
        "--n",
        "7",
        "--s",
        "3",
        "--gvec",
        "1 5 3",
        "--sigma",
        sigma.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = stdout_lines(&out);
    // Zero row dropped by default.
    assert_eq!(lines.len(), 6);
    // Row for n = 2 is the quantile of (5/7, 4/7, 1/7).
    let row = parse_row(&lines[1]);
    assert!((row[0] - 0.565948821932863).abs() < 1e-9);
    assert!((row[1] - 0.180012369792705).abs() < 1e-9);
    assert!((row[2] - (-1.067570523878142)).abs() < 1e-9);
}

#[test]
fn pde_uniform_emits_solution_and_timings() {
    let out = fastqmc(&["pde-uniform", "--n", "13", "--s", "13", "--m", "8"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "x,u_mean");
    assert_eq!(lines.len(), 8); // header + M-1 interior nodes
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("assembly,"));
    assert!(stderr.contains("solve,"));
}

#[test]
fn pde_lognormal_runs() {
    let out = fastqmc(&[
        "pde-lognormal",
        "--n",
        "13",
        "--s",
        "8",
        "--m",
        "6",
        "--method",
        "std",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_lines(&out).len(), 6);
}

#[test]
fn bench_emits_matching_checksums() {
    let out = fastqmc(&[
        "bench",
        "--experiment",
        "uniform",
        "--n-list",
        "13,29",
        "--s-expr",
        "2n",
        "--m-expr",
        "2n",
        "--reps",
        "2",
        "--seed",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = stdout_lines(&out);
    assert_eq!(
        lines[0],
        "experiment,n,s,m,method,reps,mean_seconds,median_seconds,checksum,skipped"
    );
    assert_eq!(lines.len(), 5);
    for pair in lines[1..].chunks(2) {
        let a: Vec<&str> = pair[0].split(',').collect();
        let b: Vec<&str> = pair[1].split(',').collect();
        assert_eq!(a[0], "uniform");
        assert_eq!(a[4], "std");
        assert_eq!(b[4], "fast");
        assert_eq!(a[8], b[8], "checksums must match");
    }
}

#[test]
fn bench_uniform_reference_grid_gives_six_records() {
    let out = fastqmc(&[
        "bench",
        "--experiment",
        "uniform",
        "--n-list",
        "67,127,257",
        "--s-expr",
        "2n",
        "--m-expr",
        "2n",
        "--reps",
        "1",
        "--seed",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 7); // header + 6 records
    for pair in lines[1..].chunks(2) {
        let a: Vec<&str> = pair[0].split(',').collect();
        let b: Vec<&str> = pair[1].split(',').collect();
        assert_eq!(a[8], b[8], "fast/std checksums must match");
        assert_eq!(a[9], "false");
        assert_eq!(b[9], "false");
    }
}

#[test]
fn selftest_passes_on_fresh_build() {
    let out = fastqmc(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let pass_lines = text.lines().filter(|l| l.starts_with("PASS")).count();
    assert!(pass_lines >= 4, "{text}");
    assert!(text.contains("suites passed"));
}

#[test]
fn rejects_composite_point_count() {
    let out = fastqmc(&["points", "--n", "8", "--s", "2", "--gvec", "1 3"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not prime"), "{stderr}");
}

#[test]
fn seventeen_significant_digits_round_trip() {
    let out = fastqmc(&[
        "points",
        "--n",
        "13",
        "--s",
        "2",
        "--gvec",
        "1 5",
        "--transform",
        "invnorm",
    ]);
    assert!(out.status.success());
    for line in stdout_lines(&out) {
        for token in line.split(',') {
            let value: f64 = token.parse().unwrap();
            assert_eq!(format!("{:.16e}", value), token, "round trip of {token}");
        }
    }
}
