use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;
use tessfact_core::svd::svd;
use tessfact_core::Matrix;

fn tessfact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tessfact"))
        .args(args)
        .env_remove("TESSFACT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tessfact(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn write_matrix(path: &Path, m: &Matrix) {
    fs::write(path, m.to_csv_string()).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a random K x L demand to `dir/input.csv` and factorizes it into
/// `dir/scheme`.
fn factorize(dir: &TempDir, k: usize, l: usize, seed: u64, extra: &[&str]) -> (Matrix, Value) {
    let f = random_matrix(k, l, seed);
    let input = dir.path().join("input.csv");
    write_matrix(&input, &f);
    let out = dir.path().join("scheme");
    let mut args = vec!["factorize", "--input", p(&input), "--out", p(&out)];
    args.extend_from_slice(extra);
    let report = json(&args);
    (f, report)
}

#[test]
fn plan_six_by_ten_is_exact() {
    let r = json(&[
        "plan", "-K", "6", "-L", "10", "-T", "1", "-D", "3", "-G", "5",
    ]);
    assert_eq!(r["nUpper"], 12);
    assert_eq!(r["nLower"], "12");
    assert_eq!(r["capacity"]["value"], "1/2");
    assert_eq!(r["exactness"], "Exact");
    assert_eq!(r["gapRatio"], "1");
    assert_eq!(r["tradeoff"]["servers"], 12);
}

#[test]
fn plan_server_counts_for_small_tuples() {
    for (args, n) in [
        (["-K", "6", "-L", "10", "-T", "1", "-D", "3", "-G", "2"], 20),
        (["-K", "6", "-L", "10", "-T", "1", "-D", "2", "-G", "5"], 12),
        (["-K", "7", "-L", "11", "-T", "1", "-D", "3", "-G", "5"], 17),
        (["-K", "6", "-L", "10", "-T", "2", "-D", "3", "-G", "5"], 8),
    ] {
        let mut full = vec!["plan"];
        full.extend_from_slice(&args);
        assert_eq!(json(&full)["nUpper"], n, "{args:?}");
    }
    let r = json(&["plan", "-K", "7", "-L", "11", "-D", "3", "-G", "5"]);
    assert_eq!(r["gapRatio"], "85/77");
    assert!((r["gapRatioValue"].as_f64().unwrap() - 85.0 / 77.0).abs() < 1e-15);
    assert!(r["capacity"].is_null());
}

#[test]
fn plan_table_and_sweep() {
    let t = ok(&[
        "plan", "-K", "6", "-L", "10", "-D", "3", "-G", "5", "--format", "table",
    ]);
    assert!(t.contains("N upper       12"), "{t}");
    let csv = ok(&["plan", "-K", "4", "-L", "5", "--sweep"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "K,L,T,Delta,Gamma,gamma,delta,nUpper,nLower,gapRatio,exact"
    );
    assert_eq!(lines.len(), 1 + 4 * 5);
    let pinned = ok(&["plan", "-K", "4", "-L", "5", "-G", "5", "--sweep"]);
    assert_eq!(pinned.lines().count(), 1 + 4);
}

#[test]
fn plan_rejects_invalid_parameters() {
    let out = tessfact(&["plan", "-K", "6", "-L", "10", "-D", "3", "-G", "11"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid parameters"));
    assert_eq!(
        code(&tessfact(&["plan", "-K", "6", "-L", "10", "-D", "3"])),
        2
    );
    assert_eq!(code(&tessfact(&["plan", "-K", "six"])), 2);
}

#[test]
fn factorize_six_by_ten_is_lossless() {
    let dir = TempDir::new().unwrap();
    let (f, r) = factorize(&dir, 6, 10, 11, &["-D", "3", "-G", "5"]);
    assert!(r["residual"].as_f64().unwrap() <= 1e-20 * f.frobenius_norm_sq());
    assert_eq!(r["serversUsed"], 12);
    assert_eq!(
        (r["gammaMeasured"].as_u64(), r["deltaMeasured"].as_u64()),
        (Some(5), Some(3))
    );
    let scheme = dir.path().join("scheme");
    for name in [
        "D.csv",
        "E.csv",
        "F.csv",
        "tiles.json",
        "report.json",
        "scheme.json",
    ] {
        assert!(scheme.join(name).exists(), "{name}");
    }
    let copied = Matrix::parse_csv(&fs::read_to_string(scheme.join("F.csv")).unwrap()).unwrap();
    assert_eq!(copied, f);
    let d = Matrix::parse_csv(&fs::read_to_string(scheme.join("D.csv")).unwrap()).unwrap();
    let e = Matrix::parse_csv(&fs::read_to_string(scheme.join("E.csv")).unwrap()).unwrap();
    assert!(d.matmul(&e).unwrap().max_abs_diff(&f) < 1e-12);
    let desc = read_json(&scheme.join("scheme.json"));
    assert_eq!(desc["mode"], "lossless");
    assert_eq!(desc["files"]["d"], "D.csv");
    assert_eq!(desc["tiles"].as_array().unwrap().len(), 4);
}

#[test]
fn factorize_rank_one_tiles_residual_is_the_spectral_tail() {
    let dir = TempDir::new().unwrap();
    let (f, r) = factorize(
        &dir,
        6,
        10,
        12,
        &["-D", "3", "-G", "5", "-N", "4", "--mode", "lossy"],
    );
    let mut tail = 0.0;
    for (rows, cols) in [(0..3, 0..5), (0..3, 5..10), (3..6, 0..5), (3..6, 5..10)] {
        let block = Matrix::from_fn(3, 5, |i, j| f.row(rows.start + i)[cols.start + j]);
        let s = svd(&block).unwrap().singular_values;
        tail += s[1] * s[1] + s[2] * s[2];
    }
    let residual = r["residual"].as_f64().unwrap();
    assert!(
        (residual - tail).abs() <= 1e-10 * tail,
        "{residual} vs {tail}"
    );
    assert_eq!(r["serversUsed"], 4);
    assert_eq!(r["withinPredictionRegime"], true);
    assert_eq!(r["droppedTiles"].as_array().unwrap().len(), 0);
}

#[test]
fn factorize_checks_dimensions_against_flags() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.csv");
    write_matrix(&input, &random_matrix(6, 10, 1));
    let out = tessfact(&[
        "factorize",
        "--input",
        p(&input),
        "-K",
        "7",
        "-D",
        "3",
        "-G",
        "5",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "1,2,3\n4,5,6\n7,oops,9\n").unwrap();
    let out = tessfact(&[
        "factorize",
        "--input",
        p(&input),
        "-D",
        "1",
        "-G",
        "1",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn infeasible_lossless_request_exits_three() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.csv");
    write_matrix(&input, &random_matrix(6, 10, 2));
    let out = tessfact(&[
        "factorize",
        "--input",
        p(&input),
        "-D",
        "3",
        "-G",
        "5",
        "-N",
        "11",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 3);
    let dropped = tessfact(&[
        "factorize",
        "--input",
        p(&input),
        "-D",
        "3",
        "-G",
        "5",
        "-N",
        "2",
        "--mode",
        "lossy",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&dropped), 3);
}

#[test]
fn lossy_with_dropped_tiles_reports_them() {
    let dir = TempDir::new().unwrap();
    let (_, r) = factorize(
        &dir,
        6,
        10,
        3,
        &[
            "-D",
            "3",
            "-G",
            "5",
            "-N",
            "2",
            "--mode",
            "lossy",
            "--allow-dropped",
        ],
    );
    assert_eq!(r["droppedTiles"].as_array().unwrap().len(), 2);
    assert_eq!(r["serversUsed"], 2);
}

#[test]
fn simulate_lossless_scheme_decodes_exactly() {
    let dir = TempDir::new().unwrap();
    let (_, _) = factorize(&dir, 6, 10, 4, &["-D", "3", "-G", "5"]);
    let w = dir.path().join("w.csv");
    write_matrix(&w, &random_matrix(10, 1, 5));
    let scheme = dir.path().join("scheme/scheme.json");
    let out = dir.path().join("sim.json");
    ok(&[
        "simulate",
        "--scheme",
        p(&scheme),
        "--w",
        p(&w),
        "--out",
        p(&out),
    ]);
    let r = read_json(&out);
    assert!(r["errorE"].as_f64().unwrap() < 1e-20);
    assert_eq!(r["gammaMeasured"], 5);
    assert_eq!(r["deltaMeasured"], 3);
    for key in ["z", "fTrue", "fDecoded"] {
        assert!(r[key].is_array(), "{key}");
    }
    assert_eq!(r["z"].as_array().unwrap().len(), 12);
}

#[test]
fn simulate_sampled_error_tracks_the_residual() {
    let dir = TempDir::new().unwrap();
    let (_, report) = factorize(
        &dir,
        6,
        10,
        6,
        &["-D", "3", "-G", "5", "-N", "4", "--mode", "lossy"],
    );
    let scheme = dir.path().join("scheme/scheme.json");
    let r = json(&[
        "simulate",
        "--scheme",
        p(&scheme),
        "--samples",
        "10000",
        "--seed",
        "9",
    ]);
    let mean = r["sampled"]["meanNormalizedError"].as_f64().unwrap();
    let expected = r["sampled"]["expectedNormalizedError"].as_f64().unwrap();
    assert!((expected - report["normalizedResidual"].as_f64().unwrap()).abs() < 1e-15);
    assert!(
        (mean - expected).abs() <= 0.05 * expected,
        "{mean} vs {expected}"
    );
}

#[test]
fn simulate_rejects_wrong_input_length() {
    let dir = TempDir::new().unwrap();
    factorize(&dir, 6, 10, 7, &["-D", "3", "-G", "5"]);
    let w = dir.path().join("w.csv");
    write_matrix(&w, &random_matrix(1, 9, 8));
    let scheme = dir.path().join("scheme/scheme.json");
    let out = tessfact(&["simulate", "--scheme", p(&scheme), "--w", p(&w)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("length L = 10"));
}

#[test]
fn simulate_rejects_tampered_scheme_files() {
    let dir = TempDir::new().unwrap();
    factorize(
        &dir,
        6,
        10,
        8,
        &["-D", "3", "-G", "5", "-N", "4", "--mode", "lossy"],
    );
    let scheme = dir.path().join("scheme");
    let w = dir.path().join("w.csv");
    write_matrix(&w, &random_matrix(10, 1, 1));
    let descriptor = scheme.join("scheme.json");
    let args = ["simulate", "--scheme", p(&descriptor), "--w", p(&w)];

    // A dense D breaks the support structure.
    write_matrix(&scheme.join("D.csv"), &random_matrix(6, 4, 2));
    assert_eq!(code(&tessfact(&args)), 2);
    write_matrix(&scheme.join("D.csv"), &random_matrix(6, 5, 2));
    assert_eq!(code(&tessfact(&args)), 2);
    fs::write(scheme.join("scheme.json"), "{not json").unwrap();
    assert_eq!(code(&tessfact(&args)), 2);
}

/// Composite Simpson on `x = lower + u^2`, which removes the square-root
/// edge of the density.
fn mp_cdf_oracle(lambda: f64, x: f64) -> f64 {
    let lo = (1.0 - lambda.sqrt()).powi(2);
    let hi = (1.0 + lambda.sqrt()).powi(2);
    let pdf =
        |y: f64| ((hi - y) * (y - lo)).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * lambda * y);
    let g = |u: f64| pdf(lo + u * u) * 2.0 * u;
    let b = (x.min(hi) - lo).sqrt();
    let n = 20_000;
    let h = b / n as f64;
    let mut s = g(0.0) + g(b);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn mp_single_query_prints_a_scalar() {
    let out = ok(&["mp", "--lambda", "0.5", "--cdf", "1.0"]);
    let v: f64 = out.trim().parse().unwrap();
    assert!(v > 0.0 && v < 1.0);
    assert!((v - mp_cdf_oracle(0.5, 1.0)).abs() < 1e-8, "{v}");
    let many = ok(&["mp", "--lambda", "2", "--pdf", "1,2", "--inv", "0.9"]);
    assert_eq!(many.lines().count(), 4);
    assert!(many.starts_with("query,arg,value\n"));
    assert_eq!(code(&tessfact(&["mp", "--lambda", "0.5"])), 2);
    assert_eq!(code(&tessfact(&["mp", "--lambda", "-1", "--cdf", "1"])), 2);
    assert_eq!(code(&tessfact(&["mp", "--lambda", "1", "--inv", "1.5"])), 2);
}

#[test]
fn predict_reports_zero_error_at_full_rank() {
    let r = json(&[
        "predict", "-K", "6", "-L", "10", "-D", "3", "-G", "5", "-N", "12",
    ]);
    assert_eq!(r["level"], 0.0);
    assert_eq!(r["epsilonPredicted"], 0.0);
    let half = json(&[
        "predict", "-K", "60", "-L", "100", "-D", "30", "-G", "50", "-N", "60",
    ]);
    assert!(half["epsilonPredicted"].as_f64().unwrap() > 0.0);
    assert_eq!(
        code(&tessfact(&[
            "predict", "-K", "7", "-L", "11", "-D", "3", "-G", "5", "-N", "4"
        ])),
        2
    );
}

#[test]
fn tiles_draws_nine_regions() {
    let grid = ok(&["tiles", "-K", "7", "-L", "11", "-D", "3", "-G", "5"]);
    let expected = "\
AAAAABBBBBE
AAAAABBBBBE
AAAAABBBBBE
CCCCCDDDDDF
CCCCCDDDDDF
CCCCCDDDDDF
GGGGGHHHHHI
";
    assert_eq!(grid, expected);
    let svg = ok(&[
        "tiles", "-K", "7", "-L", "11", "-D", "3", "-G", "5", "--format", "svg",
    ]);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<rect").count(), 77);
    let tiles = json(&[
        "tiles", "-K", "7", "-L", "11", "-D", "3", "-G", "5", "--format", "json",
    ]);
    let families: Vec<&str> = tiles
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["family"].as_str().unwrap())
        .collect();
    assert_eq!(
        families,
        ["C1", "C1", "C1", "C1", "C2", "C2", "C3", "C3", "C4"]
    );
}

#[test]
fn mc_at_full_rank_has_zero_error() {
    let csv = ok(&[
        "mc", "-K", "6", "-L", "10", "-D", "3", "-G", "5", "-N", "12", "--trials", "5", "--seed",
        "1",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,eps_pred,eps_emp,stderr,trials,seed"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "12");
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(&row[4..], ["5", "1"]);
}

#[test]
fn mc_leaves_prediction_blank_outside_its_regime() {
    let csv = ok(&[
        "mc", "-K", "7", "-L", "11", "-D", "3", "-G", "5", "-N", "9,17", "--trials", "3",
    ]);
    for line in csv.lines().skip(1) {
        let row: Vec<&str> = line.split(',').collect();
        assert_eq!(row[1], "");
        assert!(row[2].parse::<f64>().is_ok());
    }
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "mc", "-K", "12", "-L", "20", "-D", "3", "-G", "5", "-N", "16,24,32", "--trials", "16",
        "--seed", "42",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let threaded = Command::new(env!("CARGO_BIN_EXE_tessfact"))
        .args(args)
        .env("TESSFACT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(threaded.stdout).unwrap(), a);
    let uniform = ok(&[&args[..], &["--ensemble", "uniform"]].concat());
    assert_ne!(uniform, a);

    let one = TempDir::new().unwrap();
    let two = TempDir::new().unwrap();
    factorize(
        &one,
        7,
        11,
        5,
        &["-D", "3", "-G", "5", "-N", "9", "--mode", "lossy"],
    );
    factorize(
        &two,
        7,
        11,
        5,
        &["-D", "3", "-G", "5", "-N", "9", "--mode", "lossy"],
    );
    for name in [
        "D.csv",
        "E.csv",
        "F.csv",
        "tiles.json",
        "report.json",
        "scheme.json",
    ] {
        let a = fs::read(one.path().join("scheme").join(name)).unwrap();
        let b = fs::read(two.path().join("scheme").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn bad_thread_setting_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_tessfact"))
        .args(["mp", "--lambda", "1", "--cdf", "1"])
        .env("TESSFACT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn plan_count_is_what_lossless_factorize_consumes() {
    for (k, l, t, d, g) in [
        (6, 10, 1, 3, 5),
        (7, 11, 1, 3, 5),
        (6, 10, 2, 3, 5),
        (9, 7, 3, 2, 4),
        (5, 12, 2, 5, 3),
    ] {
        let dims = [k, l, t, d, g].map(|v| v.to_string());
        let plan = json(&[
            "plan", "-K", &dims[0], "-L", &dims[1], "-T", &dims[2], "-D", &dims[3], "-G", &dims[4],
        ]);
        let dir = TempDir::new().unwrap();
        let (f, r) = factorize(
            &dir,
            k,
            l,
            20,
            &["-T", &dims[2], "-D", &dims[3], "-G", &dims[4]],
        );
        assert_eq!(plan["nUpper"], r["serversUsed"], "{dims:?}");
        assert!(r["residual"].as_f64().unwrap() <= 1e-20 * f.frobenius_norm_sq());
        assert!(r["gammaMeasured"].as_u64().unwrap() <= g as u64);
        assert!(r["deltaMeasured"].as_u64().unwrap() <= d as u64);

        let w = dir.path().join("w.csv");
        write_matrix(&w, &random_matrix(l, 1, 21));
        let sim = json(&[
            "simulate",
            "--scheme",
            p(&dir.path().join("scheme/scheme.json")),
            "--w",
            p(&w),
        ]);
        assert!(sim["errorE"].as_f64().unwrap() < 1e-18);
    }
}
