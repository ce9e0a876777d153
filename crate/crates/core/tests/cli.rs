mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lazy_ensemble::io::{parse_matrix_json, read_state_dump};
use lazy_ensemble::partition::{evaluate, EigenvalueVector};
use lazy_ensemble::solver::{solve, DEFAULT_MAX_ITER, DEFAULT_TOL};
use serde_json::Value;

fn lazyens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazyens"))
        .args(args)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}):\n{}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_diag(dir: &Path, name: &str, d: &[f64]) -> String {
    let n = d.len();
    let re: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
        .collect();
    let im = vec![vec![0.0; n]; n];
    let path = dir.join(name);
    fs::write(&path, serde_json::json!({"n": n, "re": re, "im": im}).to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn matrix_entry(v: &Value, i: usize, j: usize) -> (f64, f64) {
    (v["re"][i][j].as_f64().unwrap(), v["im"][i][j].as_f64().unwrap())
}

#[test]
fn solve_maximally_mixed_gives_zero_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.5, 0.5]);
    let out = lazyens(&["solve", "--rho", &rho, "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = matrix_entry(&v["B"], i, j);
            assert!(re.abs() < 1e-8 && im.abs() < 1e-8);
        }
    }
    assert!(v["kl"].as_f64().unwrap().abs() < 1e-10);
    assert!(v["logZ"].as_f64().unwrap().abs() < 1e-10);
    for key in ["absorbedB", "bounds_check", "iterations", "converged"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn solve_matches_library_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let rho_path = write_diag(dir.path(), "rho.json", &[0.7, 0.3]);
    let report = dir.path().join("report.json");
    let out = lazyens(&["solve", "--rho", &rho_path, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let human = String::from_utf8(out.stdout).unwrap();
    assert!(human.contains("absorbedB"), "{human}");

    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let rho = common::diag_density(&[0.7, 0.3]);
    let lib = solve(&rho, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let b = serde_json::to_string(&v["B"]).unwrap();
    let b = parse_matrix_json(&b).unwrap();
    assert!(common::max_entry_diff(&b, lib.ensemble.parameter().as_complex()) < 1e-12);
    assert_eq!(v["bounds_check"]["spread_ok"], Value::Bool(true));
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn solve_non_convergence_exits_3_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.9, 0.07, 0.03]);
    let report = dir.path().join("partial.json");
    let out = lazyens(&[
        "solve",
        "--rho",
        &rho,
        "--max-iter",
        "1",
        "--json",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("converge"));
    assert_eq!(json(&out)["converged"], Value::Bool(false));
    let partial: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(partial["iterations"], Value::from(1));
}

#[test]
fn malformed_input_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"n": 2, "re": [[0.5, 0], [0, 0.5]]}"#, "im"),
        (r#"{"n": 2, "re": [[0.5, 0]], "im": [[0, 0], [0, 0]]}"#, "re"),
        (
            r#"{"n": 2, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0], [0, 0]], "extra": 1}"#,
            "extra",
        ),
        (r#"{"n": "two", "re": [], "im": []}"#, "n"),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.json"));
        fs::write(&path, text).unwrap();
        let out = lazyens(&["solve", "--rho", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let msg = stderr(&out);
        assert!(msg.contains(&format!("`{field}`")), "{text}: {msg}");
    }
    let missing = lazyens(&["solve", "--rho", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let degenerate = write_diag(dir.path(), "pure.json", &[1.0, 0.0]);
    assert_eq!(lazyens(&["solve", "--rho", &degenerate]).status.code(), Some(2));
    let zero_tol = write_diag(dir.path(), "ok.json", &[0.6, 0.4]);
    assert_eq!(
        lazyens(&["solve", "--rho", &zero_tol, "--tol", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(lazyens(&["bogus"]).status.code(), Some(2));
}

#[test]
fn die_reports_beta_probabilities_and_entropy() {
    let out = lazyens(&["die", "--values", "1,2,3,4,5,6", "--mean", "2.5", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let beta = v["beta"].as_f64().unwrap();
    assert!((beta - 0.371048938081).abs() < 1e-9, "{beta}");
    let probs: Vec<f64> = v["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_f64().unwrap())
        .collect();
    assert_eq!(probs.len(), 6);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(v["entropy"].as_f64().unwrap() > 0.0);

    let human = String::from_utf8(lazyens(&["die", "--mean", "2.5"]).stdout).unwrap();
    assert!(human.contains("0.371048938"), "{human}");
    assert!(human.contains("entropy"));

    let laplace = json(&lazyens(&["die", "--mean", "3.5", "--json"]));
    assert!(laplace["beta"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn die_rejects_infeasible_means() {
    for mean in ["6.0", "1", "7", "-3"] {
        let out = lazyens(&["die", "--mean", mean]);
        assert_eq!(out.status.code(), Some(2), "mean {mean}");
        assert!(stderr(&out).contains("mean"), "{}", stderr(&out));
    }
    assert_eq!(
        lazyens(&["die", "--values", "2,2,2", "--mean", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lazyens(&["die", "--values", "1,x", "--mean", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn zfun_reports_log_partition_gradient_and_hessian() {
    let v = json(&lazyens(&["zfun", "--b", "0,0", "--json"]));
    assert!(v["logZ"].as_f64().unwrap().abs() < 1e-15);
    for g in v["gradient"].as_array().unwrap() {
        assert!((g.as_f64().unwrap() - 0.5).abs() < 1e-15);
    }

    let v = json(&lazyens(&["zfun", "--b", "0,1", "--json"]));
    let expected = (-f64::exp_m1(-1.0)).ln();
    assert!((v["logZ"].as_f64().unwrap() - expected).abs() < 1e-14);

    let v = json(&lazyens(&["zfun", "--b", "1,2,5", "--json"]));
    let quad = common::simplex3_mean_converged(|t| (-(t[0] + 2.0 * t[1] + 5.0 * t[2])).exp(), 1e-14);
    let z = v["logZ"].as_f64().unwrap().exp();
    assert!(((z - quad) / quad).abs() < 1e-10);
    let lib = evaluate(&EigenvalueVector::new(vec![1.0, 2.0, 5.0]).unwrap(), true);
    let h = lib.hessian.unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(v["hessian"][i][j].as_f64().unwrap(), h[(i, j)]);
        }
    }

    let neg = lazyens(&["zfun", "--b", "-1.5,2"]);
    assert_eq!(neg.status.code(), Some(0), "{}", stderr(&neg));
    assert!(String::from_utf8(neg.stdout).unwrap().contains("hessian"));
    assert_eq!(lazyens(&["zfun", "--b", "1,abc"]).status.code(), Some(2));
    assert_eq!(lazyens(&["zfun", "--b", "1,inf"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_maximally_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[1.0 / 3.0; 3]);
    let out = lazyens(&["verify", "--rho", &rho, "--count", "1000000", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["max_abs_z"].as_f64().unwrap() <= 4.0);
}

#[test]
fn verify_warns_on_tiny_counts_but_reports() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.7, 0.3]);
    let out = lazyens(&["verify", "--rho", &rho, "--count", "10"]);
    assert!(matches!(out.status.code(), Some(0) | Some(4)));
    assert!(stderr(&out).contains("warning"), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max |z|"), "{text}");
}

#[test]
fn verify_exit_code_follows_the_z_criterion() {
    // Three-draw batches have wild z-scores, so some seed fails; the exit code
    // must be 4 exactly when the report says so.
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.7, 0.3]);
    let mut failures = 0;
    for seed in 0..60 {
        let seed = seed.to_string();
        let args = [
            "lazyens", "verify", "--rho", &rho, "--count", "3", "--seed", &seed, "--json",
        ];
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = lazy_ensemble::cli::run(args, &mut out, &mut err);
        let v: Value = serde_json::from_slice(&out).unwrap();
        let passed = v["passed"].as_bool().unwrap();
        assert_eq!(passed, v["max_abs_z"].as_f64().unwrap() <= 4.0);
        assert_eq!(code, if passed { 0 } else { 4 });
        failures += usize::from(!passed);
    }
    assert!(failures > 0);
}

#[test]
fn sample_dump_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.5, 0.3, 0.2]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |path: &Path, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lazyens"))
            .args([
                "sample", "--rho", &rho, "--count", "40000", "--seed", "9", "--json", "--out",
            ])
            .arg(path)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap()
    };
    let out_a = run(&a, "1");
    let out_b = run(&b, "4");
    assert_eq!(out_a.status.code(), Some(0), "{}", stderr(&out_a));
    assert_eq!(out_a.stdout, out_b.stdout);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let dump = read_state_dump(std::io::BufReader::new(fs::File::open(&a).unwrap())).unwrap();
    assert_eq!((dump.n, dump.count, dump.seed), (3, 40000, 9));
    let v = json(&out_a);
    assert_eq!(v["count"], Value::from(40000));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_diag(dir.path(), "rho.json", &[0.6, 0.25, 0.15]);
    for args in [
        vec!["solve", "--rho", &rho, "--json"],
        vec!["solve", "--rho", &rho],
        vec!["verify", "--rho", &rho, "--count", "50000", "--seed", "3", "--json"],
        vec!["verify", "--rho", &rho, "--count", "50000", "--seed", "3"],
        vec!["die", "--mean", "4.2"],
        vec!["zfun", "--b", "0.1,-2,3", "--json"],
    ] {
        let first = lazyens(&args);
        let second = lazyens(&args);
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert_eq!(first.status.code(), second.status.code());
    }
}
