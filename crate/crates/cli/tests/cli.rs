use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crosscorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crosscorr"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn surrogate(dir: &Path, kind: &str, n: &str, t: &str) -> String {
    let out_dir = dir.join(format!("sur-{kind}"));
    let mut args = vec!["surrogate", "--kind", kind, "--n", n, "--t", t, "--seed", "5"];
    if kind == "one-factor" {
        args.extend(["--c", "0.5"]);
    }
    args.extend(["--out-dir", out_dir.to_str().unwrap()]);
    let out = crosscorr(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    out_dir.join("prices.csv").to_string_lossy().into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&crosscorr(&["--help"])), 0);
    assert_eq!(code(&crosscorr(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&crosscorr(&["spectrum", "--bogus"])), 1);
    assert_eq!(code(&crosscorr(&[])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let no_seed = crosscorr(&[
        "surrogate",
        "--kind",
        "iid",
        "--n",
        "3",
        "--t",
        "10",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&no_seed), 1);
    assert!(String::from_utf8_lossy(&no_seed.stderr).contains("--seed"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = crosscorr(&[
        "spectrum",
        "--input",
        "/nonexistent.csv",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&missing), 2);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,A,B\n2020-01-01,1,2\n2020-01-02,0,2\n2020-01-03,1,3\n").unwrap();
    let zero = crosscorr(&[
        "spectrum",
        "--input",
        bad.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&zero), 2);
    let msg = String::from_utf8_lossy(&zero.stderr);
    assert!(msg.contains("row 3") && msg.contains("column 2"), "{msg}");
}

#[test]
fn numeric_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "date,A,B\n2020-01-01,1,2\n2020-01-02,1,3\n2020-01-03,1,2.5\n").unwrap();
    let out = crosscorr(&[
        "spectrum",
        "--input",
        flat.to_str().unwrap(),
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn surrogate_feeds_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let prices = surrogate(dir.path(), "one-factor", "12", "300");
    let o = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let spectrum = crosscorr(&[
        "spectrum",
        "--input",
        &prices,
        "--base",
        "S003",
        "--remove-market",
        "--sigma-mode",
        "trace-compensated",
        "--bins",
        "20",
        "--out-dir",
        &o("spec"),
    ]);
    assert_eq!(code(&spectrum), 0, "{}", String::from_utf8_lossy(&spectrum.stderr));
    let ev: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spec/eigenvalues.json")).unwrap()).unwrap();
    assert_eq!(ev["N"], 11);
    assert_eq!(ev["sigma_mode"], "trace-compensated");

    let ladder = crosscorr(&["ladder", "--input", &prices, "--seed", "3", "--out-dir", &o("ladder")]);
    assert_eq!(code(&ladder), 0);
    let rows = fs::read_to_string(dir.path().join("ladder/ladder.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 14);

    let rolling = crosscorr(&[
        "rolling",
        "--input",
        &prices,
        "--base",
        "quote,fict,S001",
        "--seed",
        "3",
        "--window",
        "100",
        "--step",
        "10",
        "--out-dir",
        &o("roll"),
    ]);
    assert_eq!(code(&rolling), 0, "{}", String::from_utf8_lossy(&rolling.stderr));
    let body = fs::read_to_string(dir.path().join("roll/rolling_fict.csv")).unwrap();
    assert_eq!(body.lines().count(), 1 + (301 - 100) / 10 + 1);
}

#[test]
fn reruns_produce_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let prices = surrogate(dir.path(), "fict", "6", "80");
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let r = crosscorr(&[
            "spectrum",
            "--input",
            &prices,
            "--quote",
            "FICT",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in [
        "eigenvalues.json",
        "element_histogram.csv",
        "component_histogram.csv",
        "mp_overlay.csv",
    ] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}
