use std::fs;
use std::path::Path;

use crosscorr::market_data::PriceTable;
use crosscorr::reports::{
    cmd_ladder, cmd_rolling, cmd_spectrum, cmd_surrogate, InputArgs, LadderArgs, RollingArgs, SpectrumArgs,
    SurrogateArgs, MANIFEST_FILE,
};
use crosscorr::surrogates::{
    default_start, one_factor_log_returns, prices_from_log_returns, series_names, SurrogateKind,
};
use crosscorr::Error;
use serde_json::Value;

fn write_table(dir: &Path, name: &str, t: &PriceTable) -> std::path::PathBuf {
    let path = dir.join(name);
    t.write_csv(fs::File::create(&path).unwrap()).unwrap();
    path
}

fn one_factor(n: usize, t_ret: usize, c: f64, seed: u64) -> PriceTable {
    prices_from_log_returns(
        series_names(n),
        &one_factor_log_returns(n, t_ret, c, seed),
        default_start(),
        "USD",
    )
    .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every artifact except the manifest's wall-clock stamp.
fn snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let name = e.file_name().to_string_lossy().into_owned();
            let mut body = fs::read_to_string(e.path()).unwrap();
            if name == MANIFEST_FILE {
                let mut v: Value = serde_json::from_str(&body).unwrap();
                v.as_object_mut().unwrap().remove("generated_at");
                body = v.to_string();
            }
            (name, body)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn spectrum_on_one_factor_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_table(dir.path(), "p.csv", &one_factor(99, 1277, 0.5, 1));
    let mut args = SpectrumArgs::new(InputArgs::new(&input), dir.path().join("out"));
    args.remove_market = true;
    let set = cmd_spectrum(&args, &[]).unwrap();
    for f in [
        "eigenvalues.json",
        "element_histogram.csv",
        "mp_overlay.csv",
        "eigvec_components.csv",
        "component_histogram.csv",
        "factor_regression.json",
        "residual_eigenvalues.json",
        MANIFEST_FILE,
    ] {
        assert!(set.files.iter().any(|x| x == f), "{f} missing");
    }
    let ev = json(&set.out_dir.join("eigenvalues.json"));
    let lmax = ev["lambda_max"].as_f64().unwrap();
    assert!((lmax - 50.0).abs() < 5.0, "{lmax}");
    assert_eq!(ev["N"], 99);
    assert_eq!(ev["T"], 1277);
    assert_eq!(ev["occupancy"]["above"], 1);
    let resid = json(&set.out_dir.join("residual_eigenvalues.json"));
    assert!(resid["lambda_max"].as_f64().unwrap() < 2.1);

    let manifest = json(&set.out_dir.join(MANIFEST_FILE));
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["data_first_date"], "2015-10-01");
}

#[test]
fn spectrum_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_table(dir.path(), "p.csv", &one_factor(8, 120, 0.3, 2));
    let run = |out: &str| {
        let mut args = SpectrumArgs::new(InputArgs::new(&input), dir.path().join(out));
        args.base = "fict".into();
        args.seed = Some(9);
        args.remove_market = true;
        args.eigenvectors = true;
        cmd_spectrum(&args, &["spectrum".into()]).unwrap().out_dir
    };
    assert_eq!(snapshot(&run("a")), snapshot(&run("b")));
}

#[test]
fn quote_base_on_iid_panel_sits_in_bulk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    cmd_surrogate(
        &SurrogateArgs {
            kind: SurrogateKind::IidRandom,
            n: 99,
            t: 1277,
            seed: Some(21),
            factor_loading: None,
            start: None,
            out_dir: out.clone(),
        },
        &[],
    )
    .unwrap();
    let set = cmd_spectrum(
        &SpectrumArgs::new(InputArgs::new(out.join("prices.csv")), dir.path().join("o")),
        &[],
    )
    .unwrap();
    let ev = json(&set.out_dir.join("eigenvalues.json"));
    let inside = ev["occupancy"]["inside"].as_f64().unwrap();
    assert!(inside / 99.0 >= 0.9);
}

#[test]
fn fict_base_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_table(dir.path(), "p.csv", &one_factor(4, 30, 0.3, 3));
    let mut args = SpectrumArgs::new(InputArgs::new(&input), dir.path().join("o"));
    args.base = "fict".into();
    assert!(matches!(cmd_spectrum(&args, &[]), Err(Error::Usage(_))));
}

#[test]
fn surrogate_requires_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mk = |seed: Option<u64>, out: &str| SurrogateArgs {
        kind: SurrogateKind::OneFactor,
        n: 5,
        t: 40,
        seed,
        factor_loading: Some(0.4),
        start: None,
        out_dir: dir.path().join(out),
    };
    assert!(matches!(cmd_surrogate(&mk(None, "x"), &[]), Err(Error::Usage(_))));
    cmd_surrogate(&mk(Some(3), "a"), &[]).unwrap();
    cmd_surrogate(&mk(Some(3), "b"), &[]).unwrap();
    let read = |d: &str| fs::read(dir.path().join(d).join("prices.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(String::from_utf8(read("a")).unwrap().lines().count(), 42);
}

#[test]
fn ladder_counts_and_symmetric_spread() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_table(dir.path(), "s.csv", &one_factor(3, 50, 0.4, 4));
    let set = cmd_ladder(&LadderArgs::new(InputArgs::new(&small), 1, dir.path().join("l3")), &[]).unwrap();
    let body = fs::read_to_string(set.out_dir.join("ladder.csv")).unwrap();
    assert_eq!(body.lines().count(), 1 + 5);

    let big = write_table(dir.path(), "b.csv", &one_factor(20, 1000, 0.5, 5));
    let set = cmd_ladder(&LadderArgs::new(InputArgs::new(&big), 1, dir.path().join("l20")), &[]).unwrap();
    let mut rdr = csv::Reader::from_path(set.out_dir.join("ladder.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 22);
    let asset_vals: Vec<f64> = rows
        .iter()
        .filter(|r| &r[2] == "asset")
        .map(|r| r[5].parse().unwrap())
        .collect();
    let mean = asset_vals.iter().sum::<f64>() / asset_vals.len() as f64;
    let spread =
        asset_vals.iter().cloned().fold(f64::MIN, f64::max) - asset_vals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.2 * mean, "spread {spread} mean {mean}");
    let scaled: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(scaled.windows(2).all(|w| w[0] <= w[1]));

    let mut no_seed = LadderArgs::new(InputArgs::new(&small), 1, dir.path().join("x"));
    no_seed.seed = None;
    assert!(cmd_ladder(&no_seed, &[]).is_err());
}

#[test]
fn rolling_row_counts_and_shares_contract() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_table(dir.path(), "p.csv", &one_factor(6, 1277, 0.3, 6));
    let mut args = RollingArgs::new(InputArgs::new(&input), dir.path().join("r"));
    args.bases = vec!["quote".into(), "S002".into(), "fict".into()];
    args.seed = Some(2);
    let set = cmd_rolling(&args, &[]).unwrap();
    for label in ["USD", "S002", "fict"] {
        let body = fs::read_to_string(set.out_dir.join(format!("rolling_{label}.csv"))).unwrap();
        assert_eq!(body.lines().count(), 1 + 1097, "{label}");
    }
    let long = fs::read_to_string(set.out_dir.join("rolling_long.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + 3 * 1097);

    args.out_dir = dir.path().join("single");
    args.step = 1278 - 182 + 1;
    let set = cmd_rolling(&args, &[]).unwrap();
    let body = fs::read_to_string(set.out_dir.join("rolling_USD.csv")).unwrap();
    assert_eq!(body.lines().count(), 2);

    args.shares = vec!["S001".into()];
    assert!(matches!(cmd_rolling(&args, &[]), Err(Error::MissingCaps)));
}

#[test]
fn rolling_shares_written_with_caps() {
    let dir = tempfile::tempdir().unwrap();
    let prices = one_factor(2, 59, 0.3, 7);
    let input = write_table(dir.path(), "p.csv", &prices);
    let caps = prices
        .clone()
        .with_caps(nalgebra::DMatrix::from_element(60, 2, 5.0))
        .unwrap();
    let caps_path = dir.path().join("caps.csv");
    caps.write_caps_csv(fs::File::create(&caps_path).unwrap()).unwrap();
    let mut input_args = InputArgs::new(&input);
    input_args.caps = Some(caps_path);
    let mut args = RollingArgs::new(input_args, dir.path().join("r"));
    args.window = 20;
    args.shares = vec!["S001".into(), "S002".into()];
    let set = cmd_rolling(&args, &[]).unwrap();
    let body = fs::read_to_string(set.out_dir.join("shares.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "end_date,total_cap,share_S001,share_S002");
    assert_eq!(lines.next().unwrap(), "2015-10-20,10,0.5,0.5");
    assert_eq!(body.lines().count(), 1 + 41);
}
