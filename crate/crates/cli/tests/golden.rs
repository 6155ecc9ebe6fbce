//! The binary must reproduce library results bit for bit.

use std::path::PathBuf;
use std::process::{Command, Output};

use smile_moments::analytics::{
    bergomi_moment, gammaswap_strike, implied_cdf, implied_density, mgf, varswap_strike, Representation,
};
use smile_moments::calibrate::{fit_ssvi, MarketQuote};
use smile_moments::fourier::{bs_put_reference, put_price_fourier, InversionSpec};
use smile_moments::transforms::monotonicity_scan;
use smile_moments::{gauss_hermite_rule, ComplexValue, SmileSlice};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smile-moments"))
        .args(args)
        .env_remove("SMILE_MOMENTS_ORDER")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows =
        rdr.records().map(|r| r.unwrap().iter().map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

fn ssvi() -> SmileSlice {
    SmileSlice::reference_ssvi()
}

#[test]
fn moments_grid_matches_library() {
    let ssvi_path = fixture("ssvi.json");
    let text =
        stdout(&["moments", "--smile", &ssvi_path, "--p-min", "0", "--p-max", "2", "--steps", "21", "--order", "128"]);
    let (header, rows) = table(&text);
    assert_eq!(header, ["p_re", "p_im", "value_re", "value_im", "order", "converged"]);
    assert_eq!(rows.len(), 21);
    let rule = gauss_hermite_rule(128).unwrap();
    for row in &rows {
        let lib = mgf(&ssvi(), ComplexValue::real(row[0]), &rule, Representation::Base).unwrap();
        assert_eq!(row[2], lib.value.re, "p = {}", row[0]);
        assert_eq!(row[3], lib.value.im);
    }
    let martingale = rows.iter().find(|r| r[0] == 1.0).expect("p = 1 row");
    assert!((martingale[2] - 1.0).abs() < 1e-9);
}

#[test]
fn charfn_and_bergomi_match_library() {
    let ssvi_path = fixture("ssvi.json");
    let rule = gauss_hermite_rule(128).unwrap();
    let text = stdout(&[
        "charfn",
        "--smile",
        &ssvi_path,
        "--eta-min",
        "-2",
        "--eta-max",
        "2",
        "--steps",
        "5",
        "--repr",
        "dual",
    ]);
    for row in table(&text).1 {
        let lib = mgf(&ssvi(), ComplexValue::imag(row[0]), &rule, Representation::Dual).unwrap().value;
        assert_eq!((row[1], row[2]), (lib.re, lib.im));
    }
    let text =
        stdout(&["bergomi", "--smile", &ssvi_path, "--re", "0.3", "--im-min", "-1", "--im-max", "1", "--steps", "5"]);
    for row in table(&text).1 {
        let lib = bergomi_moment(&ssvi(), ComplexValue::new(row[0], row[1]), &rule).unwrap();
        assert_eq!((row[2], row[3]), (lib.re, lib.im));
    }
}

#[test]
fn swap_strikes_match_library() {
    let text = stdout(&["swap", "--smile", &fixture("ssvi.json")]);
    let rule = gauss_hermite_rule(128).unwrap();
    let field = |name: &str, x: f64| format!("\"{name}\": {}", serde_json::to_string(&x).unwrap());
    assert!(text.contains(&field("varswap_strike", varswap_strike(&ssvi(), &rule).unwrap())), "{text}");
    assert!(text.contains(&field("gammaswap_strike", gammaswap_strike(&ssvi(), &rule).unwrap())), "{text}");
}

#[test]
fn order_flag_and_environment() {
    let ssvi_path = fixture("ssvi.json");
    let args = ["swap", "--smile", ssvi_path.as_str()];
    let with_env =
        Command::new(env!("CARGO_BIN_EXE_smile-moments")).args(args).env("SMILE_MOMENTS_ORDER", "64").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(v["order"], 64);
    let explicit = stdout(&["swap", "--smile", &ssvi_path, "--order", "64"]);
    assert_eq!(String::from_utf8(with_env.stdout).unwrap(), explicit);
}

#[test]
fn scan_reports_loss_of_monotonicity() {
    let text = stdout(&[
        "scan",
        "--smile",
        &fixture("ssvi.json"),
        "--p",
        "120",
        "--k-min",
        "-50",
        "--k-max",
        "3000",
        "--n",
        "20001",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["monotone_increasing"], false);
    let lib = monotonicity_scan(&ssvi(), 120.0, -50.0, 3000.0, 20001).unwrap();
    assert_eq!(text.trim_end(), serde_json::to_string_pretty(&lib).unwrap());
}

#[test]
fn bscheck_round_trip_is_tight() {
    let text = stdout(&["bscheck", "--smile", &fixture("bs.json"), "--k-grid", "-1:1:21"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["max_abs_diff"].as_f64().unwrap() < 1e-6, "{text}");
    assert_eq!(v["passed"], true);
}

#[test]
fn put_csv_matches_library_and_scales_with_forward() {
    let ssvi_path = fixture("ssvi.json");
    let rule = gauss_hermite_rule(128).unwrap();
    let spec = InversionSpec::default();
    let text = stdout(&["put", "--smile", &ssvi_path, "--k-grid", "-0.5:0.5:11"]);
    let (header, rows) = table(&text);
    assert_eq!(header, ["K", "fourier_price", "bs_reference", "abs_diff"]);
    for row in &rows {
        assert_eq!(row[1], put_price_fourier(&ssvi(), row[0], &spec, &rule).unwrap());
        assert_eq!(row[2], bs_put_reference(&ssvi(), row[0]).unwrap());
        assert!(row[3] < 1e-6);
    }
    let scaled = table(&stdout(&["put", "--smile", &ssvi_path, "--k-grid", "-0.5:0.5:11", "--forward", "100"])).1;
    for (a, b) in rows.iter().zip(&scaled) {
        assert!((b[0] / 100.0 - a[0]).abs() < 1e-13 * a[0]);
        assert!((b[1] / 100.0 - a[1]).abs() < 1e-14);
    }
}

#[test]
fn distribution_outputs_match_library() {
    let ssvi_path = fixture("ssvi.json");
    for row in table(&stdout(&["cdf", "--smile", &ssvi_path, "--k-grid", "-2:2:9"])).1 {
        assert_eq!(row[1], implied_cdf(&ssvi(), row[0]).unwrap());
    }
    for row in table(&stdout(&["density", "--smile", &ssvi_path, "--k-grid", "-2:2:9"])).1 {
        assert_eq!(row[1], implied_density(&ssvi(), row[0]).unwrap());
    }
}

#[test]
fn calibrate_writes_reusable_smile() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let params = dir.join("golden_params.json");
    let smile = dir.join("golden_smile.json");
    let quotes = fixture("quotes.csv");
    let out = cli(&[
        "calibrate",
        "--quotes",
        &quotes,
        "--out",
        params.to_str().unwrap(),
        "--smile-out",
        smile.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "stdout must stay empty with --out");
    let written = std::fs::read_to_string(&params).unwrap();
    let text = std::fs::read_to_string(&quotes).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let q: Vec<MarketQuote> = rdr.deserialize().map(|r| r.unwrap()).collect();
    let lib = fit_ssvi(&q, None).unwrap();
    assert_eq!(written.trim_end(), serde_json::to_string_pretty(&lib).unwrap());
    assert!((lib.params.rho + 0.8).abs() < 1e-4);
    let swap = stdout(&["swap", "--smile", smile.to_str().unwrap()]);
    assert!(swap.contains("varswap_strike"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let ssvi_path = fixture("ssvi.json");
    let args =
        ["moments", "--smile", ssvi_path.as_str(), "--p-min", "-3", "--p-max", "10", "--steps", "27", "--im", "0.5"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["put", "--smile", ssvi_path.as_str(), "--k-grid", "-1:1:21", "--alpha", "0.25"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn exit_codes() {
    let ssvi_path = fixture("ssvi.json");
    let code = |args: &[&str]| cli(args).status.code().unwrap();

    let out = cli(&["validate", "--smile", &fixture("arbitrage.json")]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ok"], false);

    assert_eq!(code(&["validate", "--smile", &ssvi_path]), 0);
    assert_eq!(code(&["swap", "--smile", &fixture("arbitrage.json")]), 2);
    assert_eq!(code(&["swap", "--smile", &ssvi_path, "--order", "0"]), 2);
    assert_eq!(code(&["moments", "--smile", &ssvi_path, "--p-min", "0", "--p-max", "80", "--steps", "3"]), 3);
    assert_eq!(
        code(&["bergomi", "--smile", &ssvi_path, "--re", "1.5", "--im-min", "0", "--im-max", "1", "--steps", "2"]),
        3
    );
    assert_eq!(code(&["put", "--smile", &ssvi_path, "--k-grid", "-1:1:3", "--alpha", "1"]), 3);
    assert_eq!(code(&["put", "--smile", &ssvi_path, "--k-grid", "-1:1:3", "--u-max", "5", "--n-u", "11"]), 4);
    assert_eq!(code(&["swap", "--smile", "/nonexistent/smile.json"]), 1);
    assert_eq!(code(&["moments", "--smile", &ssvi_path, "--p-min", "2", "--p-max", "0", "--steps", "3"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
}
