//! Volatility against arbitrary-precision references produced by
//! `oracles/volatility_oracle.py`.

use std::path::PathBuf;

use dts_core::metrics::{incentive_volatility, log_returns, rolling_volatility};
use dts_core::numeric::compensated_sum;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/volatility").join(name)
}

fn read_column(name: &str, column: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(fixture(name)).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == column).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-12 * want.abs().max(1.0)
}

#[test]
fn ten_series_match_the_oracle() {
    let mut rdr = csv::Reader::from_path(fixture("expected.csv")).unwrap();
    let mut seen = 0;
    for row in rdr.records() {
        let row = row.unwrap();
        let (name, len): (&str, usize) = (&row[0], row[1].parse().unwrap());
        let want_vol: f64 = row[2].parse().unwrap();
        let want_sum: f64 = row[3].parse().unwrap();
        let series = read_column(&format!("{name}.csv"), "incentive");
        assert_eq!(series.len(), len, "{name}");
        let vol = incentive_volatility(&series).unwrap();
        assert!(close(vol, want_vol), "{name}: volatility {vol} want {want_vol}");
        let sum = compensated_sum(log_returns(&series).unwrap().values);
        assert!(close(sum, want_sum), "{name}: sum of returns {sum} want {want_sum}");
        seen += 1;
    }
    assert_eq!(seen, 10);
}

#[test]
fn rolling_windows_match_the_oracle() {
    let series = read_column("daily_365.csv", "incentive");
    let want = read_column("daily_365_rolling30.csv", "volatility");
    let got = rolling_volatility(&series, 30).unwrap();
    assert_eq!(got.len(), 335);
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        assert!(close(*g, *w), "window {i}: {g} want {w}");
    }
}

#[test]
fn named_cases() {
    assert_eq!(incentive_volatility(&read_column("constant.csv", "incentive")).unwrap(), 0.0);
    let v = incentive_volatility(&read_column("one_e_one.csv", "incentive")).unwrap();
    assert!((v - std::f64::consts::SQRT_2).abs() < 1e-12);
}
