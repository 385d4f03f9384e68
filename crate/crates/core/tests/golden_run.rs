//! Frozen Exp-17 run on a small seeded stream. Regenerate the fixtures with
//! `DTS_UPDATE_GOLDEN=1 cargo test -p dts-core --test golden_run` only after
//! an intentional behaviour change.

use std::path::PathBuf;

use dts_core::ingest::{generate, DatasetSpec};
use dts_core::metrics::incentive_volatility;
use dts_core::model::{DtsStrategy, SimulationConfig};
use dts_core::simulator::{run, write_blocks_csv};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden").join(name)
}

fn check_or_update(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("DTS_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the frozen run");
}

#[test]
fn experiment_17_matches_frozen_run() {
    let data = generate(&DatasetSpec { count: 60_000, seed: 7, ..Default::default() }).unwrap();
    let out = run(&data, &DtsStrategy::experiment_17(), &SimulationConfig::default()).unwrap();
    assert!(out.blocks.len() >= 10);

    let mut csv = Vec::new();
    write_blocks_csv(&out.blocks, &mut csv).unwrap();
    check_or_update("exp17_blocks.csv", &String::from_utf8(csv).unwrap());

    let roots: String =
        out.blocks.iter().map(|b| format!("{}\n", b.commitment.expect("commitments on").to_hex())).collect();
    check_or_update("exp17_roots.txt", &roots);

    let vol = incentive_volatility(&out.incentives()).unwrap();
    check_or_update("exp17_volatility.txt", &format!("{vol:e}\n"));
}
