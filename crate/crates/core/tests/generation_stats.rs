use dts_core::ingest::{generate, inject_irrational, DatasetSpec, IrrationalMix};

#[test]
fn interarrival_mean_matches_rate() {
    let spec = DatasetSpec { count: 100_000, seed: 11, ..Default::default() };
    let data = generate(&spec).unwrap();
    let span = (data.last().unwrap().arrival_time - data[0].arrival_time) as f64;
    let mean_ms = span / (data.len() - 1) as f64;
    let want = 1000.0 / spec.arrival_rate_tps;
    assert!((mean_ms - want).abs() / want < 0.02, "{mean_ms} vs {want}");
    assert!(data.windows(2).all(|w| w[0].arrival_time <= w[1].arrival_time));
}

#[test]
fn fee_median_sits_at_commission_times_amount_median() {
    let spec = DatasetSpec { count: 100_000, seed: 12, ..Default::default() };
    let mut fees: Vec<f64> = generate(&spec).unwrap().iter().map(|t| t.fee).collect();
    fees.sort_by(f64::total_cmp);
    let median = fees[fees.len() / 2];
    let want = spec.commission_ratio * spec.amount_log_mean.exp();
    assert!((median / want).ln().abs() < 0.02, "{median} vs {want}");
}

#[test]
fn irrational_mix_counts() {
    let data = generate(&DatasetSpec { count: 100_000, seed: 13, ..Default::default() }).unwrap();
    let mix = IrrationalMix::default();
    let out = inject_irrational(&data, &mix, 99).unwrap();
    let (mut over, mut under, mut same) = (0i64, 0i64, 0i64);
    for (a, b) in out.iter().zip(&data) {
        let r = a.fee / b.fee;
        if r == 1.0 {
            same += 1;
        } else if r > 1.0 {
            assert!((mix.over_multiplier.0..=mix.over_multiplier.1 + 1e-12).contains(&r));
            over += 1;
        } else {
            assert!((mix.under_multiplier.0 - 1e-12..=mix.under_multiplier.1).contains(&r));
            under += 1;
        }
    }
    let n = data.len() as f64;
    assert!((over - (mix.overpaid_fraction * n).round() as i64).abs() <= 1, "{over}");
    assert!((under - (mix.underpaid_fraction * n).round() as i64).abs() <= 1, "{under}");
    assert!((same - (mix.rational_fraction * n).round() as i64).abs() <= 1, "{same}");
}
